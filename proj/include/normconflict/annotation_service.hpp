// Copyright 2026 The normconflict Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Backend of the conflict-authoring workflow, independent of any HTTP
// library. Each handler maps a request body to a status code and a JSON
// body; annotation_http.hpp mounts them on a server.
//
// The norm corpus is immutable after construction, so random-norm draws are
// lock-free. Submissions are appended to the store file by one writer at a
// time and fsync'd before the handler returns 201.

#pragma once

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "normconflict/corpus.hpp"
#include "normconflict/error.hpp"
#include "normconflict/norm_extractor.hpp"
#include "normconflict/random.hpp"

namespace normconflict {

struct AnnotationSubmission {
  std::string original_norm_id;
  std::string original_text;
  std::string edited_text;
  ConflictLabel conflict_type = ConflictLabel::kDeonticModality;
  std::optional<std::string> annotator;
};

struct ServiceResponse {
  int status = 200;
  std::string body;
};

// Norms of every regular file in `dir`, files visited in path order.
inline std::vector<Norm> LoadContractNorms(const std::filesystem::path& dir,
                                           const ModalLexicon& lexicon) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec))
    throw Error(ErrorCode::kIoFailure, "not a directory: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.is_regular_file()) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<Norm> norms;
  for (const auto& f : files) {
    auto part = ExtractNorms(LoadContract(f), lexicon);
    norms.insert(norms.end(), std::make_move_iterator(part.begin()),
                 std::make_move_iterator(part.end()));
  }
  return norms;
}

namespace detail {

inline ServiceResponse JsonResponse(int status,
                                    const nlohmann::ordered_json& body) {
  return {status, body.dump()};
}

inline ServiceResponse ErrorResponse(int status, std::string_view code,
                                     std::string_view message) {
  nlohmann::ordered_json j;
  j["error"] = code;
  j["message"] = message;
  return JsonResponse(status, j);
}

}  // namespace detail

class AnnotationService {
 public:
  // Opens (creating if needed) the append-only store. Existing records are
  // validated so that new ids never collide with them.
  AnnotationService(std::vector<Norm> norms, std::filesystem::path store,
                    std::uint64_t seed)
      : norms_(std::move(norms)), store_(std::move(store)), seed_(seed) {
    for (std::size_t i = 0; i < norms_.size(); ++i)
      by_id_.emplace(norms_[i].id, i);
    if (std::filesystem::exists(store_)) {
      for (auto& p : LoadDataset(store_).pairs) ids_.insert(std::move(p.id));
    }
    fd_ = ::open(store_.c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC,
                 0644);
    if (fd_ < 0)
      throw Error(ErrorCode::kIoFailure,
                  "cannot open " + store_.string() + ": " +
                      std::strerror(errno));
    next_serial_ = ids_.size() + 1;
  }

  AnnotationService(const AnnotationService&) = delete;
  AnnotationService& operator=(const AnnotationService&) = delete;

  ~AnnotationService() {
    if (fd_ >= 0) ::close(fd_);
  }

  const std::vector<Norm>& norms() const { return norms_; }
  const std::filesystem::path& store() const { return store_; }

  // Index of the next random norm. Draw c uses output c of SplitMix64(seed),
  // so a single client sees a replayable sequence.
  std::size_t DrawIndex() {
    const std::uint64_t n = norms_.size();
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t c = draws_.fetch_add(1, std::memory_order_relaxed);
      const std::uint64_t r =
          SplitMix64::Mix(seed_ + (c + 1) * SplitMix64::kGamma);
      if (r >= threshold) return static_cast<std::size_t>(r % n);
    }
  }

  ServiceResponse RandomNorm() {
    if (norms_.empty())
      return detail::ErrorResponse(503, "EmptyCorpus",
                                   "no norms were extracted");
    const Norm& norm = norms_[DrawIndex()];
    nlohmann::ordered_json j;
    j["norm_id"] = norm.id;
    j["contract_id"] = norm.contract_id;
    j["text"] = norm.text;
    if (norm.modality) j["modality"] = MeaningName(*norm.modality);
    return detail::JsonResponse(200, j);
  }

  ServiceResponse SubmitConflict(std::string_view body) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception&) {
      return detail::ErrorResponse(400, "MalformedRequest",
                                   "body is not valid JSON");
    }
    AnnotationSubmission s;
    if (auto err = Parse(j, s)) return *err;
    auto it = by_id_.find(s.original_norm_id);
    if (it == by_id_.end())
      return detail::ErrorResponse(404, "UnknownNorm",
                                   "no norm with id " + s.original_norm_id);
    if (norms_[it->second].text != s.original_text)
      return detail::ErrorResponse(
          422, "InvalidSubmission",
          "original_text does not match the stored norm");

    NormPair pair;
    pair.norm1 = s.original_text;
    pair.norm2 = s.edited_text;
    pair.label = s.conflict_type;
    pair.provenance = Provenance::kAuthored;
    {
      std::lock_guard<std::mutex> lock(writer_);
      do {
        pair.id = SerialId(next_serial_++);
      } while (ids_.count(pair.id));
      auto record = PairToJson(pair);
      record["original_norm_id"] = s.original_norm_id;
      if (s.annotator) record["annotator"] = *s.annotator;
      std::string line = record.dump();
      line.push_back('\n');
      if (!AppendDurably(line))
        return detail::ErrorResponse(500, "IoFailure",
                                     std::string("append failed: ") +
                                         std::strerror(errno));
      ids_.insert(pair.id);
    }
    nlohmann::ordered_json out;
    out["id"] = pair.id;
    return detail::JsonResponse(201, out);
  }

  // Counts of the on-disk store, read under the writer lock so that every
  // acknowledged submission is included.
  ServiceResponse Stats() {
    Dataset d;
    {
      std::lock_guard<std::mutex> lock(writer_);
      try {
        d = LoadDataset(store_);
      } catch (const Error& e) {
        return detail::ErrorResponse(500, ErrorCodeName(e.code()), e.what());
      }
    }
    return detail::JsonResponse(200, StatsToJson(ComputeStats(d)));
  }

  ServiceResponse Health() const {
    nlohmann::ordered_json j;
    j["status"] = "ok";
    j["norms"] = norms_.size();
    return detail::JsonResponse(200, j);
  }

 private:
  static std::string SerialId(std::uint64_t n) {
    std::string num = std::to_string(n);
    if (num.size() < 6) num.insert(0, 6 - num.size(), '0');
    return "authored-" + num;
  }

  static std::optional<ServiceResponse> Parse(const nlohmann::json& j,
                                              AnnotationSubmission& s) {
    auto invalid = [](std::string_view msg) {
      return detail::ErrorResponse(422, "InvalidSubmission", msg);
    };
    if (!j.is_object()) return invalid("body must be an object");
    auto str = [&](const char* key, std::string& out) {
      auto it = j.find(key);
      if (it == j.end() || !it->is_string()) return false;
      out = it->get<std::string>();
      return true;
    };
    std::string type;
    if (!str("original_norm_id", s.original_norm_id) ||
        !str("original_text", s.original_text) ||
        !str("edited_text", s.edited_text) || !str("conflict_type", type))
      return invalid(
          "original_norm_id, original_text, edited_text and conflict_type "
          "are required strings");
    auto label = ParseLabel(type);
    if (!label) return invalid("unknown conflict_type " + type);
    if (!IsConflict(*label))
      return invalid("conflict_type must be one of the four conflict types");
    s.conflict_type = *label;
    if (Trim(s.edited_text).empty()) return invalid("edited_text is empty");
    if (s.edited_text == s.original_text)
      return invalid("edited_text equals original_text");
    if (auto it = j.find("annotator"); it != j.end() && !it->is_null()) {
      if (!it->is_string()) return invalid("annotator must be a string");
      s.annotator = it->get<std::string>();
    }
    return std::nullopt;
  }

  bool AppendDurably(std::string_view line) {
    std::size_t done = 0;
    while (done < line.size()) {
      const ssize_t w = ::write(fd_, line.data() + done, line.size() - done);
      if (w < 0) {
        if (errno == EINTR) continue;
        return false;
      }
      done += static_cast<std::size_t>(w);
    }
    return ::fsync(fd_) == 0;
  }

  const std::vector<Norm> norms_;
  std::unordered_map<std::string, std::size_t> by_id_;
  const std::filesystem::path store_;
  const std::uint64_t seed_;
  std::atomic<std::uint64_t> draws_{0};

  std::mutex writer_;
  int fd_ = -1;
  std::unordered_set<std::string> ids_;
  std::uint64_t next_serial_ = 1;
};

}  // namespace normconflict
