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

// Mounts an AnnotationService on a cpp-httplib server. Requires httplib.h
// on the include path.

#pragma once

#include <sys/socket.h>

#include <filesystem>
#include <optional>

#include <httplib.h>

#include "normconflict/annotation_service.hpp"

namespace normconflict {

inline void MountAnnotationService(
    httplib::Server& server, AnnotationService& service,
    const std::optional<std::filesystem::path>& static_dir = std::nullopt) {
  auto send = [](httplib::Response& res, const ServiceResponse& r) {
    res.status = r.status;
    res.set_content(r.body, "application/json; charset=utf-8");
  };
  server.Get("/api/norm/random",
             [&service, send](const httplib::Request&, httplib::Response& res) {
               send(res, service.RandomNorm());
             });
  server.Post("/api/conflict", [&service, send](const httplib::Request& req,
                                                httplib::Response& res) {
    send(res, service.SubmitConflict(req.body));
  });
  server.Get("/api/stats",
             [&service, send](const httplib::Request&, httplib::Response& res) {
               send(res, service.Stats());
             });
  server.Get("/healthz",
             [&service, send](const httplib::Request&, httplib::Response& res) {
               send(res, service.Health());
             });
  if (static_dir) server.set_mount_point("/", static_dir->string());
  // SO_REUSEADDR only: without SO_REUSEPORT a second server on the same
  // port fails to bind instead of silently sharing it.
  server.set_socket_options([](socket_t sock) {
    int yes = 1;
    ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR,
                 reinterpret_cast<const void*>(&yes), sizeof(yes));
  });
}

}  // namespace normconflict
