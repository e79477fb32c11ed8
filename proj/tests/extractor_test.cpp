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

#include <gtest/gtest.h>

#include <sstream>

#include "support.hpp"

namespace {

using namespace nctest;

std::vector<std::string> Texts(const std::vector<Sentence>& s) {
  std::vector<std::string> out;
  for (const auto& x : s) out.push_back(x.text);
  return out;
}

std::optional<DeonticMeaning> Meaning(std::string_view sentence) {
  auto m = DetectModality(sentence, ModalLexicon::Default());
  if (!m) return std::nullopt;
  return m->meaning;
}

Norm MakeNorm(const std::string& contract, std::size_t i) {
  Norm n;
  n.id = NormId(contract, i);
  n.contract_id = contract;
  n.text = contract + " shall do " + std::to_string(i) + ".";
  return n;
}

TEST(Segment, TwoSimpleSentences) {
  auto s = SegmentSentences("A shall pay. B may not sell.");
  EXPECT_EQ(Texts(s),
            (std::vector<std::string>{"A shall pay.", "B may not sell."}));
  EXPECT_EQ(s[0].span, (Span{0, 12}));
  EXPECT_EQ(s[1].span, (Span{13, 28}));
}

TEST(Segment, EmptyAndBlank) {
  EXPECT_TRUE(SegmentSentences("").empty());
  EXPECT_TRUE(SegmentSentences(" \n\t ").empty());
}

TEST(Segment, RomanNumeralMidClauseKeepsOneSentence) {
  const std::string text =
      "All inquiries that Seller receives on a worldwide basis relative to "
      "Buyer's air chamber \"Products\" as specified in Exhibit III. shall be "
      "directed to Buyer.";
  auto s = SegmentSentences(text);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].text, text);
}

TEST(Segment, AbbreviationsDecimalsAndListMarkers) {
  EXPECT_EQ(SegmentSentences("Payment is due within 1.5 days, e.g. by wire. "
                             "Mr. Smith shall sign.")
                .size(),
            2u);
  EXPECT_EQ(SegmentSentences("1. The Buyer shall pay. (a) The Seller may ship.")
                .size(),
            2u);
  EXPECT_EQ(SegmentSentences("See Section No. 5 for terms. Then stop.").size(),
            2u);
}

TEST(Segment, SemicolonsQuestionMarksAndBlankLines) {
  auto s = SegmentSentences("A shall pay; B shall ship! Is it done?\n\nHeading\n"
                            "\nBody shall follow");
  EXPECT_EQ(Texts(s), (std::vector<std::string>{"A shall pay;", "B shall ship!",
                                                "Is it done?", "Heading",
                                                "Body shall follow"}));
}

TEST(Segment, SpansAreOrderedDisjointAndMatchText) {
  const std::string text =
      "  The Seller shall deliver (see Art. 4). \"Quoted.\" Next one;\n\n last";
  auto s = SegmentSentences(text);
  ASSERT_FALSE(s.empty());
  std::size_t prev_end = 0;
  for (const auto& x : s) {
    EXPECT_GE(x.span.begin, prev_end);
    EXPECT_LT(x.span.begin, x.span.end);
    EXPECT_EQ(text.substr(x.span.begin, x.span.size()), x.text);
    prev_end = x.span.end;
  }
  // Every non-space byte belongs to some sentence.
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (IsSpace(text[i])) continue;
    bool covered = false;
    for (const auto& x : s) covered |= (i >= x.span.begin && i < x.span.end);
    EXPECT_TRUE(covered) << "byte " << i;
  }
}

TEST(Modality, AmendmentExamples) {
  EXPECT_EQ(Meaning("The Specifications may be amended by the NCR design "
                    "release process."),
            DeonticMeaning::kPermission);
  EXPECT_EQ(Meaning("The Specifications shall not be amended by the NCR "
                    "design release process"),
            DeonticMeaning::kProhibition);
  EXPECT_EQ(Meaning("This document lists definitions."), std::nullopt);
}

TEST(Modality, SpanCoversPhrase) {
  const std::string s = "Seller SHALL NOT redirect inquiries.";
  auto m = DetectModality(s, ModalLexicon::Default());
  ASSERT_TRUE(m);
  EXPECT_EQ(s.substr(m->span.begin, m->span.size()), "SHALL NOT");
}

TEST(Modality, LeftmostMatchWins) {
  EXPECT_EQ(Meaning("Autotote shall make available to Sisal one (1) working "
                    "prototype of the Terminal by May 1, 1998."),
            DeonticMeaning::kObligation);
  EXPECT_EQ(Meaning("Seller may not redirect inquiries."),
            DeonticMeaning::kProhibition);
  EXPECT_EQ(Meaning("The Licensee is entitled to audit."),
            DeonticMeaning::kPermission);
  EXPECT_EQ(Meaning("The Licensee is prohibited from audits."),
            DeonticMeaning::kProhibition);
}

TEST(Modality, NegationFlipsEveryObligationPhrase) {
  const auto lex = ModalLexicon::Default();
  std::size_t checked = 0;
  for (const auto& e : lex.entries()) {
    if (e.meaning != DeonticMeaning::kObligation) continue;
    std::string phrase;
    for (const auto& t : e.phrase) phrase += (phrase.empty() ? "" : " ") + t;
    for (const auto& g : lex.negators()) {
      for (const std::string gap : {"", "then "}) {
        const std::string s = "The Party " + phrase + " " + gap + g + " pay.";
        auto m = DetectModality(s, lex);
        ASSERT_TRUE(m) << s;
        EXPECT_EQ(m->meaning, DeonticMeaning::kProhibition) << s;
        ++checked;
      }
    }
  }
  EXPECT_EQ(checked, 6u * 3u * 2u);
}

TEST(Modality, NegatorBeyondTwoTokensDoesNotFlip) {
  EXPECT_EQ(Meaning("Buyer shall pay the fee not later than May."),
            DeonticMeaning::kObligation);
}

TEST(Modality, Deterministic) {
  const std::string s = "The Licensor will never disclose the code.";
  EXPECT_EQ(DetectModality(s, ModalLexicon::Default()),
            DetectModality(s, ModalLexicon::Default()));
}

TEST(Extract, TwoOfThreeSentences) {
  Contract c{"c1", "", "The Buyer shall pay. The weather is fine. The Seller "
                       "may ship early.", {}};
  auto norms = ExtractNorms(c, ModalLexicon::Default());
  ASSERT_EQ(norms.size(), 2u);
  EXPECT_EQ(norms[0].id, "c1#0001");
  EXPECT_EQ(norms[1].id, "c1#0002");
  EXPECT_EQ(norms[0].modality, DeonticMeaning::kObligation);
  EXPECT_EQ(norms[1].modality, DeonticMeaning::kPermission);
  EXPECT_EQ(c.body.substr(norms[1].span.begin, norms[1].span.size()),
            norms[1].text);
  EXPECT_EQ(norms[0].text.substr(norms[0].modal_span->begin,
                                 norms[0].modal_span->size()),
            "shall");
}

TEST(Extract, DeliveryDatesGiveTwoObligations) {
  Contract c{"autotote", "",
             "Autotote shall make available to Sisal one (1) working "
             "prototype of the Terminal by May 1, 1998. Autotote shall make "
             "available to Sisal one (1) working prototype of the Terminal by "
             "June 12, 1998.",
             {}};
  auto norms = ExtractNorms(c, ModalLexicon::Default());
  ASSERT_EQ(norms.size(), 2u);
  for (const auto& n : norms)
    EXPECT_EQ(n.modality, DeonticMeaning::kObligation) << n.text;
}

TEST(Extract, NoModals) {
  Contract c{"c", "", "Definitions follow. Terms are capitalized.", {}};
  EXPECT_TRUE(ExtractNorms(c, ModalLexicon::Default()).empty());
}

TEST(Extract, BundledContracts) {
  auto lex = LoadLexicon(NORMCONFLICT_DATA_DIR "/lexicon.tsv");
  auto norms = LoadContractNorms(NORMCONFLICT_DATA_DIR "/contracts", lex);
  EXPECT_EQ(norms.size(), 12u);
  for (const auto& n : norms) EXPECT_TRUE(n.modality.has_value()) << n.id;
}

TEST(Pairs, AllPairsIsBinomial) {
  std::vector<Norm> norms;
  for (std::size_t n = 0; n <= 100; ++n) {
    auto pairs = GeneratePairs(norms, PairScope::kAllPairs);
    ASSERT_EQ(pairs.size(), n * (n - (n > 0 ? 1 : 0)) / 2) << n;
    norms.push_back(MakeNorm("c", n + 1));
  }
}

TEST(Pairs, FourNormsAndTrivialCases) {
  std::vector<Norm> norms;
  EXPECT_TRUE(GeneratePairs(norms, PairScope::kAllPairs).empty());
  norms.push_back(MakeNorm("c", 1));
  EXPECT_TRUE(GeneratePairs(norms, PairScope::kAllPairs).empty());
  for (std::size_t i = 2; i <= 4; ++i) norms.push_back(MakeNorm("c", i));
  auto pairs = GeneratePairs(norms, PairScope::kAllPairs);
  ASSERT_EQ(pairs.size(), 6u);
  EXPECT_EQ(pairs[0].id, "c#0001|c#0002");
  EXPECT_EQ(pairs[5].id, "c#0003|c#0004");
  for (const auto& p : pairs) EXPECT_EQ(p.provenance, Provenance::kGenerated);
}

TEST(Pairs, SameContractScope) {
  std::vector<Norm> norms = {MakeNorm("y", 2), MakeNorm("x", 1),
                             MakeNorm("x", 2), MakeNorm("y", 1),
                             MakeNorm("x", 3)};
  auto same = GeneratePairs(norms, PairScope::kSameContract);
  ASSERT_EQ(same.size(), 4u);
  EXPECT_EQ(same[0].id, "x#0001|x#0002");
  EXPECT_EQ(same[3].id, "y#0001|y#0002");
  EXPECT_EQ(GeneratePairs(norms, PairScope::kAllPairs).size(), 10u);
  // Input order does not matter.
  std::reverse(norms.begin(), norms.end());
  EXPECT_EQ(GeneratePairs(norms, PairScope::kSameContract), same);
}

TEST(Lexicon, DefaultCoversEveryMeaning) {
  EXPECT_NO_THROW(ModalLexicon::Default().Validate());
  EXPECT_EQ(ModalLexicon::Default().negators(),
            (std::set<std::string>{"never", "no", "not"}));
}

TEST(Lexicon, FileRoundTrip) {
  std::stringstream ss;
  WriteLexicon(ModalLexicon::Default(), ss);
  auto back = ReadLexicon(ss);
  ASSERT_EQ(back.entries().size(), ModalLexicon::Default().entries().size());
  for (std::size_t i = 0; i < back.entries().size(); ++i) {
    EXPECT_EQ(back.entries()[i].phrase,
              ModalLexicon::Default().entries()[i].phrase);
    EXPECT_EQ(back.entries()[i].meaning,
              ModalLexicon::Default().entries()[i].meaning);
  }
  EXPECT_EQ(back.negators(), ModalLexicon::Default().negators());
}

TEST(Lexicon, RejectsIncompleteOrBadLines) {
  std::istringstream missing("shall\tobligation\nmay\tpermission\n");
  EXPECT_EQ(CodeOf([&] { ReadLexicon(missing); }),
            ErrorCode::kInvalidArgument);
  std::istringstream bad("shall\tduty\n");
  EXPECT_TRUE(CodeOf([&] { ReadLexicon(bad); }).has_value());
}

TEST(Lexicon, LongerPhrasesMatchFirst) {
  ModalLexicon lex;
  lex.Add("must", DeonticMeaning::kObligation);
  lex.Add("may", DeonticMeaning::kPermission);
  lex.Add("must not", DeonticMeaning::kProhibition);
  auto m = DetectModality("It must not leak.", lex);
  ASSERT_TRUE(m);
  EXPECT_EQ(m->meaning, DeonticMeaning::kProhibition);
}

}  // namespace
