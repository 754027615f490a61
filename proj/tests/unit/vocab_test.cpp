#include <algorithm>
#include <string>
#include <vector>

#include "doctest.h"
#include "legalnlp/vocab.hpp"
#include "toy.hpp"

using namespace legalnlp;
using Tokens = std::vector<std::string>;

TEST_CASE("build orders by frequency then lexicographically") {
  const Vocabulary v = Vocabulary::build({{"a", "b", "a"}}, 1);
  CHECK(v.size() == 6);
  CHECK(v.id("a") == 4);
  CHECK(v.id("b") == 5);
  CHECK(v.token(0) == "[PAD]");
  CHECK(v.token(kClsId) == "[CLS]");

  const Vocabulary thresh = Vocabulary::build({{"a", "b", "a"}}, 2);
  CHECK_FALSE(thresh.contains("b"));
  CHECK(thresh.id("b") == kUnkId);

  const Vocabulary tie = Vocabulary::build({{"zeta", "alpha", "mid"}}, 1);
  CHECK(tie.id("alpha") == 4);
  CHECK(tie.id("mid") == 5);
  CHECK(tie.id("zeta") == 6);

  CHECK_THROWS_AS(Vocabulary::build({}, 1), std::invalid_argument);
}

TEST_CASE("build is deterministic and reserved tokens in the corpus are not duplicated") {
  const std::vector<Tokens> corpus = {{"x", "[PAD]", "y"}, {"y", "z"}};
  CHECK(Vocabulary::build(corpus, 1) == Vocabulary::build(corpus, 1));
  CHECK(Vocabulary::build(corpus, 1).size() == kReservedCount + 3);
}

TEST_CASE("from_tokens requires the reserved prefix") {
  CHECK_THROWS_AS(Vocabulary::from_tokens({"a", "b"}), std::invalid_argument);
  const Vocabulary v = Vocabulary::from_tokens({"[PAD]", "[UNK]", "[CLS]", "[SEP]", "q"});
  CHECK(v.id("q") == 4);
  CHECK_THROWS_AS(Vocabulary::from_tokens({"[PAD]", "[UNK]", "[CLS]", "[SEP]", "q", "q"}),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)v.token(5), std::out_of_range);
}

TEST_CASE("tokenize lowercases and splits on whitespace") {
  CHECK(tokenize("  The\tCourt  RULED\n") == Tokens{"the", "court", "ruled"});
  CHECK(tokenize("   ").empty());
}

TEST_CASE("encode_sequence") {
  const Vocabulary v;
  const Tokens court = {"court"};
  const EncodedRow r = encode_sequence(court, v, 3);
  CHECK(r.ids == std::vector<std::int32_t>{kUnkId, kPadId, kPadId});
  CHECK(r.mask == std::vector<std::uint8_t>{1, 0, 0});
  CHECK(r.valid_len == 1);

  const Vocabulary abc = Vocabulary::build({{"a", "b", "c", "d", "e"}}, 1);
  const Tokens five = {"a", "b", "c", "d", "e"};
  const EncodedRow t = encode_sequence(five, abc, 3);
  CHECK(t.valid_len == 3);
  CHECK(decode(t, abc) == Tokens{"a", "b", "c"});

  const Tokens none;
  const EncodedRow e = encode_sequence(none, abc, 4);
  CHECK(e.valid_len == 0);
  CHECK(std::all_of(e.ids.begin(), e.ids.end(), [](auto id) { return id == kPadId; }));
}

TEST_CASE("decode restores in-vocabulary tokens") {
  Rng rng(8);
  const Tokens words = {"w0", "w1", "w2", "w3", "w4", "w5"};
  const Vocabulary v = Vocabulary::build({words}, 1);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t max_len = legalnlp::testing::uniform_int(rng, 2, 12);
    Tokens seq(legalnlp::testing::uniform_int(rng, 0, max_len - 1));
    for (auto& t : seq) t = words[rng() % words.size()];
    CHECK(decode(encode_sequence(seq, v, max_len), v) == seq);
  }
}

TEST_CASE("encode_pair layout and truncation") {
  const Vocabulary v = Vocabulary::build({{"a", "b"}}, 1);
  const EncodedRow r = encode_pair("a", "b", v, 5);
  CHECK(r.ids == std::vector<std::int32_t>{kClsId, v.id("a"), kSepId, v.id("b"), kSepId});
  CHECK(r.segments == std::vector<std::int32_t>{0, 0, 0, 1, 1});
  CHECK(r.valid_len == 5);

  const EncodedRow t = encode_pair("p p p p p p p p p p", "h h", v, 9);
  CHECK(t.ids[5] == kSepId);  // CLS + 4 premise tokens + SEP
  CHECK(std::count(t.ids.begin(), t.ids.end(), kUnkId) == 6);

  CHECK_THROWS_AS(encode_pair("", "", v, 8), std::invalid_argument);
  CHECK_THROWS_AS(encode_pair("a", "b", v, 4), std::invalid_argument);
}

TEST_CASE("encode_pair always has one CLS, two SEP and length max_len") {
  Rng rng(21);
  const Vocabulary v;
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t max_len = legalnlp::testing::uniform_int(rng, 5, 20);
    const auto words = [&](std::size_t n) {
      std::string s;
      for (std::size_t i = 0; i < n; ++i) s += "w ";
      return s;
    };
    const std::size_t np = legalnlp::testing::uniform_int(rng, 0, 25);
    const std::size_t nh = legalnlp::testing::uniform_int(rng, np == 0 ? 1 : 0, 25);
    const EncodedRow r = encode_pair(words(np), words(nh), v, max_len);
    CHECK(r.ids.size() == max_len);
    CHECK(std::count(r.ids.begin(), r.ids.end(), kClsId) == 1);
    CHECK(std::count(r.ids.begin(), r.ids.end(), kSepId) == 2);
    CHECK(r.ids[0] == kClsId);
    CHECK(r.ids[r.valid_len - 1] == kSepId);
  }
}

TEST_CASE("labels_to_ids") {
  const Tokens labels = {"O", "B-LAW", "I-LAW"};
  const Tokens tags = {"O", "B-LAW"};
  CHECK(labels_to_ids(tags, labels) == std::vector<int>{0, 1});
  CHECK(labels_to_ids(tags, labels, 4) == std::vector<int>{0, 1, -100, -100});
  const Tokens bad = {"B-XYZ"};
  try {
    labels_to_ids(bad, labels);
    FAIL("no throw");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("B-XYZ") != std::string::npos);
  }
}

TEST_CASE("token batches") {
  const Vocabulary v;
  const Tokens one = {"x"};
  const std::vector<EncodedRow> rows = {encode_sequence(one, v, 3), encode_sequence(one, v, 3)};
  const TokenBatch b = TokenBatch::from_rows(rows);
  CHECK(b.rows == 2);
  CHECK(b.cols == 3);
  const TokenBatch wide = b.padded_to(5);
  CHECK(wide.cols == 5);
  CHECK(wide.id(1, 4) == kPadId);
  CHECK(wide.mask[4] == 0);
  CHECK(wide.valid_len == b.valid_len);
  CHECK_THROWS_AS(b.padded_to(2), std::invalid_argument);
  const std::vector<EncodedRow> ragged = {encode_sequence(one, v, 3), encode_sequence(one, v, 4)};
  CHECK_THROWS_AS(TokenBatch::from_rows(ragged), std::invalid_argument);
}
