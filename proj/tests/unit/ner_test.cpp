#include <string>
#include <vector>

#include "doctest.h"
#include "legalnlp/ner.hpp"
#include "toy.hpp"

using namespace legalnlp;
using Tags = std::vector<std::string>;

namespace {

// Logits whose argmax per row is the given label.
Tensor logits_for(const Tags& argmax) {
  Tensor t = Tensor::zeros({argmax.size(), kBioLabelCount});
  for (std::size_t i = 0; i < argmax.size(); ++i)
    t.mutable_data()[i * kBioLabelCount + bio_label_index(argmax[i])] = 5.0;
  return t;
}

}  // namespace

TEST_CASE("label set") {
  const auto& labels = bio_labels();
  CHECK(labels.size() == 9);
  CHECK(labels[0] == "O");
  CHECK(labels[1] == "B-VIOLATION");
  CHECK(labels[2] == "I-VIOLATION");
  CHECK(labels[8] == "I-LAW");
  CHECK(entity_type_name(EntityType::kViolatedBy) == "VIOLATED_BY");
  CHECK(parse_entity_type("VIOLATED_ON") == EntityType::kViolatedOn);
  CHECK_THROWS_AS(parse_entity_type("FOO"), std::invalid_argument);
  CHECK_THROWS_AS(bio_label_index("B-FOO"), std::invalid_argument);
}

TEST_CASE("decode_bio repairs orphan I tags") {
  CHECK(decode_bio(logits_for({"O", "I-LAW"}), 2) == Tags{"O", "B-LAW"});
  CHECK(decode_bio(logits_for({"B-LAW", "I-LAW", "O"}), 3) == Tags{"B-LAW", "I-LAW", "O"});
  CHECK(decode_bio(logits_for({"I-LAW", "I-VIOLATION"}), 2) == Tags{"B-LAW", "B-VIOLATION"});
  CHECK(decode_bio(logits_for({"B-LAW", "I-LAW", "O"}), 1) == Tags{"B-LAW"});
  CHECK(decode_bio(Tensor::zeros({3, 9}), 3) == Tags{"O", "O", "O"});
  CHECK_THROWS_AS(decode_bio(Tensor::zeros({3, 8}), 3), DimensionError);
  CHECK_THROWS_AS(decode_bio(Tensor::zeros({3, 9}), 4), std::out_of_range);
}

TEST_CASE("validity and repair") {
  CHECK(is_valid_bio(Tags{"B-LAW", "I-LAW", "O", "B-VIOLATION"}));
  CHECK_FALSE(is_valid_bio(Tags{"I-LAW"}));
  CHECK_FALSE(is_valid_bio(Tags{"B-LAW", "I-VIOLATION"}));
  CHECK_FALSE(is_valid_bio(Tags{"O", "I-LAW"}));
  CHECK(repair_bio(Tags{"B-LAW", "I-VIOLATION", "I-VIOLATION"}) == Tags{"B-LAW", "B-VIOLATION", "I-VIOLATION"});
}

TEST_CASE("extract_spans") {
  CHECK(extract_spans(Tags{"B-LAW", "I-LAW", "O"}) == std::vector<EntitySpan>{{0, 2, EntityType::kLaw}});
  CHECK(extract_spans(Tags{"O", "O", "O"}).empty());
  CHECK(extract_spans(Tags{"B-LAW", "B-LAW"}) ==
        std::vector<EntitySpan>{{0, 1, EntityType::kLaw}, {1, 2, EntityType::kLaw}});
  CHECK_THROWS_AS(extract_spans(Tags{"I-LAW"}), std::invalid_argument);
}

TEST_CASE("tags_of_spans") {
  const std::vector<EntitySpan> spans = {{1, 3, EntityType::kViolatedBy}};
  CHECK(tags_of_spans(spans, 4) == Tags{"O", "B-VIOLATED_BY", "I-VIOLATED_BY", "O"});
  const std::vector<EntitySpan> overlap = {{0, 2, EntityType::kLaw}, {1, 3, EntityType::kLaw}};
  CHECK_THROWS_AS(tags_of_spans(overlap, 4), std::invalid_argument);
  const std::vector<EntitySpan> outside = {{2, 5, EntityType::kLaw}};
  CHECK_THROWS_AS(tags_of_spans(outside, 4), std::invalid_argument);
}

TEST_CASE("decode output is always valid BIO") {
  Rng rng(12);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t len = legalnlp::testing::uniform_int(rng, 1, 15);
    const Tensor logits = legalnlp::testing::random_tensor({len, 9}, rng, -3, 3, false);
    const Tags tags = decode_bio(logits, len);
    CHECK(is_valid_bio(tags));
    CHECK(tags_of_spans(extract_spans(tags), len) == tags);
  }
}

TEST_CASE("ner model shapes and predictions") {
  const ModelConfig c = legalnlp::testing::toy_model_config(TaskKind::kNer, 20, 32);
  const NerModel model(c, 1);
  Rng rng(3);
  const TokenBatch batch = legalnlp::testing::random_token_batch(rng, 2, 32, 20, false);
  CHECK(model.forward(batch, ForwardContext::eval()).shape() == Shape{2, 32, 9});
  const auto tags = model.predict(batch);
  REQUIRE(tags.size() == 2);
  for (std::size_t r = 0; r < 2; ++r) {
    CHECK(tags[r].size() == batch.valid_len[r]);
    CHECK(is_valid_bio(tags[r]));
  }
}

TEST_CASE("ner model config checks") {
  ModelConfig c = legalnlp::testing::toy_model_config(TaskKind::kNli, 20);
  CHECK_THROWS_AS(NerModel(c, 1), std::invalid_argument);
  c = legalnlp::testing::toy_model_config(TaskKind::kNer, 20);
  c.head.n_classes = 3;
  CHECK_THROWS_AS(NerModel(c, 1), std::invalid_argument);
}
