#include <cmath>

#include "doctest.h"
#include "legalnlp/nn.hpp"

using namespace legalnlp;

TEST_CASE("parameter store keeps registration order and copies values into leaves") {
  ParameterStore store;
  const Tensor src = Tensor::from({2}, {1, 2});
  const Tensor a = store.add("a", src);
  store.add("b", Tensor::zeros({3, 2}));
  CHECK(a.requires_grad());
  CHECK_FALSE(a.same_storage(src));
  CHECK(store.size() == 2);
  CHECK(store.scalar_count() == 8);
  CHECK(store.entries()[0].first == "a");
  CHECK(store.entries()[1].first == "b");
  CHECK(store.contains("b"));
  CHECK_FALSE(store.contains("c"));
  CHECK(store.get("a").same_storage(a));
  CHECK_THROWS_AS(store.add("a", src), std::invalid_argument);
  CHECK_THROWS_AS((void)store.get("c"), std::out_of_range);
}

TEST_CASE("snapshot and restore") {
  ParameterStore store;
  Tensor a = store.add("a", Tensor::from({2}, {1, 2}));
  const auto snap = store.snapshot();
  a.mutable_data()[0] = 42;
  store.restore(snap);
  CHECK(a.data()[0] == 1);
  CHECK_THROWS_AS(store.restore({}), std::invalid_argument);
  CHECK_THROWS_AS(store.restore({{1.0}}), DimensionError);
}

TEST_CASE("initializers") {
  Rng rng(9);
  const Tensor w = xavier_uniform({30, 20}, 30, 20, rng);
  const double bound = std::sqrt(6.0 / 50.0);
  double max_abs = 0;
  for (double v : w.data()) max_abs = std::max(max_abs, std::abs(v));
  CHECK(max_abs <= bound);
  CHECK(max_abs > 0.9 * bound);

  const Tensor e = normal_init({4000}, 0.02, rng);
  double mean = 0, sq = 0;
  for (double v : e.data()) mean += v;
  mean /= 4000;
  for (double v : e.data()) sq += (v - mean) * (v - mean);
  CHECK(std::abs(mean) < 0.002);
  CHECK(std::sqrt(sq / 4000) == doctest::Approx(0.02).epsilon(0.05));

  Rng r1(4), r2(4);
  const auto x = xavier_uniform({3, 3}, 3, 3, r1), y = xavier_uniform({3, 3}, 3, 3, r2);
  CHECK(std::equal(x.data().begin(), x.data().end(), y.data().begin()));
}

TEST_CASE("linear layer applies xW + b with zero bias at init") {
  ParameterStore store;
  Rng rng(1);
  const Linear lin = make_linear(store, "proj", 3, 2, rng);
  CHECK(store.contains("proj.weight"));
  CHECK(store.contains("proj.bias"));
  CHECK(lin.in_features() == 3);
  CHECK(lin.out_features() == 2);
  for (double b : lin.bias.data()) CHECK(b == 0.0);
  const Tensor x = Tensor::from({1, 3}, {1, 0, 0});
  const Tensor y = lin(x);
  CHECK(y.data()[0] == lin.weight.at({0, 0}));
  CHECK(y.data()[1] == lin.weight.at({0, 1}));
}

TEST_CASE("dropout is skipped in eval mode and needs an rng in training") {
  const Tensor x = Tensor::full({8}, 1.0);
  CHECK(apply_dropout(x, 0.5, ForwardContext::eval()).same_storage(x));
  ForwardContext broken{Mode::kTrain, nullptr};
  CHECK_THROWS_AS(apply_dropout(x, 0.5, broken), std::logic_error);
  Rng rng(2);
  CHECK_FALSE(apply_dropout(x, 0.5, ForwardContext::train(rng)).same_storage(x));
}
