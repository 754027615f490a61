#include <cmath>
#include <cstring>
#include <vector>

#include "doctest.h"
#include "legalnlp/optim.hpp"
#include "toy.hpp"

using namespace legalnlp;

namespace {

// Plain Adam without any weight-decay handling.
void vanilla_adam(std::vector<double>& p, const std::vector<double>& g, std::vector<double>& m,
                  std::vector<double>& v, std::size_t t, double lr) {
  const AdamHyper h;
  for (std::size_t i = 0; i < p.size(); ++i) {
    m[i] = h.beta1 * m[i] + (1.0 - h.beta1) * g[i];
    v[i] = h.beta2 * v[i] + (1.0 - h.beta2) * g[i] * g[i];
    const double mh = m[i] / (1.0 - std::pow(h.beta1, static_cast<double>(t)));
    const double vh = v[i] / (1.0 - std::pow(h.beta2, static_cast<double>(t)));
    p[i] -= lr * mh / (std::sqrt(vh) + h.eps);
  }
}

}  // namespace

TEST_CASE("first Adam step moves by about lr against the gradient") {
  std::vector<double> p = {0.0}, g = {1.0}, m = {0.0}, v = {0.0};
  adam_update(p, g, m, v, 1, 0.1, 0.0, {});
  CHECK(p[0] == doctest::Approx(-0.1).epsilon(1e-6));
}

TEST_CASE("zero gradient without decay leaves parameters unchanged") {
  std::vector<double> p = {0.5, -2.0}, g = {0.0, 0.0}, m = {0, 0}, v = {0, 0};
  for (std::size_t t = 1; t <= 5; ++t) adam_update(p, g, m, v, t, 0.1, 0.0, {});
  CHECK(p == std::vector<double>{0.5, -2.0});
}

TEST_CASE("decoupled decay alone scales by 1 - lr*wd") {
  std::vector<double> p = {2.0, -4.0}, g = {0.0, 0.0}, m = {0, 0}, v = {0, 0};
  adam_update(p, g, m, v, 1, 0.1, 0.01, {});
  CHECK(p[0] == doctest::Approx(2.0 * (1 - 0.001)));
  CHECK(p[1] == doctest::Approx(-4.0 * (1 - 0.001)));
}

TEST_CASE("Adam with wd=0 matches vanilla Adam bit for bit") {
  Rng rng(17);
  std::vector<double> p(20), p2, m(20, 0), v(20, 0), m2(20, 0), v2(20, 0);
  for (double& x : p) x = legalnlp::testing::uniform(rng, -1, 1);
  p2 = p;
  for (std::size_t t = 1; t <= 30; ++t) {
    std::vector<double> g(20);
    for (double& x : g) x = legalnlp::testing::uniform(rng, -3, 3);
    adam_update(p, g, m, v, t, 1e-2, 0.0, {});
    vanilla_adam(p2, g, m2, v2, t, 1e-2);
  }
  CHECK(std::memcmp(p.data(), p2.data(), p.size() * sizeof(double)) == 0);
}

TEST_CASE("adam_update rejects bad sizes and step 0") {
  std::vector<double> p = {0.0}, g = {1.0, 2.0}, m = {0.0}, v = {0.0};
  CHECK_THROWS_AS(adam_update(p, g, m, v, 1, 0.1, 0.0, {}), DimensionError);
  std::vector<double> g1 = {1.0};
  CHECK_THROWS_AS(adam_update(p, g1, m, v, 0, 0.1, 0.0, {}), std::invalid_argument);
}

TEST_CASE("adam_step advances the shared step counter") {
  ParameterStore store;
  Tensor a = store.add("a", Tensor::from({2}, {1, 1}));
  OptimizerState state = OptimizerState::for_parameters(store);
  backward(sum(a));
  adam_step(store, state, 0.1, 0.0);
  CHECK(state.t == 1);
  CHECK(a.data()[0] == doctest::Approx(0.9).epsilon(1e-6));
  OptimizerState wrong;
  CHECK_THROWS_AS(adam_step(store, wrong, 0.1, 0.0), DimensionError);
}

TEST_CASE("lr schedule") {
  CHECK(lr_schedule(0, 1e-3, 10, 100) == 0.0);
  CHECK(lr_schedule(5, 1e-3, 10, 100) == doctest::Approx(5e-4));
  CHECK(lr_schedule(10, 1e-3, 10, 100) == 1e-3);
  CHECK(lr_schedule(55, 1e-3, 10, 100) == doctest::Approx(5e-4));
  CHECK(lr_schedule(100, 1e-3, 10, 100) == 0.0);
  CHECK(lr_schedule(0, 1e-3, 0, 100) == 1e-3);
  CHECK_THROWS_AS(lr_schedule(0, 1e-3, 100, 100), std::invalid_argument);
  CHECK_THROWS_AS(lr_schedule(101, 1e-3, 10, 100), std::out_of_range);
  double prev = -1;
  for (std::size_t s = 0; s <= 10; ++s) {
    const double lr = lr_schedule(s, 1.0, 10, 50);
    CHECK(lr >= prev);
    prev = lr;
  }
}

TEST_CASE("global norm clipping") {
  ParameterStore store;
  Tensor a = store.add("a", Tensor::from({1}, {0.0}));
  Tensor b = store.add("b", Tensor::from({1}, {0.0}));
  backward(sum(add(scale(a, 3.0), scale(b, 4.0))));
  CHECK(clip_grad_norm(store, 1.0) == doctest::Approx(5.0));
  CHECK(a.grad()[0] == doctest::Approx(0.6));
  CHECK(b.grad()[0] == doctest::Approx(0.8));
  CHECK(clip_grad_norm(store, 1.0) == doctest::Approx(1.0));
  CHECK(a.grad()[0] == doctest::Approx(0.6));
}
