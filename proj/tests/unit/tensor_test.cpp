#include "doctest.h"
#include "legalnlp/ops.hpp"
#include "legalnlp/tensor.hpp"

using namespace legalnlp;

TEST_CASE("tensor construction checks element count") {
  const Tensor t = Tensor::from({2, 3}, {1, 2, 3, 4, 5, 6});
  CHECK(t.numel() == 6);
  CHECK(t.rank() == 2);
  CHECK(t.at({1, 2}) == 6);
  CHECK_THROWS_AS(Tensor::from({2, 2}, {1, 2, 3}), DimensionError);
  CHECK_THROWS_AS((void)t.at({2, 0}), DimensionError);
  CHECK_THROWS_AS((void)t.item(), DimensionError);
  CHECK(Tensor::scalar(4.5).item() == 4.5);
  CHECK(shape_str({2, 3}) == "[2x3]");
}

TEST_CASE("copies alias storage, detach does not") {
  Tensor a = Tensor::full({3}, 1.0, true);
  Tensor b = a;
  b.mutable_data()[0] = 7.0;
  CHECK(a.data()[0] == 7.0);
  CHECK(a.same_storage(b));
  Tensor c = a.detach();
  CHECK_FALSE(c.same_storage(a));
  CHECK_FALSE(c.requires_grad());
  c.mutable_data()[1] = 9.0;
  CHECK(a.data()[1] == 1.0);
}

TEST_CASE("sum of squares has gradient 2x") {
  Tensor x = Tensor::from({4}, {1.5, -2.0, 0.0, 3.25}, true);
  backward(sum(mul(x, x)));
  for (std::size_t i = 0; i < 4; ++i) CHECK(x.grad()[i] == 2 * x.data()[i]);
}

TEST_CASE("leaves without requires_grad get no gradient") {
  Tensor x = Tensor::from({2}, {1, 2}, true);
  Tensor c = Tensor::from({2}, {3, 4}, false);
  backward(sum(mul(x, c)));
  CHECK(x.has_grad());
  CHECK_FALSE(c.has_grad());
  CHECK(x.grad()[0] == 3);
  CHECK(x.grad()[1] == 4);
}

TEST_CASE("constant graphs record nothing and backward is a no-op") {
  const Tensor a = Tensor::from({2}, {1, 2});
  const Tensor loss = sum(scale(a, 2.0));
  CHECK_FALSE(loss.requires_grad());
  CHECK_NOTHROW(backward(loss));
}

TEST_CASE("backward rejects non-scalar losses and second calls") {
  Tensor x = Tensor::from({2}, {1, 2}, true);
  CHECK_THROWS_AS(backward(scale(x, 2.0)), GraphError);
  const Tensor loss = sum(x);
  backward(loss);
  CHECK_THROWS_AS(backward(loss), GraphError);
  CHECK_THROWS_AS(backward(Tensor()), GraphError);
}

TEST_CASE("gradients accumulate across graphs until zeroed") {
  Tensor x = Tensor::from({1}, {3.0}, true);
  backward(sum(scale(x, 2.0)));
  backward(sum(scale(x, 5.0)));
  CHECK(x.grad()[0] == 7.0);
  x.zero_grad();
  CHECK(x.grad()[0] == 0.0);
}

TEST_CASE("shared subexpressions receive the sum of both paths") {
  Tensor x = Tensor::from({1}, {2.0}, true);
  const Tensor y = mul(x, x);     // 2x
  const Tensor z = add(y, y);     // 4x
  backward(sum(mul(z, x)));       // d/dx 2x³ = 6x² = 24
  CHECK(x.grad()[0] == doctest::Approx(24.0));
}

TEST_CASE("graph trace lists nodes in topological order") {
  Tensor a = Tensor::from({2}, {1, 2}, true);
  Tensor b = Tensor::from({2}, {3, 4}, true);
  const Tensor loss = sum(mul(add(a, b), b));
  const ComputeGraph g = ComputeGraph::trace(loss);
  REQUIRE(g.size() == 5);
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (std::size_t in : g.entries()[i].inputs) CHECK(in < i);
  }
  CHECK(std::string(g.entries().back().op) == std::string(loss.op_name()));
}
