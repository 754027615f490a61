#include "legalnlp/nn.hpp"

#include <cmath>
#include <stdexcept>

namespace legalnlp {

Tensor apply_dropout(const Tensor& x, double rate, const ForwardContext& ctx) {
  if (!ctx.training() || rate == 0.0) return x;
  if (ctx.rng == nullptr) throw std::logic_error("training forward without an rng");
  return dropout(x, rate, *ctx.rng, true);
}

Tensor ParameterStore::add(const std::string& name, const Tensor& value) {
  if (contains(name)) throw std::invalid_argument("duplicate parameter '" + name + "'");
  Tensor leaf = Tensor::from(value.shape(),
                             std::vector<double>(value.data().begin(), value.data().end()),
                             true);
  entries_.emplace_back(name, leaf);
  return leaf;
}

const Tensor& ParameterStore::get(const std::string& name) const {
  for (const auto& [n, t] : entries_)
    if (n == name) return t;
  throw std::out_of_range("no parameter named '" + name + "'");
}

bool ParameterStore::contains(const std::string& name) const {
  for (const auto& e : entries_)
    if (e.first == name) return true;
  return false;
}

std::size_t ParameterStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.second.numel();
  return n;
}

void ParameterStore::zero_grad() {
  for (auto& e : entries_) e.second.zero_grad();
}

ParameterStore::Snapshot ParameterStore::snapshot() const {
  Snapshot out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.emplace_back(e.second.data().begin(), e.second.data().end());
  return out;
}

void ParameterStore::restore(const Snapshot& values) {
  if (values.size() != entries_.size()) {
    throw std::invalid_argument("snapshot has " + std::to_string(values.size()) +
                                " tensors, store has " + std::to_string(entries_.size()));
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    auto dst = entries_[i].second.mutable_data();
    if (dst.size() != values[i].size()) {
      throw DimensionError("snapshot size mismatch for '" + entries_[i].first + "'");
    }
    std::copy(values[i].begin(), values[i].end(), dst.begin());
  }
}

Tensor xavier_uniform(Shape shape, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-bound, bound);
  std::vector<double> values(shape_numel(shape));
  for (double& v : values) v = dist(rng);
  return Tensor::from(std::move(shape), std::move(values));
}

Tensor normal_init(Shape shape, double stddev, Rng& rng) {
  std::normal_distribution<double> dist(0.0, stddev);
  std::vector<double> values(shape_numel(shape));
  for (double& v : values) v = dist(rng);
  return Tensor::from(std::move(shape), std::move(values));
}

Tensor Linear::operator()(const Tensor& x) const {
  if (x.rank() == 2) return add_bias(matmul(x, weight), bias);
  if (x.rank() < 2) throw DimensionError("linear: input rank < 2, " + shape_str(x.shape()));
  const std::size_t in = x.shape().back();
  Tensor flat = reshape(x, {x.numel() / in, in});
  Shape out_shape = x.shape();
  out_shape.back() = out_features();
  return reshape(add_bias(matmul(flat, weight), bias), std::move(out_shape));
}

Linear make_linear(ParameterStore& store, const std::string& prefix, std::size_t in,
                   std::size_t out, Rng& rng) {
  Linear l;
  l.weight = store.add(prefix + ".weight", xavier_uniform({in, out}, in, out, rng));
  l.bias = store.add(prefix + ".bias", Tensor::zeros({out}));
  return l;
}

LayerNormParams make_layer_norm(ParameterStore& store, const std::string& prefix,
                                std::size_t d) {
  return {store.add(prefix + ".gamma", Tensor::full({d}, 1.0)),
          store.add(prefix + ".beta", Tensor::zeros({d}))};
}

}  // namespace legalnlp
