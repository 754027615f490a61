#pragma once

#include <string>
#include <utility>
#include <vector>

#include "legalnlp/ops.hpp"
#include "legalnlp/tensor.hpp"

namespace legalnlp {

enum class Mode { kTrain, kEval };

// Per-forward settings. Eval mode never touches the rng.
struct ForwardContext {
  Mode mode = Mode::kEval;
  Rng* rng = nullptr;

  bool training() const { return mode == Mode::kTrain; }
  static ForwardContext eval() { return {}; }
  static ForwardContext train(Rng& rng) { return {Mode::kTrain, &rng}; }
};

Tensor apply_dropout(const Tensor& x, double rate, const ForwardContext& ctx);

// Named, ordered collection of trainable leaves. Order is registration
// order and defines the checkpoint layout.
class ParameterStore {
 public:
  using Entry = std::pair<std::string, Tensor>;

  /// Registers `value` as a trainable leaf and returns the stored handle.
  Tensor add(const std::string& name, const Tensor& value);
  const Tensor& get(const std::string& name) const;
  bool contains(const std::string& name) const;

  const std::vector<Entry>& entries() const { return entries_; }
  std::vector<Entry>& entries() { return entries_; }
  std::size_t size() const { return entries_.size(); }
  std::size_t scalar_count() const;

  void zero_grad();

  using Snapshot = std::vector<std::vector<double>>;
  Snapshot snapshot() const;
  void restore(const Snapshot& values);

 private:
  std::vector<Entry> entries_;
};

Tensor xavier_uniform(Shape shape, std::size_t fan_in, std::size_t fan_out, Rng& rng);
Tensor normal_init(Shape shape, double stddev, Rng& rng);

// y = x·W + b over the last axis; W is [in×out].
struct Linear {
  Tensor weight;
  Tensor bias;

  std::size_t in_features() const { return weight.dim(0); }
  std::size_t out_features() const { return weight.dim(1); }
  Tensor operator()(const Tensor& x) const;
};

Linear make_linear(ParameterStore& store, const std::string& prefix, std::size_t in,
                   std::size_t out, Rng& rng);

struct LayerNormParams {
  Tensor gamma;
  Tensor beta;

  Tensor operator()(const Tensor& x) const { return layer_norm(x, gamma, beta); }
};

LayerNormParams make_layer_norm(ParameterStore& store, const std::string& prefix,
                                std::size_t d);

}  // namespace legalnlp
