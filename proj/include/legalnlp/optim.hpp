#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "legalnlp/nn.hpp"

namespace legalnlp {

struct AdamHyper {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct OptimizerState {
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
  std::size_t t = 0;
  AdamHyper hyper;

  /// Zeroed moments shaped like `params`.
  static OptimizerState for_parameters(const ParameterStore& params, AdamHyper hyper = {});
};

/// One Adam update of a single array at (1-based) step t. Weight decay is
/// decoupled: param *= 1 - lr·wd before the moment-based step.
void adam_update(std::span<double> param, std::span<const double> grad, std::span<double> m,
                 std::span<double> v, std::size_t t, double lr, double weight_decay,
                 const AdamHyper& hyper);

/// Advances state.t and updates every parameter from its grad.
void adam_step(ParameterStore& params, OptimizerState& state, double lr, double weight_decay);

/// Linear warmup 0 → base_lr over warmup_steps, then linear decay to 0 at
/// total_steps.
double lr_schedule(std::size_t step, double base_lr, std::size_t warmup_steps,
                   std::size_t total_steps);

/// Scales all grads so their global L2 norm is at most max_norm. Returns the
/// norm before clipping.
double clip_grad_norm(ParameterStore& params, double max_norm);

}  // namespace legalnlp
