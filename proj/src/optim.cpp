#include "legalnlp/optim.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace legalnlp {

OptimizerState OptimizerState::for_parameters(const ParameterStore& params, AdamHyper hyper) {
  OptimizerState state;
  state.hyper = hyper;
  for (const auto& [name, t] : params.entries()) {
    state.m.emplace_back(t.numel(), 0.0);
    state.v.emplace_back(t.numel(), 0.0);
  }
  return state;
}

void adam_update(std::span<double> param, std::span<const double> grad, std::span<double> m,
                 std::span<double> v, std::size_t t, double lr, double weight_decay,
                 const AdamHyper& hyper) {
  if (grad.size() != param.size() || m.size() != param.size() || v.size() != param.size()) {
    throw DimensionError("adam: parameter of size " + std::to_string(param.size()) +
                         " with grad/m/v sizes " + std::to_string(grad.size()) + "/" +
                         std::to_string(m.size()) + "/" + std::to_string(v.size()));
  }
  if (t == 0) throw std::invalid_argument("adam: step counter must be >= 1");
  const double correction1 = 1.0 - std::pow(hyper.beta1, static_cast<double>(t));
  const double correction2 = 1.0 - std::pow(hyper.beta2, static_cast<double>(t));
  const double decay = 1.0 - lr * weight_decay;
  for (std::size_t i = 0; i < param.size(); ++i) {
    if (weight_decay != 0.0) param[i] *= decay;
    m[i] = hyper.beta1 * m[i] + (1.0 - hyper.beta1) * grad[i];
    v[i] = hyper.beta2 * v[i] + (1.0 - hyper.beta2) * grad[i] * grad[i];
    const double m_hat = m[i] / correction1;
    const double v_hat = v[i] / correction2;
    param[i] -= lr * m_hat / (std::sqrt(v_hat) + hyper.eps);
  }
}

void adam_step(ParameterStore& params, OptimizerState& state, double lr, double weight_decay) {
  auto& entries = params.entries();
  if (state.m.size() != entries.size() || state.v.size() != entries.size()) {
    throw DimensionError("adam: optimizer state tracks " + std::to_string(state.m.size()) +
                         " tensors, store has " + std::to_string(entries.size()));
  }
  ++state.t;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    Tensor& p = entries[i].second;
    adam_update(p.mutable_data(), p.grad(), state.m[i], state.v[i], state.t, lr, weight_decay,
                state.hyper);
  }
}

double lr_schedule(std::size_t step, double base_lr, std::size_t warmup_steps,
                   std::size_t total_steps) {
  if (warmup_steps >= total_steps) {
    throw std::invalid_argument("lr_schedule: warmup_steps (" + std::to_string(warmup_steps) +
                                ") must be < total_steps (" + std::to_string(total_steps) + ")");
  }
  if (step > total_steps) {
    throw std::out_of_range("lr_schedule: step " + std::to_string(step) + " beyond total " +
                            std::to_string(total_steps));
  }
  if (step < warmup_steps) {
    return base_lr * static_cast<double>(step) / static_cast<double>(warmup_steps);
  }
  return base_lr * static_cast<double>(total_steps - step) /
         static_cast<double>(total_steps - warmup_steps);
}

double clip_grad_norm(ParameterStore& params, double max_norm) {
  double squared = 0.0;
  for (const auto& [name, t] : params.entries())
    for (double g : t.grad()) squared += g * g;
  const double norm = std::sqrt(squared);
  if (norm > max_norm && norm > 0.0) {
    const double factor = max_norm / norm;
    for (auto& [name, t] : params.entries())
      for (double& g : t.mutable_grad()) g *= factor;
  }
  return norm;
}

}  // namespace legalnlp
