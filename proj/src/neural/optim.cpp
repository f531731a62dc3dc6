// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <numbers>

#include "kc/neural.hpp"

namespace kc::neural {

WarmupCosineSchedule::WarmupCosineSchedule(double peak_lr, std::size_t total_steps,
                                           double warmup_ratio)
    : peak_(peak_lr), total_steps_(total_steps),
      warmup_steps_(static_cast<std::size_t>(
          std::ceil(warmup_ratio * static_cast<double>(total_steps)))) {
  if (!(warmup_ratio >= 0.0 && warmup_ratio < 1.0)) {
    throw ValidationError("schedule: warmup_ratio must lie in [0, 1)");
  }
}

double WarmupCosineSchedule::at(std::size_t step) const {
  if (step < warmup_steps_) {
    return peak_ * static_cast<double>(step) / static_cast<double>(warmup_steps_);
  }
  if (step >= total_steps_) {
    return 0.0;
  }
  const double progress = static_cast<double>(step - warmup_steps_) /
                          static_cast<double>(total_steps_ - warmup_steps_);
  return peak_ * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

AdamW::AdamW(std::size_t n_params, double beta1, double beta2, double eps, double weight_decay,
             std::vector<bool> decay_mask)
    : beta1_(beta1), beta2_(beta2), eps_(eps), weight_decay_(weight_decay),
      decay_mask_(std::move(decay_mask)), m_(n_params, 0.0), v_(n_params, 0.0) {
  if (!decay_mask_.empty() && decay_mask_.size() != n_params) {
    throw ValidationError("AdamW: decay mask size differs from parameter count");
  }
}

void AdamW::step(std::span<double> params, std::span<const double> grad, double lr) {
  if (params.size() != m_.size() || grad.size() != m_.size()) {
    throw ValidationError("AdamW: parameter/gradient size mismatch");
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  const double step_size = lr / bc1;
  const double sqrt_bc2 = std::sqrt(bc2);
  const double shrink = 1.0 - lr * weight_decay_;
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (decay_mask_.empty() || decay_mask_[i]) {
      params[i] *= shrink;
    }
    const double g = grad[i];
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * g;
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * g * g;
    params[i] -= step_size * m_[i] / (std::sqrt(v_[i]) / sqrt_bc2 + eps_);
  }
}

EarlyStopping::EarlyStopping(std::size_t patience) : patience_(patience) {
  if (patience < 1) {
    throw ValidationError("early stopping: patience must be >= 1");
  }
}

bool EarlyStopping::update(double metric) {
  ++epochs_;
  if (epochs_ == 1 || metric > best_) {
    best_ = metric;
    best_epoch_ = epochs_;
    since_best_ = 0;
    return true;
  }
  ++since_best_;
  return false;
}

} // namespace kc::neural
