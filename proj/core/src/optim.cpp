#include "hashemb/optim.hpp"

#include <cmath>
#include <string>

#include "hashemb/errors.hpp"

namespace hashemb {

void AdamWConfig::validate() const {
  if (!(lr > 0.0)) throw config_error("AdamW: lr must be > 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0)) throw config_error("AdamW: beta1 must lie in [0, 1)");
  if (!(beta2 >= 0.0 && beta2 < 1.0)) throw config_error("AdamW: beta2 must lie in [0, 1)");
  if (!(eps > 0.0)) throw config_error("AdamW: eps must be > 0");
  if (!(weight_decay >= 0.0)) throw config_error("AdamW: weight_decay must be >= 0");
}

void adamw_step(std::span<Tensor> params, AdamWState& state, const AdamWConfig& cfg) {
  cfg.validate();
  if (state.first_moment.empty() && state.step == 0) {
    for (const auto& p : params) {
      state.first_moment.emplace_back(p.size(), 0.0);
      state.second_moment.emplace_back(p.size(), 0.0);
    }
  }
  if (state.first_moment.size() != params.size() ||
      state.second_moment.size() != params.size()) {
    throw shape_error("adamw_step: state tracks " + std::to_string(state.first_moment.size()) +
                      " tensors, got " + std::to_string(params.size()));
  }
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (state.first_moment[k].size() != params[k].size() ||
        state.second_moment[k].size() != params[k].size()) {
      throw shape_error("adamw_step: state size mismatch for parameter " + std::to_string(k));
    }
  }

  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(cfg.beta1, t);
  const double correction2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto p = params[k].data();
    const auto g = params[k].grad();
    auto& m = state.first_moment[k];
    auto& v = state.second_moment[k];
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      p[i] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps) + cfg.lr * cfg.weight_decay * p[i];
    }
  }
}

AdamW::AdamW(std::vector<Tensor> params, AdamWConfig cfg)
    : params_(std::move(params)), cfg_(cfg) {
  cfg_.validate();
}

void AdamW::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

void AdamW::step() { adamw_step(params_, state_, cfg_); }

}  // namespace hashemb
