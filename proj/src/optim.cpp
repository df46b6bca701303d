#include "dkpc/optim.hpp"

#include <cmath>

#include "dkpc/error.hpp"

namespace dkpc {

Adam::Adam(std::vector<Parameter*> params, Config cfg) : params_(std::move(params)), cfg_(cfg) {
  slots_.reserve(params_.size());
  for (Parameter* p : params_)
    slots_.push_back(Slot{Tensor::zeros(p->value.shape()), Tensor::zeros(p->value.shape())});
}

void Adam::step() {
  ++step_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
  for (std::size_t pi = 0; pi < params_.size(); ++pi) {
    Parameter& p = *params_[pi];
    Slot& s = slots_[pi];
    const std::size_t row_skip =
        p.freeze_first_row && p.value.rank() == 2 ? static_cast<std::size_t>(p.value.cols()) : 0;
    for (std::size_t i = 0; i < p.value.numel(); ++i) {
      const double g = p.grad[i];
      if (!std::isfinite(g))
        throw NumericError("non-finite gradient in parameter '" + p.name + "'");
      if (i < row_skip) continue;
      const double m = cfg_.beta1 * s.m.at(static_cast<int>(i)) + (1.0 - cfg_.beta1) * g;
      const double v = cfg_.beta2 * s.v.at(static_cast<int>(i)) + (1.0 - cfg_.beta2) * g * g;
      s.m.at(static_cast<int>(i)) = static_cast<float>(m);
      s.v.at(static_cast<int>(i)) = static_cast<float>(v);
      const double update = cfg_.lr * (m / bc1) / (std::sqrt(v / bc2) + cfg_.eps);
      p.value.at(static_cast<int>(i)) = static_cast<float>(p.value.at(static_cast<int>(i)) - update);
    }
  }
}

void Adam::zero_grad() {
  for (Parameter* p : params_) p->zero_grad();
}

double clip_grad_norm(const std::vector<Parameter*>& params, double max_norm) {
  double sq = 0.0;
  for (const Parameter* p : params)
    for (double g : p->grad) sq += g * g;
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const double scale = max_norm / norm;
    for (Parameter* p : params)
      for (double& g : p->grad) g *= scale;
  }
  return norm;
}

GradCheckReport check_gradients(const std::vector<Parameter*>& params,
                                const std::function<double()>& loss_and_backward,
                                const std::function<double()>& loss_only,
                                double eps, int max_coords_per_param, Rng* rng) {
  loss_and_backward();
  std::vector<std::vector<double>> analytic;
  analytic.reserve(params.size());
  for (const Parameter* p : params) analytic.push_back(p->grad);

  GradCheckReport report;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Parameter& p = *params[pi];
    const int n = static_cast<int>(p.value.numel());
    std::vector<int> coords;
    if (max_coords_per_param < 0 || max_coords_per_param >= n) {
      coords.resize(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) coords[static_cast<std::size_t>(i)] = i;
    } else {
      if (rng == nullptr) throw UsageError("sampled gradient check requires an rng");
      for (auto ix : rng->sample_without_replacement(static_cast<std::size_t>(n),
                                                     static_cast<std::size_t>(max_coords_per_param)))
        coords.push_back(static_cast<int>(ix));
    }
    const std::size_t frozen =
        p.freeze_first_row && p.value.rank() == 2 ? static_cast<std::size_t>(p.value.cols()) : 0;
    for (int i : coords) {
      if (static_cast<std::size_t>(i) < frozen) continue;
      const float saved = p.value.at(i);
      p.value.at(i) = static_cast<float>(static_cast<double>(saved) + eps);
      const double eps_up = static_cast<double>(p.value.at(i)) - static_cast<double>(saved);
      const double up = loss_only();
      p.value.at(i) = static_cast<float>(static_cast<double>(saved) - eps);
      const double eps_down = static_cast<double>(saved) - static_cast<double>(p.value.at(i));
      const double down = loss_only();
      p.value.at(i) = saved;
      // divide by the realized f32 perturbation, not the nominal eps
      const double numeric = (up - down) / (eps_up + eps_down);
      const double an = analytic[pi][static_cast<std::size_t>(i)];
      const double denom = std::max({0.1, std::fabs(an), std::fabs(numeric)});
      const double rel = std::fabs(an - numeric) / denom;
      ++report.coords_checked;
      if (rel > report.max_rel_err) {
        report.max_rel_err = rel;
        report.worst_param = p.name;
        report.worst_index = i;
      }
    }
  }
  return report;
}

}  // namespace dkpc
