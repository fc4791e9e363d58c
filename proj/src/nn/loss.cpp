#include "alphaembed/nn/loss.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "alphaembed/errors.hpp"

namespace alphaembed::nn {

AdaCosState adacos_init(int class_count) {
  if (class_count < 2) throw ConfigError("AdaCos needs at least two classes");
  const double s = std::numbers::sqrt2 * std::log(static_cast<double>(class_count - 1));
  return {std::clamp(s, kAdaCosFloor, kAdaCosClip), class_count};
}

double adacos_next_scale(double log_b_avg, double theta_median) {
  const double s = log_b_avg / std::cos(std::min(std::numbers::pi / 4, theta_median));
  return std::clamp(s, kAdaCosFloor, kAdaCosClip);
}

namespace {

// Selected rows of x (..., C) as (N, C) and the matching targets.
std::pair<torch::Tensor, torch::Tensor> flatten_masked(const torch::Tensor& x,
                                                       const torch::Tensor& targets,
                                                       const torch::Tensor& mask) {
  const auto flat_mask = mask.reshape({-1}).to(torch::kBool);
  if (!flat_mask.any().item<bool>()) throw MaskError("every position is padding");
  const auto idx = flat_mask.nonzero().squeeze(1);
  return {x.reshape({-1, x.size(-1)}).index_select(0, idx),
          targets.reshape({-1}).index_select(0, idx).to(torch::kInt64)};
}

}  // namespace

LossResult adacos_step(const torch::Tensor& cosines, const torch::Tensor& targets,
                       const torch::Tensor& mask, AdaCosState& state) {
  auto [cos, y] = flatten_masked(cosines, targets, mask);
  const double s = state.scale;
  const auto logits = cos * s;
  const auto loss = (torch::logsumexp(logits, 1) - logits.gather(1, y.unsqueeze(1)).squeeze(1)).mean();

  {
    torch::NoGradGuard guard;
    const auto c = cos.detach().to(torch::kFloat64);
    const auto target_cos = c.gather(1, y.unsqueeze(1)).squeeze(1);
    // ln of sum over non-target classes, per position.
    auto others = (c * s).scatter(1, y.unsqueeze(1), -std::numeric_limits<double>::infinity());
    const auto per_position = torch::logsumexp(others, 1);
    const double n = static_cast<double>(c.size(0));
    const double log_b_avg = torch::logsumexp(per_position, 0).item<double>() - std::log(n);

    auto angles = torch::acos(target_cos.clamp(-1.0, 1.0));
    auto sorted = std::get<0>(angles.sort());
    const double theta_med = sorted[(sorted.size(0) - 1) / 2].item<double>();
    state.scale = adacos_next_scale(log_b_avg, theta_med);
  }
  return {loss, s};
}

torch::Tensor cross_entropy(const torch::Tensor& logits, const torch::Tensor& targets,
                            const torch::Tensor& mask) {
  auto [x, y] = flatten_masked(logits, targets, mask);
  return (torch::logsumexp(x, 1) - x.gather(1, y.unsqueeze(1)).squeeze(1)).mean();
}

}  // namespace alphaembed::nn
