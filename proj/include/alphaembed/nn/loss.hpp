#pragma once

#include <torch/torch.h>

namespace alphaembed::nn {

inline constexpr double kAdaCosClip = 100.0;
inline constexpr double kAdaCosFloor = 1.0;

struct AdaCosState {
  double scale = kAdaCosFloor;
  int class_count = 0;
};

// s = sqrt(2) ln(C - 1), kept within [kAdaCosFloor, kAdaCosClip].
// Throws ConfigError for C < 2.
AdaCosState adacos_init(int class_count);

// The scalar update given ln(B_avg) and the median target angle.
double adacos_next_scale(double log_b_avg, double theta_median);

struct LossResult {
  torch::Tensor loss;  // scalar, differentiable
  double scale = 0.0;  // scale used for this loss
};

// Flattens the non-pad positions of `cosines` (..., C) into one batch axis,
// applies softmax cross-entropy to scale * cosines and then updates
// state.scale. `mask` is true at positions that count. Throws MaskError when
// no position counts.
LossResult adacos_step(const torch::Tensor& cosines, const torch::Tensor& targets,
                       const torch::Tensor& mask, AdaCosState& state);

// Masked token-level mean cross-entropy. Throws MaskError when no position
// counts.
torch::Tensor cross_entropy(const torch::Tensor& logits, const torch::Tensor& targets,
                            const torch::Tensor& mask);

}  // namespace alphaembed::nn
