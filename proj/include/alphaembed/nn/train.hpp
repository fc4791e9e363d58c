#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include <torch/torch.h>

#include "alphaembed/nn/loss.hpp"
#include "alphaembed/nn/model.hpp"
#include "alphaembed/tasks.hpp"

namespace alphaembed::nn {

enum class LossKind { AdaCos, CrossEntropy };

struct TrainOptions {
  int steps = 1000;
  int batch_size = 128;
  double learning_rate = 1e-4;  // peak
  int warmup_steps = 1000;
  double grad_clip = 1.0;  // max global norm; 0 disables
  std::uint64_t seed = 1;
  LossKind loss = LossKind::AdaCos;
  int log_every = 1;
  // Interchangeable block size used for alpha-renaming augmentation.
  int rename_target_m = 0;
};

// peak * min(step / warmup, sqrt(warmup / step)) for step >= 1.
double learning_rate_at(int step, double peak, int warmup);

struct StepRecord {
  int step = 0;
  double loss = 0.0;
  double scale = 0.0;  // AdaCos scale used for the step (1 for cross-entropy)
  double next_scale = 0.0;
  double learning_rate = 0.0;
};

// Detached per-step view for observers: logits or cosines, targets, mask.
struct StepTensors {
  torch::Tensor outputs;
  torch::Tensor targets;
  torch::Tensor mask;
};

using StepObserver = std::function<void(const StepRecord&, const StepTensors&)>;

// Header line of the training log.
void write_log_header(std::ostream& out);

// Trains in place. Seeds torch and the data order from options.seed.
// Throws NumericError on a non-finite loss and DataError on an empty dataset.
std::vector<StepRecord> train(Seq2SeqImpl& model, const Dataset& data, const TrainOptions& options,
                              std::ostream* log = nullptr, const StepObserver& observer = {},
                              const std::function<void(int step)>& on_checkpoint = {},
                              int checkpoint_every = 0);

}  // namespace alphaembed::nn
