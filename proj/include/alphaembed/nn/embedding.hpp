#pragma once

#include <functional>
#include <memory>
#include <optional>

#include <torch/torch.h>

#include "alphaembed/randvec.hpp"
#include "alphaembed/vocab.hpp"

namespace alphaembed::nn {

struct NormFlags {
  bool f_bn = true;
  bool f_fn = true;
};

enum class EmbeddingMode { Training, Inference };

// Divides each row by its L2 norm. Throws NormalizationError on a zero row.
torch::Tensor l2_normalize_rows(const torch::Tensor& m);

// [f_bn(L) | 0 ; f_bn(alpha) | f_bn(beta_i)] followed by f_fn over rows.
// L is n x d_alpha, alpha is 1 x d_alpha (or d_alpha), betas m x d_beta.
torch::Tensor assemble_matrix(const torch::Tensor& L, const torch::Tensor& alpha,
                              const torch::Tensor& betas, NormFlags flags);

// logits = U f_fn(v) over the last dimension of v.
// With row_exact each logit is reduced independently of its column, so
// permuting rows of U permutes the logits bit for bit.
torch::Tensor project(const torch::Tensor& U, const torch::Tensor& v, bool f_fn,
                      bool row_exact = false);

// Common interface of the tied token tables.
class TokenTableImpl : public torch::nn::Module {
 public:
  virtual int vocab_size() const = 0;
  virtual int non_interchangeable_count() const = 0;
  virtual int interchangeable_count() const = 0;
  virtual bool feature_normalized() const = 0;
  virtual int d_model() const = 0;

  // Full (n+m) x d_model matrix for the current step.
  virtual torch::Tensor matrix() const = 0;
  // Per-step randomization hook (beta resampling or AP shuffling).
  virtual void begin_step(Rng& rng) = 0;
  // Fixes the randomized part for a whole evaluation session.
  virtual void freeze_for_inference(Rng& rng) = 0;
  virtual void set_training_mode() = 0;
};

class DualPartEmbeddingImpl : public TokenTableImpl {
 public:
  DualPartEmbeddingImpl(int n, int m, int d_alpha, RandMethod method, NormFlags flags);

  int vocab_size() const override { return n_ + m_; }
  int non_interchangeable_count() const override { return n_; }
  int interchangeable_count() const override { return m_; }
  bool feature_normalized() const override { return flags_.f_fn; }
  int d_model() const override { return d_alpha_ + method_.d_beta; }
  int d_alpha() const { return d_alpha_; }
  const RandMethod& method() const { return method_; }
  NormFlags flags() const { return flags_; }
  EmbeddingMode mode() const { return mode_; }

  torch::Tensor matrix() const override;
  void begin_step(Rng& rng) override { resample_betas(rng); }
  void freeze_for_inference(Rng& rng) override;
  void set_training_mode() override { mode_ = EmbeddingMode::Training; }

  // Draws a fresh beta set. Throws ModeError in inference mode.
  void resample_betas(Rng& rng);
  // Changes the interchangeable block size; betas are cleared.
  void set_interchangeable_count(int m);
  // Installs a given beta set (m x d_beta) and switches to inference mode.
  void install_betas(const torch::Tensor& betas);
  const torch::Tensor& betas() const { return betas_; }
  torch::Tensor draw_betas(Rng& rng) const;

  torch::Tensor L;
  torch::Tensor alpha;

 private:
  int n_;
  int m_;
  int d_alpha_;
  RandMethod method_;
  NormFlags flags_;
  EmbeddingMode mode_ = EmbeddingMode::Training;
  torch::Tensor betas_;
};
TORCH_MODULE(DualPartEmbedding);

enum class BaselineAugmentation { None, AlphaRenaming, ShuffleAPs };

std::string to_string(BaselineAugmentation a);
BaselineAugmentation baseline_augmentation_from_string(const std::string& s);

// Fully learnable table. AlphaRenaming is applied to the data by the
// training loop; ShuffleAPs permutes the AP rows once per step.
class BaselineEmbeddingImpl : public TokenTableImpl {
 public:
  BaselineEmbeddingImpl(int n, int m, int d_model, BaselineAugmentation augmentation, bool f_fn);

  int vocab_size() const override { return static_cast<int>(table.size(0)); }
  int non_interchangeable_count() const override { return n_; }
  int interchangeable_count() const override { return vocab_size() - n_; }
  bool feature_normalized() const override { return f_fn_; }
  int d_model() const override { return static_cast<int>(table.size(1)); }
  BaselineAugmentation augmentation() const { return augmentation_; }

  torch::Tensor matrix() const override;
  void begin_step(Rng& rng) override;
  void freeze_for_inference(Rng& rng) override;
  void set_training_mode() override {}

  torch::Tensor table;

 private:
  int n_;
  BaselineAugmentation augmentation_;
  bool f_fn_;
  std::optional<torch::Tensor> permutation_;
};
TORCH_MODULE(BaselineEmbedding);

// Lower median of the candidate losses: index (k - 1) / 2 after sorting.
// Throws DataError for an empty list.
std::size_t select_median_candidate(const std::vector<double>& losses);

// Draws k candidate beta sets, scores each with `loss_of` and installs the
// median one. Returns the chosen candidate's loss.
double select_median_embedding(DualPartEmbeddingImpl& e, int k, Rng& rng,
                               const std::function<double()>& loss_of);

}  // namespace alphaembed::nn
