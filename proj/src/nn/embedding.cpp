#include "alphaembed/nn/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "alphaembed/errors.hpp"

namespace alphaembed::nn {

torch::Tensor l2_normalize_rows(const torch::Tensor& m) {
  const auto norms = m.norm(2, -1, /*keepdim=*/true);
  if (m.numel() > 0 && (norms == 0).any().item<bool>()) {
    throw NormalizationError("cannot normalize a zero row");
  }
  return m / norms;
}

torch::Tensor assemble_matrix(const torch::Tensor& L, const torch::Tensor& alpha,
                              const torch::Tensor& betas, NormFlags flags) {
  auto bn = [&](const torch::Tensor& x) { return flags.f_bn ? l2_normalize_rows(x) : x; };
  const auto n = L.size(0);
  const auto m = betas.size(0);
  const auto d_beta = betas.dim() == 2 ? betas.size(1) : 0;
  const auto opts = L.options();

  auto top = torch::cat({bn(L), torch::zeros({n, d_beta}, opts)}, 1);
  torch::Tensor U = top;
  if (m > 0) {
    const auto a = bn(alpha.reshape({1, -1}));
    auto bottom = torch::cat({a.expand({m, a.size(1)}), bn(betas.to(opts.dtype()))}, 1);
    U = torch::cat({top, bottom}, 0);
  }
  return flags.f_fn ? l2_normalize_rows(U) : U;
}

torch::Tensor project(const torch::Tensor& U, const torch::Tensor& v, bool f_fn, bool row_exact) {
  const auto features = f_fn ? l2_normalize_rows(v) : v;
  if (!row_exact) return torch::matmul(features, U.t());
  return (features.unsqueeze(-2) * U).sum(-1);
}

DualPartEmbeddingImpl::DualPartEmbeddingImpl(int n, int m, int d_alpha, RandMethod method,
                                             NormFlags flags)
    : n_(n), m_(m), d_alpha_(d_alpha), method_(method), flags_(flags) {
  if (n < 1 || m < 0 || d_alpha < 1) throw ConfigError("invalid dual-part embedding shape");
  const double std = 1.0 / std::sqrt(static_cast<double>(d_alpha + method.d_beta));
  L = register_parameter("L", torch::randn({n, d_alpha}) * std);
  alpha = register_parameter("alpha", torch::randn({1, d_alpha}) * std);
  betas_ = torch::empty({0, method.d_beta});
}

torch::Tensor DualPartEmbeddingImpl::draw_betas(Rng& rng) const {
  auto set = generate_betas(method_, m_, rng);
  return torch::from_blob(set.data.data(), {set.rows, set.cols}, torch::kFloat32).clone();
}

void DualPartEmbeddingImpl::resample_betas(Rng& rng) {
  if (mode_ == EmbeddingMode::Inference) {
    throw ModeError("beta vectors are frozen in inference mode");
  }
  if (m_ == 0) return;
  betas_ = draw_betas(rng);
}

void DualPartEmbeddingImpl::freeze_for_inference(Rng& rng) {
  betas_ = draw_betas(rng);
  mode_ = EmbeddingMode::Inference;
}

void DualPartEmbeddingImpl::set_interchangeable_count(int m) {
  if (m < 0) throw SizeError("negative interchangeable token count");
  m_ = m;
  betas_ = torch::empty({0, method_.d_beta});
}

void DualPartEmbeddingImpl::install_betas(const torch::Tensor& betas) {
  if (betas.dim() != 2 || betas.size(0) != m_ || betas.size(1) != method_.d_beta) {
    throw SizeError("beta set must be " + std::to_string(m_) + " x " +
                    std::to_string(method_.d_beta));
  }
  betas_ = betas.to(torch::kFloat32).clone();
  mode_ = EmbeddingMode::Inference;
}

torch::Tensor DualPartEmbeddingImpl::matrix() const {
  if (betas_.size(0) != m_) throw ModeError("beta vectors have not been drawn");
  return assemble_matrix(L, alpha, betas_.to(L.dtype()), flags_);
}

std::string to_string(BaselineAugmentation a) {
  switch (a) {
    case BaselineAugmentation::None: return "none";
    case BaselineAugmentation::AlphaRenaming: return "alpha-renaming";
    case BaselineAugmentation::ShuffleAPs: return "shuffle-aps";
  }
  return "none";
}

BaselineAugmentation baseline_augmentation_from_string(const std::string& s) {
  if (s == "none" || s == "full-vocab") return BaselineAugmentation::None;
  if (s == "alpha-renaming") return BaselineAugmentation::AlphaRenaming;
  if (s == "shuffle-aps") return BaselineAugmentation::ShuffleAPs;
  throw ConfigError("unknown baseline mode '" + s + "'");
}

BaselineEmbeddingImpl::BaselineEmbeddingImpl(int n, int m, int d_model,
                                             BaselineAugmentation augmentation, bool f_fn)
    : n_(n), augmentation_(augmentation), f_fn_(f_fn) {
  if (n < 1 || m < 0 || d_model < 1) throw ConfigError("invalid embedding table shape");
  table = register_parameter("table",
                             torch::randn({n + m, d_model}) / std::sqrt(static_cast<double>(d_model)));
}

torch::Tensor BaselineEmbeddingImpl::matrix() const {
  auto t = permutation_ ? table.index_select(0, *permutation_) : table;
  return f_fn_ ? l2_normalize_rows(t) : t;
}

void BaselineEmbeddingImpl::begin_step(Rng& rng) {
  if (augmentation_ != BaselineAugmentation::ShuffleAPs) return;
  std::vector<std::int64_t> order(static_cast<std::size_t>(vocab_size()));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin() + n_, order.end(), rng);
  permutation_ = torch::tensor(order, torch::kInt64);
}

void BaselineEmbeddingImpl::freeze_for_inference(Rng&) { permutation_.reset(); }

std::size_t select_median_candidate(const std::vector<double>& losses) {
  if (losses.empty()) throw DataError("no candidates to choose from");
  std::vector<std::size_t> order(losses.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return losses[a] < losses[b]; });
  return order[(order.size() - 1) / 2];
}

double select_median_embedding(DualPartEmbeddingImpl& e, int k, Rng& rng,
                               const std::function<double()>& loss_of) {
  if (k < 1) throw ConfigError("need at least one candidate embedding");
  std::vector<torch::Tensor> candidates;
  std::vector<double> losses;
  for (int i = 0; i < k; ++i) {
    candidates.push_back(e.draw_betas(rng));
    e.install_betas(candidates.back());
    losses.push_back(loss_of());
  }
  const auto chosen = select_median_candidate(losses);
  e.install_betas(candidates[chosen]);
  return losses[chosen];
}

}  // namespace alphaembed::nn
