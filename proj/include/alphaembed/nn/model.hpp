#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <torch/torch.h>

#include "alphaembed/decode.hpp"
#include "alphaembed/eval.hpp"
#include "alphaembed/nn/embedding.hpp"
#include "alphaembed/vocab.hpp"

namespace alphaembed::nn {

enum class EncoderPositions { Rotary, TreePositional };

std::string to_string(EncoderPositions p);
EncoderPositions encoder_positions_from_string(const std::string& s);

struct ModelConfig {
  int d_model = 64;
  int layers = 2;
  int heads = 4;
  int fc_size = 64;
  double dropout = 0.1;
  int max_source_length = 64;
  int max_target_length = 64;
  EncoderPositions encoder_positions = EncoderPositions::Rotary;
  bool tie_embeddings = true;

  // Throws ConfigError when d_model is not a multiple of heads or the head
  // dimension is odd.
  void validate() const;
};

enum class EmbeddingKind { DualPart, Baseline };

struct EmbeddingConfig {
  EmbeddingKind kind = EmbeddingKind::DualPart;
  RandMethod method{RandKind::HypercubeVertices, 6};
  NormFlags flags{false, true};
  BaselineAugmentation augmentation = BaselineAugmentation::None;
};

inline constexpr double kRopeBase = 10000.0;

// Rotates consecutive pairs of the last dimension of x (..., T, d_head) by
// position * base^(-2j / d_head). Throws ConfigError for an odd d_head.
torch::Tensor rope_apply(const torch::Tensor& x, const torch::Tensor& positions,
                         double base = kRopeBase);

class AttentionImpl : public torch::nn::Module {
 public:
  AttentionImpl(int d_model, int heads);
  // allowed: bool, broadcastable to (B, H, Tq, Tk). Positions are given
  // when rotary encoding applies to queries and keys.
  torch::Tensor forward(const torch::Tensor& query, const torch::Tensor& memory,
                        const torch::Tensor& allowed,
                        const std::optional<torch::Tensor>& query_positions,
                        const std::optional<torch::Tensor>& key_positions);

 private:
  int heads_;
  torch::nn::Linear q_{nullptr}, k_{nullptr}, v_{nullptr}, o_{nullptr};
};
TORCH_MODULE(Attention);

class FeedForwardImpl : public torch::nn::Module {
 public:
  FeedForwardImpl(int d_model, int fc_size);
  torch::Tensor forward(const torch::Tensor& x);

 private:
  torch::nn::Linear in_{nullptr}, out_{nullptr};
};
TORCH_MODULE(FeedForward);

class EncoderLayerImpl : public torch::nn::Module {
 public:
  EncoderLayerImpl(const ModelConfig& c);
  torch::Tensor forward(const torch::Tensor& x, const torch::Tensor& allowed,
                        const std::optional<torch::Tensor>& positions);

 private:
  double dropout_;
  torch::nn::LayerNorm ln1_{nullptr}, ln2_{nullptr};
  Attention attn_{nullptr};
  FeedForward ff_{nullptr};
};
TORCH_MODULE(EncoderLayer);

class DecoderLayerImpl : public torch::nn::Module {
 public:
  DecoderLayerImpl(const ModelConfig& c);
  torch::Tensor forward(const torch::Tensor& x, const torch::Tensor& self_allowed,
                        const torch::Tensor& memory, const torch::Tensor& cross_allowed,
                        const torch::Tensor& positions,
                        const std::optional<torch::Tensor>& source_positions);

 private:
  double dropout_;
  torch::nn::LayerNorm ln1_{nullptr}, ln2_{nullptr}, ln3_{nullptr};
  Attention self_{nullptr}, cross_{nullptr};
  FeedForward ff_{nullptr};
};
TORCH_MODULE(DecoderLayer);

// Padded tensors for one batch. Masks are true at real tokens.
struct Batch {
  torch::Tensor src;       // (B, S) int64
  torch::Tensor src_mask;  // (B, S) bool
  torch::Tensor tree;      // (B, S, 2 * kMaxTreeDepth) or undefined
  torch::Tensor tgt_in;    // (B, T) int64, start token first
  torch::Tensor tgt_out;   // (B, T) int64, end token last
  torch::Tensor tgt_mask;  // (B, T) bool
};

// Encoder-decoder whose encoder lookup, decoder lookup and output
// projection all read the same token table.
class Seq2SeqImpl : public torch::nn::Module {
 public:
  Seq2SeqImpl(const ModelConfig& config, const EmbeddingConfig& embedding, const Vocabulary& v);

  const ModelConfig& config() const { return config_; }
  const EmbeddingConfig& embedding_config() const { return embedding_config_; }
  const Vocabulary& vocabulary() const { return vocab_; }
  TokenTableImpl& table() { return *table_; }
  const TokenTableImpl& table() const { return *table_; }
  DualPartEmbeddingImpl* dual_part();

  // Scale applied to cosine logits when scoring (AdaCos s); 1 otherwise.
  double output_scale = 1.0;

  // Grows the interchangeable block for dual-part models (new betas must be
  // drawn before use). Throws ConfigError for baseline tables.
  void extend_vocabulary(int m);

  Batch make_batch(const std::vector<Sequence>& inputs,
                   const std::vector<Sequence>* targets = nullptr) const;

  // Output matrix for the current step (the shared table when tied).
  torch::Tensor output_matrix(const torch::Tensor& U) const;

  torch::Tensor encode(const Batch& b, const torch::Tensor& U);
  // Final decoder features (B, T, d_model).
  torch::Tensor decode_features(const torch::Tensor& memory, const Batch& b,
                                const torch::Tensor& tgt_in, const torch::Tensor& tgt_mask,
                                const torch::Tensor& U);
  // Logits (B, T, V). Cosines when the table is feature-normalized.
  torch::Tensor forward(const Batch& b);

  // Batched greedy decoding; outputs exclude start and end tokens.
  std::vector<Prediction> greedy(const std::vector<Sequence>& inputs, int max_length);
  std::vector<Prediction> beam(const std::vector<Sequence>& inputs, int beam_size,
                               int max_length);

 private:
  torch::Tensor embed(const torch::Tensor& ids, const torch::Tensor& U) const;

  ModelConfig config_;
  EmbeddingConfig embedding_config_;
  Vocabulary vocab_;
  std::vector<int> arities_;
  std::shared_ptr<TokenTableImpl> table_;
  torch::nn::Linear untied_{nullptr};
  torch::nn::Linear tree_proj_{nullptr};
  torch::nn::ModuleList encoder_, decoder_;
  torch::nn::LayerNorm enc_norm_{nullptr}, dec_norm_{nullptr};
};
TORCH_MODULE(Seq2Seq);

// Teacher-forced mean cross-entropy of scale * logits over a dataset.
double teacher_forced_loss(Seq2SeqImpl& model, const Dataset& d, int batch_size = 256);

class ModelPredictor : public Predictor {
 public:
  ModelPredictor(Seq2SeqImpl& model, DecodeSpec spec) : model_(model), spec_(spec) {}
  std::vector<Prediction> predict(const std::vector<Sequence>& inputs) override;

 private:
  Seq2SeqImpl& model_;
  DecodeSpec spec_;
};

}  // namespace alphaembed::nn
