#include "alphaembed/nn/model.hpp"

#include <cmath>

#include "alphaembed/errors.hpp"
#include "alphaembed/grammar.hpp"
#include "alphaembed/nn/loss.hpp"

namespace alphaembed::nn {

std::string to_string(EncoderPositions p) {
  return p == EncoderPositions::Rotary ? "rotary" : "tree";
}

EncoderPositions encoder_positions_from_string(const std::string& s) {
  if (s == "rotary") return EncoderPositions::Rotary;
  if (s == "tree") return EncoderPositions::TreePositional;
  throw ConfigError("unknown encoder positional mode '" + s + "'");
}

void ModelConfig::validate() const {
  if (d_model < 2 || layers < 1 || heads < 1 || fc_size < 1) {
    throw ConfigError("model dimensions must be positive");
  }
  if (d_model % heads != 0) throw ConfigError("d_model must be divisible by the head count");
  if ((d_model / heads) % 2 != 0) throw ConfigError("rotary encoding needs an even head dimension");
  if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("dropout must lie in [0, 1)");
  if (max_source_length < 1 || max_target_length < 2) throw ConfigError("invalid length limits");
}

torch::Tensor rope_apply(const torch::Tensor& x, const torch::Tensor& positions, double base) {
  const auto d = x.size(-1);
  if (d % 2 != 0) throw ConfigError("rotary encoding needs an even head dimension");
  const auto inv = torch::pow(base, -torch::arange(0, d, 2, torch::kFloat64) / static_cast<double>(d));
  const auto angles = positions.to(torch::kFloat64).unsqueeze(-1) * inv;
  const auto cos = angles.cos().to(x.scalar_type());
  const auto sin = angles.sin().to(x.scalar_type());
  const auto pairs = x.unflatten(-1, {d / 2, 2});
  const auto x0 = pairs.select(-1, 0);
  const auto x1 = pairs.select(-1, 1);
  return torch::stack({x0 * cos - x1 * sin, x0 * sin + x1 * cos}, -1).flatten(-2);
}

AttentionImpl::AttentionImpl(int d_model, int heads) : heads_(heads) {
  q_ = register_module("q", torch::nn::Linear(d_model, d_model));
  k_ = register_module("k", torch::nn::Linear(d_model, d_model));
  v_ = register_module("v", torch::nn::Linear(d_model, d_model));
  o_ = register_module("o", torch::nn::Linear(d_model, d_model));
}

torch::Tensor AttentionImpl::forward(const torch::Tensor& query, const torch::Tensor& memory,
                                     const torch::Tensor& allowed,
                                     const std::optional<torch::Tensor>& query_positions,
                                     const std::optional<torch::Tensor>& key_positions) {
  const auto B = query.size(0);
  const auto Tq = query.size(1);
  const auto Tk = memory.size(1);
  const auto d = query.size(2);
  const auto dh = d / heads_;
  auto split = [&](const torch::Tensor& x, int64_t T) {
    return x.view({B, T, heads_, dh}).transpose(1, 2);
  };
  auto q = split(q_(query), Tq);
  auto k = split(k_(memory), Tk);
  auto v = split(v_(memory), Tk);
  if (query_positions) q = rope_apply(q, *query_positions);
  if (key_positions) k = rope_apply(k, *key_positions);

  auto scores = torch::matmul(q, k.transpose(-2, -1)) / std::sqrt(static_cast<double>(dh));
  scores = scores.masked_fill(allowed.logical_not(), -1e9);
  const auto out = torch::matmul(torch::softmax(scores, -1), v);
  return o_(out.transpose(1, 2).reshape({B, Tq, d}));
}

FeedForwardImpl::FeedForwardImpl(int d_model, int fc_size) {
  in_ = register_module("in", torch::nn::Linear(d_model, fc_size));
  out_ = register_module("out", torch::nn::Linear(fc_size, d_model));
}

torch::Tensor FeedForwardImpl::forward(const torch::Tensor& x) { return out_(torch::relu(in_(x))); }

EncoderLayerImpl::EncoderLayerImpl(const ModelConfig& c) : dropout_(c.dropout) {
  ln1_ = register_module("ln1", torch::nn::LayerNorm(torch::nn::LayerNormOptions({c.d_model})));
  ln2_ = register_module("ln2", torch::nn::LayerNorm(torch::nn::LayerNormOptions({c.d_model})));
  attn_ = register_module("attn", Attention(c.d_model, c.heads));
  ff_ = register_module("ff", FeedForward(c.d_model, c.fc_size));
}

torch::Tensor EncoderLayerImpl::forward(const torch::Tensor& x, const torch::Tensor& allowed,
                                        const std::optional<torch::Tensor>& positions) {
  const auto h = ln1_(x);
  auto y = x + torch::dropout(attn_(h, h, allowed, positions, positions), dropout_, is_training());
  return y + torch::dropout(ff_(ln2_(y)), dropout_, is_training());
}

DecoderLayerImpl::DecoderLayerImpl(const ModelConfig& c) : dropout_(c.dropout) {
  ln1_ = register_module("ln1", torch::nn::LayerNorm(torch::nn::LayerNormOptions({c.d_model})));
  ln2_ = register_module("ln2", torch::nn::LayerNorm(torch::nn::LayerNormOptions({c.d_model})));
  ln3_ = register_module("ln3", torch::nn::LayerNorm(torch::nn::LayerNormOptions({c.d_model})));
  self_ = register_module("self_attn", Attention(c.d_model, c.heads));
  cross_ = register_module("cross_attn", Attention(c.d_model, c.heads));
  ff_ = register_module("ff", FeedForward(c.d_model, c.fc_size));
}

torch::Tensor DecoderLayerImpl::forward(const torch::Tensor& x, const torch::Tensor& self_allowed,
                                        const torch::Tensor& memory,
                                        const torch::Tensor& cross_allowed,
                                        const torch::Tensor& positions,
                                        const std::optional<torch::Tensor>& source_positions) {
  const auto h = ln1_(x);
  auto y = x + torch::dropout(self_(h, h, self_allowed, positions, positions), dropout_, is_training());
  std::optional<torch::Tensor> query_positions;
  if (source_positions) query_positions = positions;
  y = y + torch::dropout(cross_(ln2_(y), memory, cross_allowed, query_positions, source_positions),
                         dropout_, is_training());
  return y + torch::dropout(ff_(ln3_(y)), dropout_, is_training());
}

Seq2SeqImpl::Seq2SeqImpl(const ModelConfig& config, const EmbeddingConfig& embedding,
                         const Vocabulary& v)
    : config_(config), embedding_config_(embedding), vocab_(v), arities_(arity_table(v)) {
  config_.validate();
  const int n = v.non_interchangeable_count();
  const int m = v.interchangeable_count();
  if (embedding.kind == EmbeddingKind::DualPart) {
    if (!config.tie_embeddings) {
      throw ConfigError("dual-part embeddings require tied embedding and projection tables");
    }
    if (embedding.method.d_beta >= config.d_model) {
      throw ConfigError("d_beta must be smaller than d_model");
    }
    table_ = std::make_shared<DualPartEmbeddingImpl>(n, m, config.d_model - embedding.method.d_beta,
                                                      embedding.method, embedding.flags);
  } else {
    table_ = std::make_shared<BaselineEmbeddingImpl>(n, m, config.d_model, embedding.augmentation,
                                                      embedding.flags.f_fn);
  }
  register_module("embedding", table_);
  if (!config.tie_embeddings) {
    untied_ = register_module(
        "projection", torch::nn::Linear(torch::nn::LinearOptions(config.d_model, n + m).bias(false)));
  }
  if (config.encoder_positions == EncoderPositions::TreePositional) {
    tree_proj_ = register_module("tree_proj", torch::nn::Linear(2 * kMaxTreeDepth, config.d_model));
  }
  encoder_ = register_module("encoder", torch::nn::ModuleList());
  decoder_ = register_module("decoder", torch::nn::ModuleList());
  for (int i = 0; i < config.layers; ++i) {
    encoder_->push_back(EncoderLayer(config_));
    decoder_->push_back(DecoderLayer(config_));
  }
  enc_norm_ = register_module("enc_norm", torch::nn::LayerNorm(torch::nn::LayerNormOptions({config.d_model})));
  dec_norm_ = register_module("dec_norm", torch::nn::LayerNorm(torch::nn::LayerNormOptions({config.d_model})));
}

DualPartEmbeddingImpl* Seq2SeqImpl::dual_part() {
  return dynamic_cast<DualPartEmbeddingImpl*>(table_.get());
}

void Seq2SeqImpl::extend_vocabulary(int m) {
  auto* dual = dual_part();
  if (!dual) throw ConfigError("a fixed embedding table cannot grow its vocabulary");
  vocab_ = alphaembed::extend_vocabulary(vocab_, m);
  arities_ = arity_table(vocab_);
  dual->set_interchangeable_count(m);
}

Batch Seq2SeqImpl::make_batch(const std::vector<Sequence>& inputs,
                              const std::vector<Sequence>* targets) const {
  const auto B = static_cast<int64_t>(inputs.size());
  int64_t S = 1;
  for (const auto& s : inputs) S = std::max<int64_t>(S, static_cast<int64_t>(s.size()));
  if (S > config_.max_source_length) {
    throw LengthError("input length " + std::to_string(S) + " exceeds the limit of " +
                      std::to_string(config_.max_source_length));
  }
  const int vocab = vocab_.size();
  auto check = [&](TokenId t) {
    if (t < 0 || t >= vocab) throw RangeError("token id " + std::to_string(t) + " outside the vocabulary");
  };

  Batch b;
  b.src = torch::full({B, S}, Vocabulary::kPad, torch::kInt64);
  b.src_mask = torch::zeros({B, S}, torch::kBool);
  auto src = b.src.accessor<int64_t, 2>();
  auto src_mask = b.src_mask.accessor<bool, 2>();
  for (int64_t i = 0; i < B; ++i) {
    const auto& s = inputs[static_cast<std::size_t>(i)];
    for (std::size_t j = 0; j < s.size(); ++j) {
      check(s[j]);
      src[i][static_cast<int64_t>(j)] = s[j];
      src_mask[i][static_cast<int64_t>(j)] = true;
    }
  }
  if (config_.encoder_positions == EncoderPositions::TreePositional) {
    b.tree = torch::zeros({B, S, 2 * kMaxTreeDepth});
    for (int64_t i = 0; i < B; ++i) {
      const auto& s = inputs[static_cast<std::size_t>(i)];
      if (s.empty()) continue;
      const auto p = tree_positions(s, arities_);
      auto rows = torch::from_blob(const_cast<float*>(p.data.data()), {p.rows, p.cols}, torch::kFloat32);
      b.tree[i].narrow(0, 0, p.rows).copy_(rows);
    }
  }
  if (targets) {
    int64_t T = 1;
    for (const auto& t : *targets) T = std::max<int64_t>(T, static_cast<int64_t>(t.size()) + 1);
    if (T > config_.max_target_length) {
      throw LengthError("target length " + std::to_string(T - 1) + " exceeds the limit of " +
                        std::to_string(config_.max_target_length - 1));
    }
    b.tgt_in = torch::full({B, T}, Vocabulary::kPad, torch::kInt64);
    b.tgt_out = torch::full({B, T}, Vocabulary::kPad, torch::kInt64);
    b.tgt_mask = torch::zeros({B, T}, torch::kBool);
    auto in = b.tgt_in.accessor<int64_t, 2>();
    auto out = b.tgt_out.accessor<int64_t, 2>();
    auto mask = b.tgt_mask.accessor<bool, 2>();
    for (int64_t i = 0; i < B; ++i) {
      const auto& t = (*targets)[static_cast<std::size_t>(i)];
      in[i][0] = Vocabulary::kStart;
      for (std::size_t j = 0; j < t.size(); ++j) {
        check(t[j]);
        in[i][static_cast<int64_t>(j) + 1] = t[j];
        out[i][static_cast<int64_t>(j)] = t[j];
      }
      out[i][static_cast<int64_t>(t.size())] = Vocabulary::kEnd;
      for (std::size_t j = 0; j <= t.size(); ++j) mask[i][static_cast<int64_t>(j)] = true;
    }
  }
  return b;
}

torch::Tensor Seq2SeqImpl::output_matrix(const torch::Tensor& U) const {
  if (config_.tie_embeddings) return U;
  return table_->feature_normalized() ? l2_normalize_rows(untied_->weight) : untied_->weight;
}

torch::Tensor Seq2SeqImpl::embed(const torch::Tensor& ids, const torch::Tensor& U) const {
  const auto rows = U.index_select(0, ids.reshape({-1}));
  return rows.view({ids.size(0), ids.size(1), U.size(1)}) * std::sqrt(static_cast<double>(config_.d_model));
}

torch::Tensor Seq2SeqImpl::encode(const Batch& b, const torch::Tensor& U) {
  auto x = embed(b.src, U);
  std::optional<torch::Tensor> positions;
  if (config_.encoder_positions == EncoderPositions::TreePositional) {
    x = x + tree_proj_(b.tree.to(x.scalar_type()));
  } else {
    positions = torch::arange(b.src.size(1), torch::kInt64);
  }
  x = torch::dropout(x, config_.dropout, is_training());
  const auto allowed = b.src_mask.unsqueeze(1).unsqueeze(2);
  for (const auto& layer : *encoder_) x = layer->as<EncoderLayer>()->forward(x, allowed, positions);
  return enc_norm_(x);
}

torch::Tensor Seq2SeqImpl::decode_features(const torch::Tensor& memory, const Batch& b,
                                           const torch::Tensor& tgt_in,
                                           const torch::Tensor& tgt_mask, const torch::Tensor& U) {
  const auto T = tgt_in.size(1);
  auto x = torch::dropout(embed(tgt_in, U), config_.dropout, is_training());
  const auto positions = torch::arange(T, torch::kInt64);
  std::optional<torch::Tensor> source_positions;
  if (config_.encoder_positions == EncoderPositions::Rotary) {
    source_positions = torch::arange(memory.size(1), torch::kInt64);
  }
  const auto causal = torch::ones({T, T}, torch::kBool).tril();
  const auto self_allowed = causal.unsqueeze(0).unsqueeze(0) & tgt_mask.unsqueeze(1).unsqueeze(2);
  const auto cross_allowed = b.src_mask.unsqueeze(1).unsqueeze(2);
  for (const auto& layer : *decoder_) {
    x = layer->as<DecoderLayer>()->forward(x, self_allowed, memory, cross_allowed, positions,
                                           source_positions);
  }
  return dec_norm_(x);
}

torch::Tensor Seq2SeqImpl::forward(const Batch& b) {
  const auto U = table_->matrix();
  const auto memory = encode(b, U);
  const auto features = decode_features(memory, b, b.tgt_in, b.tgt_mask, U);
  return project(output_matrix(U), features, table_->feature_normalized());
}

namespace {

struct EvalModeGuard {
  explicit EvalModeGuard(torch::nn::Module& m) : module(m), was_training(m.is_training()) { m.eval(); }
  ~EvalModeGuard() { module.train(was_training); }
  torch::nn::Module& module;
  bool was_training;
};

}  // namespace

std::vector<Prediction> Seq2SeqImpl::greedy(const std::vector<Sequence>& inputs, int max_length) {
  if (inputs.empty()) return {};
  torch::NoGradGuard no_grad;
  EvalModeGuard mode(*this);
  const auto U = table_->matrix();
  const auto W = output_matrix(U);
  const auto b = make_batch(inputs);
  const auto memory = encode(b, U);
  const auto B = static_cast<int64_t>(inputs.size());
  const int limit = std::min(max_length, config_.max_target_length - 1);

  std::vector<Prediction> out(inputs.size());
  std::vector<bool> done(inputs.size(), false);
  auto tgt_in = torch::full({B, 1}, Vocabulary::kStart, torch::kInt64);
  for (int t = 0; t < limit; ++t) {
    const auto mask = torch::ones_like(tgt_in, torch::kBool);
    const auto features = decode_features(memory, b, tgt_in, mask, U).select(1, t);
    const auto next = project(W, features, table_->feature_normalized(), true).argmax(-1);
    auto next_acc = next.accessor<int64_t, 1>();
    bool all_done = true;
    for (int64_t i = 0; i < B; ++i) {
      const auto k = static_cast<std::size_t>(i);
      if (done[k]) continue;
      if (next_acc[i] == Vocabulary::kEnd) {
        done[k] = true;
      } else {
        out[k].tokens.push_back(static_cast<TokenId>(next_acc[i]));
        all_done = false;
      }
    }
    if (all_done) break;
    tgt_in = torch::cat({tgt_in, next.unsqueeze(1)}, 1);
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i].truncated = !done[i];
  return out;
}

std::vector<Prediction> Seq2SeqImpl::beam(const std::vector<Sequence>& inputs, int beam_size,
                                          int max_length) {
  torch::NoGradGuard no_grad;
  EvalModeGuard mode(*this);
  const auto U = table_->matrix();
  const auto W = output_matrix(U);
  const int limit = std::min(max_length, config_.max_target_length - 1);
  std::vector<Prediction> out;
  for (const auto& input : inputs) {
    const auto b = make_batch({input});
    const auto memory = encode(b, U);
    StepFunction step = [&](const std::vector<Sequence>& prefixes) {
      const auto P = static_cast<int64_t>(prefixes.size());
      int64_t T = 1;
      for (const auto& p : prefixes) T = std::max<int64_t>(T, static_cast<int64_t>(p.size()) + 1);
      auto tgt_in = torch::full({P, T}, Vocabulary::kPad, torch::kInt64);
      auto mask = torch::zeros({P, T}, torch::kBool);
      std::vector<int64_t> last(prefixes.size());
      for (int64_t i = 0; i < P; ++i) {
        const auto& p = prefixes[static_cast<std::size_t>(i)];
        tgt_in[i][0] = Vocabulary::kStart;
        for (std::size_t j = 0; j < p.size(); ++j) tgt_in[i][static_cast<int64_t>(j) + 1] = p[j];
        mask[i].narrow(0, 0, static_cast<int64_t>(p.size()) + 1).fill_(true);
        last[static_cast<std::size_t>(i)] = static_cast<int64_t>(p.size());
      }
      Batch rep = b;
      rep.src_mask = b.src_mask.expand({P, b.src_mask.size(1)});
      const auto features = decode_features(memory.expand({P, memory.size(1), memory.size(2)}), rep,
                                            tgt_in, mask, U);
      const auto idx = torch::tensor(last, torch::kInt64);
      const auto picked = features.index_select(1, idx).diagonal(0, 0, 1).t();
      const auto logp = torch::log_softmax(
          project(W, picked, table_->feature_normalized(), true).to(torch::kFloat64) * output_scale, -1);
      std::vector<std::vector<float>> rows(prefixes.size());
      auto acc = logp.accessor<double, 2>();
      for (int64_t i = 0; i < P; ++i) {
        for (int64_t j = 0; j < logp.size(1); ++j) rows[static_cast<std::size_t>(i)].push_back(static_cast<float>(acc[i][j]));
      }
      return rows;
    };
    const auto h = beam_search(step, beam_size, limit, Vocabulary::kEnd);
    out.push_back({h.tokens, !h.finished});
  }
  return out;
}

double teacher_forced_loss(Seq2SeqImpl& model, const Dataset& d, int batch_size) {
  if (d.empty()) throw DataError("cannot score an empty dataset");
  torch::NoGradGuard no_grad;
  EvalModeGuard mode(model);
  double total = 0.0;
  double count = 0.0;
  for (std::size_t start = 0; start < d.size(); start += static_cast<std::size_t>(batch_size)) {
    const auto end = std::min(d.size(), start + static_cast<std::size_t>(batch_size));
    std::vector<Sequence> in, tgt;
    for (std::size_t i = start; i < end; ++i) {
      in.push_back(d[i].input);
      tgt.push_back(d[i].target);
    }
    const auto b = model.make_batch(in, &tgt);
    const auto logits = model.forward(b).to(torch::kFloat64) * model.output_scale;
    const auto n = b.tgt_mask.sum().item<double>();
    total += cross_entropy(logits, b.tgt_out, b.tgt_mask).item<double>() * n;
    count += n;
  }
  return total / count;
}

std::vector<Prediction> ModelPredictor::predict(const std::vector<Sequence>& inputs) {
  spec_.validate();
  if (spec_.strategy == DecodeStrategy::Greedy) return model_.greedy(inputs, spec_.max_length);
  return model_.beam(inputs, spec_.beam_size, spec_.max_length);
}

}  // namespace alphaembed::nn
