#include "alphaembed/nn/train.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>

#include "alphaembed/errors.hpp"

namespace alphaembed::nn {

double learning_rate_at(int step, double peak, int warmup) {
  const double s = std::max(step, 1);
  if (warmup <= 0) return peak;
  const double w = warmup;
  return peak * std::min(s / w, std::sqrt(w / s));
}

void write_log_header(std::ostream& out) { out << "step,loss,scale,lr\n"; }

std::vector<StepRecord> train(Seq2SeqImpl& model, const Dataset& data, const TrainOptions& options,
                              std::ostream* log, const StepObserver& observer,
                              const std::function<void(int)>& on_checkpoint, int checkpoint_every) {
  if (data.empty()) throw DataError("training dataset is empty");
  if (options.batch_size < 1 || options.steps < 0) throw ConfigError("invalid training schedule");
  auto& table = model.table();
  const bool adacos = options.loss == LossKind::AdaCos;
  if (adacos && !table.feature_normalized()) {
    throw ConfigError("AdaCos needs feature normalization (f_fn)");
  }

  torch::manual_seed(options.seed);
  std::seed_seq seq{options.seed, std::uint64_t{0x5eed}};
  Rng rng(seq);

  torch::optim::Adam optimizer(model.parameters(),
                               torch::optim::AdamOptions(options.learning_rate).betas({0.9, 0.98}).eps(1e-9));
  AdaCosState state = adacos ? adacos_init(table.vocab_size()) : AdaCosState{1.0, table.vocab_size()};
  const bool rename = options.rename_target_m > 0;
  const auto& vocab = model.vocabulary();

  model.train();
  table.set_training_mode();
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::size_t cursor = order.size();

  std::vector<StepRecord> records;
  for (int step = 1; step <= options.steps; ++step) {
    Dataset batch;
    while (batch.size() < static_cast<std::size_t>(options.batch_size)) {
      if (cursor == order.size()) {
        std::shuffle(order.begin(), order.end(), rng);
        cursor = 0;
      }
      batch.push_back(data[order[cursor++]]);
    }
    if (rename) batch = augment_alpha_rename(vocab, batch, options.rename_target_m, rng);
    std::vector<Sequence> inputs, targets;
    for (auto& s : batch) {
      inputs.push_back(std::move(s.input));
      targets.push_back(std::move(s.target));
    }

    const double lr = learning_rate_at(step, options.learning_rate, options.warmup_steps);
    for (auto& group : optimizer.param_groups()) {
      static_cast<torch::optim::AdamOptions&>(group.options()).lr(lr);
    }

    table.begin_step(rng);
    const auto b = model.make_batch(inputs, &targets);
    const auto outputs = model.forward(b);
    StepRecord rec;
    rec.step = step;
    rec.learning_rate = lr;
    torch::Tensor loss;
    if (adacos) {
      auto result = adacos_step(outputs, b.tgt_out, b.tgt_mask, state);
      loss = result.loss;
      rec.scale = result.scale;
      rec.next_scale = state.scale;
    } else {
      loss = cross_entropy(outputs, b.tgt_out, b.tgt_mask);
      rec.scale = rec.next_scale = 1.0;
    }
    rec.loss = loss.item<double>();
    if (!std::isfinite(rec.loss)) {
      throw NumericError("non-finite loss at step " + std::to_string(step));
    }
    optimizer.zero_grad();
    loss.backward();
    if (options.grad_clip > 0) torch::nn::utils::clip_grad_norm_(model.parameters(), options.grad_clip);
    optimizer.step();

    if (observer) observer(rec, {outputs.detach(), b.tgt_out, b.tgt_mask});
    if (log && (step % std::max(1, options.log_every) == 0 || step == options.steps)) {
      *log << step << ',' << std::setprecision(9) << rec.loss << ',' << rec.scale << ','
           << rec.learning_rate << '\n';
    }
    records.push_back(rec);
    if (on_checkpoint && checkpoint_every > 0 && step % checkpoint_every == 0) on_checkpoint(step);
  }
  model.output_scale = adacos ? state.scale : 1.0;
  return records;
}

}  // namespace alphaembed::nn
