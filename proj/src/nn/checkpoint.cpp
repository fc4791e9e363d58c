#include "alphaembed/nn/checkpoint.hpp"

#include <boost/archive/iterators/base64_from_binary.hpp>
#include <boost/archive/iterators/binary_from_base64.hpp>
#include <boost/archive/iterators/transform_width.hpp>
#include <fstream>

#include "alphaembed/errors.hpp"

namespace alphaembed::nn {

namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

std::string to_base64(const torch::Tensor& t) {
  using namespace boost::archive::iterators;
  using It = base64_from_binary<transform_width<const char*, 6, 8>>;
  const auto c = t.detach().to(torch::kFloat32).contiguous();
  const auto* begin = static_cast<const char*>(c.data_ptr());
  const auto bytes = static_cast<std::size_t>(c.numel()) * sizeof(float);
  std::string out(It(begin), It(begin + bytes));
  out.append((3 - bytes % 3) % 3, '=');
  return out;
}

torch::Tensor from_base64(const std::string& text, const std::vector<int64_t>& shape) {
  using namespace boost::archive::iterators;
  using It = transform_width<binary_from_base64<std::string::const_iterator>, 8, 6>;
  auto trimmed = text;
  const auto pad = trimmed.size() - trimmed.find_last_not_of('=') - 1;
  std::replace(trimmed.end() - static_cast<std::ptrdiff_t>(pad), trimmed.end(), '=', 'A');
  std::string bytes(It(trimmed.cbegin()), It(trimmed.cend()));
  bytes.resize(bytes.size() - pad);
  auto t = torch::empty(shape, torch::kFloat32);
  if (bytes.size() != static_cast<std::size_t>(t.numel()) * sizeof(float)) {
    throw DataError("parameter payload does not match its shape");
  }
  std::memcpy(t.data_ptr(), bytes.data(), bytes.size());
  return t;
}

ojson tensor_to_json(const torch::Tensor& t) {
  ojson j;
  j["shape"] = t.sizes().vec();
  j["data"] = to_base64(t);
  return j;
}

torch::Tensor tensor_from_json(const json& j) {
  return from_base64(j.at("data").get<std::string>(), j.at("shape").get<std::vector<int64_t>>());
}

}  // namespace

ojson model_config_to_json(const ModelConfig& c) {
  ojson j;
  j["d_model"] = c.d_model;
  j["layers"] = c.layers;
  j["heads"] = c.heads;
  j["fc_size"] = c.fc_size;
  j["dropout"] = c.dropout;
  j["max_source_length"] = c.max_source_length;
  j["max_target_length"] = c.max_target_length;
  j["encoder_positions"] = to_string(c.encoder_positions);
  j["tie_embeddings"] = c.tie_embeddings;
  return j;
}

ModelConfig model_config_from_json(const json& j) {
  ModelConfig c;
  c.d_model = j.at("d_model");
  c.layers = j.at("layers");
  c.heads = j.at("heads");
  c.fc_size = j.at("fc_size");
  c.dropout = j.at("dropout");
  c.max_source_length = j.at("max_source_length");
  c.max_target_length = j.at("max_target_length");
  c.encoder_positions = encoder_positions_from_string(j.at("encoder_positions"));
  c.tie_embeddings = j.at("tie_embeddings");
  return c;
}

ojson embedding_config_to_json(const EmbeddingConfig& c) {
  ojson j;
  j["kind"] = c.kind == EmbeddingKind::DualPart ? "dual-part" : "baseline";
  j["method"] = to_string(c.method.kind);
  j["d_beta"] = c.method.d_beta;
  j["unique"] = c.method.enforce_unique;
  j["f_bn"] = c.flags.f_bn;
  j["f_fn"] = c.flags.f_fn;
  j["augmentation"] = to_string(c.augmentation);
  return j;
}

EmbeddingConfig embedding_config_from_json(const json& j) {
  EmbeddingConfig c;
  const auto kind = j.at("kind").get<std::string>();
  if (kind != "dual-part" && kind != "baseline") throw DataError("unknown embedding kind " + kind);
  c.kind = kind == "dual-part" ? EmbeddingKind::DualPart : EmbeddingKind::Baseline;
  c.method = RandMethod(rand_kind_from_string(j.at("method")), j.at("d_beta"), j.at("unique"));
  c.flags = {j.at("f_bn"), j.at("f_fn")};
  c.augmentation = baseline_augmentation_from_string(j.at("augmentation"));
  return c;
}

ojson checkpoint_to_json(Seq2SeqImpl& model, const json& extra) {
  ojson j;
  j["format"] = "alphaembed-checkpoint";
  j["version"] = 1;
  j["model"] = model_config_to_json(model.config());
  j["embedding"] = embedding_config_to_json(model.embedding_config());
  j["vocabulary"] = {{"symbols", model.vocabulary().symbols()},
                     {"interchangeable", model.vocabulary().interchangeable_count()}};
  j["output_scale"] = model.output_scale;
  if (auto* dual = model.dual_part(); dual && dual->betas().size(0) == dual->interchangeable_count() &&
                                      dual->interchangeable_count() > 0) {
    j["betas"] = tensor_to_json(dual->betas());
  }
  auto params = ojson::object();
  for (const auto& item : model.named_parameters()) params[item.key()] = tensor_to_json(item.value());
  j["parameters"] = params;
  if (!extra.is_null()) j["extra"] = extra;
  return j;
}

Seq2Seq checkpoint_from_json(const json& j) {
  try {
    if (j.at("format") != "alphaembed-checkpoint") throw DataError("not a checkpoint file");
    const Vocabulary v(j.at("vocabulary").at("symbols").get<std::vector<std::string>>(),
                       j.at("vocabulary").at("interchangeable").get<int>());
    Seq2Seq model(model_config_from_json(j.at("model")), embedding_config_from_json(j.at("embedding")), v);
    model->output_scale = j.at("output_scale");
    torch::NoGradGuard no_grad;
    const auto& params = j.at("parameters");
    for (auto& item : model->named_parameters()) {
      const auto t = tensor_from_json(params.at(item.key()));
      if (t.sizes() != item.value().sizes()) throw DataError("shape mismatch for " + item.key());
      item.value().copy_(t);
    }
    if (j.contains("betas")) {
      if (auto* dual = model->dual_part()) dual->install_betas(tensor_from_json(j.at("betas")));
    }
    return model;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed checkpoint: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, Seq2SeqImpl& model, const json& extra) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << checkpoint_to_json(model, extra).dump() << '\n';
  if (!out) throw DataError("failed writing " + path.string());
}

Seq2Seq load_checkpoint(const std::filesystem::path& path, json* extra) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw DataError("malformed checkpoint " + path.string() + ": " + e.what());
  }
  if (extra) *extra = j.value("extra", json{});
  return checkpoint_from_json(j);
}

}  // namespace alphaembed::nn
