#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"

#include "alphaembed/nn/model.hpp"

namespace alphaembed::nn {

nlohmann::ordered_json model_config_to_json(const ModelConfig& c);
ModelConfig model_config_from_json(const nlohmann::json& j);
nlohmann::ordered_json embedding_config_to_json(const EmbeddingConfig& c);
EmbeddingConfig embedding_config_from_json(const nlohmann::json& j);

// JSON container: configuration, vocabulary, the embedding's installed beta
// set and every parameter as base64 float32 with its shape.
nlohmann::ordered_json checkpoint_to_json(Seq2SeqImpl& model, const nlohmann::json& extra = {});
Seq2Seq checkpoint_from_json(const nlohmann::json& j);

// Throws DataError when the file cannot be read or written or is malformed.
void save_checkpoint(const std::filesystem::path& path, Seq2SeqImpl& model,
                     const nlohmann::json& extra = {});
Seq2Seq load_checkpoint(const std::filesystem::path& path, nlohmann::json* extra = nullptr);

}  // namespace alphaembed::nn
