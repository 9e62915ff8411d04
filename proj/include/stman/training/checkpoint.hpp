#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include <json.hpp>

#include "stman/corpus/vocab.hpp"
#include "stman/model/stman.hpp"

namespace stman::train {

inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  std::unique_ptr<model::StmanModel> model;
  corpus::Vocabulary vocab;
};

/// JSON document: format tag, version, config text, vocabulary tokens in id
/// order, and every parameter as {name, rows, cols, data}. Serialization is
/// deterministic, so equal models give byte-identical files.
nlohmann::ordered_json checkpoint_to_json(const model::StmanModel& model,
                                          const corpus::Vocabulary& vocab);
/// Rebuilds the model from its config and checks every parameter: no
/// missing, unknown or mis-shaped entries. Throws ParseError.
Checkpoint checkpoint_from_json(const nlohmann::ordered_json& j);

void save_checkpoint(const std::filesystem::path& path, const model::StmanModel& model,
                     const corpus::Vocabulary& vocab);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace stman::train
