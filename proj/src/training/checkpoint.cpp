#include "stman/training/checkpoint.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "stman/errors.hpp"

namespace stman::train {

namespace {

constexpr const char* kFormat = "stman-checkpoint";

}  // namespace

nlohmann::ordered_json checkpoint_to_json(const model::StmanModel& model,
                                          const corpus::Vocabulary& vocab) {
  nlohmann::ordered_json j;
  j["format"] = kFormat;
  j["version"] = kCheckpointVersion;
  j["config"] = to_config_text(model.config());
  j["vocab"] = vocab.tokens();
  auto params = nlohmann::ordered_json::array();
  for (const num::Parameter* p : model.params().all()) {
    params.push_back({{"name", p->name},
                      {"rows", p->value.rows()},
                      {"cols", p->value.cols()},
                      {"data", p->value.storage()}});
  }
  j["params"] = std::move(params);
  return j;
}

Checkpoint checkpoint_from_json(const nlohmann::ordered_json& j) {
  try {
    if (j.at("format").get<std::string>() != kFormat) throw ParseError("checkpoint: bad format tag");
    const int version = j.at("version").get<int>();
    if (version != kCheckpointVersion) {
      throw ParseError("checkpoint: unsupported version " + std::to_string(version));
    }
    std::istringstream cfg(j.at("config").get<std::string>());
    const ModelConfig config = parse_config(cfg, "<checkpoint config>");

    Checkpoint c;
    c.vocab = corpus::Vocabulary::from_tokens(j.at("vocab").get<std::vector<std::string>>());
    c.model = std::make_unique<model::StmanModel>(config, c.vocab.size());

    std::set<std::string> seen;
    for (const auto& entry : j.at("params")) {
      const auto name = entry.at("name").get<std::string>();
      num::Parameter* p = c.model->params().find(name);
      if (p == nullptr) throw ParseError("checkpoint: unknown parameter '" + name + "'");
      if (!seen.insert(name).second) throw ParseError("checkpoint: duplicate parameter '" + name + "'");
      const auto rows = entry.at("rows").get<std::size_t>();
      const auto cols = entry.at("cols").get<std::size_t>();
      auto data = entry.at("data").get<std::vector<double>>();
      if (rows != p->value.rows() || cols != p->value.cols() || data.size() != rows * cols) {
        throw ParseError("checkpoint: parameter '" + name + "' has shape " +
                         num::shape_str(rows, cols) + " with " + std::to_string(data.size()) +
                         " values, model expects " + p->value.shape_str());
      }
      p->value = num::Matrix(rows, cols, std::move(data));
    }
    if (seen.size() != c.model->params().count()) {
      for (const num::Parameter* p : std::as_const(*c.model).params().all()) {
        if (!seen.contains(p->name)) throw ParseError("checkpoint: missing parameter '" + p->name + "'");
      }
    }
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("checkpoint: ") + e.what());
  } catch (const ContractError& e) {
    throw ParseError(std::string("checkpoint: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const model::StmanModel& model,
                     const corpus::Vocabulary& vocab) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ContractError("cannot write checkpoint " + path.string());
  out << checkpoint_to_json(model, vocab).dump() << '\n';
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ContractError("cannot read checkpoint " + path.string());
  nlohmann::ordered_json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return checkpoint_from_json(j);
}

}  // namespace stman::train
