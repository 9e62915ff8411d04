#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace stman {

/// Which parameters the adversarial maximization step updates alongside the
/// discriminator.
enum class AdvTarget : std::uint8_t {
  DenseLayers,  // task-specific projections (default)
  Decoders,     // USE/SA output heads
};

/// Whether the adversarial phase repeats every epoch or runs only in epoch 0.
enum class AdvSchedule : std::uint8_t { EveryEpoch, FirstEpoch };

/// Hyperparameters plus variant switches. Field names double as keys of the
/// key=value config file format.
struct ModelConfig {
  std::size_t K = 100;  // interaction hidden size
  std::size_t Z = 100;  // speaker-turn embedding size
  std::size_t H = 50;   // USE attention size
  std::size_t D = 100;  // word embedding size
  std::size_t E = 50;   // encoder LSTM size per direction (utterance vector is 2E)
  double dropout = 0.2;
  double lr = 0.1;
  double lr_decay = 0.8;
  double momentum_mu = 0.9;
  std::size_t batch = 32;
  std::size_t epochs = 30;
  std::uint64_t seed = 1;

  bool use_td = true;
  bool use_st = true;
  bool use_mask = true;
  bool use_aux = true;

  AdvTarget adv_target = AdvTarget::DenseLayers;
  AdvSchedule adv_schedule = AdvSchedule::EveryEpoch;
  double init_range = 0.01;
  std::size_t min_count = 1;
  /// Fraction of the training set the adversarial phase sees; 0 skips it.
  double td_fraction = 1.0;

  /// Throws ContractError naming the offending field.
  void validate() const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Ablation variants: basic, basic-mask, basic-aux, basic+td, basic+st, stman.
const std::vector<std::string>& variant_names();
/// Returns `base` with the flag set of the named variant. Throws ContractError
/// on unknown names.
ModelConfig with_variant(ModelConfig base, std::string_view name);
/// Name of the variant the flags correspond to, or "custom".
std::string variant_of(const ModelConfig& c);

/// Sets one field from its textual form. Throws ParseError.
void set_config_field(ModelConfig& c, std::string_view key, std::string_view value);
/// Reads `key=value` lines ('#' comments and blank lines ignored) over the
/// defaults.
ModelConfig parse_config(std::istream& in, const std::string& source = "<config>");
ModelConfig load_config(const std::filesystem::path& path);
/// Canonical text form; parse_config(to_config_text(c)) == c.
std::string to_config_text(const ModelConfig& c);
/// Applies STMAN_SEED from the environment when set.
void apply_env_overrides(ModelConfig& c);

}  // namespace stman
