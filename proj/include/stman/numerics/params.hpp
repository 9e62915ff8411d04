#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "stman/numerics/matrix.hpp"

namespace stman::num {

/// Which optimizer phase may touch a parameter. Matches the parameter
/// partition used by the adversarial training schedule.
enum class ParamGroup : std::uint8_t {
  Encoder,
  DenseUse,
  DenseSa,
  SharedGru,
  UseGru,
  SaGru,
  TurnEmbedding,
  UseHead,
  SaHead,
  Discriminator,
};

std::string_view to_string(ParamGroup g);

struct Parameter {
  std::string name;
  ParamGroup group;
  Matrix value;
  Matrix grad;
};

/// Named trainable matrices in registration order. Addresses are stable for
/// the lifetime of the store so tape leaves can point at them.
class ParamStore {
 public:
  ParamStore() = default;
  ParamStore(const ParamStore& other);
  ParamStore& operator=(const ParamStore& other);
  ParamStore(ParamStore&&) noexcept = default;
  ParamStore& operator=(ParamStore&&) noexcept = default;

  Parameter& add(std::string name, ParamGroup group, std::size_t rows, std::size_t cols);

  Parameter& get(std::string_view name);
  const Parameter& get(std::string_view name) const;
  Parameter* find(std::string_view name);
  const Parameter* find(std::string_view name) const;

  std::size_t count() const { return params_.size(); }
  std::size_t scalar_count() const;

  std::vector<Parameter*> all();
  std::vector<const Parameter*> all() const;
  std::vector<Parameter*> in_groups(std::initializer_list<ParamGroup> groups);

  /// Draws every entry from U(lo, hi). Each parameter gets its own stream
  /// keyed by (seed, name) so variants sharing a name share initial values.
  void init_uniform(std::uint64_t seed, double lo, double hi);
  void zero_grad();

  /// Copies values (not gradients) from a store with identical layout.
  void copy_values_from(const ParamStore& other);

  /// FNV-1a over the raw bytes of the selected parameter values.
  std::uint64_t fingerprint(const std::function<bool(const Parameter&)>& select) const;
  std::uint64_t fingerprint() const;

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
};

}  // namespace stman::num
