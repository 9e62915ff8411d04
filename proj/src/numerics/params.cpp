#include "stman/numerics/params.hpp"

#include <algorithm>
#include <cstring>

#include "stman/errors.hpp"
#include "stman/rng.hpp"

namespace stman::num {

std::string_view to_string(ParamGroup g) {
  switch (g) {
    case ParamGroup::Encoder: return "encoder";
    case ParamGroup::DenseUse: return "dense_use";
    case ParamGroup::DenseSa: return "dense_sa";
    case ParamGroup::SharedGru: return "shared_gru";
    case ParamGroup::UseGru: return "use_gru";
    case ParamGroup::SaGru: return "sa_gru";
    case ParamGroup::TurnEmbedding: return "turn_embedding";
    case ParamGroup::UseHead: return "use_head";
    case ParamGroup::SaHead: return "sa_head";
    case ParamGroup::Discriminator: return "discriminator";
  }
  return "unknown";
}

ParamStore::ParamStore(const ParamStore& other) {
  params_.reserve(other.params_.size());
  for (const auto& p : other.params_) params_.push_back(std::make_unique<Parameter>(*p));
}

ParamStore& ParamStore::operator=(const ParamStore& other) {
  if (this != &other) {
    ParamStore copy(other);
    params_ = std::move(copy.params_);
  }
  return *this;
}

Parameter& ParamStore::add(std::string name, ParamGroup group, std::size_t rows,
                           std::size_t cols) {
  if (find(name) != nullptr) throw ContractError("duplicate parameter name: " + name);
  auto p = std::make_unique<Parameter>(
      Parameter{std::move(name), group, Matrix(rows, cols), Matrix(rows, cols)});
  params_.push_back(std::move(p));
  return *params_.back();
}

Parameter* ParamStore::find(std::string_view name) {
  for (auto& p : params_) {
    if (p->name == name) return p.get();
  }
  return nullptr;
}

const Parameter* ParamStore::find(std::string_view name) const {
  for (const auto& p : params_) {
    if (p->name == name) return p.get();
  }
  return nullptr;
}

Parameter& ParamStore::get(std::string_view name) {
  Parameter* p = find(name);
  if (p == nullptr) throw ContractError("unknown parameter: " + std::string(name));
  return *p;
}

const Parameter& ParamStore::get(std::string_view name) const {
  const Parameter* p = find(name);
  if (p == nullptr) throw ContractError("unknown parameter: " + std::string(name));
  return *p;
}

std::size_t ParamStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p->value.size();
  return n;
}

std::vector<Parameter*> ParamStore::all() {
  std::vector<Parameter*> out;
  out.reserve(params_.size());
  for (auto& p : params_) out.push_back(p.get());
  return out;
}

std::vector<const Parameter*> ParamStore::all() const {
  std::vector<const Parameter*> out;
  out.reserve(params_.size());
  for (const auto& p : params_) out.push_back(p.get());
  return out;
}

std::vector<Parameter*> ParamStore::in_groups(std::initializer_list<ParamGroup> groups) {
  std::vector<Parameter*> out;
  for (auto& p : params_) {
    if (std::find(groups.begin(), groups.end(), p->group) != groups.end()) {
      out.push_back(p.get());
    }
  }
  return out;
}

void ParamStore::init_uniform(std::uint64_t seed, double lo, double hi) {
  for (auto& p : params_) {
    Rng rng(seed, "init/" + p->name);
    for (double& x : p->value.values()) x = rng.uniform(lo, hi);
  }
}

void ParamStore::zero_grad() {
  for (auto& p : params_) p->grad.fill(0.0);
}

void ParamStore::copy_values_from(const ParamStore& other) {
  if (other.params_.size() != params_.size()) {
    throw ShapeError("parameter stores differ in size");
  }
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const Parameter& src = *other.params_[i];
    Parameter& dst = *params_[i];
    if (src.name != dst.name || !src.value.same_shape(dst.value)) {
      throw ShapeError("parameter layout mismatch at " + dst.name);
    }
    dst.value = src.value;
  }
}

std::uint64_t ParamStore::fingerprint(
    const std::function<bool(const Parameter&)>& select) const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& p : params_) {
    if (!select(*p)) continue;
    for (double x : p->value.values()) {
      unsigned char bytes[sizeof(double)];
      std::memcpy(bytes, &x, sizeof(double));
      for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
      }
    }
  }
  return h;
}

std::uint64_t ParamStore::fingerprint() const {
  return fingerprint([](const Parameter&) { return true; });
}

}  // namespace stman::num
