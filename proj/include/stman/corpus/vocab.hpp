#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "stman/corpus/dialogue.hpp"

namespace stman::corpus {

/// Token → id map. Ids 0 and 1 are reserved for UNK and PAD; the remaining
/// ids are assigned by descending training frequency, ties broken
/// lexicographically.
class Vocabulary {
 public:
  static constexpr std::int64_t kUnk = 0;
  static constexpr std::int64_t kPad = 1;
  static constexpr const char* kUnkToken = "<unk>";
  static constexpr const char* kPadToken = "<pad>";

  Vocabulary();

  /// Builds from the training split only. Tokens seen fewer than
  /// `min_count` times map to UNK. Throws ContractError if min_count < 1.
  static Vocabulary build(std::span<const Dialogue> train, std::size_t min_count = 1);
  /// Rebuilds from an id-ordered token list (reserved entries included).
  static Vocabulary from_tokens(std::vector<std::string> tokens);

  std::int64_t id(const std::string& token) const;
  const std::string& token(std::int64_t id) const;
  bool contains(const std::string& token) const { return index_.count(token) > 0; }
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  /// Text file with one "token<TAB>id" line per entry.
  void save(const std::filesystem::path& path) const;
  static Vocabulary load(const std::filesystem::path& path);

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.tokens_ == b.tokens_;
  }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::int64_t> index_;
};

}  // namespace stman::corpus
