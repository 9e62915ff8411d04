#include "stman/corpus/vocab.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include "stman/errors.hpp"

namespace stman::corpus {

Vocabulary::Vocabulary() : tokens_{kUnkToken, kPadToken}, index_{{kUnkToken, kUnk}, {kPadToken, kPad}} {}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens) {
  if (tokens.size() < 2 || tokens[kUnk] != kUnkToken || tokens[kPad] != kPadToken) {
    throw ParseError("vocabulary must start with reserved entries <unk> and <pad>");
  }
  Vocabulary v;
  v.tokens_ = std::move(tokens);
  v.index_.clear();
  for (std::size_t i = 0; i < v.tokens_.size(); ++i) {
    if (!v.index_.emplace(v.tokens_[i], static_cast<std::int64_t>(i)).second) {
      throw ParseError("duplicate vocabulary token \"" + v.tokens_[i] + "\"");
    }
  }
  return v;
}

Vocabulary Vocabulary::build(std::span<const Dialogue> train, std::size_t min_count) {
  if (min_count < 1) throw ContractError("build_vocab: min_count must be >= 1");
  std::map<std::string, std::size_t> counts;
  for (const auto& d : train) {
    for (const auto& u : d.utterances) {
      for (const auto& t : u.tokens) ++counts[t];
    }
  }
  std::vector<std::pair<std::string, std::size_t>> kept;
  for (auto& [tok, n] : counts) {
    if (n >= min_count && tok != kUnkToken && tok != kPadToken) kept.emplace_back(tok, n);
  }
  std::stable_sort(kept.begin(), kept.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> tokens = {kUnkToken, kPadToken};
  for (auto& [tok, n] : kept) tokens.push_back(tok);
  return from_tokens(std::move(tokens));
}

std::int64_t Vocabulary::id(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? kUnk : it->second;
}

const std::string& Vocabulary::token(std::int64_t id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
    throw ContractError("vocabulary id " + std::to_string(id) + " out of range");
  }
  return tokens_[static_cast<std::size_t>(id)];
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write vocabulary file " + path.string());
  for (std::size_t i = 0; i < tokens_.size(); ++i) out << tokens_[i] << '\t' << i << '\n';
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open vocabulary file " + path.string());
  std::vector<std::string> tokens;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto tab = line.rfind('\t');
    if (tab == std::string::npos) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": expected token<TAB>id");
    }
    const std::string id_text = line.substr(tab + 1);
    std::size_t id = 0;
    try {
      id = std::stoul(id_text);
    } catch (const std::exception&) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": bad id \"" + id_text + "\"");
    }
    if (id != tokens.size()) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": ids must be contiguous from 0");
    }
    tokens.push_back(line.substr(0, tab));
  }
  return from_tokens(std::move(tokens));
}

}  // namespace stman::corpus
