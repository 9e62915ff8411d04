#include "stman/corpus/dialogue.hpp"

#include "stman/errors.hpp"

namespace stman::corpus {

namespace {

template <typename Enum, std::size_t N>
std::optional<Enum> lookup(const std::array<std::string_view, N>& names, std::string_view s) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == s) return static_cast<Enum>(i);
  }
  return std::nullopt;
}

}  // namespace

std::string_view to_string(Role r) { return kRoleNames[static_cast<std::size_t>(r)]; }
std::string_view to_string(Sentiment s) { return kSentimentNames[static_cast<std::size_t>(s)]; }
std::string_view to_string(Satisfaction s) {
  return kSatisfactionNames[static_cast<std::size_t>(s)];
}

std::optional<Role> parse_role(std::string_view s) { return lookup<Role>(kRoleNames, s); }
std::optional<Sentiment> parse_sentiment(std::string_view s) {
  return lookup<Sentiment>(kSentimentNames, s);
}
std::optional<Satisfaction> parse_satisfaction(std::string_view s) {
  return lookup<Satisfaction>(kSatisfactionNames, s);
}

std::vector<std::uint8_t> relabel_speaker_turns(std::span<const Role> roles) {
  if (roles.empty()) throw ContractError("relabel_speaker_turns: empty speaker sequence");
  std::vector<std::uint8_t> flags(roles.size());
  flags[0] = 0;
  for (std::size_t t = 1; t < roles.size(); ++t) {
    flags[t] = roles[t] != roles[t - 1] ? static_cast<std::uint8_t>(1 - flags[t - 1]) : flags[t - 1];
  }
  return flags;
}

std::vector<Role> speakers(const Dialogue& d) {
  std::vector<Role> out;
  out.reserve(d.utterances.size());
  for (const auto& u : d.utterances) out.push_back(u.speaker);
  return out;
}

const Utterance* first_user_utterance(const Dialogue& d) {
  for (const auto& u : d.utterances) {
    if (u.speaker == Role::User) return &u;
  }
  return nullptr;
}

const Utterance* last_user_utterance(const Dialogue& d) {
  for (auto it = d.utterances.rbegin(); it != d.utterances.rend(); ++it) {
    if (it->speaker == Role::User) return &*it;
  }
  return nullptr;
}

}  // namespace stman::corpus
