#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace stman::corpus {

enum class Role : std::uint8_t { User, Staff };
enum class Sentiment : std::uint8_t { Negative, Neutral, Positive };
enum class Satisfaction : std::uint8_t { Unsatisfied, Met, WellSatisfied };

inline constexpr std::size_t kNumSentiments = 3;
inline constexpr std::size_t kNumSatisfaction = 3;

inline constexpr std::array<std::string_view, 2> kRoleNames = {"user", "staff"};
inline constexpr std::array<std::string_view, kNumSentiments> kSentimentNames = {
    "negative", "neutral", "positive"};
inline constexpr std::array<std::string_view, kNumSatisfaction> kSatisfactionNames = {
    "unsatisfied", "met", "well_satisfied"};

std::string_view to_string(Role r);
std::string_view to_string(Sentiment s);
std::string_view to_string(Satisfaction s);

std::optional<Role> parse_role(std::string_view s);
std::optional<Sentiment> parse_sentiment(std::string_view s);
std::optional<Satisfaction> parse_satisfaction(std::string_view s);

struct Utterance {
  std::vector<std::string> tokens;
  Role speaker = Role::User;
  Sentiment sentiment = Sentiment::Neutral;

  friend bool operator==(const Utterance&, const Utterance&) = default;
};

struct Dialogue {
  std::string id;
  std::vector<Utterance> utterances;
  Satisfaction satisfaction = Satisfaction::Met;

  friend bool operator==(const Dialogue&, const Dialogue&) = default;
};

/// negative→unsatisfied, neutral→met, positive→well_satisfied.
constexpr Satisfaction canonical_satisfaction(Sentiment s) {
  return static_cast<Satisfaction>(static_cast<std::uint8_t>(s));
}

/// Speaker-turn flags: the first utterance gets 0 and the flag flips each
/// time the speaker differs from the previous utterance's speaker.
/// <U,S,U,S,U,S,U,U,S> → <0,1,0,1,0,1,0,0,1>. Throws ContractError on empty input.
std::vector<std::uint8_t> relabel_speaker_turns(std::span<const Role> roles);

std::vector<Role> speakers(const Dialogue& d);

/// First / last user utterance, if any.
const Utterance* first_user_utterance(const Dialogue& d);
const Utterance* last_user_utterance(const Dialogue& d);

}  // namespace stman::corpus
