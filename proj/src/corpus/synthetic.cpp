#include "stman/corpus/synthetic.hpp"

#include <array>
#include <cstdio>
#include <string_view>

#include "stman/errors.hpp"
#include "stman/rng.hpp"

namespace stman::corpus {

namespace {

using Lexicon = std::array<std::string_view, 12>;

constexpr std::array<Lexicon, kNumSentiments> kCueWords = {{
    {"terrible", "broken", "refund", "angry", "disappointed", "worst", "late", "wrong",
     "complain", "useless", "damaged", "never"},
    {"size", "order", "check", "when", "shipping", "color", "address", "number", "question",
     "available", "tracking", "delivery"},
    {"great", "thanks", "perfect", "love", "happy", "excellent", "quick", "nice", "good",
     "satisfied", "wonderful", "appreciate"},
}};

constexpr Lexicon kUserFiller = {"i", "my", "the", "it", "is", "please", "can", "you", "was",
                                 "this", "item", "package"};
constexpr Lexicon kStaffFiller = {"we", "will", "your", "sorry", "help", "dear", "customer",
                                  "let", "me", "for", "our", "service"};

constexpr double kSpeakerSwitch = 0.7;
constexpr double kUserMoodPersistence = 0.6;
constexpr double kCueNoise = 0.1;

Sentiment draw_sentiment(Rng& rng, double p_neg, double p_neu) {
  const double u = rng.uniform01();
  if (u < p_neg) return Sentiment::Negative;
  if (u < p_neg + p_neu) return Sentiment::Neutral;
  return Sentiment::Positive;
}

std::vector<std::string> draw_tokens(Rng& rng, Role role, Sentiment sentiment) {
  const int length = rng.between(3, 8);
  const int cues = rng.between(1, 2);
  const Lexicon& filler = role == Role::User ? kUserFiller : kStaffFiller;
  std::vector<std::string> tokens;
  tokens.reserve(static_cast<std::size_t>(length));
  for (int i = 0; i < length; ++i) tokens.emplace_back(filler[rng.below(filler.size())]);
  // Cue words overwrite random positions.
  for (int c = 0; c < cues; ++c) {
    std::size_t s = static_cast<std::size_t>(sentiment);
    if (rng.bernoulli(kCueNoise)) s = (s + 1 + rng.below(kNumSentiments - 1)) % kNumSentiments;
    const Lexicon& lex = kCueWords[s];
    tokens[rng.below(tokens.size())] = std::string(lex[rng.below(lex.size())]);
  }
  return tokens;
}

}  // namespace

Dialogue generate_synthetic_dialogue(std::size_t index, double correlation_q, std::uint64_t seed) {
  Rng rng(seed + index);
  Dialogue d;
  char id[32];
  std::snprintf(id, sizeof id, "dlg-%06zu", index);
  d.id = id;

  const int length = rng.between(4, 14);
  Role role = Role::User;
  Sentiment mood = draw_sentiment(rng, 0.35, 0.35);
  bool first_user = true;
  const Utterance* final_user = nullptr;
  for (int t = 0; t < length; ++t) {
    if (t > 0 && rng.bernoulli(kSpeakerSwitch)) {
      role = role == Role::User ? Role::Staff : Role::User;
    }
    Utterance u;
    u.speaker = role;
    if (role == Role::User) {
      if (!first_user && !rng.bernoulli(kUserMoodPersistence)) {
        mood = static_cast<Sentiment>(rng.below(kNumSentiments));
      }
      first_user = false;
      u.sentiment = mood;
    } else {
      u.sentiment = draw_sentiment(rng, 0.05, 0.6);
    }
    u.tokens = draw_tokens(rng, role, u.sentiment);
    d.utterances.push_back(std::move(u));
  }
  for (const auto& u : d.utterances) {
    if (u.speaker == Role::User) final_user = &u;
  }

  const Satisfaction canonical = canonical_satisfaction(final_user->sentiment);
  if (rng.bernoulli(correlation_q)) {
    d.satisfaction = canonical;
  } else {
    const std::size_t shift = 1 + rng.below(kNumSatisfaction - 1);
    d.satisfaction = static_cast<Satisfaction>(
        (static_cast<std::size_t>(canonical) + shift) % kNumSatisfaction);
  }
  return d;
}

std::vector<Dialogue> generate_synthetic(std::size_t n_dialogues, double correlation_q,
                                         std::uint64_t seed) {
  if (!(correlation_q >= 0.0 && correlation_q <= 1.0)) {
    throw ContractError("correlation_q must lie in [0, 1]");
  }
  std::vector<Dialogue> out;
  out.reserve(n_dialogues);
  for (std::size_t i = 0; i < n_dialogues; ++i) {
    out.push_back(generate_synthetic_dialogue(i, correlation_q, seed));
  }
  return out;
}

}  // namespace stman::corpus
