#include "sedkit/synthetic.hpp"

#include <array>

#include "sedkit/error.hpp"
#include "sedkit/rng.hpp"

namespace sedkit {

std::string synthetic_word(std::size_t index) {
  static constexpr std::array<const char*, 20> kSyllables = {"ka", "lo", "mi", "ne", "ru", "ta", "vo", "zi", "be", "du",
                                                             "fa", "go", "hi", "ju", "pe", "qo", "sa", "wi", "xe", "yo"};
  std::string word;
  // Scramble small indices so neighbouring words do not share suffixes.
  std::size_t x = index < 8000 ? (index * 7919) % 8000 : index;
  for (int i = 0; i < 3 || x > 0; ++i) {
    word += kSyllables[x % kSyllables.size()];
    x /= kSyllables.size();
  }
  return word;
}

Corpus generate_synthetic(const SyntheticOptions& o, std::string name) {
  if (o.messages == 0 || o.events == 0 || o.words_per_event == 0 || o.tokens_per_message == 0) {
    throw Error(ErrorCode::kInvalidArgument, "synthetic corpus needs messages, events, words and tokens");
  }
  if (o.hashtags_per_event == 0 || o.entities_per_event == 0 || o.users_per_event == 0) {
    throw Error(ErrorCode::kInvalidArgument, "synthetic events need hashtags, entities and users");
  }
  if (o.background_words == 0 && o.background_rate > 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "background_rate > 0 needs background words");
  }
  Rng rng(o.seed);
  const std::size_t background_base = o.events * o.words_per_event;
  std::vector<RawMessage> raw;
  raw.reserve(o.messages);
  for (std::size_t i = 0; i < o.messages; ++i) {
    const std::size_t event = i % o.events;
    Message m;
    m.id = "m" + std::to_string(100000 + i);
    m.timestamp = 1350000000 + static_cast<std::int64_t>(i) * 60;

    std::size_t user_event = event;
    if (o.events > 1 && rng.uniform() < o.foreign_user_rate) user_event = (event + 1 + rng.below(o.events - 1)) % o.events;
    m.user_id = "u" + std::to_string(user_event * o.users_per_event + rng.below(o.users_per_event));

    std::string text;
    for (std::size_t t = 0; t < o.tokens_per_message; ++t) {
      std::size_t word;
      if (o.background_words > 0 && rng.uniform() < o.background_rate) {
        word = background_base + rng.below(o.background_words);
      } else {
        word = event * o.words_per_event + rng.below(o.words_per_event);
      }
      if (!text.empty()) text += ' ';
      text += synthetic_word(word);
    }

    const std::string tag = "e" + std::to_string(event) + synthetic_word(rng.below(o.hashtags_per_event));
    m.hashtags.push_back(tag);
    text += " #" + tag;

    const std::size_t first = rng.below(o.entities_per_event);
    m.entities.push_back("Entity" + std::to_string(event * o.entities_per_event + first));
    if (o.entities_per_event > 1 && rng.uniform() < 0.5) {
      const std::size_t second = (first + 1 + rng.below(o.entities_per_event - 1)) % o.entities_per_event;
      m.entities.push_back("Entity" + std::to_string(event * o.entities_per_event + second));
    }
    m.text = std::move(text);
    raw.push_back({std::move(m), std::to_string(event)});
  }
  return Corpus::build(std::move(name), std::move(raw));
}

}  // namespace sedkit
