#pragma once

#include <cstdint>
#include <string>

#include "sedkit/corpus.hpp"

namespace sedkit {

/// Planted-event corpus: every event owns a disjoint word pool, a few
/// hashtags, entities and users; messages draw from their own event's pools
/// plus an optional shared background vocabulary.
struct SyntheticOptions {
  std::size_t messages = 1000;
  std::size_t events = 10;
  std::size_t words_per_event = 30;
  std::size_t tokens_per_message = 8;
  std::size_t background_words = 40;
  double background_rate = 0.2;  // probability a token comes from the background pool
  std::size_t hashtags_per_event = 3;
  std::size_t entities_per_event = 5;
  std::size_t users_per_event = 15;
  double foreign_user_rate = 0.05;  // probability a message is posted by another event's user
  std::uint64_t seed = 2024;
};

/// Pronounceable pseudo-word for a global index; distinct indices give distinct words.
std::string synthetic_word(std::size_t index);

Corpus generate_synthetic(const SyntheticOptions& options, std::string name = "synthetic");

}  // namespace sedkit
