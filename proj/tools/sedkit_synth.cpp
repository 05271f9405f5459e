// Writes a planted-event corpus in the canonical JSONL format.
#include <iostream>

#include <CLI11.hpp>

#include "sedkit/error.hpp"
#include "sedkit/synthetic.hpp"

int main(int argc, char** argv) {
  sedkit::SyntheticOptions o;
  std::string out;
  std::string name = "synthetic";
  CLI::App app{"generate a synthetic labeled corpus"};
  app.add_option("out", out, "output JSONL path")->required();
  app.add_option("--messages", o.messages, "message count")->capture_default_str();
  app.add_option("--events", o.events, "planted events")->capture_default_str();
  app.add_option("--words-per-event", o.words_per_event, "vocabulary size of each event")->capture_default_str();
  app.add_option("--tokens", o.tokens_per_message, "words per message")->capture_default_str();
  app.add_option("--background-words", o.background_words, "shared background vocabulary size")->capture_default_str();
  app.add_option("--background-rate", o.background_rate, "chance a word comes from the background pool")->capture_default_str();
  app.add_option("--seed", o.seed)->capture_default_str();
  app.add_option("--name", name, "corpus name")->capture_default_str();
  CLI11_PARSE(app, argc, argv);
  try {
    sedkit::write_corpus(out, sedkit::generate_synthetic(o, name));
  } catch (const sedkit::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
