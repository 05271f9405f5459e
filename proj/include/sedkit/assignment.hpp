#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "sedkit/corpus.hpp"

namespace sedkit {

/// Message id -> predicted event id, dense 0..C-1 in first-appearance order.
struct EventAssignment {
  std::vector<std::string> ids;
  std::vector<std::uint32_t> events;
  std::size_t event_count = 0;

  std::size_t size() const { return ids.size(); }
  bool check_invariants() const;

  friend bool operator==(const EventAssignment&, const EventAssignment&) = default;
};

/// Re-encodes arbitrary labels densely in order of first appearance.
std::vector<std::uint32_t> densify(std::span<const std::int64_t> labels);
std::vector<std::uint32_t> densify(std::span<const std::uint32_t> labels);

/// Builds an assignment aligned with corpus order from per-message labels.
EventAssignment make_assignment(const Corpus& corpus, std::span<const std::int64_t> labels);
EventAssignment make_assignment(const Corpus& corpus, std::span<const std::uint32_t> labels);

/// "message_id<TAB>event_id" per line, corpus order.
void write_assignment(std::ostream& out, const EventAssignment& assignment);
EventAssignment read_assignment(const std::filesystem::path& path);

}  // namespace sedkit
