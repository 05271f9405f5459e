#include "sedkit/assignment.hpp"

#include <fstream>
#include <ostream>
#include <set>
#include <unordered_map>

#include "sedkit/error.hpp"
#include "sedkit/text_util.hpp"

namespace sedkit {

namespace {

template <typename T>
std::vector<std::uint32_t> densify_impl(std::span<const T> labels) {
  std::unordered_map<T, std::uint32_t> dense;
  std::vector<std::uint32_t> out;
  out.reserve(labels.size());
  for (const T& l : labels) {
    auto [it, inserted] = dense.emplace(l, static_cast<std::uint32_t>(dense.size()));
    out.push_back(it->second);
  }
  return out;
}

template <typename T>
EventAssignment make_assignment_impl(const Corpus& corpus, std::span<const T> labels) {
  if (labels.size() != corpus.size()) {
    throw Error(ErrorCode::kCoverageMismatch,
                std::to_string(labels.size()) + " labels for " + std::to_string(corpus.size()) + " messages");
  }
  EventAssignment a;
  a.ids.reserve(corpus.size());
  for (const auto& m : corpus.messages()) a.ids.push_back(m.id);
  a.events = densify_impl(labels);
  for (auto e : a.events) a.event_count = std::max<std::size_t>(a.event_count, e + 1);
  return a;
}

}  // namespace

bool EventAssignment::check_invariants() const {
  if (ids.size() != events.size()) return false;
  std::set<std::string> seen(ids.begin(), ids.end());
  if (seen.size() != ids.size()) return false;
  std::vector<bool> used(event_count, false);
  for (auto e : events) {
    if (e >= event_count) return false;
    used[e] = true;
  }
  for (bool u : used) {
    if (!u) return false;
  }
  return true;
}

std::vector<std::uint32_t> densify(std::span<const std::int64_t> labels) { return densify_impl(labels); }
std::vector<std::uint32_t> densify(std::span<const std::uint32_t> labels) { return densify_impl(labels); }

EventAssignment make_assignment(const Corpus& corpus, std::span<const std::int64_t> labels) {
  return make_assignment_impl(corpus, labels);
}
EventAssignment make_assignment(const Corpus& corpus, std::span<const std::uint32_t> labels) {
  return make_assignment_impl(corpus, labels);
}

void write_assignment(std::ostream& out, const EventAssignment& assignment) {
  for (std::size_t i = 0; i < assignment.size(); ++i) out << assignment.ids[i] << '\t' << assignment.events[i] << '\n';
}

EventAssignment read_assignment(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kFileNotFound, path.string());
  EventAssignment a;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto cells = split(line, '\t');
    if (cells.size() != 2) throw ParseError(line_no, "expected id<TAB>event");
    a.ids.emplace_back(cells[0]);
    try {
      a.events.push_back(static_cast<std::uint32_t>(std::stoul(std::string(cells[1]))));
    } catch (const std::exception&) {
      throw ParseError(line_no, "event id is not an integer");
    }
  }
  for (auto e : a.events) a.event_count = std::max<std::size_t>(a.event_count, e + 1);
  return a;
}

}  // namespace sedkit
