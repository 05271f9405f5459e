#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "paths.hpp"
#include "sedkit/error.hpp"
#include "sedkit/corpus.hpp"
#include "sedkit/metrics.hpp"
#include "sedkit/rng.hpp"

using namespace sedkit;

namespace {

using L = std::vector<std::uint32_t>;

L random_labels(Rng& rng, std::size_t n, std::size_t clusters) {
  L l(n);
  for (auto& x : l) x = static_cast<std::uint32_t>(rng.below(clusters));
  return l;
}

L relabel(const L& l, std::uint32_t offset) {
  L out;
  for (auto x : l) out.push_back((x * 7 + offset) % 97);
  return out;
}

}  // namespace

TEST_CASE("nmi examples") {
  CHECK(nmi(L{0, 0, 1, 1}, L{0, 0, 1, 1}) == 1.0);
  CHECK(nmi(L{0, 0, 1, 1}, L{5, 5, 2, 2}) == 1.0);
  CHECK(nmi(L{0, 0, 1, 1}, L{0, 0, 0, 0}) == 0.0);
  CHECK(nmi(L{0, 0, 0}, L{1, 1, 1}) == 1.0);
  CHECK(nmi(L{0, 0, 1, 1}, L{0, 1, 0, 1}) == doctest::Approx(0.0));
  CHECK(mutual_information(ContingencyTable(L{0, 0, 1, 1}, L{0, 1, 0, 1})) == doctest::Approx(0.0));
}

TEST_CASE("ami examples") {
  CHECK(ami(L{0, 0, 1, 1}, L{1, 1, 0, 0}) == 1.0);
  const L t{0, 0, 1, 1}, p{0, 1, 0, 1};
  CHECK(ami(t, p) == doctest::Approx(oracle::ami(t, p, true)).epsilon(1e-12));
  CHECK(expected_mutual_information(ContingencyTable(t, p)) ==
        doctest::Approx(oracle::expected_mi_by_permutation(t, p)).epsilon(1e-12));
}

TEST_CASE("ari examples") {
  CHECK(ari(L{0, 0, 1, 1}, L{0, 0, 1, 1}) == 1.0);
  CHECK(ari(L{0, 0, 0}, L{4, 4, 4}) == 1.0);
  CHECK(ari(L{0, 1, 2}, L{2, 1, 0}) == 1.0);
  // 6 pairs: 2 together in truth, 2 together in prediction, none shared.
  CHECK(ari(L{0, 0, 1, 1}, L{0, 1, 0, 1}) == doctest::Approx(-0.5));
  CHECK(ari(L{0, 0, 1, 1}, L{0, 1, 0, 1}) == doctest::Approx(oracle::ari(L{0, 0, 1, 1}, L{0, 1, 0, 1})));
  CHECK(ari(L{0, 0, 1, 1}, L{0, 0, 1, 2}) == doctest::Approx(4.0 / 7.0));
}

TEST_CASE("contingency table") {
  const ContingencyTable t(L{3, 3, 9, 9, 9}, L{1, 2, 2, 2, 7});
  CHECK(t.rows() == 2);
  CHECK(t.cols() == 3);
  CHECK(t.total() == 5);
  CHECK(t.at(0, 0) == 1);
  CHECK(t.at(1, 1) == 2);
  std::uint64_t sum = 0;
  for (std::size_t r = 0; r < t.rows(); ++r) {
    std::uint64_t row = 0;
    for (std::size_t c = 0; c < t.cols(); ++c) row += t.at(r, c);
    CHECK(row == t.row_sum(r));
    sum += row;
  }
  CHECK(sum == t.total());
  CHECK_THROWS_WITH_AS(ContingencyTable(L{0, 1}, L{0}), doctest::Contains("LengthMismatch"), Error);
  CHECK_THROWS_WITH_AS(ContingencyTable(L{}, L{}), doctest::Contains("EmptyInput"), Error);
}

TEST_CASE("metrics agree with definitional brute force") {
  Rng rng(1234);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng.below(8);
    const auto t = random_labels(rng, n, 1 + rng.below(4));
    const auto p = random_labels(rng, n, 1 + rng.below(4));
    CAPTURE(trial);
    CHECK(std::abs(nmi(t, p) - oracle::nmi(t, p)) <= 1e-9);
    CHECK(std::abs(ami(t, p) - oracle::ami(t, p, n <= 6)) <= 1e-9);
    CHECK(std::abs(ari(t, p) - oracle::ari(t, p)) <= 1e-9);
  }
}

TEST_CASE("expected mutual information: permutations and binomials agree") {
  Rng rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.below(5);
    const auto t = random_labels(rng, n, 1 + rng.below(3));
    const auto p = random_labels(rng, n, 1 + rng.below(3));
    const double by_perm = oracle::expected_mi_by_permutation(t, p);
    CHECK(std::abs(oracle::expected_mi_by_binomials(t, p) - by_perm) <= 1e-12);
    CHECK(std::abs(expected_mutual_information(ContingencyTable(t, p)) - by_perm) <= 1e-12);
  }
}

TEST_CASE("ami is centered on random labelings") {
  Rng rng(5);
  L truth(20);
  for (std::size_t i = 0; i < 20; ++i) truth[i] = i < 10 ? 0 : 1;
  double total = 0.0;
  for (int trial = 0; trial < 200; ++trial) total += ami(truth, random_labels(rng, 20, 2));
  CHECK(std::abs(total / 200.0) < 0.05);
}

TEST_CASE("metric invariants") {
  Rng rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + rng.below(30);
    const auto t = random_labels(rng, n, 1 + rng.below(6));
    const auto p = random_labels(rng, n, 1 + rng.below(6));
    const double a = nmi(t, p), b = ami(t, p), c = ari(t, p);
    CHECK(a >= 0.0);
    CHECK(a <= 1.0 + 1e-12);
    CHECK(c >= -1.0 - 1e-12);
    CHECK(c <= 1.0 + 1e-12);
    CHECK(b <= a + 1e-9);
    CHECK(nmi(p, t) == doctest::Approx(a).epsilon(1e-12));
    CHECK(ami(p, t) == doctest::Approx(b).epsilon(1e-12));
    CHECK(ari(p, t) == doctest::Approx(c).epsilon(1e-12));
    CHECK(nmi(relabel(t, 3), relabel(p, 11)) == doctest::Approx(a).epsilon(1e-12));
    CHECK(ami(relabel(t, 5), p) == doctest::Approx(b).epsilon(1e-12));
    CHECK(ari(t, relabel(p, 2)) == doctest::Approx(c).epsilon(1e-12));
  }
}

TEST_CASE("ami stays accurate at scale") {
  Rng rng(3);
  const auto t = random_labels(rng, 20000, 50);
  auto p = t;
  for (std::size_t i = 0; i < p.size(); i += 3) p[i] = static_cast<std::uint32_t>(rng.below(50));
  const double v = ami(t, p);
  CHECK(v > 0.0);
  CHECK(v < 1.0);
  CHECK(v <= nmi(t, p));
  const auto q = random_labels(rng, 20000, 50);
  CHECK(std::abs(ami(t, q)) < 0.01);
}

TEST_CASE("compute_metrics and matched accuracy") {
  const auto r = compute_metrics(L{0, 0, 1, 1}, L{0, 1, 2, 3});
  CHECK(r.nmi == doctest::Approx(2.0 / 3.0));
  CHECK(r.ari == doctest::Approx(0.0));
  CHECK(r.ami == doctest::Approx(oracle::ami(L{0, 0, 1, 1}, L{0, 1, 2, 3}, true)).epsilon(1e-12));
  CHECK(r.predicted_clusters == 4);
  CHECK(r.true_clusters == 2);
  REQUIRE(r.accuracy);
  CHECK(*r.accuracy == doctest::Approx(0.5));
  CHECK(matched_accuracy(L{0, 0, 1, 1, 2}, L{1, 1, 0, 0, 0}) == doctest::Approx(0.8));

  const auto back = metric_report_from_json(to_json_record(r));
  CHECK(back.nmi == r.nmi);
  CHECK(back.ami == r.ami);
  CHECK(back.ari == r.ari);
  CHECK(back.accuracy == r.accuracy);
  CHECK(back.n == 4);
  CHECK(to_key_value(r).find("nmi=") != std::string::npos);
}

TEST_CASE("evaluate aligns by message id") {
  const auto c = load_corpus(testpaths::fixture("five.jsonl"));
  const auto truth = make_assignment(c, std::span<const std::uint32_t>(c.labels()));
  const auto perfect = evaluate(truth, c);
  CHECK(perfect.nmi == 1.0);
  CHECK(perfect.ami == 1.0);
  CHECK(perfect.ari == 1.0);

  EventAssignment reversed;
  for (std::size_t i = c.size(); i-- > 0;) {
    reversed.ids.push_back(truth.ids[i]);
    reversed.events.push_back(truth.events[i]);
  }
  reversed.event_count = truth.event_count;
  CHECK(evaluate(reversed, c).ari == 1.0);

  auto missing = truth;
  missing.ids.pop_back();
  missing.events.pop_back();
  CHECK_THROWS_WITH_AS(evaluate(missing, c), doctest::Contains("CoverageMismatch"), Error);

  auto stranger = truth;
  stranger.ids.back() = "nope";
  CHECK_THROWS_WITH_AS(evaluate(stranger, c), doctest::Contains("CoverageMismatch"), Error);

  std::vector<Message> ms = c.messages();
  for (auto& m : ms) m.event_id.reset();
  const auto unlabeled = Corpus::from_messages("u", ms);
  CHECK_THROWS_WITH_AS(evaluate(truth, unlabeled), doctest::Contains("UnlabeledCorpus"), Error);
}
