// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "sedkit/cli.hpp"
#include "sedkit/community.hpp"
#include "sedkit/corpus.hpp"
#include "sedkit/embeddings.hpp"
#include "sedkit/metrics.hpp"
#include "sedkit/pipeline.hpp"
#include "sedkit/rng.hpp"
#include "sedkit/synthetic.hpp"
#include "sedkit/wmd.hpp"
#include "unit/paths.hpp"

using namespace sedkit;
namespace fs = std::filesystem;

namespace {

// Collects failed checks of one criterion.
struct Check {
  std::vector<std::string> failures;
  std::size_t count = 0;

  void expect(bool ok, const std::string& what) {
    ++count;
    if (!ok && failures.size() < 10) failures.push_back(what);
    if (!ok && failures.size() == 10) failures.push_back("...");
  }
};

int cli(std::vector<std::string> args, std::string* out_text = nullptr) {
  args.insert(args.begin(), "sedkit");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  if (out_text) *out_text = out.str();
  if (code != 0) std::cerr << err.str();
  return code;
}

std::uint64_t fnv1a(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::uint64_t h = 14695981039346656037ull;
  for (char c; in.get(c);) h = (h ^ static_cast<unsigned char>(c)) * 1099511628211ull;
  return h;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

void manifest_fidelity(Check& c) {
  struct Row {
    const char* name;
    std::uint64_t events, texts;
  };
  const Row table1[] = {{"Event2012", 503, 68841},     {"Event2018", 257, 64516},    {"ArabicTwitter", 7, 9070},
                        {"MAVEN", 164, 10242},         {"CrisisLexT26", 26, 27933},  {"CrisisLexT6", 6, 60082},
                        {"CrisisMMD", 7, 18082},       {"CrisisNLP", 11, 25976},     {"HumAID", 19, 76484},
                        {"MixData", 5, 78489},         {"KBP", 100, 85569},          {"Event2012_100", 100, 15019},
                        {"Event2018_100", 100, 19944}, {"Arabic_7", 7, 3022}};
  c.expect(builtin_manifests().size() == 14, "registry size");
  for (const auto& r : table1) {
    const auto* m = find_manifest(r.name);
    c.expect(m && m->expected_events == r.events && m->expected_texts == r.texts, r.name);
  }
  const auto dir = testpaths::scratch("acceptance_ingest");
  c.expect(cli({"--strict", "ingest", testpaths::fixture("event2012_truncated.tsv").string(), "Event2012",
                (dir / "e.jsonl").string(), "--manifest",
                testpaths::fixture("event2012_fixture_manifest.json").string()}) == kExitOk,
           "fixture ingest validates");
  c.expect(cli({"--strict", "ingest", testpaths::fixture("five.jsonl").string(), "five", (dir / "f.jsonl").string(),
                "--manifest", testpaths::fixture("five_manifest.json").string()}) == kExitOk,
           "five-record ingest validates");
}

void metric_oracles(Check& c) {
  Rng rng(20240101);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng.below(8);
    std::vector<std::uint32_t> t(n), p(n);
    const auto kt = 1 + rng.below(4), kp = 1 + rng.below(4);
    for (auto& x : t) x = static_cast<std::uint32_t>(rng.below(kt));
    for (auto& x : p) x = static_cast<std::uint32_t>(rng.below(kp));
    const std::string tag = "trial " + std::to_string(trial);
    c.expect(std::abs(nmi(t, p) - oracle::nmi(t, p)) <= 1e-9, tag + " nmi");
    c.expect(std::abs(ari(t, p) - oracle::ari(t, p)) <= 1e-9, tag + " ari");
    c.expect(std::abs(ami(t, p) - oracle::ami(t, p, false)) <= 1e-9, tag + " ami");
    if (n <= 6) {
      c.expect(std::abs(ami(t, p) - oracle::ami(t, p, true)) <= 1e-9, tag + " ami (permutations)");
      c.expect(std::abs(expected_mutual_information(ContingencyTable(t, p)) -
                        oracle::expected_mi_by_permutation(t, p)) <= 1e-9,
               tag + " E[I]");
    }
  }
}

MessageGraph to_graph(std::size_t n, const std::vector<oracle::WeightedEdge>& edges) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < n; ++i) names.push_back(std::to_string(i));
  GraphBuilder b(names);
  for (const auto& e : edges) b.add(e.u, e.v, e.w);
  return std::move(b).build();
}

std::vector<oracle::WeightedEdge> cliques(std::initializer_list<std::pair<std::uint32_t, std::uint32_t>> blocks) {
  std::vector<oracle::WeightedEdge> es;
  for (const auto& [from, size] : blocks) {
    for (std::uint32_t i = from; i < from + size; ++i) {
      for (std::uint32_t j = i + 1; j < from + size; ++j) es.push_back({i, j, 1.0});
    }
  }
  return es;
}

void entropy_sandwich(Check& c) {
  Rng rng(3);
  std::size_t graphs = 0;
  while (graphs < 600) {
    const std::size_t n = 2 + rng.below(6);
    const double density = 0.25 + 0.7 * rng.uniform();
    const bool unit = rng.below(2) == 0;
    std::vector<oracle::WeightedEdge> es;
    for (std::uint32_t i = 0; i < n; ++i) {
      for (std::uint32_t j = i + 1; j < n; ++j) {
        if (rng.uniform() < density) es.push_back({i, j, unit ? 1.0 : 0.25 + 3.0 * rng.uniform()});
      }
    }
    std::vector<std::size_t> comp(n);
    for (std::size_t i = 0; i < n; ++i) comp[i] = i;
    std::function<std::size_t(std::size_t)> find = [&](std::size_t x) { return comp[x] == x ? x : comp[x] = find(comp[x]); };
    for (const auto& e : es) comp[find(e.u)] = find(e.v);
    bool connected = !es.empty();
    for (std::size_t i = 1; i < n; ++i) connected = connected && find(i) == find(0);
    if (!connected) continue;
    ++graphs;
    const auto g = to_graph(n, es);
    const double singles = structural_entropy_2d(g, Partition::singletons(n));
    const double greedy = structural_entropy_2d(g, minimize_se(g));
    const double best = oracle::se2_optimum(n, es).first;
    c.expect(singles >= greedy - 1e-12 && greedy >= best - 1e-12, "graph " + std::to_string(graphs));
  }
  auto bridge = cliques({{0, 4}, {4, 4}});
  bridge.push_back({3, 4, 1.0});
  c.expect(minimize_se(to_graph(8, bridge)).community == std::vector<std::uint32_t>{0, 0, 0, 0, 1, 1, 1, 1},
           "two K4 plus bridge");
  c.expect(minimize_se(to_graph(6, cliques({{0, 3}, {3, 3}}))).community ==
               std::vector<std::uint32_t>{0, 0, 0, 1, 1, 1},
           "two triangles");
}

void wmd_exactness(Check& c) {
  Rng rng(17);
  std::size_t cases = 0;
  for (std::size_t m = 1; m <= 3; ++m) {
    for (std::size_t n = 1; n <= 3; ++n) {
      for (int trial = 0; trial < 200; ++trial) {
        std::vector<std::uint64_t> supply(m), demand(n);
        std::uint64_t total = 0;
        for (auto& s : supply) total += (s = 1 + rng.below(9));
        if (total < n) continue;
        std::uint64_t left = total;
        for (std::size_t j = 0; j + 1 < n; ++j) {
          demand[j] = 1 + rng.below(left - (n - 1 - j));
          left -= demand[j];
        }
        demand[n - 1] = left;
        std::vector<double> cost(m * n);
        for (auto& x : cost) x = rng.below(4) == 0 ? 0.0 : 10.0 * rng.uniform();
        const std::vector<double> a(supply.begin(), supply.end()), b(demand.begin(), demand.end());
        const double exact = solve_transport(supply, demand, cost);
        const double brute = oracle::transport_by_vertices(a, b, cost);
        c.expect(std::abs(exact - brute) <= 1e-9 * std::max(1.0, std::abs(brute)),
                 "transport " + num(exact) + " vs " + num(brute));
        ++cases;
      }
    }
  }
  // Document-level: normalized weights against the same oracle.
  std::vector<std::string> words;
  std::vector<double> values;
  for (int i = 0; i < 20; ++i) {
    words.push_back("w" + std::to_string(i));
    for (int d = 0; d < 4; ++d) values.push_back(2.0 * rng.uniform() - 1.0);
  }
  const EmbeddingTable table(words, 4, values);
  auto random_doc = [&](std::size_t max_support) {
    TokenList doc;
    const auto support = 1 + rng.below(max_support);
    std::vector<std::string> pool;
    for (std::uint64_t i = 0; i < support; ++i) pool.push_back(words[rng.below(words.size())]);
    for (std::uint64_t i = 0, len = 1 + rng.below(6); i < len; ++i) doc.push_back(pool[i % pool.size()]);
    return doc;
  };
  for (int trial = 0; trial < 500; ++trial) {
    const auto a = make_distribution(random_doc(3), table);
    const auto b = make_distribution(random_doc(3), table);
    std::vector<double> wa, wb, cost;
    for (std::size_t i = 0; i < a.rows.size(); ++i) wa.push_back(a.weight(i));
    for (std::size_t j = 0; j < b.rows.size(); ++j) wb.push_back(b.weight(j));
    for (auto ra : a.rows) {
      for (auto rb : b.rows) {
        const auto va = table.vector(ra), vb = table.vector(rb);
        double s = 0.0;
        for (std::size_t d = 0; d < 4; ++d) s += (va[d] - vb[d]) * (va[d] - vb[d]);
        cost.push_back(std::sqrt(s));
      }
    }
    const double brute = oracle::transport_by_vertices(wa, wb, cost);
    c.expect(std::abs(wmd_distance(a, b, table) - brute) <= 1e-9, "wmd document pair " + std::to_string(trial));
    ++cases;
  }
  c.expect(cases >= 1000, "case count");
  for (int trial = 0; trial < 10000; ++trial) {
    const auto a = make_distribution(random_doc(8), table);
    const auto b = make_distribution(random_doc(8), table);
    c.expect(rwmd_distance(a, b, table) <= wmd_distance(a, b, table) + 1e-12, "rwmd pair " + std::to_string(trial));
  }
}

double run_nmi_or_ari(const Corpus& corpus, const std::string& detector, nlohmann::json params, bool want_ari,
                      const fs::path& out) {
  DetectorConfig config;
  config.detector = detector;
  config.params = std::move(params);
  config.seed = 1;
  config.base_dir = out.parent_path();
  config.output_dir = out;
  const auto art = run_pipeline(config, corpus);
  return want_ari ? art.metrics->ari : art.metrics->nmi;
}

void detector_recovery(Check& c) {
  const auto dir = testpaths::scratch("acceptance_recovery");
  const auto corpus = generate_synthetic(SyntheticOptions{}, "synthetic");
  SyntheticOptions disjoint;
  disjoint.background_words = 0;
  disjoint.background_rate = 0.0;
  const auto clean = generate_synthetic(disjoint, "synthetic_disjoint");

  const double tfidf = run_nmi_or_ari(corpus, "tfidf_kmeans", {{"k", 10}}, false, dir / "tfidf");
  c.expect(tfidf >= 0.8, "tfidf_kmeans NMI " + num(tfidf));
  const double lda = run_nmi_or_ari(clean, "lda", {{"topics", 10}}, false, dir / "lda");
  c.expect(lda >= 0.7, "lda NMI " + num(lda));
  const double se = run_nmi_or_ari(corpus, "se_detect", nlohmann::json::object(), true, dir / "se");
  c.expect(se >= 0.8, "se_detect ARI " + num(se));
  std::cout << "  tfidf_kmeans NMI " << num(tfidf) << ", lda NMI " << num(lda) << ", se_detect ARI " << num(se)
            << '\n';
}

void determinism(Check& c) {
  const auto dir = testpaths::scratch("acceptance_determinism");
  for (const auto& name : DetectorRegistry::global().names()) {
    const auto config = testpaths::fixture("configs/" + name + ".json").string();
    const auto a = dir / (name + "-a"), b = dir / (name + "-b");
    const bool ran = cli({"run", config, "--output", a.string()}) == kExitOk &&
                     cli({"run", config, "--output", b.string()}) == kExitOk;
    c.expect(ran, name + " runs");
    if (ran) c.expect(fnv1a(a / "assignment.tsv") == fnv1a(b / "assignment.tsv"), name + " checksum");
  }
  const auto spec = testpaths::fixture("bench.json").string();
  const bool benched = cli({"--jobs", "1", "bench", spec, "--output", (dir / "serial").string()}) == kExitOk &&
                       cli({"--jobs", "4", "bench", spec, "--output", (dir / "parallel").string()}) == kExitOk;
  c.expect(benched, "bench runs");
  if (benched) c.expect(slurp(dir / "serial" / "table.tsv") == slurp(dir / "parallel" / "table.tsv"), "bench tables");
}

// Labels every message by its parity.
class ParityDetector : public Detector {
 public:
  void preprocess(const DetectorContext& context) override { n_ = context.corpus->size(); }
  void fit() override {}
  std::vector<std::uint32_t> detect() override {
    std::vector<std::uint32_t> out(n_);
    for (std::size_t i = 0; i < n_; ++i) out[i] = static_cast<std::uint32_t>(i % 2);
    return out;
  }

 private:
  std::size_t n_ = 0;
};

void lifecycle(Check& c) {
  const auto corpus = load_corpus(testpaths::fixture("five.jsonl"));
  auto violates = [](const std::function<void()>& f) {
    try {
      f();
    } catch (const Error& e) {
      return e.code() == ErrorCode::kLifecycleViolation;
    }
    return false;
  };
  DetectionSession s(std::make_unique<ParityDetector>(), corpus, DetectorContext{});
  c.expect(violates([&] { s.fit(); }), "fit before preprocess");
  c.expect(violates([&] { s.detection(); }), "detection before fit");
  c.expect(violates([&] { s.evaluate(); }), "evaluate before detection");
  s.preprocess();
  c.expect(violates([&] { s.preprocess(); }), "preprocess twice");
  c.expect(violates([&] { s.detection(); }), "detection before fit");
  s.fit();
  c.expect(violates([&] { s.evaluate(); }), "evaluate before detection");
  const auto [predictions, truths] = s.detection();
  c.expect(predictions.events == std::vector<std::uint32_t>{0, 1, 0, 1, 0}, "predictions");
  c.expect(truths && truths->events == corpus.labels() && truths->ids == predictions.ids, "ground truths");
  const auto report = s.evaluate();
  c.expect(report.has_value(), "metrics");
  c.expect(violates([&] { s.evaluate(); }), "evaluate twice");

  auto real = DetectorRegistry::global().create("tfidf_kmeans", {{"k", 3}});
  DetectionSession t(std::move(real), corpus, DetectorContext{});
  c.expect(violates([&] { t.detection(); }), "built-in detector guarded");
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    void (*run)(Check&);
  };
  const Criterion criteria[] = {
      {"1 manifest fidelity", manifest_fidelity},      {"2 metric oracle equivalence", metric_oracles},
      {"3 structural-entropy sandwich", entropy_sandwich}, {"4 WMD exactness", wmd_exactness},
      {"5 detector recovery", detector_recovery},      {"6 end-to-end determinism", determinism},
      {"7 lifecycle contract", lifecycle},
  };
  int failed = 0;
  for (const auto& crit : criteria) {
    Check c;
    const auto start = std::chrono::steady_clock::now();
    try {
      crit.run(c);
    } catch (const std::exception& e) {
      c.expect(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool ok = c.failures.empty();
    failed += ok ? 0 : 1;
    std::printf("%s criterion %s (%zu checks, %.2fs)\n", ok ? "PASS" : "FAIL", crit.name, c.count, secs);
    for (const auto& f : c.failures) std::printf("    failed: %s\n", f.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
