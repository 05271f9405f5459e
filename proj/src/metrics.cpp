#include "sedkit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "sedkit/error.hpp"
#include "sedkit/graph.hpp"

namespace sedkit {

namespace {

void check_inputs(std::span<const std::uint32_t> truth, std::span<const std::uint32_t> predicted) {
  if (truth.size() != predicted.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                std::to_string(truth.size()) + " true labels vs " + std::to_string(predicted.size()) + " predicted");
  }
  if (truth.empty()) throw Error(ErrorCode::kEmptyInput, "label vectors are empty");
}

long double log_factorial(std::uint64_t x) { return std::lgamma(static_cast<long double>(x) + 1.0L); }

// Hungarian algorithm (shortest augmenting path form) minimizing cost on a
// square matrix; returns the column chosen for each row.
std::vector<std::size_t> hungarian(const std::vector<std::vector<double>>& cost) {
  const std::size_t n = cost.size();
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> assignment(n);
  for (std::size_t j = 1; j <= n; ++j) assignment[p[j] - 1] = j - 1;
  return assignment;
}

}  // namespace

ContingencyTable::ContingencyTable(std::span<const std::uint32_t> truth, std::span<const std::uint32_t> predicted) {
  check_inputs(truth, predicted);
  const auto t = densify(truth);
  const auto p = densify(predicted);
  const std::size_t r = *std::max_element(t.begin(), t.end()) + 1;
  const std::size_t c = *std::max_element(p.begin(), p.end()) + 1;
  counts_.assign(r * c, 0);
  row_sums_.assign(r, 0);
  col_sums_.assign(c, 0);
  for (std::size_t i = 0; i < t.size(); ++i) {
    ++counts_[t[i] * c + p[i]];
    ++row_sums_[t[i]];
    ++col_sums_[p[i]];
  }
  total_ = t.size();
}

bool ContingencyTable::identical_partitions() const {
  if (rows() != cols()) return false;
  for (std::size_t r = 0; r < rows(); ++r) {
    std::size_t nonzero = 0;
    for (std::size_t c = 0; c < cols(); ++c) nonzero += at(r, c) > 0 ? 1 : 0;
    if (nonzero != 1) return false;
  }
  return true;
}

double entropy(std::span<const std::uint64_t> sizes, std::uint64_t total) {
  long double h = 0.0L;
  const auto n = static_cast<long double>(total);
  for (auto s : sizes) {
    if (s == 0) continue;
    const long double p = static_cast<long double>(s) / n;
    h -= p * std::log(p);
  }
  return static_cast<double>(h);
}

double mutual_information(const ContingencyTable& table) {
  const auto n = static_cast<long double>(table.total());
  long double mi = 0.0L;
  for (std::size_t r = 0; r < table.rows(); ++r) {
    for (std::size_t c = 0; c < table.cols(); ++c) {
      const auto nij = table.at(r, c);
      if (nij == 0) continue;
      const auto x = static_cast<long double>(nij);
      mi += (x / n) * std::log(n * x / (static_cast<long double>(table.row_sum(r)) * table.col_sum(c)));
    }
  }
  return static_cast<double>(std::max(0.0L, mi));
}

double expected_mutual_information(const ContingencyTable& table) {
  const std::uint64_t n = table.total();
  const auto nl = static_cast<long double>(n);
  const long double log_n_fact = log_factorial(n);
  long double emi = 0.0L;
  for (std::size_t r = 0; r < table.rows(); ++r) {
    const std::uint64_t a = table.row_sum(r);
    for (std::size_t c = 0; c < table.cols(); ++c) {
      const std::uint64_t b = table.col_sum(c);
      const std::uint64_t lo = std::max<std::uint64_t>(1, a + b > n ? a + b - n : 0);
      const std::uint64_t hi = std::min(a, b);
      if (lo > hi) continue;
      // Hypergeometric pmf at lo, then the ratio recurrence upward.
      long double log_p = log_factorial(a) + log_factorial(b) + log_factorial(n - a) + log_factorial(n - b) -
                          log_n_fact - log_factorial(lo) - log_factorial(a - lo) - log_factorial(b - lo) -
                          log_factorial(n - a - b + lo);
      long double p = std::exp(log_p);
      const long double ab = static_cast<long double>(a) * static_cast<long double>(b);
      for (std::uint64_t k = lo; k <= hi; ++k) {
        const auto kl = static_cast<long double>(k);
        emi += p * (kl / nl) * std::log(nl * kl / ab);
        if (k < hi) {
          p *= static_cast<long double>(a - k) * static_cast<long double>(b - k) /
               ((kl + 1.0L) * static_cast<long double>(n - a - b + k + 1));
        }
      }
    }
  }
  return static_cast<double>(emi);
}

double nmi(std::span<const std::uint32_t> truth, std::span<const std::uint32_t> predicted) {
  const ContingencyTable table(truth, predicted);
  if (table.identical_partitions()) return 1.0;
  std::vector<std::uint64_t> rows(table.rows()), cols(table.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) rows[r] = table.row_sum(r);
  for (std::size_t c = 0; c < cols.size(); ++c) cols[c] = table.col_sum(c);
  const double ht = entropy(rows, table.total());
  const double hp = entropy(cols, table.total());
  if (ht == 0.0 || hp == 0.0) return 0.0;
  return std::clamp(2.0 * mutual_information(table) / (ht + hp), 0.0, 1.0);
}

double ami(std::span<const std::uint32_t> truth, std::span<const std::uint32_t> predicted) {
  const ContingencyTable table(truth, predicted);
  if (table.identical_partitions()) return 1.0;
  std::vector<std::uint64_t> rows(table.rows()), cols(table.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) rows[r] = table.row_sum(r);
  for (std::size_t c = 0; c < cols.size(); ++c) cols[c] = table.col_sum(c);
  const double ht = entropy(rows, table.total());
  const double hp = entropy(cols, table.total());
  if (ht == 0.0 || hp == 0.0) return 0.0;
  const double emi = expected_mutual_information(table);
  const double denom = 0.5 * (ht + hp) - emi;
  if (std::abs(denom) < 1e-15) return 0.0;
  return (mutual_information(table) - emi) / denom;
}

double ari(std::span<const std::uint32_t> truth, std::span<const std::uint32_t> predicted) {
  const ContingencyTable table(truth, predicted);
  using i128 = __int128;
  // Ordered-pair confusion counts, as in the pair-counting definition.
  const i128 n = table.total();
  i128 sum_sq = 0;
  for (std::size_t r = 0; r < table.rows(); ++r) {
    for (std::size_t c = 0; c < table.cols(); ++c) sum_sq += static_cast<i128>(table.at(r, c)) * table.at(r, c);
  }
  i128 row_sq = 0, col_sq = 0;
  for (std::size_t r = 0; r < table.rows(); ++r) row_sq += static_cast<i128>(table.row_sum(r)) * table.row_sum(r);
  for (std::size_t c = 0; c < table.cols(); ++c) col_sq += static_cast<i128>(table.col_sum(c)) * table.col_sum(c);
  const i128 tp = sum_sq - n;
  const i128 fp = col_sq - sum_sq;
  const i128 fn = row_sq - sum_sq;
  const i128 tn = n * n - fp - fn - sum_sq;
  if (fn == 0 && fp == 0) return 1.0;
  const auto num = static_cast<long double>(tp * tn - fn * fp) * 2.0L;
  const auto den = static_cast<long double>(tp + fn) * static_cast<long double>(fn + tn) +
                   static_cast<long double>(tp + fp) * static_cast<long double>(fp + tn);
  return static_cast<double>(num / den);
}

double matched_accuracy(std::span<const std::uint32_t> truth, std::span<const std::uint32_t> predicted) {
  const ContingencyTable table(truth, predicted);
  const std::size_t k = std::max(table.rows(), table.cols());
  std::vector<std::vector<double>> cost(k, std::vector<double>(k, 0.0));
  for (std::size_t r = 0; r < table.rows(); ++r) {
    for (std::size_t c = 0; c < table.cols(); ++c) cost[r][c] = -static_cast<double>(table.at(r, c));
  }
  const auto match = hungarian(cost);
  std::uint64_t hits = 0;
  for (std::size_t r = 0; r < table.rows(); ++r) {
    if (match[r] < table.cols()) hits += table.at(r, match[r]);
  }
  return static_cast<double>(hits) / static_cast<double>(table.total());
}

MetricReport compute_metrics(std::span<const std::uint32_t> truth, std::span<const std::uint32_t> predicted) {
  const ContingencyTable table(truth, predicted);
  MetricReport r;
  r.nmi = nmi(truth, predicted);
  r.ami = ami(truth, predicted);
  r.ari = ari(truth, predicted);
  r.true_clusters = table.rows();
  r.predicted_clusters = table.cols();
  r.n = table.total();
  if (std::max(table.rows(), table.cols()) <= kMaxMatchedClusters) r.accuracy = matched_accuracy(truth, predicted);
  return r;
}

MetricReport evaluate(const EventAssignment& assignment, const Corpus& corpus) {
  if (!corpus.labeled()) throw Error(ErrorCode::kUnlabeledCorpus, "corpus '" + corpus.name() + "' has no ground truth");
  if (assignment.ids.size() != assignment.events.size()) {
    throw Error(ErrorCode::kCoverageMismatch, "assignment ids and events differ in length");
  }
  if (assignment.size() != corpus.size()) {
    throw Error(ErrorCode::kCoverageMismatch, "assignment covers " + std::to_string(assignment.size()) + " of " +
                                                  std::to_string(corpus.size()) + " messages");
  }
  std::vector<std::uint32_t> predicted(corpus.size());
  std::vector<bool> seen(corpus.size(), false);
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    const auto idx = corpus.index_of(assignment.ids[i]);
    if (!idx) throw Error(ErrorCode::kCoverageMismatch, "unknown message id '" + assignment.ids[i] + "'");
    if (seen[*idx]) throw Error(ErrorCode::kCoverageMismatch, "message '" + assignment.ids[i] + "' assigned twice");
    seen[*idx] = true;
    predicted[*idx] = assignment.events[i];
  }
  const auto truth = corpus.labels();
  return compute_metrics(truth, predicted);
}

std::string to_key_value(const MetricReport& r) {
  std::ostringstream os;
  os << "nmi=" << format_double(r.nmi) << '\n'
     << "ami=" << format_double(r.ami) << '\n'
     << "ari=" << format_double(r.ari) << '\n';
  if (r.accuracy) os << "accuracy=" << format_double(*r.accuracy) << '\n';
  os << "predicted_clusters=" << r.predicted_clusters << '\n'
     << "true_clusters=" << r.true_clusters << '\n'
     << "n=" << r.n << '\n';
  return os.str();
}

std::string to_json_record(const MetricReport& r) {
  nlohmann::ordered_json j = {{"nmi", r.nmi},
                              {"ami", r.ami},
                              {"ari", r.ari},
                              {"predicted_clusters", r.predicted_clusters},
                              {"true_clusters", r.true_clusters},
                              {"n", r.n}};
  if (r.accuracy) j["accuracy"] = *r.accuracy;
  return j.dump();
}

MetricReport metric_report_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    MetricReport r;
    r.nmi = j.at("nmi").get<double>();
    r.ami = j.at("ami").get<double>();
    r.ari = j.at("ari").get<double>();
    r.predicted_clusters = j.at("predicted_clusters").get<std::size_t>();
    r.true_clusters = j.at("true_clusters").get<std::size_t>();
    r.n = j.at("n").get<std::size_t>();
    if (j.contains("accuracy")) r.accuracy = j.at("accuracy").get<double>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("metric record: ") + e.what());
  }
}

}  // namespace sedkit
