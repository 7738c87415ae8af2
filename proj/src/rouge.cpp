#include "rfsum/rouge.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <unordered_map>

#include "rfsum/errors.hpp"
#include "rfsum/rng.hpp"
#include "json.hpp"

namespace rfsum {
namespace {

double f1_of(double p, double r) { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

// n-gram multiset, keyed by the joined tokens. \x1f cannot occur inside a
// token, so the join is collision-free.
std::unordered_map<std::string, int> ngram_counts(const Tokens& toks, int n) {
  std::unordered_map<std::string, int> counts;
  if (static_cast<int>(toks.size()) < n) return counts;
  for (size_t i = 0; i + n <= toks.size(); ++i) {
    std::string key = toks[i];
    for (int j = 1; j < n; ++j) {
      key += '\x1f';
      key += toks[i + j];
    }
    ++counts[key];
  }
  return counts;
}

size_t lcs_length(const Tokens& a, const Tokens& b) {
  if (a.empty() || b.empty()) return 0;
  // Two rolling rows of the classic DP table.
  std::vector<size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (size_t i = 1; i <= a.size(); ++i) {
    for (size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

RougeScore from_overlap(double overlap, size_t cand_units, size_t ref_units) {
  RougeScore s;
  s.precision = cand_units > 0 ? overlap / static_cast<double>(cand_units) : 0.0;
  s.recall = ref_units > 0 ? overlap / static_cast<double>(ref_units) : 0.0;
  s.f1 = f1_of(s.precision, s.recall);
  return s;
}

}  // namespace

RougeScore rouge_n(const Tokens& candidate, const Tokens& reference, int n) {
  if (n != 1 && n != 2) {
    throw InvalidArgument("rouge_n supports n = 1 or 2, got " + std::to_string(n));
  }
  auto cand = ngram_counts(candidate, n);
  auto ref = ngram_counts(reference, n);
  int overlap = 0;
  for (const auto& [gram, count] : cand) {
    auto it = ref.find(gram);
    if (it != ref.end()) overlap += std::min(count, it->second);
  }
  auto units = [n](const Tokens& t) {
    return t.size() + 1 >= static_cast<size_t>(n) + 1 ? t.size() + 1 - n : 0;
  };
  return from_overlap(overlap, units(candidate), units(reference));
}

RougeScore rouge_l(const Tokens& candidate, const Tokens& reference) {
  size_t lcs = lcs_length(candidate, reference);
  return from_overlap(static_cast<double>(lcs), candidate.size(), reference.size());
}

CorpusRouge corpus_rouge(const std::vector<Tokens>& candidates,
                         const std::vector<Tokens>& references, int bootstrap,
                         uint64_t seed) {
  if (candidates.size() != references.size()) {
    throw LengthMismatch("corpus_rouge: " + std::to_string(candidates.size()) +
                         " candidates vs " + std::to_string(references.size()) +
                         " references");
  }
  if (candidates.empty()) throw EmptyList("corpus_rouge needs at least one pair");
  if (bootstrap < 1) throw InvalidArgument("bootstrap resample count must be positive");

  const size_t n = candidates.size();
  std::vector<std::array<double, 3>> f1(n);  // per pair: rouge1, rouge2, rougeL
  for (size_t i = 0; i < n; ++i) {
    f1[i] = {rouge_n(candidates[i], references[i], 1).f1,
             rouge_n(candidates[i], references[i], 2).f1,
             rouge_l(candidates[i], references[i]).f1};
  }

  std::array<MetricSummary*, 3> out{};
  CorpusRouge report;
  out = {&report.rouge1, &report.rouge2, &report.rougeL};

  std::array<double, 3> mean{};
  for (const auto& row : f1) {
    for (int m = 0; m < 3; ++m) mean[m] += row[m];
  }
  for (int m = 0; m < 3; ++m) mean[m] /= static_cast<double>(n);

  // One resample = one index draw, scored under all three metrics.
  std::vector<std::array<double, 3>> boot(bootstrap);
  Rng rng(seed);
  for (int b = 0; b < bootstrap; ++b) {
    std::array<double, 3> sum{};
    for (size_t k = 0; k < n; ++k) {
      const auto& row = f1[rng.index(n)];
      for (int m = 0; m < 3; ++m) sum[m] += row[m];
    }
    for (int m = 0; m < 3; ++m) boot[b][m] = sum[m] / static_cast<double>(n);
  }

  for (int m = 0; m < 3; ++m) {
    std::vector<double> means(bootstrap);
    for (int b = 0; b < bootstrap; ++b) means[b] = boot[b][m];
    std::sort(means.begin(), means.end());
    auto pct = [&](double q) {
      auto idx = static_cast<size_t>(std::llround(q * (bootstrap - 1)));
      return means[idx];
    };
    out[m]->mean_f1 = 100.0 * mean[m];
    out[m]->ci_low = 100.0 * pct(0.025);
    out[m]->ci_high = 100.0 * pct(0.975);
  }
  return report;
}

std::string rouge_report_json(const CorpusRouge& r) {
  nlohmann::json j;
  for (auto [name, s] : {std::pair{"rouge1", &r.rouge1},
                         std::pair{"rouge2", &r.rouge2},
                         std::pair{"rougeL", &r.rougeL}}) {
    j[name] = {{"mean_f1", s->mean_f1}, {"ci_low", s->ci_low}, {"ci_high", s->ci_high}};
  }
  return j.dump();
}

}  // namespace rfsum
