#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rfsum/corpus.hpp"

namespace rfsum {

// All three scores live in [0, 1]; f1 is 0 whenever precision + recall is 0.
struct RougeScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Clipped n-gram overlap (n = 1 or 2): each reference n-gram can be credited
// at most as often as it occurs in the reference.
RougeScore rouge_n(const Tokens& candidate, const Tokens& reference, int n);

// Longest-common-subsequence overlap.
RougeScore rouge_l(const Tokens& candidate, const Tokens& reference);

// Corpus-level summary in points (0-100): macro-averaged F1 with a
// nonparametric bootstrap confidence interval. Every resample draws one set
// of report indices and reuses it for all three metrics.
struct MetricSummary {
  double mean_f1 = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

struct CorpusRouge {
  MetricSummary rouge1, rouge2, rougeL;
};

CorpusRouge corpus_rouge(const std::vector<Tokens>& candidates,
                         const std::vector<Tokens>& references,
                         int bootstrap = 1000, std::uint64_t seed = 12345);

// Stable JSON rendering of the summary.
std::string rouge_report_json(const CorpusRouge& r);

}  // namespace rfsum
