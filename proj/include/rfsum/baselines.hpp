#pragma once

#include <string>
#include <vector>

#include "rfsum/corpus.hpp"

namespace rfsum {

// Splits a token stream into sentences. A sentence ends after a '.', '!' or
// '?' token (the terminator stays with its sentence); trailing tokens without
// a terminator form a final sentence.
std::vector<Tokens> split_sentences(const Tokens& tokens);

// Pairwise tf-idf cosine similarity between the sentences of one report.
// tf is the raw within-sentence count, idf = ln(#sentences / df), so tokens
// present in every sentence (e.g. the terminator) carry zero weight.
// Zero-norm sentences are similar to nothing.
std::vector<std::vector<double>> similarity_matrix(const std::vector<Tokens>& sentences);

// Graph centrality over the thresholded similarity matrix: edges where
// similarity > threshold (self-loops excluded), rows normalized by their
// out-weight, then the damped fixed point
//   x = damping / n + (1 - damping) * P^T x
// iterated until the L1 step change drops below tol. Rows with no edges keep
// the damping floor only.
std::vector<double> lexrank_centrality(const std::vector<std::vector<double>>& sim,
                                       double threshold = 0.1, double damping = 0.15,
                                       double tol = 1e-8);

// Thin SVD a = u * diag(sigma) * v^T computed by one-sided Jacobi rotations.
// For an m x n input: u is m x n, sigma has n entries sorted descending, v is
// n x n orthonormal. Columns of u with positive sigma are orthonormal; zero
// columns are completed by Gram-Schmidt while m allows, zero vectors after.
struct Svd {
  std::vector<std::vector<double>> u;
  std::vector<double> sigma;
  std::vector<std::vector<double>> v;
};
Svd svd(const std::vector<std::vector<double>>& a);

// Extractive summaries: pick n_sentences sentences from the findings and
// return them flattened in document order.
//
// lexrank: rank by centrality, earlier sentence wins ties.
// lsa: raw-count term x sentence matrix, one sentence per singular concept
//      (largest |v| entry among unpicked sentences, zero-sigma concepts
//      skipped), remaining slots filled in document order.
Tokens lexrank_summary(const Tokens& findings, int n_sentences = 3);
Tokens lsa_summary(const Tokens& findings, int n_sentences = 3);

// Dispatch by method name: "lexrank" or "lsa". Anything else throws
// UnknownMethod.
Tokens baseline_summary(const std::string& method, const Tokens& findings,
                        int n_sentences = 3);

}  // namespace rfsum
