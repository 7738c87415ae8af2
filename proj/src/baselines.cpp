#include "rfsum/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "rfsum/errors.hpp"

namespace rfsum {
namespace {

bool is_terminator(const std::string& tok) {
  return tok == "." || tok == "!" || tok == "?";
}

// Flattens the chosen sentence indices back into document order.
Tokens gather(const std::vector<Tokens>& sentences, std::vector<size_t> chosen) {
  std::sort(chosen.begin(), chosen.end());
  Tokens out;
  for (size_t idx : chosen) {
    out.insert(out.end(), sentences[idx].begin(), sentences[idx].end());
  }
  return out;
}

std::vector<size_t> fill_document_order(std::vector<size_t> chosen, size_t want,
                                        size_t n_sentences) {
  std::unordered_set<size_t> seen(chosen.begin(), chosen.end());
  for (size_t i = 0; i < n_sentences && chosen.size() < want; ++i) {
    if (!seen.count(i)) chosen.push_back(i);
  }
  return chosen;
}

}  // namespace

std::vector<Tokens> split_sentences(const Tokens& tokens) {
  std::vector<Tokens> sentences;
  Tokens current;
  for (const auto& tok : tokens) {
    current.push_back(tok);
    if (is_terminator(tok)) {
      sentences.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) sentences.push_back(std::move(current));
  return sentences;
}

std::vector<std::vector<double>> similarity_matrix(const std::vector<Tokens>& sentences) {
  const size_t n = sentences.size();
  std::unordered_map<std::string, int> df;
  for (const auto& sent : sentences) {
    std::unordered_set<std::string> uniq(sent.begin(), sent.end());
    for (const auto& tok : uniq) ++df[tok];
  }
  std::unordered_map<std::string, double> idf;
  for (const auto& [tok, count] : df) {
    idf[tok] = std::log(static_cast<double>(n) / count);
  }

  std::vector<std::unordered_map<std::string, double>> weights(n);
  std::vector<double> norm(n, 0.0);
  for (size_t i = 0; i < n; ++i) {
    std::unordered_map<std::string, int> tf;
    for (const auto& tok : sentences[i]) ++tf[tok];
    for (const auto& [tok, count] : tf) {
      double w = count * idf[tok];
      weights[i][tok] = w;
      norm[i] += w * w;
    }
    norm[i] = std::sqrt(norm[i]);
  }

  std::vector<std::vector<double>> sim(n, std::vector<double>(n, 0.0));
  for (size_t i = 0; i < n; ++i) {
    if (norm[i] > 0) sim[i][i] = 1.0;
    for (size_t j = i + 1; j < n; ++j) {
      if (norm[i] == 0 || norm[j] == 0) continue;
      double dot = 0.0;
      for (const auto& [tok, w] : weights[i]) {
        auto it = weights[j].find(tok);
        if (it != weights[j].end()) dot += w * it->second;
      }
      sim[i][j] = sim[j][i] = dot / (norm[i] * norm[j]);
    }
  }
  return sim;
}

std::vector<double> lexrank_centrality(const std::vector<std::vector<double>>& sim,
                                       double threshold, double damping, double tol) {
  const size_t n = sim.size();
  if (n == 0) return {};
  for (const auto& row : sim) {
    if (row.size() != n) throw ShapeMismatch("similarity matrix must be square");
  }
  if (damping <= 0.0 || damping > 1.0) {
    throw InvalidArgument("damping must be in (0, 1]");
  }
  if (tol <= 0.0) throw InvalidArgument("tolerance must be positive");

  // Row-normalized transition weights over the thresholded graph.
  std::vector<std::vector<double>> p(n, std::vector<double>(n, 0.0));
  for (size_t i = 0; i < n; ++i) {
    double row_sum = 0.0;
    for (size_t j = 0; j < n; ++j) {
      if (i != j && sim[i][j] > threshold) row_sum += sim[i][j];
    }
    if (row_sum == 0.0) continue;  // dangling: keeps only the damping floor
    for (size_t j = 0; j < n; ++j) {
      if (i != j && sim[i][j] > threshold) p[i][j] = sim[i][j] / row_sum;
    }
  }

  std::vector<double> x(n, 1.0 / n), next(n);
  for (int iter = 0; iter < 100000; ++iter) {
    for (size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (size_t i = 0; i < n; ++i) acc += p[i][j] * x[i];
      next[j] = damping / n + (1.0 - damping) * acc;
    }
    double change = 0.0;
    for (size_t j = 0; j < n; ++j) change += std::abs(next[j] - x[j]);
    x.swap(next);
    if (change < tol) break;
  }
  return x;
}

Svd svd(const std::vector<std::vector<double>>& a) {
  const size_t m = a.size();
  if (m == 0 || a[0].empty()) throw InvalidArgument("svd needs a non-empty matrix");
  const size_t n = a[0].size();
  for (const auto& row : a) {
    if (row.size() != n) throw ShapeMismatch("svd input rows differ in length");
  }

  // One-sided Jacobi: rotate column pairs of b until all are orthogonal; the
  // same rotations accumulated on an identity give v.
  auto b = a;
  std::vector<std::vector<double>> v(n, std::vector<double>(n, 0.0));
  for (size_t i = 0; i < n; ++i) v[i][i] = 1.0;

  const double eps = 1e-12;
  for (int sweep = 0; sweep < 60; ++sweep) {
    bool rotated = false;
    for (size_t p = 0; p + 1 < n; ++p) {
      for (size_t q = p + 1; q < n; ++q) {
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (size_t i = 0; i < m; ++i) {
          alpha += b[i][p] * b[i][p];
          beta += b[i][q] * b[i][q];
          gamma += b[i][p] * b[i][q];
        }
        if (gamma == 0.0 || std::abs(gamma) <= eps * std::sqrt(alpha * beta)) continue;
        rotated = true;
        double zeta = (beta - alpha) / (2.0 * gamma);
        double t = (zeta >= 0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        double c = 1.0 / std::sqrt(1.0 + t * t);
        double s = c * t;
        for (size_t i = 0; i < m; ++i) {
          double bp = b[i][p], bq = b[i][q];
          b[i][p] = c * bp - s * bq;
          b[i][q] = s * bp + c * bq;
        }
        for (size_t i = 0; i < n; ++i) {
          double vp = v[i][p], vq = v[i][q];
          v[i][p] = c * vp - s * vq;
          v[i][q] = s * vp + c * vq;
        }
      }
    }
    if (!rotated) break;
  }

  std::vector<double> sigma(n);
  for (size_t j = 0; j < n; ++j) {
    double sq = 0.0;
    for (size_t i = 0; i < m; ++i) sq += b[i][j] * b[i][j];
    sigma[j] = std::sqrt(sq);
  }

  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t x, size_t y) { return sigma[x] > sigma[y]; });

  Svd out;
  out.sigma.resize(n);
  out.u.assign(m, std::vector<double>(n, 0.0));
  out.v.assign(n, std::vector<double>(n, 0.0));
  double sigma_max = sigma.empty() ? 0.0 : sigma[order[0]];
  double zero_tol = sigma_max * 1e-13;
  size_t filled = 0;  // u columns holding an orthonormal vector so far
  for (size_t j = 0; j < n; ++j) {
    size_t src = order[j];
    out.sigma[j] = sigma[src];
    for (size_t i = 0; i < n; ++i) out.v[i][j] = v[i][src];
    if (sigma[src] > zero_tol && sigma[src] > 0.0) {
      for (size_t i = 0; i < m; ++i) out.u[i][j] = b[i][src] / sigma[src];
      ++filled;
    } else if (filled < m) {
      // Null column: extend the orthonormal set with the basis vector that
      // keeps the largest residual after Gram-Schmidt.
      std::vector<double> best(m, 0.0);
      double best_norm = -1.0;
      for (size_t e = 0; e < m; ++e) {
        std::vector<double> cand(m, 0.0);
        cand[e] = 1.0;
        for (size_t k = 0; k < j; ++k) {
          double proj = 0.0;
          for (size_t i = 0; i < m; ++i) proj += cand[i] * out.u[i][k];
          for (size_t i = 0; i < m; ++i) cand[i] -= proj * out.u[i][k];
        }
        double nrm = 0.0;
        for (double x : cand) nrm += x * x;
        if (nrm > best_norm) {
          best_norm = nrm;
          best = std::move(cand);
        }
      }
      double nrm = std::sqrt(best_norm);
      if (nrm > 1e-8) {
        for (size_t i = 0; i < m; ++i) out.u[i][j] = best[i] / nrm;
        ++filled;
      }
    }
  }
  return out;
}

Tokens lexrank_summary(const Tokens& findings, int n_sentences) {
  if (n_sentences <= 0) throw InvalidArgument("summary sentence count must be positive");
  auto sentences = split_sentences(findings);
  if (sentences.empty()) return {};
  auto centrality = lexrank_centrality(similarity_matrix(sentences));

  std::vector<size_t> order(sentences.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t x, size_t y) {
    return centrality[x] > centrality[y];  // stable: earlier sentence wins ties
  });
  size_t want = std::min<size_t>(n_sentences, sentences.size());
  order.resize(want);
  return gather(sentences, order);
}

Tokens lsa_summary(const Tokens& findings, int n_sentences) {
  if (n_sentences <= 0) throw InvalidArgument("summary sentence count must be positive");
  auto sentences = split_sentences(findings);
  if (sentences.empty()) return {};
  size_t want = std::min<size_t>(n_sentences, sentences.size());

  // Raw-count term x sentence matrix, terms in first-appearance order.
  std::unordered_map<std::string, size_t> term_ids;
  std::vector<std::vector<double>> counts;
  for (size_t s = 0; s < sentences.size(); ++s) {
    for (const auto& tok : sentences[s]) {
      auto [it, fresh] = term_ids.emplace(tok, counts.size());
      if (fresh) counts.emplace_back(sentences.size(), 0.0);
      counts[it->second][s] += 1.0;
    }
  }

  auto decomp = svd(counts);
  double sigma_floor = decomp.sigma[0] * 1e-10;
  std::vector<size_t> chosen;
  std::unordered_set<size_t> taken;
  for (size_t topic = 0; topic < decomp.sigma.size() && chosen.size() < want;
       ++topic) {
    if (decomp.sigma[topic] <= sigma_floor) break;  // descending order
    size_t best = sentences.size();
    double best_weight = -1.0;
    for (size_t s = 0; s < sentences.size(); ++s) {
      if (taken.count(s)) continue;
      double w = std::abs(decomp.v[s][topic]);
      if (w > best_weight) {
        best_weight = w;
        best = s;
      }
    }
    if (best < sentences.size()) {
      chosen.push_back(best);
      taken.insert(best);
    }
  }
  chosen = fill_document_order(std::move(chosen), want, sentences.size());
  return gather(sentences, chosen);
}

Tokens baseline_summary(const std::string& method, const Tokens& findings,
                        int n_sentences) {
  if (method == "lexrank") return lexrank_summary(findings, n_sentences);
  if (method == "lsa") return lsa_summary(findings, n_sentences);
  throw UnknownMethod("no baseline named '" + method + "'");
}

}  // namespace rfsum
