// Shared test utilities: finite-difference gradient checking and small
// numeric comparisons used across the suites.
#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "rfsum/tensor.hpp"

namespace testutil {

// Builds the graph and returns the scalar loss. Called repeatedly by the
// finite-difference checker, so it must be a pure function of the current
// parameter values.
using LossFn = std::function<rfsum::TensorRef(rfsum::Graph&)>;

struct GradCheckResult {
  double max_rel_err = 0.0;
  int checked = 0;
  std::string worst;  // where the worst mismatch happened
};

// Central differences with step h against the tape's gradients.
// Error metric: |analytic - numeric| / max(|analytic|, |numeric|, 1.0).
inline GradCheckResult check_gradients(const std::vector<rfsum::TensorRef>& params,
                                       const LossFn& loss_fn, double h = 1e-5) {
  for (auto& p : params) p->zero_grad();
  {
    rfsum::Graph g;
    auto loss = loss_fn(g);
    g.backward(loss);
  }
  GradCheckResult res;
  for (size_t pi = 0; pi < params.size(); ++pi) {
    auto& p = params[pi];
    for (int i = 0; i < p->size(); ++i) {
      const double saved = p->v[i];
      p->v[i] = saved + h;
      double up;
      {
        rfsum::Graph g;
        up = loss_fn(g)->v[0];
      }
      p->v[i] = saved - h;
      double down;
      {
        rfsum::Graph g;
        down = loss_fn(g)->v[0];
      }
      p->v[i] = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double analytic = p->g.empty() ? 0.0 : p->g[i];
      const double rel = std::fabs(analytic - numeric) /
                         std::max({std::fabs(analytic), std::fabs(numeric), 1.0});
      if (rel > res.max_rel_err) {
        res.max_rel_err = rel;
        res.worst = "param " + std::to_string(pi) + " elem " + std::to_string(i) +
                    " analytic=" + std::to_string(analytic) +
                    " numeric=" + std::to_string(numeric);
      }
      ++res.checked;
    }
  }
  return res;
}

inline bool close(double a, double b, double tol = 1e-12) {
  return std::fabs(a - b) <= tol;
}

}  // namespace testutil
