#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "rfsum/attention.hpp"

using namespace rfsum;

namespace {

TensorRef random_matrix(int r, int c, Rng& rng, bool grad = false) {
  auto t = make_tensor({r, c}, grad);
  for (auto& x : t->v) x = rng.uniform(-0.8, 0.8);
  return t;
}

TensorRef random_vec(int n, Rng& rng, bool grad = false) {
  auto t = make_tensor({n}, grad);
  for (auto& x : t->v) x = rng.uniform(-0.8, 0.8);
  return t;
}

}  // namespace

TEST_CASE("zero score vector v gives uniform attention") {
  Rng rng(1);
  auto p = init_attention(4, 3, 5, rng);
  std::fill(p.v->v.begin(), p.v->v.end(), 0.0);
  auto states = random_matrix(3, 4, rng);
  auto query = random_vec(3, rng);
  Graph g;
  auto res = attend(g, states, query, p);
  for (int i = 0; i < 3; ++i)
    CHECK(res.weights->v[i] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  for (int c = 0; c < 4; ++c) {
    double mean = (states->v[c] + states->v[4 + c] + states->v[8 + c]) / 3.0;
    CHECK(res.context->v[c] == doctest::Approx(mean).epsilon(1e-12));
  }
}

TEST_CASE("single state takes all the attention") {
  Rng rng(2);
  auto p = init_attention(4, 3, 5, rng);
  auto states = random_matrix(1, 4, rng);
  auto query = random_vec(3, rng);
  Graph g;
  auto res = attend(g, states, query, p);
  CHECK(res.weights->v[0] == 1.0);
  for (int c = 0; c < 4; ++c) CHECK(res.context->v[c] == states->v[c]);
}

TEST_CASE("hand-set scores produce the closed-form weights and context") {
  Graph g;
  auto states = make_tensor({2, 2}, {1.0, 2.0, 3.0, 4.0});
  auto scores = make_tensor({2}, {std::log(1.0), std::log(3.0)});
  auto res = attend_scores(g, states, scores);
  CHECK(res.weights->v[0] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(res.weights->v[1] == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(res.context->v[0] == doctest::Approx(0.25 * 1.0 + 0.75 * 3.0).epsilon(1e-12));
  CHECK(res.context->v[1] == doctest::Approx(0.25 * 2.0 + 0.75 * 4.0).epsilon(1e-12));
}

TEST_CASE("attention weights always sum to one") {
  Rng rng(3);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 1 + static_cast<int>(rng.index(12));
    auto p = init_attention(3, 2, 4, rng);
    auto states = random_matrix(n, 3, rng);
    auto query = random_vec(2, rng);
    Graph g;
    auto res = attend(g, states, query, p);
    double total = 0.0;
    for (double w : res.weights->v) {
      CHECK(w >= 0.0);
      total += w;
    }
    CHECK(std::fabs(total - 1.0) < 1e-9);
  }
}

TEST_CASE("permuting states permutes weights and keeps the context") {
  Rng rng(4);
  auto p = init_attention(3, 2, 4, rng);
  auto states = random_matrix(4, 3, rng);
  auto query = random_vec(2, rng);
  const std::vector<int> perm = {2, 0, 3, 1};
  auto shuffled = make_tensor({4, 3});
  for (int i = 0; i < 4; ++i)
    for (int c = 0; c < 3; ++c) shuffled->v[i * 3 + c] = states->v[perm[i] * 3 + c];
  Graph g;
  auto a = attend(g, states, query, p);
  auto b = attend(g, shuffled, query, p);
  for (int i = 0; i < 4; ++i)
    CHECK(b.weights->v[i] == doctest::Approx(a.weights->v[perm[i]]).epsilon(1e-12));
  for (int c = 0; c < 3; ++c)
    CHECK(b.context->v[c] == doctest::Approx(a.context->v[c]).epsilon(1e-12));
}

TEST_CASE("precomputed keys match the direct path bit for bit") {
  Rng rng(5);
  auto p = init_attention(4, 3, 5, rng);
  auto states = random_matrix(6, 4, rng);
  auto query = random_vec(3, rng);
  Graph g;
  auto direct = attend(g, states, query, p);
  auto keys = attention_keys(g, states, p);
  auto via_keys = attend_with_keys(g, states, keys, query, p);
  CHECK(direct.weights->v == via_keys.weights->v);
  CHECK(direct.context->v == via_keys.context->v);
}

TEST_CASE("background vector degenerate cases") {
  Rng rng(6);
  auto p = init_attention(4, 4, 5, rng);
  auto query = random_vec(4, rng);

  auto one_state = random_matrix(1, 4, rng);
  Graph g;
  auto b = background_vector(g, one_state, query, p);
  for (int c = 0; c < 4; ++c) CHECK(b->v[c] == one_state->v[c]);

  std::fill(p.v->v.begin(), p.v->v.end(), 0.0);
  auto states = random_matrix(3, 4, rng);
  auto mean_b = background_vector(g, states, query, p);
  for (int c = 0; c < 4; ++c) {
    double mean = (states->v[c] + states->v[4 + c] + states->v[8 + c]) / 3.0;
    CHECK(mean_b->v[c] == doctest::Approx(mean).epsilon(1e-12));
  }
}

TEST_CASE("background vector is stable across repeated evaluation") {
  Rng rng(7);
  auto p = init_attention(4, 4, 5, rng);
  auto states = random_matrix(3, 4, rng);
  auto query = random_vec(4, rng);
  Graph g;
  auto b1 = background_vector(g, states, query, p);
  auto b2 = background_vector(g, states, query, p);
  CHECK(b1->v == b2->v);
}

TEST_CASE("attention rejects empty state sets") {
  Rng rng(8);
  auto p = init_attention(4, 3, 5, rng);
  auto empty = make_tensor({0, 4});
  auto query = random_vec(3, rng);
  Graph g;
  CHECK_THROWS_AS(attend(g, empty, query, p), EmptyStates);
  CHECK_THROWS_AS(background_vector(g, empty, query, p), EmptyStates);
}

TEST_CASE("background vector gradient matches finite differences") {
  Rng rng(9);
  auto p = init_attention(4, 4, 3, rng);
  auto states = random_matrix(3, 4, rng, true);
  auto query = random_vec(4, rng, true);
  auto res = testutil::check_gradients(
      {states, query, p.W_h, p.W_s, p.v, p.bias}, [&](Graph& g) {
        auto b = background_vector(g, states, query, p);
        return g.dot(b, b);
      });
  INFO(res.worst);
  CHECK(res.max_rel_err < 1e-4);
}
