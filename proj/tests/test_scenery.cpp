#include <doctest.h>

#include <random>

#include "cats/gradcheck.hpp"
#include "cats/scenery.hpp"

using namespace cats;

namespace {

Tensor random_tensor(Shape shape, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Tensor t = Tensor::empty(std::move(shape));
  for (Index i = 0; i < t.size(); ++i) t.data()[i] = u(rng);
  return t;
}

SceneryGraph random_graph(Index T, Index n, Index c3, std::mt19937_64& rng) {
  SceneryGraph g;
  g.nodes = random_tensor({T, n, c3}, rng);
  g.edges = SceneryGraph::full_edges(n);
  g.theta = random_tensor({c3, c3}, rng, -0.5, 0.5);
  g.attention = random_tensor({2 * c3, 1}, rng, -0.5, 0.5);
  return g;
}

Tensor identity(Index n) {
  Tensor t = Tensor::zeros({n, n});
  for (Index i = 0; i < n; ++i) t.data()[i * n + i] = 1.0;
  return t;
}

}  // namespace

TEST_CASE("gat attention: equal features give exactly uniform rows") {
  std::mt19937_64 rng(61);
  const Index n = 5, c3 = 4;
  SceneryGraph g = random_graph(2, n, c3, rng);
  // all node features identical
  for (Index t = 0; t < 2; ++t)
    for (Index i = 0; i < n; ++i)
      for (Index c = 0; c < c3; ++c) g.nodes.data()[(t * n + i) * c3 + c] = 0.37 * (c + 1);
  for (Index t = 0; t < 2; ++t) {
    Tensor a = attention_rows(g, t);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j)
        CHECK(std::abs(a.at({i, j}) - 1.0 / n) <= 1e-12);
  }
}

TEST_CASE("gat attention: row stochasticity and duplicate-key symmetry") {
  std::mt19937_64 rng(67);
  for (int rep = 0; rep < 20; ++rep) {
    SceneryGraph g = random_graph(3, 6, 5, rng);
    Tensor a = attention_rows(g, 1);
    for (Index i = 0; i < 6; ++i) {
      double sum = 0;
      for (Index j = 0; j < 6; ++j) {
        CHECK(a.at({i, j}) >= 0.0);
        sum += a.at({i, j});
      }
      CHECK(std::abs(sum - 1.0) < 1e-10);
    }
  }

  // duplicate node features j1 = j2 attract identical attention from every i
  SceneryGraph g = random_graph(1, 4, 3, rng);
  for (Index c = 0; c < 3; ++c)
    g.nodes.data()[2 * 3 + c] = g.nodes.data()[1 * 3 + c];  // node 2 := node 1
  Tensor a = attention_rows(g, 0);
  for (Index i = 0; i < 4; ++i)
    CHECK(a.at({i, 1}) == doctest::Approx(a.at({i, 2})).epsilon(1e-12));

  CHECK_THROWS_AS(attention_rows(g, 1), ValueError);
  CHECK_THROWS_AS(attention_rows(g, -1), ValueError);
}

TEST_CASE("gat: 2-node hand case with identity transform and all-ones W") {
  // features [1,0] and [0,1]: both logits equal, alpha = [[.5,.5],[.5,.5]]
  SceneryGraph g;
  g.nodes = Tensor::from_values({1, 2, 2}, {1, 0, 0, 1});
  g.edges = SceneryGraph::full_edges(2);
  g.theta = identity(2);
  g.attention = Tensor::constant({4, 1}, 1.0);
  Tensor a = attention_rows(g, 0);
  for (Index i = 0; i < 2; ++i)
    for (Index j = 0; j < 2; ++j) CHECK(a.at({i, j}) == doctest::Approx(0.5).epsilon(1e-12));

  // single-node graph: alpha = [1], output = tanh(theta v)
  SceneryGraph solo;
  solo.nodes = Tensor::from_values({1, 1, 2}, {0.3, -0.8});
  solo.edges = SceneryGraph::full_edges(1);
  solo.theta = identity(2);
  solo.attention = Tensor::constant({4, 1}, 0.7);
  CHECK(attention_rows(solo, 0).at({0, 0}) == 1.0);
  Tensor out = gat_forward(solo);
  CHECK(out.at({0, 0, 0}) == doctest::Approx(std::tanh(0.3)).epsilon(1e-12));
  CHECK(out.at({0, 0, 1}) == doctest::Approx(std::tanh(-0.8)).epsilon(1e-12));
}

TEST_CASE("gat: shape formula HJ+2O and self-edge degeneration") {
  std::mt19937_64 rng(71);
  // H=2, J=15, O=3 -> 36 nodes
  SceneryGraph g = random_graph(2, 2 * 15 + 2 * 3, 8, rng);
  CHECK(gat_forward(g).shape() == Shape{2, 36, 8});

  // self-edges only: output degenerates to per-node tanh(theta v)
  SceneryGraph s = random_graph(2, 5, 4, rng);
  s.edges = SceneryGraph::self_edges(5);
  Tensor out = gat_forward(s);
  Tensor tv = tanh(matmul(s.nodes, s.theta));
  for (Index i = 0; i < out.size(); ++i)
    CHECK(out.data()[i] == doctest::Approx(tv.data()[i]).epsilon(1e-12));

  // an all-false edge row is a degenerate neighborhood
  SceneryGraph bad = random_graph(1, 3, 4, rng);
  for (Index j = 0; j < 3; ++j) bad.edges[1 * 3 + j] = 0;
  CHECK_THROWS_AS(gat_forward(bad), ValueError);
}

TEST_CASE("gat: node permutation equivariance") {
  std::mt19937_64 rng(73);
  const Index n = 6, c3 = 5;
  SceneryGraph g = random_graph(2, n, c3, rng);
  Tensor out = gat_forward(g);
  const Index perm[6] = {3, 1, 5, 0, 2, 4};
  SceneryGraph p = g;
  p.nodes = Tensor::empty({2, n, c3});
  for (Index t = 0; t < 2; ++t)
    for (Index i = 0; i < n; ++i)
      std::copy(g.nodes.data() + (t * n + perm[i]) * c3,
                g.nodes.data() + (t * n + perm[i] + 1) * c3,
                p.nodes.data() + (t * n + i) * c3);
  Tensor pout = gat_forward(p);
  for (Index t = 0; t < 2; ++t)
    for (Index i = 0; i < n; ++i)
      for (Index c = 0; c < c3; ++c)
        CHECK(pout.at({t, i, c}) == doctest::Approx(out.at({t, perm[i], c})).epsilon(1e-12));
}

TEST_CASE("gat gradients match finite differences (nodes, theta, attention)") {
  std::mt19937_64 rng(79);
  SceneryGraph g = random_graph(2, 4, 3, rng);
  Tensor target = random_tensor({2, 4, 3}, rng);
  auto loss = [&](Tensor&) {
    Tensor out = gat_forward(g);
    Tensor diff = sub(out, target);
    return mean_all(mul(diff, diff));
  };
  CHECK(finite_difference_check(loss, g.nodes, 1e-5) < 1e-4);
  CHECK(finite_difference_check(loss, g.theta, 1e-5) < 1e-4);
  CHECK(finite_difference_check(loss, g.attention, 1e-5) < 1e-4);
}
