#include <doctest.h>

#include <random>

#include "cats/fusion.hpp"
#include "cats/geometry.hpp"
#include "cats/gradcheck.hpp"

using namespace cats;

namespace {

Tensor random_tensor(Shape shape, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Tensor t = Tensor::empty(std::move(shape));
  for (Index i = 0; i < t.size(); ++i) t.data()[i] = u(rng);
  return t;
}

GcnStack small_stack(Index nodes, int layers, Index width, std::mt19937_64& rng,
                     Tensor adjacency) {
  GcnStack s;
  s.adjacency = std::move(adjacency);
  Index in = 4;
  for (int l = 0; l < layers; ++l) {
    s.weights.push_back(random_tensor({in, width}, rng, -0.5, 0.5));
    in = width;
  }
  (void)nodes;
  return s;
}

}  // namespace

TEST_CASE("adjacency: object clique, isolated node, block-diagonal humans") {
  Tensor obj = build_object_adjacency(1);
  REQUIRE(obj.shape() == Shape{2, 2});
  for (Index i = 0; i < 4; ++i) CHECK(obj.data()[i] == 0.5);

  SkeletonSpec lone;
  lone.joints = 1;
  lone.edges = {};
  Tensor solo = build_human_adjacency(lone, 1);
  REQUIRE(solo.shape() == Shape{1, 1});
  CHECK(solo.data()[0] == 1.0);

  SkeletonSpec spec = SkeletonSpec::default_topology(15);
  Tensor two = build_human_adjacency(spec, 2);
  REQUIRE(two.shape() == Shape{30, 30});
  for (Index i = 0; i < 15; ++i)
    for (Index j = 15; j < 30; ++j) {
      CHECK(two.at({i, j}) == 0.0);
      CHECK(two.at({j, i}) == 0.0);
    }
  // rows sum to 1, diagonal positive
  for (Index i = 0; i < 30; ++i) {
    double sum = 0;
    for (Index j = 0; j < 30; ++j) sum += two.at({i, j});
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(two.at({i, i}) > 0.0);
  }

  SkeletonSpec bad;
  bad.joints = 3;
  bad.edges = {{0, 5}};
  CHECK_THROWS_AS(build_human_adjacency(bad, 1), ValueError);
  CHECK_THROWS_AS(SkeletonSpec::parse("0-1,nope", 3), ValueError);
  CHECK(SkeletonSpec::parse("0-1,1-2", 3).edges.size() == 2);
  CHECK(SkeletonSpec::parse("default", 15).edges.size() == 14);
}

TEST_CASE("gcn_forward: zero fixed point, one-step hand propagation, tanh range") {
  std::mt19937_64 rng(31);

  // identity adjacency, identity-ish weights, zero input -> zero output
  GcnStack s;
  s.adjacency = identity_adjacency(1);
  s.weights = {Tensor::from_values({4, 4}, {1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1})};
  Tensor zero = Tensor::zeros({2, 1, 4});
  Tensor out = gcn_forward(s, zero);
  for (Index i = 0; i < out.size(); ++i) CHECK(out.data()[i] == 0.0);

  // 2-node uniform adjacency, identity weights: rows become tanh([0.5,0.5,0,0])
  GcnStack u;
  u.adjacency = Tensor::from_values({2, 2}, {0.5, 0.5, 0.5, 0.5});
  u.weights = {Tensor::from_values({4, 4}, {1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1})};
  Tensor x = Tensor::from_values({1, 2, 4}, {1, 0, 0, 0, 0, 1, 0, 0});
  Tensor y = gcn_forward(u, x);
  for (Index n = 0; n < 2; ++n) {
    CHECK(y.at({0, n, 0}) == doctest::Approx(std::tanh(0.5)).epsilon(1e-12));
    CHECK(y.at({0, n, 1}) == doctest::Approx(std::tanh(0.5)).epsilon(1e-12));
    CHECK(y.at({0, n, 2}) == 0.0);
  }

  // outputs strictly inside (-1, 1); frame-shuffle invariance frame-wise
  GcnStack deep = small_stack(6, 4, 5, rng, build_object_adjacency(3));
  Tensor inp = random_tensor({4, 6, 4}, rng, -3.0, 3.0);
  Tensor o = gcn_forward(deep, inp);
  REQUIRE(o.shape() == Shape{4, 6, 5});
  for (Index i = 0; i < o.size(); ++i) {
    CHECK(o.data()[i] > -1.0);
    CHECK(o.data()[i] < 1.0);
  }
  // permute frames of the input: outputs permute identically
  Tensor perm_in = Tensor::empty({4, 6, 4});
  const Index order[4] = {2, 0, 3, 1};
  for (Index t = 0; t < 4; ++t)
    std::copy(inp.data() + order[t] * 24, inp.data() + (order[t] + 1) * 24,
              perm_in.data() + t * 24);
  Tensor po = gcn_forward(deep, perm_in);
  for (Index t = 0; t < 4; ++t)
    for (Index i = 0; i < 30; ++i)
      CHECK(po.data()[t * 30 + i] == o.data()[order[t] * 30 + i]);

  CHECK_THROWS_AS(gcn_forward(deep, random_tensor({4, 5, 4}, rng)), ShapeError);
}

TEST_CASE("gcn person-permutation equivariance") {
  std::mt19937_64 rng(37);
  SkeletonSpec spec = SkeletonSpec::default_topology(4);
  GcnStack s = small_stack(8, 2, 6, rng, build_human_adjacency(spec, 2));
  Tensor x = random_tensor({3, 8, 4}, rng);
  Tensor y = gcn_forward(s, x);
  // swap the two persons' row blocks
  Tensor xs = Tensor::empty({3, 8, 4});
  for (Index t = 0; t < 3; ++t) {
    std::copy(x.data() + (t * 8 + 4) * 4, x.data() + (t * 8 + 8) * 4, xs.data() + t * 8 * 4);
    std::copy(x.data() + t * 8 * 4, x.data() + (t * 8 + 4) * 4, xs.data() + (t * 8 + 4) * 4);
  }
  Tensor ys = gcn_forward(s, xs);
  for (Index t = 0; t < 3; ++t)
    for (Index n = 0; n < 4; ++n)
      for (Index c = 0; c < 6; ++c) {
        CHECK(ys.at({t, n, c}) == y.at({t, n + 4, c}));
        CHECK(ys.at({t, n + 4, c}) == y.at({t, n, c}));
      }
}

TEST_CASE("embed_visual: zero MLP, replication rule, default widths") {
  std::mt19937_64 rng(41);
  SceneSequence seq;
  seq.T = 2;
  seq.H = 1;
  seq.J = 15;
  seq.O = 2;
  seq.dvis = 6;
  seq.allocate();

  VisualEmbedder zero;
  zero.w1 = Tensor::zeros({6, 8});
  zero.b1 = Tensor::zeros({8});
  zero.w2 = Tensor::zeros({8, 8});
  zero.b2 = Tensor::zeros({8});
  auto [hv0, ov0] = embed_visual(zero, seq);
  REQUIRE(hv0.shape() == Shape{2, 15, 8});
  REQUIRE(ov0.shape() == Shape{2, 4, 8});
  for (Index i = 0; i < hv0.size(); ++i) CHECK(hv0.data()[i] == 0.0);

  for (auto& v : seq.visual_human) v = 0.3;
  for (std::size_t i = 0; i < seq.visual_object.size(); ++i)
    seq.visual_object[i] = 0.1 * static_cast<double>(i % 6);
  VisualEmbedder emb;
  emb.w1 = random_tensor({6, 8}, rng);
  emb.b1 = random_tensor({8}, rng);
  emb.w2 = random_tensor({8, 8}, rng);
  emb.b2 = random_tensor({8}, rng);
  auto [hv, ov] = embed_visual(emb, seq);
  // one human vector per frame -> 15 identical node rows
  for (Index t = 0; t < 2; ++t)
    for (Index j = 1; j < 15; ++j)
      for (Index c = 0; c < 8; ++c) CHECK(hv.at({t, j, c}) == hv.at({t, 0, c}));
  // object rows replicate per corner pair
  for (Index t = 0; t < 2; ++t)
    for (Index o = 0; o < 2; ++o)
      for (Index c = 0; c < 8; ++c) CHECK(ov.at({t, 2 * o, c}) == ov.at({t, 2 * o + 1, c}));

  SceneSequence no_vis = seq;
  no_vis.dvis = 0;
  no_vis.visual_human.clear();
  no_vis.visual_object.clear();
  CHECK_THROWS_AS(embed_visual(emb, no_vis), ValueError);
}

TEST_CASE("fuse: ordering, slice identity, paper widths") {
  std::mt19937_64 rng(43);
  Tensor geo = random_tensor({2, 3, 4}, rng);
  Tensor vis = random_tensor({2, 3, 6}, rng);
  Tensor f = fuse(geo, vis);
  REQUIRE(f.shape() == Shape{2, 3, 10});
  // geometric channels first; fuse then slice recovers both inputs
  Tensor g2 = slice(f, 2, 0, 4);
  Tensor v2 = slice(f, 2, 4, 6);
  for (Index i = 0; i < geo.size(); ++i) CHECK(g2.data()[i] == geo.data()[i]);
  for (Index i = 0; i < vis.size(); ++i) CHECK(v2.data()[i] == vis.data()[i]);

  Tensor zgeo = Tensor::zeros({2, 3, 4});
  Tensor fz = fuse(zgeo, vis);
  for (Index t = 0; t < 2; ++t)
    for (Index n = 0; n < 3; ++n)
      for (Index c = 0; c < 4; ++c) CHECK(fz.at({t, n, c}) == 0.0);

  CHECK(fuse(Tensor::zeros({2, 3, 256}), Tensor::zeros({2, 3, 512})).extent(2) == 768);
}

TEST_CASE("gradients flow through fuse(gcn, embed) within 1e-4") {
  std::mt19937_64 rng(47);
  SceneSequence seq;
  seq.T = 2;
  seq.H = 1;
  seq.J = 3;
  seq.O = 1;
  seq.dvis = 3;
  seq.allocate();
  std::uniform_real_distribution<double> u(0.2, 0.8);
  for (Index t = 0; t < seq.T; ++t) {
    for (Index j = 0; j < seq.J; ++j) {
      seq.joint_coord(t, 0, j, 0) = u(rng) * seq.frame_width;
      seq.joint_coord(t, 0, j, 1) = u(rng) * seq.frame_height;
    }
    seq.box_coord(t, 0, 0) = 100;
    seq.box_coord(t, 0, 1) = 150;
    seq.box_coord(t, 0, 2) = 400;
    seq.box_coord(t, 0, 3) = 500;
  }
  for (auto& v : seq.visual_human) v = u(rng);
  for (auto& v : seq.visual_object) v = u(rng);

  SkeletonSpec spec = SkeletonSpec::default_topology(3);
  Tensor adj = build_human_adjacency(spec, 1);
  Tensor w1 = random_tensor({4, 5}, rng, -0.5, 0.5);
  Tensor w2 = random_tensor({5, 5}, rng, -0.5, 0.5);
  VisualEmbedder emb;
  emb.w1 = random_tensor({3, 6}, rng, -0.5, 0.5);
  emb.b1 = random_tensor({6}, rng, -0.2, 0.2);
  emb.w2 = random_tensor({6, 6}, rng, -0.5, 0.5);
  emb.b2 = random_tensor({6}, rng, -0.2, 0.2);
  Tensor geo = build_human_geometry(seq);

  auto loss_through = [&](Tensor&) {
    GcnStack stack{adj, {w1, w2}};
    Tensor hg = gcn_forward(stack, geo);
    auto [hv, ov] = embed_visual(emb, seq);
    return mean_all(mul(fuse(hg, hv), fuse(hg, hv)));
  };
  // probe both a GCN weight and an embedder weight
  CHECK(finite_difference_check(loss_through, w1, 1e-5) < 1e-4);
  CHECK(finite_difference_check(loss_through, emb.w1, 1e-5) < 1e-4);
  CHECK(finite_difference_check(loss_through, emb.b2, 1e-5) < 1e-4);
}

TEST_CASE("shape contracts under paper defaults (C1=512, C2=256, C3=768)") {
  std::mt19937_64 rng(53);
  std::uniform_int_distribution<Index> td(2, 4), hd(1, 2), jd(2, 15), od(1, 4);
  for (int rep = 0; rep < 5; ++rep) {
    const Index T = td(rng), H = hd(rng), J = jd(rng), O = od(rng);
    SceneSequence seq;
    seq.T = T;
    seq.H = H;
    seq.J = J;
    seq.O = O;
    seq.dvis = 16;
    seq.allocate();

    SkeletonSpec spec = SkeletonSpec::default_topology(J);
    GcnStack human{build_human_adjacency(spec, H), {}};
    GcnStack object{build_object_adjacency(O), {}};
    Index in = 4;
    for (int l = 0; l < 4; ++l) {
      human.weights.push_back(Tensor::zeros({in, 256}));
      object.weights.push_back(Tensor::zeros({in, 256}));
      in = 256;
    }
    Tensor hgp = gcn_forward(human, build_human_geometry(seq));
    Tensor ogp = gcn_forward(object, build_object_geometry(seq));
    CHECK(hgp.shape() == Shape{T, H * J, 256});
    CHECK(ogp.shape() == Shape{T, 2 * O, 256});

    VisualEmbedder emb;
    emb.w1 = Tensor::zeros({16, 512});
    emb.b1 = Tensor::zeros({512});
    emb.w2 = Tensor::zeros({512, 512});
    emb.b2 = Tensor::zeros({512});
    auto [hv, ov] = embed_visual(emb, seq);
    CHECK(hv.shape() == Shape{T, H * J, 512});
    CHECK(ov.shape() == Shape{T, 2 * O, 512});

    Tensor nodes = concat<double>({fuse(hgp, hv), fuse(ogp, ov)}, 1);
    CHECK(nodes.shape() == Shape{T, H * J + 2 * O, 768});
  }
}
