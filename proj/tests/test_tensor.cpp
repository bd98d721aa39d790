#include <doctest.h>

#include <cmath>
#include <random>
#include <thread>

#include "cats/gradcheck.hpp"
#include "cats/tensor.hpp"

using namespace cats;

namespace {

Tensor random_tensor(Shape shape, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Tensor t = Tensor::empty(std::move(shape));
  for (Index i = 0; i < t.size(); ++i) t.data()[i] = u(rng);
  return t;
}

}  // namespace

TEST_CASE("matmul: identity, hand product, zero annihilator") {
  Tensor eye = Tensor::from_values({2, 2}, {1, 0, 0, 1});
  Tensor x = Tensor::from_values({2, 2}, {1, 2, 3, 4});
  Tensor r = matmul(eye, x);
  for (Index i = 0; i < 4; ++i) CHECK(r.data()[i] == x.data()[i]);

  Tensor b = Tensor::from_values({2, 2}, {5, 6, 7, 8});
  Tensor p = matmul(x, b);
  CHECK(p.at({0, 0}) == 19);
  CHECK(p.at({0, 1}) == 22);
  CHECK(p.at({1, 0}) == 43);
  CHECK(p.at({1, 1}) == 50);

  Tensor zero = Tensor::zeros({2, 2});
  Tensor z = matmul(zero, x);
  for (Index i = 0; i < 4; ++i) CHECK(z.data()[i] == 0.0);
}

TEST_CASE("matmul: shape errors name both shapes") {
  Tensor a = Tensor::zeros({2, 3});
  Tensor b = Tensor::zeros({4, 2});
  CHECK_THROWS_WITH_AS(matmul(a, b), doctest::Contains("(2, 3)"), ShapeError);
  CHECK_THROWS_WITH_AS(matmul(a, b), doctest::Contains("(4, 2)"), ShapeError);
  Tensor c = Tensor::zeros({5, 2, 3});
  Tensor d = Tensor::zeros({4, 3, 2});
  CHECK_THROWS_AS(matmul(c, d), ShapeError);
}

TEST_CASE("matmul: batched against per-slice loop") {
  std::mt19937_64 rng(7);
  Tensor a = random_tensor({3, 2, 4}, rng);
  Tensor b = random_tensor({3, 4, 5}, rng);
  Tensor out = matmul(a, b);
  REQUIRE(out.shape() == Shape{3, 2, 5});
  for (Index t = 0; t < 3; ++t)
    for (Index i = 0; i < 2; ++i)
      for (Index j = 0; j < 5; ++j) {
        double acc = 0;
        for (Index k = 0; k < 4; ++k) acc += a.at({t, i, k}) * b.at({t, k, j});
        CHECK(out.at({t, i, j}) == doctest::Approx(acc).epsilon(1e-12));
      }

  // Unbatched right operand broadcasts across the batch.
  Tensor w = random_tensor({4, 5}, rng);
  Tensor out2 = matmul(a, w);
  for (Index t = 0; t < 3; ++t)
    for (Index i = 0; i < 2; ++i)
      for (Index j = 0; j < 5; ++j) {
        double acc = 0;
        for (Index k = 0; k < 4; ++k) acc += a.at({t, i, k}) * w.at({k, j});
        CHECK(out2.at({t, i, j}) == doctest::Approx(acc).epsilon(1e-12));
      }
}

TEST_CASE("activations: fixed points and piecewise values") {
  Tensor x = Tensor::from_values({3}, {0.0, -2.0, 0.0});
  CHECK(tanh(x).data()[0] == 0.0);
  CHECK(leaky_relu(x, 0.2).data()[1] == doctest::Approx(-0.4));
  CHECK(sigmoid(x).data()[2] == 0.5);
  CHECK_THROWS_AS(leaky_relu(x, 1.5), ValueError);
  CHECK_THROWS_AS(elementwise_activation(x, static_cast<Activation>(17)), ValueError);
  CHECK(elementwise_activation(x, Activation::Sigmoid).data()[0] == 0.5);
}

TEST_CASE("softmax: uniform, stability, hand case, mask") {
  Tensor equal = Tensor::zeros({3});
  Tensor u = softmax_last_axis(equal);
  for (Index i = 0; i < 3; ++i) CHECK(u.data()[i] == doctest::Approx(1.0 / 3).epsilon(1e-15));

  Tensor big = Tensor::from_values({2}, {1000.0, 0.0});
  Tensor s = softmax_last_axis(big);
  CHECK(std::isfinite(s.data()[0]));
  CHECK(s.data()[0] == doctest::Approx(1.0));
  CHECK(s.data()[1] == doctest::Approx(0.0));

  Tensor logs = Tensor::from_values({3}, {std::log(2.0), 0.0, 0.0});
  Tensor y = softmax_last_axis(logs);
  CHECK(y.data()[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(y.data()[1] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(y.data()[2] == doctest::Approx(0.25).epsilon(1e-12));

  Tensor mask = Tensor::from_values({3}, {1, 0, 1});
  Tensor m = softmax_last_axis(logs, &mask);
  CHECK(m.data()[1] == 0.0);
  CHECK(m.data()[0] + m.data()[2] == doctest::Approx(1.0).epsilon(1e-12));

  Tensor none = Tensor::zeros({3});
  CHECK_THROWS_AS(softmax_last_axis(logs, &none), ValueError);
}

TEST_CASE("softmax: random slices sum to 1 within 1e-10") {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 50; ++rep) {
    Tensor x = random_tensor({4, 7}, rng, -30.0, 30.0);
    Tensor y = softmax_last_axis(x);
    for (Index r = 0; r < 4; ++r) {
      double sum = 0;
      for (Index c = 0; c < 7; ++c) {
        sum += y.at({r, c});
        CHECK(y.at({r, c}) >= 0.0);
      }
      CHECK(std::abs(sum - 1.0) < 1e-10);
    }
  }
}

TEST_CASE("concat: examples and neutral element") {
  Tensor a = Tensor::from_values({2}, {1, 2});
  Tensor b = Tensor::from_values({1}, {3});
  Tensor c = concat_last_axis(a, b);
  REQUIRE(c.shape() == Shape{3});
  CHECK(c.data()[0] == 1);
  CHECK(c.data()[2] == 3);

  Tensor g = Tensor::zeros({3, 4, 512});
  Tensor v = Tensor::zeros({3, 4, 256});
  CHECK(concat_last_axis(g, v).shape() == Shape{3, 4, 768});

  Tensor empty = Tensor::zeros({2, 0});
  Tensor x = Tensor::from_values({2, 2}, {1, 2, 3, 4});
  Tensor same = concat_last_axis(x, empty);
  REQUIRE(same.shape() == Shape{2, 2});
  for (Index i = 0; i < 4; ++i) CHECK(same.data()[i] == x.data()[i]);

  Tensor bad = Tensor::zeros({3, 2});
  CHECK_THROWS_AS(concat_last_axis(x, bad), ShapeError);
}

TEST_CASE("backward: sum, quadratic, fan-out, replay determinism") {
  Tensor x = Tensor::from_values({3}, {1, 2, 3}).set_requires_grad(true);
  {
    Tape tape;
    TapeScope scope(tape);
    backward(sum_all(x));
  }
  for (Index i = 0; i < 3; ++i) CHECK(x.grad()[i] == 1.0);

  Tensor q = Tensor::from_values({2}, {1, 2}).set_requires_grad(true);
  {
    Tape tape;
    TapeScope scope(tape);
    backward(sum_all(mul(q, q)));
  }
  CHECK(q.grad()[0] == 2.0);
  CHECK(q.grad()[1] == 4.0);

  Tensor f = Tensor::from_values({2}, {0.3, -0.7}).set_requires_grad(true);
  {
    Tape tape;
    TapeScope scope(tape);
    backward(sum_all(add(f, f)));
  }
  CHECK(f.grad()[0] == 2.0);
  CHECK(f.grad()[1] == 2.0);

  // Replaying an identical graph reproduces bit-identical gradients.
  std::mt19937_64 rng(3);
  Tensor w = random_tensor({4, 4}, rng).set_requires_grad(true);
  Tensor inp = random_tensor({2, 4}, rng);
  auto run = [&]() {
    w.zero_grad();
    Tape tape;
    TapeScope scope(tape);
    backward(sum_all(tanh(matmul(inp, w))));
    return std::vector<double>(w.grad().data(), w.grad().data() + w.grad().size());
  };
  const auto g1 = run();
  const auto g2 = run();
  CHECK(g1 == g2);
}

TEST_CASE("backward: error contracts") {
  Tensor x = Tensor::from_values({2}, {1, 2}).set_requires_grad(true);
  {
    Tape tape;
    TapeScope scope(tape);
    Tensor y = add(x, x);
    CHECK_THROWS_AS(backward(y), ValueError);  // non-scalar loss
  }
  Tensor lone = Tensor::scalar(4.0);
  CHECK_THROWS_AS(backward(lone), ValueError);  // not recorded on a tape
}

TEST_CASE("gradients accumulate across backward calls until zeroed") {
  Tensor x = Tensor::from_values({2}, {1.0, 2.0}).set_requires_grad(true);
  for (int i = 0; i < 2; ++i) {
    Tape tape;
    TapeScope scope(tape);
    backward(sum_all(x));
  }
  CHECK(x.grad()[0] == 2.0);
  x.zero_grad();
  CHECK(x.grad()[0] == 0.0);
}

TEST_CASE("finite differences: exactness cases and tanh network") {
  Tensor x = Tensor::from_values({3}, {1.0, -2.0, 0.5});
  auto fsum = [](Tensor& t) { return sum_all(t); };
  CHECK(finite_difference_check(fsum, x, 1e-5) < 1e-9);

  Tensor x3 = Tensor::from_values({1}, {3.0});
  auto fsq = [](Tensor& t) { return sum_all(mul(t, t)); };
  CHECK(finite_difference_check(fsq, x3, 1e-5) < 1e-9);

  std::mt19937_64 rng(17);
  Tensor w = random_tensor({5, 4}, rng);
  Tensor v = random_tensor({2, 5}, rng);
  auto fnet = [&](Tensor& t) { return sum_all(tanh(matmul(v, t))); };
  CHECK(finite_difference_check(fnet, w, 1e-5) < 1e-4);
}

TEST_CASE("per-primitive gradients match finite differences") {
  std::mt19937_64 rng(23);
  const double tol = 1e-4;

  Tensor a = random_tensor({3, 4}, rng);
  auto with = [&](auto body) { return [body](Tensor& t) { return body(t); }; };

  auto check = [&](const char* name, auto f, Tensor x) {
    INFO(name);
    CHECK(finite_difference_check(f, x, 1e-5) < tol);
  };

  check("tanh", with([](Tensor& t) { return sum_all(tanh(t)); }), random_tensor({3, 4}, rng));
  check("sigmoid", with([](Tensor& t) { return sum_all(sigmoid(t)); }),
        random_tensor({3, 4}, rng));
  {
    // leaky_relu tested away from the kink by a margin of 1e-3
    Tensor x = random_tensor({4, 4}, rng);
    for (Index i = 0; i < x.size(); ++i)
      if (std::abs(x.data()[i]) < 1e-3) x.data()[i] = 0.25;
    check("leaky_relu", with([](Tensor& t) { return sum_all(leaky_relu(t, 0.2)); }), x);
  }
  check("softmax", with([](Tensor& t) {
          Tensor w = Tensor::from_values({3}, {0.3, -1.0, 2.0});
          return sum_all(mul(softmax_last_axis(t), w));
        }),
        random_tensor({4, 3}, rng));
  {
    Tensor mask = Tensor::from_values({3}, {1, 0, 1});
    check("masked softmax", with([mask](Tensor& t) {
            Tensor m = mask;
            Tensor w = Tensor::from_values({3}, {0.7, -0.2, 1.3});
            return sum_all(mul(softmax_last_axis(t, &m), w));
          }),
          random_tensor({4, 3}, rng));
  }
  check("matmul lhs", with([&](Tensor& t) { return sum_all(tanh(matmul(t, a))); }),
        random_tensor({2, 3}, rng));
  check("matmul rhs", with([&](Tensor& t) { return sum_all(tanh(matmul(a, t))); }),
        random_tensor({4, 2}, rng));
  check("matmul batched lhs vs shared rhs",
        with([&](Tensor& t) { return sum_all(tanh(matmul(t, a))); }),
        random_tensor({5, 2, 3}, rng));
  {
    Tensor batched = random_tensor({5, 2, 3}, rng);
    check("matmul shared rhs vs batched lhs",
          with([batched](Tensor& t) { return sum_all(tanh(matmul(batched, t))); }),
          random_tensor({3, 4}, rng));
  }
  check("add bias broadcast", with([&](Tensor& t) {
          Tensor x = Tensor::from_values({2, 3}, {1, 2, 3, 4, 5, 6});
          return sum_all(tanh(add(x, t)));
        }),
        random_tensor({3}, rng));
  check("sub swapped", with([&](Tensor& t) {
          Tensor x = Tensor::from_values({3}, {1, 2, 3});
          return sum_all(tanh(sub(x, t)));
        }),
        random_tensor({2, 3}, rng));
  check("mul broadcast", with([&](Tensor& t) {
          Tensor x = Tensor::from_values({2, 3}, {1, -2, 3, 0.5, 1.5, -0.5});
          return sum_all(tanh(mul(x, t)));
        }),
        random_tensor({3}, rng));
  check("scale+add_scalar",
        with([](Tensor& t) { return sum_all(add_scalar(scale(t, -2.5), 0.7)); }),
        random_tensor({4}, rng));
  check("concat", with([](Tensor& t) {
          Tensor other = Tensor::from_values({2, 2}, {0.4, -0.6, 1.1, 0.2});
          Tensor joined = concat<double>({t, other, t}, 1);
          return sum_all(tanh(joined));
        }),
        random_tensor({2, 3}, rng));
  check("slice", with([](Tensor& t) { return sum_all(tanh(slice(t, 1, 1, 2))); }),
        random_tensor({3, 4}, rng));
  check("reduce_sum middle axis",
        with([](Tensor& t) { return sum_all(tanh(reduce_sum(t, 1))); }),
        random_tensor({2, 3, 2}, rng));
  check("reduce_mean keepdim",
        with([](Tensor& t) { return sum_all(tanh(reduce_mean(t, 1, true))); }),
        random_tensor({2, 3, 2}, rng));
  check("mean_all", with([](Tensor& t) { return mean_all(mul(t, t)); }),
        random_tensor({5}, rng));
  check("reshape", with([](Tensor& t) { return sum_all(tanh(reshape(t, {6}))); }),
        random_tensor({2, 3}, rng));
  check("repeat_interleave",
        with([](Tensor& t) {
          Tensor w = Tensor::from_values({2, 6, 1}, {1, -1, 2, 0.5, 1, 3, -2, 1, 0.5, 1, 2, -1});
          return sum_all(mul(repeat_interleave(t, 1, 3), reshape(w, {2, 6, 1})));
        }),
        random_tensor({2, 2, 1}, rng));
  check("outer_add", with([](Tensor& t) {
          Tensor v = Tensor::from_values({2, 3}, {0.2, -0.4, 0.6, 1.0, -1.2, 0.1});
          return sum_all(tanh(outer_add(t, v)));
        }),
        random_tensor({2, 4}, rng));
  check("cross_entropy", with([](Tensor& t) {
          return cross_entropy_mean(t, std::vector<int>{2, 0, 1, 2});
        }),
        random_tensor({4, 3}, rng));
}

TEST_CASE("straight-through one-hot: exact forward, soft gradient") {
  Tensor soft = Tensor::from_values({2, 3}, {0.2, 0.5, 0.3, 0.6, 0.3, 0.1});
  Tensor hard = straight_through_onehot(soft);
  CHECK(hard.at({0, 1}) == 1.0);
  CHECK(hard.at({0, 0}) == 0.0);
  CHECK(hard.at({1, 0}) == 1.0);

  // Gradient through the hard output equals the gradient of the soft path.
  Tensor logits = Tensor::from_values({2, 3}, {0.3, -0.2, 0.9, 1.4, 0.1, -0.6});
  Tensor weight = Tensor::from_values({3}, {0.7, -0.3, 1.9});
  auto grad_of = [&](bool hard_path) {
    Tensor x = Tensor::from_values(logits.shape(),
                                   std::vector<double>(logits.data(), logits.data() + 6));
    x.set_requires_grad(true);
    Tape tape;
    TapeScope scope(tape);
    Tensor y = softmax_last_axis(x);
    if (hard_path) y = straight_through_onehot(y);
    backward(sum_all(mul(y, weight)));
    return std::vector<double>(x.grad().data(), x.grad().data() + 6);
  };
  CHECK(grad_of(true) == grad_of(false));
}

TEST_CASE("ties in straight-through argmax break toward the lower index") {
  Tensor tie = Tensor::from_values({1, 3}, {0.4, 0.4, 0.2});
  Tensor hard = straight_through_onehot(tie);
  CHECK(hard.at({0, 0}) == 1.0);
  CHECK(hard.at({0, 1}) == 0.0);
}

TEST_CASE("cross_entropy: uniform logits give ln(num_classes)") {
  Tensor logits = Tensor::zeros({5, 13});
  Tensor loss = cross_entropy_mean(logits, std::vector<int>(5, 3));
  CHECK(loss.item() == doctest::Approx(std::log(13.0)).epsilon(1e-12));
  CHECK_THROWS_AS(cross_entropy_mean(logits, std::vector<int>(5, 13)), ValueError);
  CHECK_THROWS_AS(cross_entropy_mean(logits, std::vector<int>(4, 0)), ShapeError);
}

TEST_CASE("distinct tapes run concurrently on distinct threads") {
  auto worker = [](double seedv, std::vector<double>* out) {
    Tensor x = Tensor::from_values({3}, {seedv, seedv + 1, seedv + 2}).set_requires_grad(true);
    for (int rep = 0; rep < 50; ++rep) {
      x.zero_grad();
      Tape tape;
      TapeScope scope(tape);
      backward(sum_all(mul(x, tanh(x))));
    }
    out->assign(x.grad().data(), x.grad().data() + 3);
  };
  std::vector<double> a, b, a_ref, b_ref;
  worker(0.5, &a_ref);
  worker(-1.5, &b_ref);
  std::thread ta(worker, 0.5, &a);
  std::thread tb(worker, -1.5, &b);
  ta.join();
  tb.join();
  CHECK(a == a_ref);
  CHECK(b == b_ref);
}

TEST_CASE("float instantiation works end to end") {
  using TF = TensorT<float>;
  TF x = TF::from_values({2, 2}, {1.f, 2.f, 3.f, 4.f}).set_requires_grad(true);
  TapeT<float> tape;
  {
    TapeScopeT<float> scope(tape);
    TF loss = sum_all(mul(x, x));
    backward(loss);
  }
  CHECK(x.grad()[3] == 8.f);
}
