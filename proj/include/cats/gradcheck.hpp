#pragma once

// Central finite-difference verification of reverse-mode gradients.

#include <cmath>
#include <utility>

#include "cats/tensor.hpp"

namespace cats {

// Runs f once under a fresh tape to obtain the analytic gradient of the
// scalar f(x) with respect to x, then probes every coordinate of x with a
// central difference of the given step. Returns
//   max_i |analytic_i - central_i| / max(1, |central_i|).
// f must be deterministic; non-finite intermediate values raise ValueError.
template <class S, class F>
S finite_difference_check(F&& f, TensorT<S>& x, S step) {
  if (!(step > S(0))) throw ValueError("finite_difference_check: step must be > 0");
  x.set_requires_grad(true);
  x.zero_grad();

  typename TensorT<S>::Array analytic;
  {
    TapeT<S> tape;
    TapeScopeT<S> scope(tape);
    TensorT<S> loss = f(x);
    if (loss.size() != 1)
      throw ValueError("finite_difference_check: f must return a scalar");
    if (!std::isfinite(loss.item()))
      throw ValueError("finite_difference_check: non-finite loss value");
    backward(loss);
    analytic = x.grad();
  }
  x.zero_grad();

  S max_rel = 0;
  for (Index i = 0; i < x.size(); ++i) {
    const S orig = x.data()[i];
    x.data()[i] = orig + step;
    const S fp = f(x).item();
    x.data()[i] = orig - step;
    const S fm = f(x).item();
    x.data()[i] = orig;
    if (!std::isfinite(fp) || !std::isfinite(fm))
      throw ValueError("finite_difference_check: non-finite intermediate value");
    const S central = (fp - fm) / (S(2) * step);
    const S err = std::abs(analytic[i] - central) / std::max(S(1), std::abs(central));
    max_rel = std::max(max_rel, err);
  }
  return max_rel;
}

}  // namespace cats
