#pragma once

// Dense row-major tensors with reverse-mode differentiation on an explicit
// tape. Eigen supplies the numeric kernels; everything else is plain C++.
//
// Recording model: ops executed while a TapeScope is active push one adjoint
// record per op onto the scoped tape. backward(loss) replays the records in
// reverse. Gradients accumulate additively; the caller zeroes them between
// optimization steps. A tape and its tensors form one single-threaded unit
// of work; distinct tapes may live on distinct threads.

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <limits>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cats {

using Index = std::int64_t;
using Shape = std::vector<Index>;

struct ShapeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ValueError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline Index numel(const Shape& s) {
  Index n = 1;
  for (Index e : s) n *= e;
  return n;
}

inline std::string shape_str(const Shape& s) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) os << ", ";
    os << s[i];
  }
  os << ')';
  return os.str();
}

template <class S>
class TapeT;

namespace detail {

template <class S>
struct NodeT {
  Shape shape;
  Eigen::Array<S, Eigen::Dynamic, 1> values;
  Eigen::Array<S, Eigen::Dynamic, 1> grad;  // size 0 until first accumulation
  bool requires_grad = false;               // leaf marker
  bool needs_grad = false;                  // true if a backward path wants this
  TapeT<S>* tape = nullptr;                 // tape that produced this node, if any
};

template <class S>
inline void ensure_grad(NodeT<S>& n) {
  if (n.grad.size() == 0)
    n.grad = Eigen::Array<S, Eigen::Dynamic, 1>::Zero(n.values.size());
}

}  // namespace detail

template <class S>
class TensorT {
 public:
  using Scalar = S;
  using Node = detail::NodeT<S>;
  using Array = Eigen::Array<S, Eigen::Dynamic, 1>;

  TensorT() = default;
  explicit TensorT(std::shared_ptr<Node> n) : node(std::move(n)) {}

  static TensorT empty(Shape shape) {
    auto n = std::make_shared<Node>();
    Index sz = numel(shape);
    if (sz < 0) throw ShapeError("tensor: negative extent in " + shape_str(shape));
    n->shape = std::move(shape);
    n->values.resize(sz);
    return TensorT(std::move(n));
  }
  static TensorT zeros(Shape shape) {
    TensorT t = empty(std::move(shape));
    t.node->values.setZero();
    return t;
  }
  static TensorT constant(Shape shape, S v) {
    TensorT t = empty(std::move(shape));
    t.node->values.setConstant(v);
    return t;
  }
  static TensorT from_values(Shape shape, std::vector<S> vals) {
    TensorT t = empty(std::move(shape));
    if (static_cast<Index>(vals.size()) != t.size())
      throw ShapeError("tensor: " + std::to_string(vals.size()) +
                       " values for shape " + shape_str(t.shape()));
    std::copy(vals.begin(), vals.end(), t.node->values.data());
    return t;
  }
  static TensorT scalar(S v) { return constant({}, v); }

  bool defined() const { return node != nullptr; }
  const Shape& shape() const { return node->shape; }
  Index dim() const { return static_cast<Index>(node->shape.size()); }
  Index size() const { return node->values.size(); }
  Index extent(int axis) const {
    int d = static_cast<int>(node->shape.size());
    if (axis < 0) axis += d;
    if (axis < 0 || axis >= d)
      throw ShapeError("tensor: axis " + std::to_string(axis) + " out of range for " +
                       shape_str(node->shape));
    return node->shape[axis];
  }

  Array& values() { return node->values; }
  const Array& values() const { return node->values; }
  S* data() { return node->values.data(); }
  const S* data() const { return node->values.data(); }
  S item() const {
    if (size() != 1)
      throw ValueError("tensor: item() on non-scalar shape " + shape_str(node->shape));
    return node->values[0];
  }
  S at(std::initializer_list<Index> idx) const {
    if (static_cast<Index>(idx.size()) != dim())
      throw ShapeError("tensor: rank mismatch in at()");
    Index off = 0, stride = 1;
    const Shape& sh = node->shape;
    auto it = idx.end();
    for (Index a = dim() - 1; a >= 0; --a) {
      Index i = *(--it);
      off += i * stride;
      stride *= sh[a];
    }
    return node->values[off];
  }

  bool requires_grad() const { return node->requires_grad; }
  TensorT& set_requires_grad(bool b = true) {
    node->requires_grad = b;
    node->needs_grad = b;
    return *this;
  }
  bool has_grad() const { return node->grad.size() != 0; }
  Array& grad() {
    detail::ensure_grad(*node);
    return node->grad;
  }
  const Array& grad() const {
    detail::ensure_grad(*node);
    return node->grad;
  }
  void zero_grad() {
    if (node->grad.size() != 0) node->grad.setZero();
  }

  std::shared_ptr<Node> node;
};

using Tensor = TensorT<double>;

// ---------------------------------------------------------------------------
// Tape

template <class S>
class TapeT {
 public:
  TapeT() = default;
  TapeT(const TapeT&) = delete;
  TapeT& operator=(const TapeT&) = delete;

  void record(std::function<void()> adjoint, std::shared_ptr<detail::NodeT<S>> out) {
    records_.push_back({std::move(adjoint), std::move(out)});
  }

  // Replays adjoints newest-to-oldest, once each. Intermediate (non-leaf)
  // grads are reset first so a replay reproduces the same numbers.
  void backward_from(const TensorT<S>& loss) {
    for (auto& r : records_)
      if (!r.out->requires_grad && r.out->grad.size() != 0) r.out->grad.setZero();
    detail::ensure_grad(*loss.node);
    loss.node->grad[0] += S(1);
    for (auto it = records_.rbegin(); it != records_.rend(); ++it)
      if (it->out->grad.size() != 0) it->adjoint();
  }

  std::size_t size() const { return records_.size(); }
  void clear() { records_.clear(); }

 private:
  struct Record {
    std::function<void()> adjoint;
    std::shared_ptr<detail::NodeT<S>> out;
  };
  std::vector<Record> records_;
};

using Tape = TapeT<double>;

namespace detail {
template <class S>
inline TapeT<S>*& active_tape_slot() {
  static thread_local TapeT<S>* t = nullptr;
  return t;
}
}  // namespace detail

template <class S>
inline TapeT<S>* active_tape() {
  return detail::active_tape_slot<S>();
}

template <class S>
class TapeScopeT {
 public:
  explicit TapeScopeT(TapeT<S>& t) : prev_(detail::active_tape_slot<S>()) {
    detail::active_tape_slot<S>() = &t;
  }
  ~TapeScopeT() { detail::active_tape_slot<S>() = prev_; }
  TapeScopeT(const TapeScopeT&) = delete;
  TapeScopeT& operator=(const TapeScopeT&) = delete;

 private:
  TapeT<S>* prev_;
};

using TapeScope = TapeScopeT<double>;

template <class S>
void backward(const TensorT<S>& loss) {
  if (loss.size() != 1)
    throw ValueError("backward: loss must be scalar, got shape " + shape_str(loss.shape()));
  if (!loss.node->tape)
    throw ValueError("backward: loss was not produced by operations recorded on a tape");
  loss.node->tape->backward_from(loss);
}

// ---------------------------------------------------------------------------
// Op plumbing

namespace detail {

template <class S>
inline bool mark_recorded(TensorT<S>& out, bool any_input_needs) {
  TapeT<S>* tape = active_tape<S>();
  if (tape && any_input_needs) {
    out.node->needs_grad = true;
    out.node->tape = tape;
    return true;
  }
  return false;
}

template <class S>
using MatMap = Eigen::Map<Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
template <class S>
using ConstMatMap =
    Eigen::Map<const Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

// Flattens shape around `axis` into (outer, extent, inner).
inline void axis_blocks(const Shape& sh, int axis, Index& outer, Index& len, Index& inner) {
  outer = 1;
  inner = 1;
  for (int i = 0; i < axis; ++i) outer *= sh[i];
  len = sh[axis];
  for (std::size_t i = axis + 1; i < sh.size(); ++i) inner *= sh[i];
}

inline int normalize_axis(const Shape& sh, int axis, const char* op) {
  int d = static_cast<int>(sh.size());
  int a = axis < 0 ? axis + d : axis;
  if (a < 0 || a >= d)
    throw ShapeError(std::string(op) + ": axis " + std::to_string(axis) +
                     " out of range for " + shape_str(sh));
  return a;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Elementwise unary ops

template <class S, class Fwd, class Adj>
TensorT<S> unary_op(const TensorT<S>& x, Fwd&& fwd, Adj&& adj) {
  TensorT<S> out = TensorT<S>::empty(x.shape());
  fwd(x.node->values, out.node->values);
  if (detail::mark_recorded(out, x.node->needs_grad)) {
    auto xn = x.node;
    auto on = out.node;
    active_tape<S>()->record(
        [xn, on, adj]() {
          if (!xn->needs_grad) return;
          detail::ensure_grad(*xn);
          adj(*xn, *on);
        },
        on);
  }
  return out;
}

template <class S>
TensorT<S> tanh(const TensorT<S>& x) {
  return unary_op(
      x, [](const auto& v, auto& o) { o = v.tanh(); },
      [](auto& xn, const auto& on) { xn.grad += on.grad * (S(1) - on.values.square()); });
}

template <class S>
TensorT<S> sigmoid(const TensorT<S>& x) {
  return unary_op(
      x, [](const auto& v, auto& o) { o = S(1) / (S(1) + (-v).exp()); },
      [](auto& xn, const auto& on) {
        xn.grad += on.grad * on.values * (S(1) - on.values);
      });
}

// Subgradient at 0 takes the positive branch.
template <class S>
TensorT<S> leaky_relu(const TensorT<S>& x, S slope = S(0.2)) {
  if (!(slope > S(0) && slope < S(1)))
    throw ValueError("leaky_relu: slope must lie in (0,1)");
  return unary_op(
      x,
      [slope](const auto& v, auto& o) { o = (v >= S(0)).select(v, v * slope); },
      [slope](auto& xn, const auto& on) {
        for (Index i = 0; i < xn.values.size(); ++i)
          xn.grad[i] += on.grad[i] * (xn.values[i] >= S(0) ? S(1) : slope);
      });
}

enum class Activation { Tanh, LeakyRelu, Sigmoid };

template <class S>
TensorT<S> elementwise_activation(const TensorT<S>& x, Activation kind, S slope = S(0.2)) {
  switch (kind) {
    case Activation::Tanh: return tanh(x);
    case Activation::LeakyRelu: return leaky_relu(x, slope);
    case Activation::Sigmoid: return sigmoid(x);
  }
  throw ValueError("elementwise_activation: invalid kind");
}

template <class S>
TensorT<S> scale(const TensorT<S>& x, S c) {
  return unary_op(
      x, [c](const auto& v, auto& o) { o = v * c; },
      [c](auto& xn, const auto& on) { xn.grad += on.grad * c; });
}

template <class S>
TensorT<S> add_scalar(const TensorT<S>& x, S c) {
  return unary_op(
      x, [c](const auto& v, auto& o) { o = v + c; },
      [](auto& xn, const auto& on) { xn.grad += on.grad; });
}

// ---------------------------------------------------------------------------
// Elementwise binary ops with leading-batch broadcast: shapes must be equal,
// or one operand's shape must be a suffix of the other's (the smaller operand
// is repeated across the leading axes).

namespace detail {

inline bool is_suffix(const Shape& small, const Shape& big) {
  if (small.size() > big.size()) return false;
  return std::equal(small.rbegin(), small.rend(), big.rbegin());
}

}  // namespace detail

namespace detail {

enum class BinKind { Add, Sub, Mul };

}  // namespace detail

template <class S>
TensorT<S> binary_op(const TensorT<S>& a, const TensorT<S>& b, detail::BinKind kind,
                     const char* name) {
  const bool a_big = detail::is_suffix(b.shape(), a.shape());
  const bool b_big = detail::is_suffix(a.shape(), b.shape());
  if (!a_big && !b_big)
    throw ShapeError(std::string(name) + ": incompatible shapes " + shape_str(a.shape()) +
                     " vs " + shape_str(b.shape()));
  // `big` carries the output shape; `small` repeats across the leading axes.
  const TensorT<S>& big = a_big ? a : b;
  const TensorT<S>& small = a_big ? b : a;
  const bool swapped = !a_big;

  TensorT<S> out = TensorT<S>::empty(big.shape());
  const Index k = small.size();
  const Index reps = k == 0 ? 0 : big.size() / k;
  const S* bp = big.data();
  const S* sp = small.data();
  S* op = out.data();
  for (Index r = 0; r < reps; ++r)
    for (Index j = 0; j < k; ++j) {
      const S x = bp[r * k + j], y = sp[j];
      S v;
      switch (kind) {
        case detail::BinKind::Add: v = x + y; break;
        case detail::BinKind::Sub: v = swapped ? y - x : x - y; break;
        default: v = x * y; break;
      }
      op[r * k + j] = v;
    }

  if (detail::mark_recorded(out, a.node->needs_grad || b.node->needs_grad)) {
    auto bn = big.node;
    auto sn = small.node;
    auto on = out.node;
    active_tape<S>()->record(
        [bn, sn, on, reps, k, kind, swapped]() {
          const S* g = on->grad.data();
          if (bn->needs_grad) {
            detail::ensure_grad(*bn);
            S* gb = bn->grad.data();
            const S* sp = sn->values.data();
            for (Index r = 0; r < reps; ++r)
              for (Index j = 0; j < k; ++j) {
                const S gij = g[r * k + j];
                switch (kind) {
                  case detail::BinKind::Add: gb[r * k + j] += gij; break;
                  case detail::BinKind::Sub: gb[r * k + j] += swapped ? -gij : gij; break;
                  default: gb[r * k + j] += gij * sp[j]; break;
                }
              }
          }
          if (sn->needs_grad) {
            detail::ensure_grad(*sn);
            S* gs = sn->grad.data();
            const S* bp = bn->values.data();
            for (Index r = 0; r < reps; ++r)
              for (Index j = 0; j < k; ++j) {
                const S gij = g[r * k + j];
                switch (kind) {
                  case detail::BinKind::Add: gs[j] += gij; break;
                  case detail::BinKind::Sub: gs[j] += swapped ? gij : -gij; break;
                  default: gs[j] += gij * bp[r * k + j]; break;
                }
              }
          }
        },
        on);
  }
  return out;
}

template <class S>
TensorT<S> add(const TensorT<S>& a, const TensorT<S>& b) {
  return binary_op(a, b, detail::BinKind::Add, "add");
}

template <class S>
TensorT<S> sub(const TensorT<S>& a, const TensorT<S>& b) {
  return binary_op(a, b, detail::BinKind::Sub, "sub");
}

template <class S>
TensorT<S> mul(const TensorT<S>& a, const TensorT<S>& b) {
  return binary_op(a, b, detail::BinKind::Mul, "mul");
}

template <class S>
TensorT<S> operator+(const TensorT<S>& a, const TensorT<S>& b) { return add(a, b); }
template <class S>
TensorT<S> operator-(const TensorT<S>& a, const TensorT<S>& b) { return sub(a, b); }
template <class S>
TensorT<S> operator*(const TensorT<S>& a, const TensorT<S>& b) { return mul(a, b); }

// ---------------------------------------------------------------------------
// matmul: [..., m, k] x [..., k, n] -> [..., m, n]. Leading batch dims must
// agree exactly or be absent on one side; the unbatched operand is shared
// across the batch and its gradient sums over it.

template <class S>
TensorT<S> matmul(const TensorT<S>& a, const TensorT<S>& b) {
  const Shape& sa = a.shape();
  const Shape& sb = b.shape();
  if (sa.size() < 2 || sb.size() < 2)
    throw ShapeError("matmul: operands must have rank >= 2, got " + shape_str(sa) + " and " +
                     shape_str(sb));
  const Index m = sa[sa.size() - 2], ka = sa[sa.size() - 1];
  const Index kb = sb[sb.size() - 2], n = sb[sb.size() - 1];
  if (ka != kb)
    throw ShapeError("matmul: inner dimensions disagree: " + shape_str(sa) + " x " +
                     shape_str(sb));
  Shape lead_a(sa.begin(), sa.end() - 2);
  Shape lead_b(sb.begin(), sb.end() - 2);
  if (!lead_a.empty() && !lead_b.empty() && lead_a != lead_b)
    throw ShapeError("matmul: leading batch dimensions disagree: " + shape_str(sa) + " x " +
                     shape_str(sb));
  const Shape& lead = lead_a.empty() ? lead_b : lead_a;
  const Index batch = numel(lead);
  const Index stride_a = lead_a.empty() ? 0 : m * ka;
  const Index stride_b = lead_b.empty() ? 0 : ka * n;

  Shape out_shape = lead;
  out_shape.push_back(m);
  out_shape.push_back(n);
  TensorT<S> out = TensorT<S>::empty(std::move(out_shape));
  for (Index i = 0; i < batch; ++i) {
    detail::ConstMatMap<S> ma(a.data() + i * stride_a, m, ka);
    detail::ConstMatMap<S> mb(b.data() + i * stride_b, ka, n);
    detail::MatMap<S> mo(out.data() + i * m * n, m, n);
    mo.noalias() = ma * mb;
  }
  if (detail::mark_recorded(out, a.node->needs_grad || b.node->needs_grad)) {
    auto an = a.node;
    auto bn = b.node;
    auto on = out.node;
    active_tape<S>()->record(
        [an, bn, on, batch, m, ka, n, stride_a, stride_b]() {
          if (an->needs_grad) detail::ensure_grad(*an);
          if (bn->needs_grad) detail::ensure_grad(*bn);
          for (Index i = 0; i < batch; ++i) {
            detail::ConstMatMap<S> g(on->grad.data() + i * m * n, m, n);
            if (an->needs_grad) {
              detail::ConstMatMap<S> mb(bn->values.data() + i * stride_b, ka, n);
              detail::MatMap<S> ga(an->grad.data() + i * stride_a, m, ka);
              ga.noalias() += g * mb.transpose();
            }
            if (bn->needs_grad) {
              detail::ConstMatMap<S> ma(an->values.data() + i * stride_a, m, ka);
              detail::MatMap<S> gb(bn->grad.data() + i * stride_b, ka, n);
              gb.noalias() += ma.transpose() * g;
            }
          }
        },
        on);
  }
  return out;
}

// ---------------------------------------------------------------------------
// softmax over the last axis, numerically stabilized by max-subtraction.
// The optional mask (nonzero = keep) must have the same shape as x, or be a
// suffix of it (shared across leading axes). Masked positions are exactly 0.

template <class S>
TensorT<S> softmax_last_axis(const TensorT<S>& x, const TensorT<S>* mask = nullptr) {
  if (x.dim() < 1) throw ShapeError("softmax_last_axis: scalar input");
  const Index len = x.extent(-1);
  const Index rows = x.size() / len;
  const S* mk = nullptr;
  Index mask_rows = 0;
  if (mask) {
    if (!detail::is_suffix(mask->shape(), x.shape()) || mask->size() % len != 0)
      throw ShapeError("softmax_last_axis: mask shape " + shape_str(mask->shape()) +
                       " does not align with " + shape_str(x.shape()));
    mk = mask->data();
    mask_rows = mask->size() / len;
  }

  TensorT<S> out = TensorT<S>::empty(x.shape());
  const S* xv = x.data();
  S* ov = out.data();
  for (Index r = 0; r < rows; ++r) {
    const S* row = xv + r * len;
    S* orow = ov + r * len;
    const S* mrow = mk ? mk + (r % mask_rows) * len : nullptr;
    S mx = -std::numeric_limits<S>::infinity();
    for (Index i = 0; i < len; ++i)
      if (!mrow || mrow[i] != S(0)) mx = std::max(mx, row[i]);
    if (mx == -std::numeric_limits<S>::infinity())
      throw ValueError("softmax_last_axis: fully masked slice at row " + std::to_string(r));
    S z = 0;
    for (Index i = 0; i < len; ++i) {
      if (mrow && mrow[i] == S(0)) {
        orow[i] = S(0);
      } else {
        orow[i] = std::exp(row[i] - mx);
        z += orow[i];
      }
    }
    for (Index i = 0; i < len; ++i) orow[i] /= z;
  }

  if (detail::mark_recorded(out, x.node->needs_grad)) {
    auto xn = x.node;
    auto on = out.node;
    active_tape<S>()->record(
        [xn, on, rows, len]() {
          if (!xn->needs_grad) return;
          detail::ensure_grad(*xn);
          for (Index r = 0; r < rows; ++r) {
            const S* y = on->values.data() + r * len;
            const S* g = on->grad.data() + r * len;
            S* gx = xn->grad.data() + r * len;
            S dot = 0;
            for (Index i = 0; i < len; ++i) dot += g[i] * y[i];
            for (Index i = 0; i < len; ++i) gx[i] += y[i] * (g[i] - dot);
          }
        },
        on);
  }
  return out;
}

// ---------------------------------------------------------------------------
// concat / slice / reshape / repeat

template <class S>
TensorT<S> concat(const std::vector<TensorT<S>>& parts, int axis) {
  if (parts.empty()) throw ValueError("concat: no inputs");
  const Shape& s0 = parts[0].shape();
  const int a = detail::normalize_axis(s0, axis, "concat");
  Index total = 0;
  for (const auto& p : parts) {
    const Shape& sp = p.shape();
    if (sp.size() != s0.size())
      throw ShapeError("concat: rank mismatch " + shape_str(s0) + " vs " + shape_str(sp));
    for (std::size_t i = 0; i < s0.size(); ++i)
      if (static_cast<int>(i) != a && sp[i] != s0[i])
        throw ShapeError("concat: leading-dimension mismatch " + shape_str(s0) + " vs " +
                         shape_str(sp));
    total += sp[a];
  }
  Shape out_shape = s0;
  out_shape[a] = total;
  TensorT<S> out = TensorT<S>::empty(out_shape);

  Index outer, len_out, inner;
  detail::axis_blocks(out_shape, a, outer, len_out, inner);
  bool needs = false;
  Index off = 0;
  for (const auto& p : parts) {
    const Index len_p = p.shape()[a];
    for (Index o = 0; o < outer; ++o)
      std::copy(p.data() + o * len_p * inner, p.data() + (o + 1) * len_p * inner,
                out.data() + (o * len_out + off) * inner);
    off += len_p;
    needs = needs || p.node->needs_grad;
  }
  if (detail::mark_recorded(out, needs)) {
    std::vector<std::shared_ptr<detail::NodeT<S>>> ins;
    std::vector<Index> lens;
    for (const auto& p : parts) {
      ins.push_back(p.node);
      lens.push_back(p.shape()[a]);
    }
    auto on = out.node;
    active_tape<S>()->record(
        [ins, lens, on, outer, len_out, inner]() {
          Index off = 0;
          for (std::size_t i = 0; i < ins.size(); ++i) {
            auto& in = *ins[i];
            const Index len_p = lens[i];
            if (in.needs_grad) {
              detail::ensure_grad(in);
              for (Index o = 0; o < outer; ++o) {
                const S* g = on->grad.data() + (o * len_out + off) * inner;
                S* gi = in.grad.data() + o * len_p * inner;
                for (Index j = 0; j < len_p * inner; ++j) gi[j] += g[j];
              }
            }
            off += len_p;
          }
        },
        on);
  }
  return out;
}

template <class S>
TensorT<S> concat_last_axis(const TensorT<S>& a, const TensorT<S>& b) {
  return concat<S>({a, b}, -1);
}

template <class S>
TensorT<S> slice(const TensorT<S>& x, int axis, Index start, Index len) {
  const int a = detail::normalize_axis(x.shape(), axis, "slice");
  const Index ext = x.shape()[a];
  if (start < 0 || len < 1 || start + len > ext)
    throw ShapeError("slice: range [" + std::to_string(start) + ", " +
                     std::to_string(start + len) + ") out of bounds for extent " +
                     std::to_string(ext));
  Shape out_shape = x.shape();
  out_shape[a] = len;
  TensorT<S> out = TensorT<S>::empty(out_shape);
  Index outer, ext_in, inner;
  detail::axis_blocks(x.shape(), a, outer, ext_in, inner);
  for (Index o = 0; o < outer; ++o)
    std::copy(x.data() + (o * ext_in + start) * inner,
              x.data() + (o * ext_in + start + len) * inner, out.data() + o * len * inner);
  if (detail::mark_recorded(out, x.node->needs_grad)) {
    auto xn = x.node;
    auto on = out.node;
    active_tape<S>()->record(
        [xn, on, outer, ext_in, inner, start, len]() {
          if (!xn->needs_grad) return;
          detail::ensure_grad(*xn);
          for (Index o = 0; o < outer; ++o) {
            const S* g = on->grad.data() + o * len * inner;
            S* gx = xn->grad.data() + (o * ext_in + start) * inner;
            for (Index j = 0; j < len * inner; ++j) gx[j] += g[j];
          }
        },
        on);
  }
  return out;
}

template <class S>
TensorT<S> reshape(const TensorT<S>& x, Shape new_shape) {
  if (numel(new_shape) != x.size())
    throw ShapeError("reshape: cannot view " + shape_str(x.shape()) + " as " +
                     shape_str(new_shape));
  TensorT<S> out = TensorT<S>::empty(std::move(new_shape));
  out.node->values = x.node->values;
  if (detail::mark_recorded(out, x.node->needs_grad)) {
    auto xn = x.node;
    auto on = out.node;
    active_tape<S>()->record(
        [xn, on]() {
          if (!xn->needs_grad) return;
          detail::ensure_grad(*xn);
          xn->grad += on->grad;
        },
        on);
  }
  return out;
}

// Each index along `axis` is repeated `times` consecutive times.
template <class S>
TensorT<S> repeat_interleave(const TensorT<S>& x, int axis, Index times) {
  if (times < 1) throw ValueError("repeat_interleave: times must be >= 1");
  const int a = detail::normalize_axis(x.shape(), axis, "repeat_interleave");
  Shape out_shape = x.shape();
  out_shape[a] *= times;
  TensorT<S> out = TensorT<S>::empty(out_shape);
  Index outer, len, inner;
  detail::axis_blocks(x.shape(), a, outer, len, inner);
  for (Index o = 0; o < outer; ++o)
    for (Index i = 0; i < len; ++i)
      for (Index r = 0; r < times; ++r)
        std::copy(x.data() + (o * len + i) * inner, x.data() + (o * len + i + 1) * inner,
                  out.data() + ((o * len + i) * times + r) * inner);
  if (detail::mark_recorded(out, x.node->needs_grad)) {
    auto xn = x.node;
    auto on = out.node;
    active_tape<S>()->record(
        [xn, on, outer, len, inner, times]() {
          if (!xn->needs_grad) return;
          detail::ensure_grad(*xn);
          for (Index o = 0; o < outer; ++o)
            for (Index i = 0; i < len; ++i) {
              S* gx = xn->grad.data() + (o * len + i) * inner;
              for (Index r = 0; r < times; ++r) {
                const S* g = on->grad.data() + ((o * len + i) * times + r) * inner;
                for (Index j = 0; j < inner; ++j) gx[j] += g[j];
              }
            }
        },
        on);
  }
  return out;
}

// ---------------------------------------------------------------------------
// reductions

template <class S>
TensorT<S> reduce_sum(const TensorT<S>& x, int axis, bool keepdim = false) {
  const int a = detail::normalize_axis(x.shape(), axis, "reduce_sum");
  Index outer, len, inner;
  detail::axis_blocks(x.shape(), a, outer, len, inner);
  Shape out_shape = x.shape();
  if (keepdim)
    out_shape[a] = 1;
  else
    out_shape.erase(out_shape.begin() + a);
  TensorT<S> out = TensorT<S>::zeros(std::move(out_shape));
  for (Index o = 0; o < outer; ++o)
    for (Index i = 0; i < len; ++i) {
      const S* xr = x.data() + (o * len + i) * inner;
      S* orow = out.data() + o * inner;
      for (Index j = 0; j < inner; ++j) orow[j] += xr[j];
    }
  if (detail::mark_recorded(out, x.node->needs_grad)) {
    auto xn = x.node;
    auto on = out.node;
    active_tape<S>()->record(
        [xn, on, outer, len, inner]() {
          if (!xn->needs_grad) return;
          detail::ensure_grad(*xn);
          for (Index o = 0; o < outer; ++o)
            for (Index i = 0; i < len; ++i) {
              S* gx = xn->grad.data() + (o * len + i) * inner;
              const S* g = on->grad.data() + o * inner;
              for (Index j = 0; j < inner; ++j) gx[j] += g[j];
            }
        },
        on);
  }
  return out;
}

template <class S>
TensorT<S> reduce_mean(const TensorT<S>& x, int axis, bool keepdim = false) {
  const int a = detail::normalize_axis(x.shape(), axis, "reduce_mean");
  const Index len = x.shape()[a];
  return scale(reduce_sum(x, a, keepdim), S(1) / S(len));
}

template <class S>
TensorT<S> sum_all(const TensorT<S>& x) {
  TensorT<S> out = TensorT<S>::scalar(x.node->values.sum());
  if (detail::mark_recorded(out, x.node->needs_grad)) {
    auto xn = x.node;
    auto on = out.node;
    active_tape<S>()->record(
        [xn, on]() {
          if (!xn->needs_grad) return;
          detail::ensure_grad(*xn);
          xn->grad += on->grad[0];
        },
        on);
  }
  return out;
}

template <class S>
TensorT<S> mean_all(const TensorT<S>& x) {
  return scale(sum_all(x), S(1) / S(x.size()));
}

// ---------------------------------------------------------------------------
// outer_add: u[..., i] + v[..., j] -> out[..., i, j]. Leading dims must match.

template <class S>
TensorT<S> outer_add(const TensorT<S>& u, const TensorT<S>& v) {
  const Shape& su = u.shape();
  const Shape& sv = v.shape();
  if (su.empty() || sv.empty() ||
      !std::equal(su.begin(), su.end() - 1, sv.begin(), sv.end() - 1) ||
      su.size() != sv.size())
    throw ShapeError("outer_add: leading dimensions disagree: " + shape_str(su) + " vs " +
                     shape_str(sv));
  const Index n = su.back(), m = sv.back();
  const Index batch = u.size() / n;
  Shape out_shape(su.begin(), su.end() - 1);
  out_shape.push_back(n);
  out_shape.push_back(m);
  TensorT<S> out = TensorT<S>::empty(std::move(out_shape));
  for (Index b = 0; b < batch; ++b) {
    const S* ur = u.data() + b * n;
    const S* vr = v.data() + b * m;
    S* o = out.data() + b * n * m;
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < m; ++j) o[i * m + j] = ur[i] + vr[j];
  }
  if (detail::mark_recorded(out, u.node->needs_grad || v.node->needs_grad)) {
    auto un = u.node;
    auto vn = v.node;
    auto on = out.node;
    active_tape<S>()->record(
        [un, vn, on, batch, n, m]() {
          if (un->needs_grad) detail::ensure_grad(*un);
          if (vn->needs_grad) detail::ensure_grad(*vn);
          for (Index b = 0; b < batch; ++b) {
            const S* g = on->grad.data() + b * n * m;
            if (un->needs_grad) {
              S* gu = un->grad.data() + b * n;
              for (Index i = 0; i < n; ++i) {
                S s = 0;
                for (Index j = 0; j < m; ++j) s += g[i * m + j];
                gu[i] += s;
              }
            }
            if (vn->needs_grad) {
              S* gv = vn->grad.data() + b * m;
              for (Index j = 0; j < m; ++j) {
                S s = 0;
                for (Index i = 0; i < n; ++i) s += g[i * m + j];
                gv[j] += s;
              }
            }
          }
        },
        on);
  }
  return out;
}

// ---------------------------------------------------------------------------
// straight-through hard argmax over the last axis: forward emits exact
// one-hot rows (ties toward the lower index), backward passes the incoming
// gradient through unchanged, i.e. the gradient of the soft input.

template <class S>
TensorT<S> straight_through_onehot(const TensorT<S>& x) {
  if (x.dim() < 1) throw ShapeError("straight_through_onehot: scalar input");
  const Index len = x.extent(-1);
  const Index rows = x.size() / len;
  TensorT<S> out = TensorT<S>::zeros(x.shape());
  for (Index r = 0; r < rows; ++r) {
    const S* row = x.data() + r * len;
    Index best = 0;
    for (Index i = 1; i < len; ++i)
      if (row[i] > row[best]) best = i;
    out.data()[r * len + best] = S(1);
  }
  if (detail::mark_recorded(out, x.node->needs_grad)) {
    auto xn = x.node;
    auto on = out.node;
    active_tape<S>()->record(
        [xn, on]() {
          if (!xn->needs_grad) return;
          detail::ensure_grad(*xn);
          xn->grad += on->grad;
        },
        on);
  }
  return out;
}

// ---------------------------------------------------------------------------
// mean cross-entropy from logits. logits: (rows, classes); labels: one class
// id per row. Stable log-sum-exp; gradient is (softmax - onehot) / rows.

template <class S>
TensorT<S> cross_entropy_mean(const TensorT<S>& logits, const std::vector<int>& labels) {
  if (logits.dim() != 2)
    throw ShapeError("cross_entropy_mean: logits must be (rows, classes), got " +
                     shape_str(logits.shape()));
  const Index rows = logits.extent(0);
  const Index classes = logits.extent(1);
  if (static_cast<Index>(labels.size()) != rows)
    throw ShapeError("cross_entropy_mean: " + std::to_string(labels.size()) +
                     " labels for " + std::to_string(rows) + " rows");
  auto probs = std::make_shared<std::vector<S>>(static_cast<std::size_t>(rows * classes));
  S loss = 0;
  for (Index r = 0; r < rows; ++r) {
    const int y = labels[static_cast<std::size_t>(r)];
    if (y < 0 || y >= classes)
      throw ValueError("cross_entropy_mean: label " + std::to_string(y) +
                       " outside [0, " + std::to_string(classes) + ")");
    const S* z = logits.data() + r * classes;
    S mx = z[0];
    for (Index c = 1; c < classes; ++c) mx = std::max(mx, z[c]);
    S sum = 0;
    for (Index c = 0; c < classes; ++c) sum += std::exp(z[c] - mx);
    const S lse = mx + std::log(sum);
    for (Index c = 0; c < classes; ++c)
      (*probs)[static_cast<std::size_t>(r * classes + c)] = std::exp(z[c] - lse);
    loss += lse - z[y];
  }
  TensorT<S> out = TensorT<S>::scalar(loss / S(rows));
  if (detail::mark_recorded(out, logits.node->needs_grad)) {
    auto ln = logits.node;
    auto on = out.node;
    auto lab = std::make_shared<std::vector<int>>(labels);
    active_tape<S>()->record(
        [ln, on, probs, lab, rows, classes]() {
          if (!ln->needs_grad) return;
          detail::ensure_grad(*ln);
          const S g = on->grad[0] / S(rows);
          for (Index r = 0; r < rows; ++r) {
            S* gl = ln->grad.data() + r * classes;
            const S* p = probs->data() + r * classes;
            for (Index c = 0; c < classes; ++c) gl[c] += g * p[c];
            gl[(*lab)[static_cast<std::size_t>(r)]] -= g;
          }
        },
        on);
  }
  return out;
}

}  // namespace cats
