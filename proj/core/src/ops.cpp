#include "sspg/diff/ops.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "sspg/error.hpp"

namespace sspg::diff {

namespace {

using Index = Eigen::Index;

std::string shape_str(const Matrix& m) {
  std::ostringstream os;
  os << m.rows() << "x" << m.cols();
  return os.str();
}

Tape& same_tape(const Var& a, const Var& b) {
  if (!a.valid() || !b.valid() || a.tape() != b.tape()) {
    throw ContractError("diff: operands are not on the same tape");
  }
  return *a.tape();
}

bool broadcastable(Index from, Index to) { return from == to || from == 1; }

// Result shape of broadcasting a against b.
std::pair<Index, Index> broadcast_shape(const Matrix& a, const Matrix& b, const char* op) {
  const Index r = std::max(a.rows(), b.rows());
  const Index c = std::max(a.cols(), b.cols());
  if (!broadcastable(a.rows(), r) || !broadcastable(b.rows(), r) || !broadcastable(a.cols(), c) ||
      !broadcastable(b.cols(), c)) {
    throw DimensionError(std::string("diff::") + op + ": cannot broadcast " + shape_str(a) +
                         " with " + shape_str(b));
  }
  return {r, c};
}

Matrix expand(const Matrix& m, Index rows, Index cols) {
  if (m.rows() == rows && m.cols() == cols) return m;
  return m.replicate(rows / m.rows(), cols / m.cols());
}

// Sum an adjoint back down to the operand's (possibly broadcast) shape.
Matrix reduce_to(const Matrix& g, Index rows, Index cols) {
  if (g.rows() == rows && g.cols() == cols) return g;
  if (rows == 1 && cols == 1) return Matrix::Constant(1, 1, g.sum());
  if (rows == 1) return g.colwise().sum();
  return g.rowwise().sum();
}

template <class Fwd, class Bwd>
Var unary(const Var& a, Fwd fwd, Bwd bwd) {
  Tape& t = *a.tape();
  const std::size_t ia = a.id();
  Matrix out = a.value().unaryExpr(fwd);
  Var res = t.record(std::move(out), {a}, [ia, bwd](Tape& tp, const Matrix& g) {
    const Matrix& x = tp.value(ia);
    Matrix d = x.unaryExpr(bwd);
    tp.accumulate(ia, g.cwiseProduct(d));
  });
  return res;
}

}  // namespace

Var add(const Var& a, const Var& b) {
  Tape& t = same_tape(a, b);
  const auto [r, c] = broadcast_shape(a.value(), b.value(), "add");
  const std::size_t ia = a.id(), ib = b.id();
  const Index ar = a.rows(), ac = a.cols(), br = b.rows(), bc = b.cols();
  Matrix out = expand(a.value(), r, c) + expand(b.value(), r, c);
  return t.record(std::move(out), {a, b}, [=](Tape& tp, const Matrix& g) {
    tp.accumulate(ia, reduce_to(g, ar, ac));
    tp.accumulate(ib, reduce_to(g, br, bc));
  });
}

Var sub(const Var& a, const Var& b) {
  Tape& t = same_tape(a, b);
  const auto [r, c] = broadcast_shape(a.value(), b.value(), "sub");
  const std::size_t ia = a.id(), ib = b.id();
  const Index ar = a.rows(), ac = a.cols(), br = b.rows(), bc = b.cols();
  Matrix out = expand(a.value(), r, c) - expand(b.value(), r, c);
  return t.record(std::move(out), {a, b}, [=](Tape& tp, const Matrix& g) {
    tp.accumulate(ia, reduce_to(g, ar, ac));
    tp.accumulate(ib, reduce_to(-g, br, bc));
  });
}

Var mul(const Var& a, const Var& b) {
  Tape& t = same_tape(a, b);
  const auto [r, c] = broadcast_shape(a.value(), b.value(), "mul");
  const std::size_t ia = a.id(), ib = b.id();
  const Index ar = a.rows(), ac = a.cols(), br = b.rows(), bc = b.cols();
  Matrix out = expand(a.value(), r, c).cwiseProduct(expand(b.value(), r, c));
  return t.record(std::move(out), {a, b}, [=](Tape& tp, const Matrix& g) {
    if (tp.requires_grad(ia)) {
      tp.accumulate(ia, reduce_to(g.cwiseProduct(expand(tp.value(ib), r, c)), ar, ac));
    }
    if (tp.requires_grad(ib)) {
      tp.accumulate(ib, reduce_to(g.cwiseProduct(expand(tp.value(ia), r, c)), br, bc));
    }
  });
}

Var neg(const Var& a) { return scale(a, -1.0); }

Var scale(const Var& a, double c) {
  Tape& t = *a.tape();
  const std::size_t ia = a.id();
  return t.record(a.value() * c, {a}, [ia, c](Tape& tp, const Matrix& g) { tp.accumulate(ia, g * c); });
}

Var add_scalar(const Var& a, double c) {
  Tape& t = *a.tape();
  const std::size_t ia = a.id();
  Matrix out = a.value().array() + c;
  return t.record(std::move(out), {a}, [ia](Tape& tp, const Matrix& g) { tp.accumulate(ia, g); });
}

Var matmul(const Var& a, const Var& b) {
  Tape& t = same_tape(a, b);
  if (a.cols() != b.rows()) {
    throw DimensionError("diff::matmul: " + shape_str(a.value()) + " times " + shape_str(b.value()));
  }
  const std::size_t ia = a.id(), ib = b.id();
  Matrix out = a.value() * b.value();
  return t.record(std::move(out), {a, b}, [ia, ib](Tape& tp, const Matrix& g) {
    if (tp.requires_grad(ia)) tp.accumulate(ia, g * tp.value(ib).transpose());
    if (tp.requires_grad(ib)) tp.accumulate(ib, tp.value(ia).transpose() * g);
  });
}

Var relu(const Var& a) {
  return unary(
      a, [](double x) { return x > 0.0 ? x : 0.0; }, [](double x) { return x > 0.0 ? 1.0 : 0.0; });
}

Var tanh(const Var& a) {
  return unary(
      a, [](double x) { return std::tanh(x); },
      [](double x) {
        const double y = std::tanh(x);
        return 1.0 - y * y;
      });
}

Var exp(const Var& a) {
  return unary(
      a, [](double x) { return std::exp(x); }, [](double x) { return std::exp(x); });
}

Var log(const Var& a) {
  return unary(
      a, [](double x) { return std::log(x); }, [](double x) { return 1.0 / x; });
}

Var square(const Var& a) {
  return unary(
      a, [](double x) { return x * x; }, [](double x) { return 2.0 * x; });
}

Var sqrt(const Var& a) {
  return unary(
      a, [](double x) { return std::sqrt(x); },
      [](double x) { return x > 0.0 ? 0.5 / std::sqrt(x) : 0.0; });
}

Var atanh(const Var& a) {
  return unary(
      a, [](double x) { return std::atanh(x); }, [](double x) { return 1.0 / (1.0 - x * x); });
}

Var clamp(const Var& a, double lo, double hi) {
  if (!(lo <= hi)) throw ContractError("diff::clamp: lo > hi");
  return unary(
      a, [lo, hi](double x) { return x < lo ? lo : (x > hi ? hi : x); },
      [lo, hi](double x) { return (x >= lo && x <= hi) ? 1.0 : 0.0; });
}

Var sum(const Var& a) {
  Tape& t = *a.tape();
  const std::size_t ia = a.id();
  const Index r = a.rows(), c = a.cols();
  return t.record(Matrix::Constant(1, 1, a.value().sum()), {a}, [=](Tape& tp, const Matrix& g) {
    tp.accumulate(ia, Matrix::Constant(r, c, g(0, 0)));
  });
}

Var mean(const Var& a) {
  const double n = static_cast<double>(a.value().size());
  if (n == 0) throw DimensionError("diff::mean: empty operand");
  return scale(sum(a), 1.0 / n);
}

Var row_sum(const Var& a) {
  Tape& t = *a.tape();
  const std::size_t ia = a.id();
  const Index c = a.cols();
  Matrix out = a.value().rowwise().sum();
  return t.record(std::move(out), {a},
                  [ia, c](Tape& tp, const Matrix& g) { tp.accumulate(ia, g.replicate(1, c)); });
}

Var row_mean(const Var& a) {
  if (a.cols() == 0) throw DimensionError("diff::row_mean: no columns");
  return scale(row_sum(a), 1.0 / static_cast<double>(a.cols()));
}

Var logsumexp_rows(const Var& a) {
  Tape& t = *a.tape();
  const std::size_t ia = a.id();
  const Matrix& x = a.value();
  if (x.cols() == 0) throw DimensionError("diff::logsumexp_rows: no columns");
  Matrix out(x.rows(), 1);
  Matrix weights(x.rows(), x.cols());
  for (Index i = 0; i < x.rows(); ++i) {
    const double m = x.row(i).maxCoeff();
    if (m == -std::numeric_limits<double>::infinity()) {
      out(i, 0) = m;
      weights.row(i).setConstant(1.0 / static_cast<double>(x.cols()));
      continue;
    }
    const auto e = (x.row(i).array() - m).exp();
    const double s = e.sum();
    out(i, 0) = m + std::log(s);
    weights.row(i) = e / s;
  }
  return t.record(std::move(out), {a}, [ia, weights](Tape& tp, const Matrix& g) {
    tp.accumulate(ia, weights.array().colwise() * g.col(0).array());
  });
}

Var slice_cols(const Var& a, Index start, Index count) {
  if (start < 0 || count < 0 || start + count > a.cols()) {
    throw DimensionError("diff::slice_cols: range out of bounds for " + shape_str(a.value()));
  }
  Tape& t = *a.tape();
  const std::size_t ia = a.id();
  const Index r = a.rows(), c = a.cols();
  Matrix out = a.value().middleCols(start, count);
  return t.record(std::move(out), {a}, [=](Tape& tp, const Matrix& g) {
    Matrix full = Matrix::Zero(r, c);
    full.middleCols(start, count) = g;
    tp.accumulate(ia, full);
  });
}

Var hconcat(const std::vector<Var>& parts) {
  if (parts.empty()) throw DimensionError("diff::hconcat: no parts");
  Tape& t = *parts.front().tape();
  const Index r = parts.front().rows();
  Index c = 0;
  std::vector<std::pair<std::size_t, Index>> layout;
  for (const Var& p : parts) {
    if (p.tape() != &t) throw ContractError("diff::hconcat: parts on different tapes");
    if (p.rows() != r) throw DimensionError("diff::hconcat: row counts differ");
    layout.emplace_back(p.id(), p.cols());
    c += p.cols();
  }
  Matrix out(r, c);
  Index at = 0;
  for (const Var& p : parts) {
    out.middleCols(at, p.cols()) = p.value();
    at += p.cols();
  }
  return t.record(std::move(out), parts, [layout](Tape& tp, const Matrix& g) {
    Index off = 0;
    for (const auto& [id, w] : layout) {
      if (tp.requires_grad(id)) tp.accumulate(id, g.middleCols(off, w));
      off += w;
    }
  });
}

Var stop_gradient(const Var& a) { return a.tape()->constant(a.value()); }

}  // namespace sspg::diff
