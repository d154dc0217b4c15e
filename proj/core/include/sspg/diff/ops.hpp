#pragma once

#include <vector>

#include "sspg/diff/tape.hpp"

// Differentiable operations on tape variables.
//
// Binary elementwise ops broadcast an operand of shape 1x1, 1xC or Rx1
// against an RxC operand; the backward pass sums the adjoint over the
// broadcast axes.

namespace sspg::diff {

Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);

Var neg(const Var& a);
Var scale(const Var& a, double c);
Var add_scalar(const Var& a, double c);

/// Matrix product a (RxK) times b (KxC).
Var matmul(const Var& a, const Var& b);

/// max(x, 0); the subgradient at 0 is 0.
Var relu(const Var& a);
Var tanh(const Var& a);
Var exp(const Var& a);
Var log(const Var& a);
Var square(const Var& a);
/// Square root; the subgradient at 0 is 0.
Var sqrt(const Var& a);
/// Inverse hyperbolic tangent; inputs must lie in (-1, 1).
Var atanh(const Var& a);
/// Clamp into [lo, hi]; gradient passes only where the input is inside.
Var clamp(const Var& a, double lo, double hi);

/// Sum of all entries (1x1).
Var sum(const Var& a);
/// Mean of all entries (1x1).
Var mean(const Var& a);
/// Per-row sum (Rx1).
Var row_sum(const Var& a);
/// Per-row mean (Rx1).
Var row_mean(const Var& a);
/// Per-row log(sum(exp(.))) computed stably (Rx1).
Var logsumexp_rows(const Var& a);

/// Columns [start, start + count).
Var slice_cols(const Var& a, Eigen::Index start, Eigen::Index count);
/// Horizontal concatenation; all parts share the row count.
Var hconcat(const std::vector<Var>& parts);

/// Same value, no gradient flows back.
Var stop_gradient(const Var& a);

inline Var operator+(const Var& a, const Var& b) { return add(a, b); }
inline Var operator-(const Var& a, const Var& b) { return sub(a, b); }
inline Var operator*(const Var& a, const Var& b) { return mul(a, b); }
inline Var operator-(const Var& a) { return neg(a); }
inline Var operator*(double c, const Var& a) { return scale(a, c); }
inline Var operator*(const Var& a, double c) { return scale(a, c); }
inline Var operator+(const Var& a, double c) { return add_scalar(a, c); }
inline Var operator-(const Var& a, double c) { return add_scalar(a, -c); }

}  // namespace sspg::diff
