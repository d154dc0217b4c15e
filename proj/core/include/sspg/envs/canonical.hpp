#pragma once

#include <functional>
#include <vector>

#include "sspg/diff/tape.hpp"

namespace sspg::envs {

using diff::Matrix;

/// Uniform 1-D grid of `points` nodes covering [lo, hi].
struct Grid {
  double lo = -1.0;
  double hi = 1.0;
  int points = 2001;

  void validate() const;
  double spacing() const { return (hi - lo) / (points - 1); }
  double node(int i) const { return lo + spacing() * i; }
};

/// Density values on the nodes of `grid`.
struct GridDensity {
  Grid grid;
  std::vector<double> density;

  /// Trapezoidal integral of the density over the grid.
  double integral() const;
  /// Probability mass of each of `bins` equal-width bins, by trapezoidal
  /// quadrature. Requires (points - 1) to be a multiple of `bins`.
  std::vector<double> bin_masses(int bins) const;
};

/// Density proportional to exp(q / alpha) on the grid nodes, normalized with a
/// log-sum-exp shift and trapezoidal quadrature. `q` holds one value per node.
GridDensity canonical_density(const Grid& grid, const std::vector<double>& q, double alpha);

/// Same with q evaluated at every node.
GridDensity canonical_density(const Grid& grid, const std::function<double(double)>& q, double alpha);

/// Fraction of `samples` in each of `bins` equal-width bins over [lo, hi].
/// Samples outside the range fall into the nearest edge bin.
std::vector<double> histogram(const std::vector<double>& samples, double lo, double hi, int bins);

/// Half the L1 distance between two probability vectors.
double total_variation(const std::vector<double>& p, const std::vector<double>& q);

}  // namespace sspg::envs
