#include "sspg/envs/canonical.hpp"

#include <algorithm>
#include <cmath>

#include "sspg/error.hpp"

namespace sspg::envs {

void Grid::validate() const {
  if (!(lo < hi)) throw ContractError("Grid: lo must be < hi");
  if (points < 2) throw ContractError("Grid: need at least two points");
}

double GridDensity::integral() const {
  const double h = grid.spacing();
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < density.size(); ++i) s += 0.5 * h * (density[i] + density[i + 1]);
  return s;
}

std::vector<double> GridDensity::bin_masses(int bins) const {
  if (bins < 1 || (grid.points - 1) % bins != 0) {
    throw ContractError("GridDensity::bin_masses: grid intervals must divide evenly into bins");
  }
  const int per = (grid.points - 1) / bins;
  const double h = grid.spacing();
  std::vector<double> out(static_cast<std::size_t>(bins), 0.0);
  for (int b = 0; b < bins; ++b) {
    for (int i = b * per; i < (b + 1) * per; ++i) {
      out[static_cast<std::size_t>(b)] += 0.5 * h * (density[static_cast<std::size_t>(i)] + density[static_cast<std::size_t>(i + 1)]);
    }
  }
  return out;
}

GridDensity canonical_density(const Grid& grid, const std::vector<double>& q, double alpha) {
  grid.validate();
  if (!(alpha > 0.0)) throw ContractError("canonical_density: alpha must be positive");
  if (q.size() != static_cast<std::size_t>(grid.points)) {
    throw DimensionError("canonical_density: need one Q value per grid node");
  }
  const double shift = *std::max_element(q.begin(), q.end()) / alpha;
  GridDensity out{grid, std::vector<double>(q.size())};
  for (std::size_t i = 0; i < q.size(); ++i) out.density[i] = std::exp(q[i] / alpha - shift);
  const double z = out.integral();
  if (!(z > 0.0) || !std::isfinite(z)) throw NumericError("canonical_density", "normalizer is " + std::to_string(z));
  for (double& v : out.density) v /= z;
  return out;
}

GridDensity canonical_density(const Grid& grid, const std::function<double(double)>& q, double alpha) {
  grid.validate();
  std::vector<double> values(static_cast<std::size_t>(grid.points));
  for (int i = 0; i < grid.points; ++i) values[static_cast<std::size_t>(i)] = q(grid.node(i));
  return canonical_density(grid, values, alpha);
}

std::vector<double> histogram(const std::vector<double>& samples, double lo, double hi, int bins) {
  if (bins < 1 || !(lo < hi)) throw ContractError("histogram: need bins >= 1 and lo < hi");
  std::vector<double> out(static_cast<std::size_t>(bins), 0.0);
  if (samples.empty()) return out;
  const double w = 1.0 / static_cast<double>(samples.size());
  for (double x : samples) {
    const int b = std::clamp(static_cast<int>(std::floor((x - lo) / (hi - lo) * bins)), 0, bins - 1);
    out[static_cast<std::size_t>(b)] += w;
  }
  return out;
}

double total_variation(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.size() != q.size()) throw DimensionError("total_variation: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
  return 0.5 * s;
}

}  // namespace sspg::envs
