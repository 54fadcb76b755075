#include "crflow/grid.hpp"

#include <cmath>
#include <string>

#include "crflow/errors.hpp"

namespace crflow {

RadialGrid::RadialGrid(std::size_t n_nodes, double rho_hat_max)
    : n_nodes_(n_nodes), rho_hat_max_(rho_hat_max), spacing_(0.0) {
  if (n_nodes < kMinNodes) {
    throw SizeError("radial grid needs at least " + std::to_string(kMinNodes) +
                    " nodes, got " + std::to_string(n_nodes));
  }
  if (!(rho_hat_max > 0.0) || !(rho_hat_max <= kMaxRadius)) {
    throw ParameterError("rho_hat_max must lie in (0, " + std::to_string(kMaxRadius) + "]");
  }
  spacing_ = rho_hat_max / static_cast<double>(n_nodes - 1);
  if (spacing_ > kMaxSpacing) {
    throw ParameterError("grid spacing " + std::to_string(spacing_) + " exceeds " +
                         std::to_string(kMaxSpacing));
  }
  nodes_.resize(n_nodes);
  for (std::size_t i = 0; i < n_nodes; ++i) nodes_[i] = node(i);
}

std::vector<double> Tridiagonal::apply(std::span<const double> x) const {
  const std::size_t n = size();
  std::vector<double> y(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = diag[i] * x[i];
    if (i > 0) acc += lower[i] * x[i - 1];
    if (i + 1 < n) acc += upper[i] * x[i + 1];
    y[i] = acc;
  }
  return y;
}

std::vector<double> solve_tridiagonal(const Tridiagonal& m, std::span<const double> rhs) {
  const std::size_t n = m.size();
  if (rhs.size() != n) throw SizeError("tridiagonal solve: size mismatch");
  std::vector<double> c(n, 0.0);
  std::vector<double> d(n, 0.0);
  double denom = m.diag[0];
  c[0] = n > 1 ? m.upper[0] / denom : 0.0;
  d[0] = rhs[0] / denom;
  for (std::size_t i = 1; i < n; ++i) {
    denom = m.diag[i] - m.lower[i] * c[i - 1];
    c[i] = i + 1 < n ? m.upper[i] / denom : 0.0;
    d[i] = (rhs[i] - m.lower[i] * d[i - 1]) / denom;
  }
  std::vector<double> x(n, 0.0);
  x[n - 1] = d[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) x[i] = d[i] - c[i] * x[i + 1];
  return x;
}

bool is_m_matrix_pattern(const Tridiagonal& m, double rel_tol) {
  const std::size_t n = m.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double lo = i > 0 ? m.lower[i] : 0.0;
    const double up = i + 1 < n ? m.upper[i] : 0.0;
    if (lo > 0.0 || up > 0.0 || !(m.diag[i] > 0.0)) return false;
    const double off = -lo - up;
    if (m.diag[i] < off * (1.0 - rel_tol)) return false;
  }
  return true;
}

}  // namespace crflow
