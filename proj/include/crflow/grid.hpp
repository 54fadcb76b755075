#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace crflow {

/// Uniform grid in the compactified radial coordinate rho_hat = artanh|z|.
///
/// Node i sits at rho_hat = i * spacing, i = 0..n_nodes-1; node 0 is the
/// origin (symmetry axis) and the last node is the truncation radius.
class RadialGrid {
 public:
  static constexpr std::size_t kMinNodes = 16;
  // Keeps coth(2x)*dx <= 1 at the first interior node so the centered
  // radial stencil stays monotone.
  static constexpr double kMaxSpacing = 0.5;
  // cosh^4 of the coordinate must stay representable.
  static constexpr double kMaxRadius = 150.0;

  RadialGrid(std::size_t n_nodes, double rho_hat_max);

  std::size_t size() const noexcept { return n_nodes_; }
  double rho_hat_max() const noexcept { return rho_hat_max_; }
  double spacing() const noexcept { return spacing_; }
  double node(std::size_t i) const noexcept {
    return i + 1 == n_nodes_ ? rho_hat_max_ : static_cast<double>(i) * spacing_;
  }
  std::span<const double> nodes() const noexcept { return nodes_; }

  // Nodes i with 2 <= i <= n-3: stencils there avoid both closures.
  std::size_t interior_begin() const noexcept { return 2; }
  std::size_t interior_end() const noexcept { return n_nodes_ - 2; }

  bool operator==(const RadialGrid& other) const noexcept {
    return n_nodes_ == other.n_nodes_ && rho_hat_max_ == other.rho_hat_max_;
  }

 private:
  std::size_t n_nodes_;
  double rho_hat_max_;
  double spacing_;
  std::vector<double> nodes_;
};

/// Row-wise tridiagonal matrix: row i is lower[i]*x[i-1] + diag[i]*x[i] +
/// upper[i]*x[i+1]; lower[0] and upper[n-1] are ignored.
struct Tridiagonal {
  std::vector<double> lower;
  std::vector<double> diag;
  std::vector<double> upper;

  explicit Tridiagonal(std::size_t n = 0) : lower(n, 0.0), diag(n, 0.0), upper(n, 0.0) {}
  std::size_t size() const noexcept { return diag.size(); }

  std::vector<double> apply(std::span<const double> x) const;
};

/// Thomas algorithm. No pivoting: intended for diagonally dominant systems.
std::vector<double> solve_tridiagonal(const Tridiagonal& m, std::span<const double> rhs);

/// Nonpositive off-diagonal entries, positive diagonal and weak diagonal
/// dominance (up to `rel_tol` relative slack in the dominance test).
bool is_m_matrix_pattern(const Tridiagonal& m, double rel_tol = 1e-12);

}  // namespace crflow
