#pragma once

#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "crflow/grid.hpp"

namespace crflow {

enum class BackgroundKind { PoincareDisc, ComplexHyperbolicBall };

std::string to_string(BackgroundKind kind);
BackgroundKind background_kind_from_string(const std::string& s);

/// U(n)-invariant model background on the unit disc or ball.
///
/// Both models share the Kahler potential -(n+1) log(1 - |z|^2); the disc is
/// the n = 1 case (h = 2/(1-r^2)^2). In the grid coordinate x = artanh|z| the
/// eigenvalues of h in Euclidean coordinates are
///   radial      (n+1) cosh^4 x,
///   tangential  (n+1) cosh^2 x   (multiplicity n-1),
/// and Ric(h) = -h. The exhaustion is rho = sqrt(1 + x^2).
class Background {
 public:
  static Background poincare_disc();
  static Background hyperbolic_ball(int dim);
  // Same metric with the Einstein constant reported as +1. Only the
  // hypothesis checker and alpha assembly read ric_sign, so this acts as a
  // positively curved stand-in for gate tests.
  static Background flipped_sign(const Background& base);

  BackgroundKind kind() const noexcept { return kind_; }
  int dim() const noexcept { return dim_; }
  double ric_sign() const noexcept { return ric_sign_; }
  double potential_scale() const noexcept { return dim_ + 1.0; }

  double log_radial_coefficient(double x) const noexcept;
  double log_tangential_coefficient(double x) const noexcept;

  double exhaustion(double x) const noexcept;
  double exhaustion_d1(double x) const noexcept;
  double exhaustion_d2(double x) const noexcept;
  // sup |d rho|_h^2 + |i dd-bar rho|_h, from the closed-form derivatives.
  double exhaustion_bound() const noexcept { return exhaustion_bound_; }

  double torsion_bound() const noexcept { return 0.0; }
  // Holomorphic bisectional curvature is pinched in [-2/(n+1), -1/(n+1)].
  double bisectional_lower() const noexcept { return -2.0 / (dim_ + 1.0); }

 private:
  Background(BackgroundKind kind, int dim, double ric_sign);

  BackgroundKind kind_;
  int dim_;
  double ric_sign_;
  double exhaustion_bound_ = 0.0;
};

struct MetricCoefficients {
  double radial;
  double tangential;  // equals radial in complex dimension 1
};

/// h in Euclidean coordinates at |z| = r. Throws DomainError unless 0 <= r < 1.
MetricCoefficients metric_profile(const Background& bg, double r);

/// A U(n)-invariant real (1,1)-form sampled on the grid, diagonal in the
/// radial/spherical split. Entries are either ratios against theta_0 or
/// absolute Euclidean coefficients depending on context. `tangential` is
/// empty in complex dimension 1.
struct FormRatios {
  std::vector<double> radial;
  std::vector<double> tangential;

  std::size_t size() const noexcept { return radial.size(); }
  bool has_tangential() const noexcept { return !tangential.empty(); }
  double tangential_at(std::size_t i) const { return has_tangential() ? tangential[i] : radial[i]; }

  double log_det(std::size_t i, int dim) const;
  double trace(std::size_t i, int dim) const;
  double min_eigen(std::size_t i) const;
  double max_eigen(std::size_t i) const;

  static FormRatios constant(std::size_t n, int dim, double value);
};

enum class Stencil {
  Centered,  // second order in both eigenvalues
  Monotone,  // centered radial, forward rho = |z|^2 difference for tangential
};

/// Linear stencils of the complex Hessian eigenvalues, as ratios against
/// theta_0, for rows 0..n-2 (the last row is left zero; callers close it).
struct HessianStencil {
  Tridiagonal radial;
  Tridiagonal tangential;
};

HessianStencil hessian_stencil(const RadialGrid& grid, const Background& bg, Stencil kind);

/// Complex Hessian i dd-bar f of a radial function, as ratios against theta_0.
/// Symmetry closure at the origin, one-sided second-order closure at the
/// truncation radius.
FormRatios complex_hessian(const RadialGrid& grid, const Background& bg,
                           std::span<const double> f, Stencil kind = Stencil::Centered);

/// -i dd-bar log det of a metric given by absolute Euclidean coefficients.
/// Throws PositivityError on a non-positive coefficient.
FormRatios ric_of_metric(const RadialGrid& grid, const Background& bg, const FormRatios& metric);

/// Ric(g) for g = ratio * theta_0, returned as ratios against theta_0. Same
/// finite differences as ric_of_metric (log h is differentiated numerically
/// too) but without forming the large absolute coefficients.
FormRatios ricci_ratios(const RadialGrid& grid, const Background& bg, const FormRatios& ratio);

struct Interval {
  double lo;
  double hi;
};

/// Initial form omega_0 = lambda(rho) theta_0 as a function of the exhaustion.
class InitialData {
 public:
  using Profile = std::function<double(double rho)>;

  static InitialData stationary();
  static InitialData homogeneous(double c);
  static InitialData degenerate();
  // lambda = eta(rho / radius): 1 inside rho <= radius, 0 beyond 2 radius.
  static InitialData bump(double radius);
  static InitialData tail_decay();
  // Piecewise-linear in rho, constant beyond the ends. Pairs sorted by rho.
  static InitialData table(std::vector<std::pair<double, double>> rho_lambda);
  static InitialData custom(std::string name, Profile profile, bool constant = false);

  const std::string& name() const noexcept { return name_; }
  double parameter() const noexcept { return parameter_; }
  const std::vector<std::pair<double, double>>& table_points() const noexcept { return table_; }

  // Throws DomainError if the profile is negative at rho.
  double lambda(double rho) const;
  std::vector<double> lambda_on(const RadialGrid& grid, const Background& bg) const;
  FormRatios form_on(const RadialGrid& grid, const Background& bg) const;
  // U = {lambda > 0} as maximal runs of grid nodes, in the grid coordinate.
  std::vector<Interval> support(const RadialGrid& grid, const Background& bg) const;
  // Conformal forms are closed in dimension 1 or when lambda is constant.
  bool closed(const Background& bg) const noexcept { return bg.dim() == 1 || constant_; }

 private:
  InitialData(std::string name, Profile profile, bool constant, double parameter = 0.0);

  std::string name_;
  Profile profile_;
  bool constant_;
  double parameter_;
  std::vector<std::pair<double, double>> table_;
};

struct HypothesisSpec {
  double s = 2.0;
  double beta = 0.5;
  std::string f_name = "zero";
  std::function<double(double x)> f = [](double) { return 0.0; };
};

struct HypothesisVerdict {
  // Condition (b): min over nodes of the smallest eigenvalue ratio against
  // theta_0 of -Ric + e^{-s}(omega_0 + Ric) + i dd-bar f.
  double min_ratio = 0.0;
  bool b_holds = false;
  // (1): measured sup of |d rho|^2 + |i dd-bar rho| on the grid and the
  // closed-form bound K of the background.
  double exhaustion_sup = 0.0;
  double exhaustion_bound = 0.0;
  bool exhaustion_holds = false;
  // (2), (3): analytic constants.
  double bisectional_lower = 0.0;
  double torsion = 0.0;
  // (a): g_0 <= h, plus the measured |nabla g_0|_h.
  double lambda_max = 0.0;
  double gradient_sup = 0.0;
  bool a_holds = false;
  bool f_bounded = false;

  bool passed() const noexcept { return b_holds && exhaustion_holds && a_holds && f_bounded; }
};

HypothesisVerdict check_hypotheses(const Background& bg, const InitialData& init,
                                   const HypothesisSpec& spec, const RadialGrid& grid);

/// Tail test for tr_{g_0} h = o(rho): the sup of (n / lambda) / rho over the
/// last three dyadic windows of the exhaustion must contract by at least
/// kTailContraction from one window to the next.
struct TailGrowthVerdict {
  bool applicable = false;
  std::vector<Interval> windows;      // in exhaustion units
  std::vector<double> estimates;
  bool passed = false;
};

inline constexpr double kTailContraction = 0.8408964152537145;  // 2^{-1/4}

TailGrowthVerdict tr_growth_check(const InitialData& init, const Background& bg,
                                  const RadialGrid& grid);

}  // namespace crflow
