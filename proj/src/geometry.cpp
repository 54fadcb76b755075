#include "crflow/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "crflow/cutoff.hpp"
#include "crflow/errors.hpp"

namespace crflow {

namespace {

double log_cosh(double x) noexcept {
  const double a = std::fabs(x);
  return a + std::log1p(std::exp(-2.0 * a)) - std::log(2.0);
}

// Complex Hessian ratios from the coordinate derivatives of a radial
// function: radial (f'' + 2 coth(2x) f') / 4c, tangential f' coth(x) / 2c.
// At x = 0 both reduce to f''/2c.
void hessian_from_derivatives(double x, double fx, double fxx, double c, double& radial,
                              double& tangential) {
  if (x == 0.0) {
    radial = fxx / (2.0 * c);
    tangential = radial;
    return;
  }
  radial = (fxx + 2.0 * fx / std::tanh(2.0 * x)) / (4.0 * c);
  tangential = fx / (std::tanh(x) * 2.0 * c);
}

void require_same_size(std::size_t a, std::size_t b, const char* what) {
  if (a != b) throw SizeError(std::string(what) + ": values do not match the grid");
}

}  // namespace

double cutoff_eta(double s) noexcept {
  if (s <= 1.0) return 1.0;
  if (s >= 2.0) return 0.0;
  const double x = s - 1.0;
  return 1.0 - x * x * x * (10.0 - 15.0 * x + 6.0 * x * x);
}

double cutoff_eta_d1(double s) noexcept {
  if (s <= 1.0 || s >= 2.0) return 0.0;
  const double x = s - 1.0;
  return -30.0 * x * x * (1.0 - x) * (1.0 - x);
}

double cutoff_eta_d2(double s) noexcept {
  if (s <= 1.0 || s >= 2.0) return 0.0;
  const double x = s - 1.0;
  return -60.0 * x * (1.0 - x) * (1.0 - 2.0 * x);
}

std::string to_string(BackgroundKind kind) {
  return kind == BackgroundKind::PoincareDisc ? "poincare_disc" : "ball";
}

BackgroundKind background_kind_from_string(const std::string& s) {
  if (s == "poincare_disc" || s == "PoincareDisc") return BackgroundKind::PoincareDisc;
  if (s == "ball" || s == "ComplexHyperbolicBall") return BackgroundKind::ComplexHyperbolicBall;
  throw ParameterError("unknown background kind '" + s + "'");
}

Background::Background(BackgroundKind kind, int dim, double ric_sign)
    : kind_(kind), dim_(dim), ric_sign_(ric_sign) {
  if (dim < 1 || dim > 2) throw ParameterError("implemented complex dimensions are 1 and 2");
  if (kind == BackgroundKind::PoincareDisc && dim != 1) {
    throw ParameterError("the Poincare disc has complex dimension 1");
  }
  const double c = potential_scale();
  const auto norm_at = [&](double x) {
    const double d1 = exhaustion_d1(x);
    const double d2 = exhaustion_d2(x);
    double radial = 0.0;
    double tangential = 0.0;
    hessian_from_derivatives(x, d1, d2, c, radial, tangential);
    return d1 * d1 / (4.0 * c) + std::sqrt(radial * radial + (dim_ - 1) * tangential * tangential);
  };
  // Dense sample plus the x -> infinity limit 1/4c + sqrt(n)/2c.
  double sup = 1.0 / (4.0 * c) + std::sqrt(static_cast<double>(dim_)) / (2.0 * c);
  for (int k = 0; k <= 30000; ++k) sup = std::max(sup, norm_at(k * 0.005));
  exhaustion_bound_ = sup;
}

Background Background::poincare_disc() { return {BackgroundKind::PoincareDisc, 1, -1.0}; }

Background Background::hyperbolic_ball(int dim) {
  return {BackgroundKind::ComplexHyperbolicBall, dim, -1.0};
}

Background Background::flipped_sign(const Background& base) {
  Background b = base;
  b.ric_sign_ = -base.ric_sign_;
  return b;
}

double Background::log_radial_coefficient(double x) const noexcept {
  return std::log(potential_scale()) + 4.0 * log_cosh(x);
}

double Background::log_tangential_coefficient(double x) const noexcept {
  return std::log(potential_scale()) + 2.0 * log_cosh(x);
}

double Background::exhaustion(double x) const noexcept { return std::sqrt(1.0 + x * x); }

double Background::exhaustion_d1(double x) const noexcept { return x / std::sqrt(1.0 + x * x); }

double Background::exhaustion_d2(double x) const noexcept {
  return 1.0 / std::pow(1.0 + x * x, 1.5);
}

MetricCoefficients metric_profile(const Background& bg, double r) {
  if (!(r >= 0.0) || !(r < 1.0)) throw DomainError("metric_profile: r must lie in [0, 1)");
  const double rho = r * r;
  const double c = bg.potential_scale();
  const double first = c / (1.0 - rho);                   // Phi'
  const double radial = c / ((1.0 - rho) * (1.0 - rho));  // Phi' + rho Phi''
  if (bg.dim() == 1) return {radial, radial};
  return {radial, first};
}

double FormRatios::log_det(std::size_t i, int dim) const {
  double v = std::log(radial[i]);
  if (dim > 1) v += (dim - 1) * std::log(tangential_at(i));
  return v;
}

double FormRatios::trace(std::size_t i, int dim) const {
  return radial[i] + (dim > 1 ? (dim - 1) * tangential_at(i) : 0.0);
}

double FormRatios::min_eigen(std::size_t i) const {
  return has_tangential() ? std::min(radial[i], tangential[i]) : radial[i];
}

double FormRatios::max_eigen(std::size_t i) const {
  return has_tangential() ? std::max(radial[i], tangential[i]) : radial[i];
}

FormRatios FormRatios::constant(std::size_t n, int dim, double value) {
  FormRatios f;
  f.radial.assign(n, value);
  if (dim > 1) f.tangential.assign(n, value);
  return f;
}

HessianStencil hessian_stencil(const RadialGrid& grid, const Background& bg, Stencil kind) {
  const std::size_t n = grid.size();
  const double dx = grid.spacing();
  const double c = bg.potential_scale();
  HessianStencil st{Tridiagonal(n), Tridiagonal(n)};

  // Origin: f_xx(0) = 2 (f_1 - f_0) / dx^2 from the even extension.
  const double origin = 1.0 / (c * dx * dx);
  st.radial.diag[0] = -origin;
  st.radial.upper[0] = origin;

  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double x = grid.node(i);
    const double coth2 = 1.0 / std::tanh(2.0 * x);
    const double w = 1.0 / (4.0 * c);
    st.radial.lower[i] = w * (1.0 / (dx * dx) - coth2 / dx);
    st.radial.diag[i] = -w * 2.0 / (dx * dx);
    st.radial.upper[i] = w * (1.0 / (dx * dx) + coth2 / dx);
  }

  if (kind == Stencil::Centered) {
    st.tangential.diag[0] = -origin;
    st.tangential.upper[0] = origin;
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double coth = 1.0 / std::tanh(grid.node(i));
      st.tangential.lower[i] = -coth / (4.0 * c * dx);
      st.tangential.upper[i] = coth / (4.0 * c * dx);
    }
  } else {
    // Forward difference in rho = tanh^2 x divided by Phi'(rho_i): the only
    // neighbour weight is on f_{i+1}, which keeps the linearization an
    // M-matrix. Exact for f linear in rho, so no loss at the origin.
    const double sh = std::sinh(dx);
    const double ch = std::cosh(dx);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const double ta = std::tanh(grid.node(i));
      const double tb = std::tanh(grid.node(i + 1));
      const double cosh_ratio = ch + ta * sh;  // cosh(x_{i+1}) / cosh(x_i)
      const double k = cosh_ratio / (sh * (ta + tb) * c);
      st.tangential.diag[i] = -k;
      st.tangential.upper[i] = k;
    }
  }
  return st;
}

FormRatios complex_hessian(const RadialGrid& grid, const Background& bg, std::span<const double> f,
                           Stencil kind) {
  const std::size_t n = grid.size();
  if (n < 3) throw SizeError("complex_hessian needs at least 3 nodes");
  require_same_size(f.size(), n, "complex_hessian");
  const HessianStencil st = hessian_stencil(grid, bg, kind);
  FormRatios out;
  out.radial = st.radial.apply(f);
  if (bg.dim() > 1) out.tangential = st.tangential.apply(f);

  // One-sided second-order closure at the truncation radius.
  const double dx = grid.spacing();
  const std::size_t m = n - 1;
  const double fx = (3.0 * f[m] - 4.0 * f[m - 1] + f[m - 2]) / (2.0 * dx);
  const double fxx = n >= 4 ? (2.0 * f[m] - 5.0 * f[m - 1] + 4.0 * f[m - 2] - f[m - 3]) / (dx * dx)
                            : (f[m] - 2.0 * f[m - 1] + f[m - 2]) / (dx * dx);
  double radial = 0.0;
  double tangential = 0.0;
  hessian_from_derivatives(grid.node(m), fx, fxx, bg.potential_scale(), radial, tangential);
  out.radial[m] = radial;
  if (bg.dim() > 1) out.tangential[m] = tangential;
  return out;
}

namespace {

FormRatios negative_hessian(const RadialGrid& grid, const Background& bg,
                            const std::vector<double>& log_det) {
  FormRatios h = complex_hessian(grid, bg, log_det, Stencil::Centered);
  for (double& v : h.radial) v = -v;
  for (double& v : h.tangential) v = -v;
  return h;
}

double log_det_h(const Background& bg, double x) {
  return bg.log_radial_coefficient(x) + (bg.dim() - 1) * bg.log_tangential_coefficient(x);
}

}  // namespace

FormRatios ric_of_metric(const RadialGrid& grid, const Background& bg, const FormRatios& metric) {
  const std::size_t n = grid.size();
  require_same_size(metric.size(), n, "ric_of_metric");
  std::vector<double> log_det(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(metric.radial[i] > 0.0) || !(metric.tangential_at(i) > 0.0)) {
      throw PositivityError("ric_of_metric: non-positive metric coefficient", i);
    }
    log_det[i] = metric.log_det(i, bg.dim());
  }
  FormRatios ric = negative_hessian(grid, bg, log_det);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = grid.node(i);
    ric.radial[i] *= std::exp(bg.log_radial_coefficient(x));
    if (ric.has_tangential()) ric.tangential[i] *= std::exp(bg.log_tangential_coefficient(x));
  }
  return ric;
}

FormRatios ricci_ratios(const RadialGrid& grid, const Background& bg, const FormRatios& ratio) {
  const std::size_t n = grid.size();
  require_same_size(ratio.size(), n, "ricci_ratios");
  std::vector<double> log_det(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(ratio.min_eigen(i) > 0.0)) {
      throw PositivityError("ricci_ratios: non-positive metric ratio", i);
    }
    log_det[i] = ratio.log_det(i, bg.dim()) + log_det_h(bg, grid.node(i));
  }
  return negative_hessian(grid, bg, log_det);
}

InitialData::InitialData(std::string name, Profile profile, bool constant, double parameter)
    : name_(std::move(name)), profile_(std::move(profile)), constant_(constant),
      parameter_(parameter) {}

InitialData InitialData::stationary() {
  return {"stationary", [](double) { return 1.0; }, true, 1.0};
}

InitialData InitialData::homogeneous(double c) {
  if (!(c >= 0.0)) throw DomainError("homogeneous initial data needs c >= 0");
  return {"homogeneous", [c](double) { return c; }, true, c};
}

InitialData InitialData::degenerate() {
  return {"degenerate", [](double) { return 0.0; }, true, 0.0};
}

InitialData InitialData::bump(double radius) {
  if (!(radius > 0.0)) throw ParameterError("bump radius must be positive");
  return {"bump", [radius](double rho) { return cutoff_eta(rho / radius); }, false, radius};
}

InitialData InitialData::tail_decay() {
  return {"tail_decay", [](double rho) { return std::exp(-rho); }, false, 0.0};
}

InitialData InitialData::table(std::vector<std::pair<double, double>> pts) {
  if (pts.empty()) throw ParameterError("initial table is empty");
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (!(pts[i].first > pts[i - 1].first)) {
      throw ParameterError("initial table rho values must be strictly increasing");
    }
  }
  auto shared = pts;
  InitialData d{"table",
                [shared](double rho) {
                  if (rho <= shared.front().first) return shared.front().second;
                  if (rho >= shared.back().first) return shared.back().second;
                  const auto it = std::upper_bound(
                      shared.begin(), shared.end(), rho,
                      [](double v, const std::pair<double, double>& p) { return v < p.first; });
                  const auto& hi = *it;
                  const auto& lo = *(it - 1);
                  const double w = (rho - lo.first) / (hi.first - lo.first);
                  return (1.0 - w) * lo.second + w * hi.second;
                },
                pts.size() == 1};
  d.table_ = std::move(pts);
  return d;
}

InitialData InitialData::custom(std::string name, Profile profile, bool constant) {
  return {std::move(name), std::move(profile), constant};
}

double InitialData::lambda(double rho) const {
  const double v = profile_(rho);
  if (!(v >= 0.0)) throw DomainError("initial profile is negative at rho=" + std::to_string(rho));
  return v;
}

std::vector<double> InitialData::lambda_on(const RadialGrid& grid, const Background& bg) const {
  std::vector<double> out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) out[i] = lambda(bg.exhaustion(grid.node(i)));
  return out;
}

FormRatios InitialData::form_on(const RadialGrid& grid, const Background& bg) const {
  FormRatios f;
  f.radial = lambda_on(grid, bg);
  if (bg.dim() > 1) f.tangential = f.radial;
  return f;
}

std::vector<Interval> InitialData::support(const RadialGrid& grid, const Background& bg) const {
  const auto lam = lambda_on(grid, bg);
  std::vector<Interval> runs;
  for (std::size_t i = 0; i < lam.size(); ++i) {
    if (!(lam[i] > 0.0)) continue;
    if (!runs.empty() && i > 0 && lam[i - 1] > 0.0) {
      runs.back().hi = grid.node(i);
    } else {
      runs.push_back({grid.node(i), grid.node(i)});
    }
  }
  return runs;
}

HypothesisVerdict check_hypotheses(const Background& bg, const InitialData& init,
                                   const HypothesisSpec& spec, const RadialGrid& grid) {
  if (!(spec.s > 0.0)) throw ParameterError("hypothesis horizon s must be positive");
  if (!(spec.beta > 0.0)) throw ParameterError("hypothesis margin beta must be positive");
  const std::size_t n = grid.size();
  const double sigma = bg.ric_sign();
  const double decay = std::exp(-spec.s);
  HypothesisVerdict v;

  std::vector<double> f(n);
  double f_sup = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    f[i] = spec.f(grid.node(i));
    f_sup = std::max(f_sup, std::fabs(f[i]));
  }
  v.f_bounded = std::isfinite(f_sup);

  const auto lam = init.lambda_on(grid, bg);
  const FormRatios hess_f = complex_hessian(grid, bg, f);
  v.min_ratio = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double base = -sigma + decay * (lam[i] + sigma);
    v.min_ratio = std::min(v.min_ratio, base + hess_f.radial[i]);
    if (hess_f.has_tangential()) v.min_ratio = std::min(v.min_ratio, base + hess_f.tangential[i]);
  }
  v.b_holds = v.min_ratio >= spec.beta;

  // Exhaustion bound measured by finite differences on the grid.
  std::vector<double> rho(n);
  for (std::size_t i = 0; i < n; ++i) rho[i] = bg.exhaustion(grid.node(i));
  const FormRatios hess_rho = complex_hessian(grid, bg, rho);
  const double c = bg.potential_scale();
  const double dx = grid.spacing();
  v.exhaustion_sup = 0.0;
  v.gradient_sup = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double drho = i == 0 ? 0.0 : (rho[i + 1] - rho[i - 1]) / (2.0 * dx);
    const double r = hess_rho.radial[i];
    const double t = hess_rho.tangential_at(i);
    const double norm = drho * drho / (4.0 * c) + std::sqrt(r * r + (bg.dim() - 1) * t * t);
    v.exhaustion_sup = std::max(v.exhaustion_sup, norm);
    const double dlam = i == 0 ? 0.0 : (lam[i + 1] - lam[i - 1]) / (2.0 * dx);
    v.gradient_sup = std::max(v.gradient_sup,
                              std::sqrt(static_cast<double>(bg.dim()) * dlam * dlam / (4.0 * c)));
  }
  v.exhaustion_bound = bg.exhaustion_bound();
  v.exhaustion_holds = v.exhaustion_sup <= v.exhaustion_bound * (1.0 + 1e-6);
  v.bisectional_lower = bg.bisectional_lower();
  v.torsion = bg.torsion_bound();

  v.lambda_max = *std::max_element(lam.begin(), lam.end());
  v.a_holds = v.lambda_max <= 1.0 && std::isfinite(v.gradient_sup);
  return v;
}

TailGrowthVerdict tr_growth_check(const InitialData& init, const Background& bg,
                                  const RadialGrid& grid) {
  TailGrowthVerdict v;
  const double top = bg.exhaustion(grid.rho_hat_max());
  v.windows = {{top / 8.0, top / 4.0}, {top / 4.0, top / 2.0}, {top / 2.0, top}};
  for (const Interval& w : v.windows) {
    double est = -1.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double rho = bg.exhaustion(grid.node(i));
      if (rho < w.lo || rho > w.hi) continue;
      const double lam = init.lambda(rho);
      if (!(lam > 0.0)) return v;  // trace undefined on the tail
      est = std::max(est, (bg.dim() / lam) / rho);
    }
    if (est < 0.0) return v;  // window holds no nodes
    v.estimates.push_back(est);
  }
  v.applicable = true;
  v.passed = v.estimates[1] <= kTailContraction * v.estimates[0] &&
             v.estimates[2] <= kTailContraction * v.estimates[1];
  return v;
}

}  // namespace crflow
