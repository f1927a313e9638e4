// Poisson-weighted sinusoid fit for fringe visibility.
//
// Model: mu(x) = a + b cos(theta) + c sin(theta), theta = 2 pi x / P, which is
// baseline * (1 - V cos(theta + phase)) with baseline = a,
// V = hypot(b, c) / a and phase = atan2(c, -b). For fixed P the problem is
// linear and solved by iteratively reweighted least squares with weights
// 1 / max(mu, 1); a free period is profiled over a frequency grid and then
// refined by golden-section search.

#include <cmath>
#include <sstream>
#include <vector>

#include <Eigen/Dense>

#include "twophoton/analysis.hpp"
#include "twophoton/constants.hpp"
#include "twophoton/errors.hpp"

namespace twophoton {

namespace {

constexpr int kMaxReweights = 100;
constexpr int kScanReweights = 4;
constexpr double kWeightFloor = 1.0;  // counts

struct Samples {
  Eigen::VectorXd x;
  Eigen::VectorXd y;
};

struct LinearFit {
  Eigen::Vector3d beta;
  Eigen::VectorXd model;
  double chi2 = INFINITY;
  bool converged = false;
};

Eigen::MatrixXd design(const Eigen::VectorXd& x, double period) {
  Eigen::MatrixXd m(x.size(), 3);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double theta = kTwoPi * x[i] / period;
    m(i, 0) = 1.0;
    m(i, 1) = std::cos(theta);
    m(i, 2) = std::sin(theta);
  }
  return m;
}

Eigen::VectorXd poisson_weights(const Eigen::VectorXd& mu) {
  return mu.unaryExpr([](double m) { return 1.0 / std::max(m, kWeightFloor); });
}

double pearson_chi2(const Eigen::VectorXd& y, const Eigen::VectorXd& mu) {
  return ((y - mu).array().square() * poisson_weights(mu).array()).sum();
}

LinearFit fit_fixed_period(const Samples& s, double period, int max_reweights) {
  const Eigen::MatrixXd x = design(s.x, period);
  Eigen::VectorXd w = poisson_weights(s.y);
  LinearFit fit;
  fit.beta.setZero();
  for (int it = 0; it < max_reweights; ++it) {
    const Eigen::MatrixXd xtw = x.transpose() * w.asDiagonal();
    const Eigen::Vector3d beta = (xtw * x).ldlt().solve(xtw * s.y);
    if (!beta.allFinite()) return fit;
    const double change = (beta - fit.beta).norm();
    fit.beta = beta;
    fit.model = x * beta;
    w = poisson_weights(fit.model);
    if (change <= 1e-12 * std::max(1.0, beta.norm())) {
      fit.converged = true;
      break;
    }
  }
  if (max_reweights < kMaxReweights) fit.converged = fit.beta.allFinite();
  fit.chi2 = pearson_chi2(s.y, fit.model);
  return fit;
}

double profile_chi2(const Samples& s, double frequency) {
  return fit_fixed_period(s, 1.0 / frequency, kScanReweights).chi2;
}

double golden_section(const Samples& s, double lo, double hi) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - g * (hi - lo);
  double x2 = lo + g * (hi - lo);
  double f1 = profile_chi2(s, x1);
  double f2 = profile_chi2(s, x2);
  for (int it = 0; it < 200 && (hi - lo) > 1e-13 * hi; ++it) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - g * (hi - lo);
      f1 = profile_chi2(s, x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + g * (hi - lo);
      f2 = profile_chi2(s, x2);
    }
  }
  return 0.5 * (lo + hi);
}

[[noreturn]] void fail(const std::string& why, const Samples& s, const LinearFit* fit) {
  std::ostringstream msg;
  msg << "visibility fit failed: " << why << " (" << s.y.size() << " points, total counts "
      << s.y.sum();
  if (fit != nullptr && std::isfinite(fit->chi2)) msg << ", residual chi2 " << fit->chi2;
  msg << ")";
  throw FitError(msg.str());
}

double free_period(const Samples& s) {
  const double span = s.x.maxCoeff() - s.x.minCoeff();
  double min_step = INFINITY;
  for (Eigen::Index i = 1; i < s.x.size(); ++i) {
    min_step = std::min(min_step, std::abs(s.x[i] - s.x[i - 1]));
  }
  const double f_lo = 0.5 / span;
  const double f_hi = 0.5 / min_step;
  const double step = 0.02 / span;
  double best_f = f_lo;
  double best_chi2 = INFINITY;
  int n_steps = static_cast<int>(std::ceil((f_hi - f_lo) / step));
  for (int k = 0; k <= n_steps; ++k) {
    const double f = std::min(f_lo + k * step, f_hi);
    const double chi2 = profile_chi2(s, f);
    if (chi2 < best_chi2) {
      best_chi2 = chi2;
      best_f = f;
    }
  }
  if (best_f <= f_lo + 0.5 * step || best_f >= f_hi - 0.5 * step) {
    fail("fringe period not identifiable within the sampled band", s, nullptr);
  }
  return 1.0 / golden_section(s, best_f - step, best_f + step);
}

}  // namespace

VisibilityReport fit_visibility(const FringeScan& scan, std::optional<double> known_period) {
  scan.validate();
  const auto n = static_cast<Eigen::Index>(scan.points.size());
  const int n_params = known_period ? 3 : 4;
  if (n < n_params + 1) throw FitError("visibility fit: too few points");
  if (known_period && !(*known_period > 0.0)) throw DomainError("known period must be positive");

  Samples s{Eigen::VectorXd(n), Eigen::VectorXd(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    s.x[i] = scan.points[static_cast<std::size_t>(i)].offset;
    s.y[i] = static_cast<double>(scan.points[static_cast<std::size_t>(i)].coincidences);
  }
  if (!(s.y.sum() > 0.0)) fail("no coincidences recorded", s, nullptr);

  const double period = known_period ? *known_period : free_period(s);
  const LinearFit fit = fit_fixed_period(s, period, kMaxReweights);
  if (!fit.converged) fail("reweighting did not converge", s, &fit);
  const double a = fit.beta[0];
  const double b = fit.beta[1];
  const double c = fit.beta[2];
  if (!(a > 0.0)) fail("nonpositive baseline", s, &fit);

  // Fisher matrix over (a, b, c[, P]).
  Eigen::MatrixXd jac(n, n_params);
  jac.leftCols(3) = design(s.x, period);
  if (!known_period) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double theta = kTwoPi * s.x[i] / period;
      jac(i, 3) = (-b * std::sin(theta) + c * std::cos(theta)) * (-theta / period);
    }
  }
  const Eigen::VectorXd w = poisson_weights(fit.model);
  const Eigen::MatrixXd fisher = jac.transpose() * w.asDiagonal() * jac;
  // Unit-diagonal scaling; the period column is ~1e10 times the others.
  const Eigen::VectorXd scale = fisher.diagonal().cwiseSqrt();
  if (!(scale.minCoeff() > 0.0)) fail("singular Fisher matrix", s, &fit);
  const Eigen::VectorXd inv_scale = scale.cwiseInverse();
  const Eigen::MatrixXd scaled = inv_scale.asDiagonal() * fisher * inv_scale.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(scaled);
  const auto& ev = eig.eigenvalues();
  if (!(ev.minCoeff() > 1e-12 * ev.maxCoeff())) fail("singular Fisher matrix", s, &fit);
  const Eigen::MatrixXd cov = inv_scale.asDiagonal() *
                              (eig.eigenvectors() * ev.cwiseInverse().asDiagonal() * eig.eigenvectors().transpose()) *
                              inv_scale.asDiagonal();

  const double amplitude = std::hypot(b, c);
  const double v = amplitude / a;
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(n_params);
  double v_var = 0.0;
  if (amplitude > 0.0) {
    grad[0] = -v / a;
    grad[1] = b / (a * amplitude);
    grad[2] = c / (a * amplitude);
    v_var = grad.dot(cov * grad);
  } else {
    v_var = (cov(1, 1) + cov(2, 2)) / (a * a);
  }

  VisibilityReport report{};
  report.raw_visibility = v;
  report.visibility = std::clamp(v, 0.0, 1.0);
  report.visibility_sigma = std::sqrt(std::max(v_var, 0.0));
  report.period = period;
  report.period_sigma = known_period ? 0.0 : std::sqrt(std::max(cov(3, 3), 0.0));
  report.period_locked = known_period.has_value();
  report.phase = std::atan2(c, -b);
  report.baseline = a;
  report.chi2 = fit.chi2;
  report.dof = static_cast<int>(n) - n_params;
  if (scan.path_delay && !scan.points.empty()) {
    report.regime = classify_regime(scan.points.front().window_width, *scan.path_delay);
  }
  report.verdict = report.visibility - 2.0 * report.visibility_sigma > kClassicalVisibilityBound
                       ? Verdict::Nonclassical
                       : Verdict::ConsistentWithClassical;
  return report;
}

}  // namespace twophoton
