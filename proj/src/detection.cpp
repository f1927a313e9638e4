#include "twophoton/detection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

#include "twophoton/constants.hpp"
#include "twophoton/errors.hpp"
#include "twophoton/format.hpp"

namespace twophoton {

void DetectorModel::validate() const {
  if (!(timing_jitter_sigma >= 0.0) || !(dead_time >= 0.0) || !(efficiency >= 0.0) ||
      !(efficiency <= 1.0)) {
    throw ConfigError("detector model: jitter and dead time must be >= 0, efficiency in [0, 1]");
  }
}

void TacConfig::validate() const {
  if (!(range > 0.0)) throw ConfigError("tac: range must be positive");
  if (n_channels < 2) throw ConfigError("tac: need at least two channels");
  if (!(electrical_delay >= 0.0)) throw ConfigError("tac: electrical delay must be >= 0");
}

void TacConfig::validate_for(double path_delay) const {
  validate();
  if (electrical_delay < path_delay || electrical_delay + path_delay >= range) {
    throw ConfigError("tac: peaks at delay +- " + format_real(path_delay) +
                      " s do not fit in [0, " + format_real(range) + ") with delay " +
                      format_real(electrical_delay) + " s");
  }
}

TacHistogram::TacHistogram(double range, int n_channels, double duration, bool dead_time_free)
    : range_(range), duration_(duration), dead_time_free_(dead_time_free) {
  if (!(range > 0.0) || n_channels < 2) throw DomainError("histogram: bad binning");
  counts_.assign(static_cast<std::size_t>(n_channels), 0);
}

std::uint64_t TacHistogram::total() const noexcept {
  return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
}

void TacHistogram::record(double interval) noexcept {
  if (!(interval >= 0.0) || interval >= range_) return;
  auto bin = static_cast<std::size_t>(interval / bin_width());
  counts_[std::min(bin, counts_.size() - 1)] += 1;
}

void TacHistogram::merge(const TacHistogram& other) {
  if (!dead_time_free_ || !other.dead_time_free_) {
    throw PreconditionError("histogram merge is only defined for dead-time-free acquisitions");
  }
  if (other.range_ != range_ || other.counts_.size() != counts_.size()) {
    throw PreconditionError("histogram merge: binning differs");
  }
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
  duration_ += other.duration_;
  singles_a += other.singles_a;
  singles_b += other.singles_b;
}

std::vector<double> register_clicks(std::span<const PhotonArrival> arrivals, Detector detector,
                                    const DetectorModel& model, Rng& rng) {
  model.validate();
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::vector<double> clicks;
  double last = -INFINITY;
  for (const auto& a : arrivals) {
    if (a.detector != detector) continue;
    if (model.efficiency < 1.0 && uniform(rng) >= model.efficiency) continue;
    if (a.time - last < model.dead_time) continue;
    last = a.time;
    clicks.push_back(a.time);
  }
  if (model.timing_jitter_sigma > 0.0) {
    std::normal_distribution<double> jitter(0.0, model.timing_jitter_sigma);
    for (auto& t : clicks) t += jitter(rng);
    std::sort(clicks.begin(), clicks.end());
  }
  return clicks;
}

TacHistogram tac_histogram(std::span<const double> starts, std::span<const double> stops,
                           const TacConfig& tac, double duration, bool dead_time_free) {
  tac.validate();
  TacHistogram hist(tac.range, tac.n_channels, duration, dead_time_free);
  double busy_until = -INFINITY;
  auto next_stop = stops.begin();
  for (const double start : starts) {
    if (start < busy_until) continue;
    next_stop = std::lower_bound(next_stop, stops.end(), start - tac.electrical_delay);
    if (next_stop != stops.end()) {
      const double interval = *next_stop + tac.electrical_delay - start;
      if (interval < tac.range) {
        hist.record(interval);
        busy_until = start + interval;
        continue;
      }
    }
    busy_until = start + tac.range;
  }
  return hist;
}

TacHistogram acquire_histogram(std::span<const PhotonArrival> arrivals, double duration,
                               const DetectorModel& detector_a, const DetectorModel& detector_b,
                               const TacConfig& tac, Rng& rng) {
  const bool sorted = std::is_sorted(arrivals.begin(), arrivals.end(),
                                     [](const auto& x, const auto& y) { return x.time < y.time; });
  if (!sorted) throw PreconditionError("acquire_histogram: events must be sorted by time");
  const auto clicks_a = register_clicks(arrivals, Detector::A, detector_a, rng);
  const auto clicks_b = register_clicks(arrivals, Detector::B, detector_b, rng);
  const bool dead_time_free = detector_a.dead_time == 0.0 && detector_b.dead_time == 0.0;
  auto hist = tac_histogram(clicks_a, clicks_b, tac, duration, dead_time_free);
  hist.singles_a = clicks_a.size();
  hist.singles_b = clicks_b.size();
  return hist;
}

TacHistogram acquire_histogram(const EventStream& events, const DetectorModel& detector_a,
                               const DetectorModel& detector_b, const TacConfig& tac, Rng& rng) {
  return acquire_histogram(events.arrivals, events.duration, detector_a, detector_b, tac, rng);
}

std::uint64_t gate_count(const TacHistogram& hist, double window_center, double window_width) {
  const double lo = window_center - 0.5 * window_width;
  const double hi = window_center + 0.5 * window_width;
  const double slack = 1e-9 * hist.bin_width();
  if (!(window_width >= 0.0) || lo < -slack || hi > hist.range() + slack) {
    throw DomainError("gate_count: window [" + format_real(lo) + ", " + format_real(hi) +
                      "] outside histogram range [0, " + format_real(hist.range()) + "]");
  }
  std::uint64_t sum = 0;
  const auto& counts = hist.counts();
  for (int i = 0; i < hist.n_channels(); ++i) {
    const double c = hist.bin_center(i);
    if (c >= lo && c <= hi) sum += counts[static_cast<std::size_t>(i)];
  }
  return sum;
}

PeakCentroid peak_centroid(const TacHistogram& hist, double guess, double half_width,
                           int iterations) {
  PeakCentroid result{guess, INFINITY, 0};
  const auto& counts = hist.counts();
  for (int it = 0; it < std::max(iterations, 1); ++it) {
    double n = 0.0;
    double sum = 0.0;
    double sum_sq = 0.0;
    for (int i = 0; i < hist.n_channels(); ++i) {
      const double c = hist.bin_center(i);
      if (std::abs(c - result.position) > half_width) continue;
      const auto w = static_cast<double>(counts[static_cast<std::size_t>(i)]);
      n += w;
      sum += w * c;
      sum_sq += w * c * c;
    }
    if (n < 2.0) {
      result.counts = static_cast<std::uint64_t>(n);
      return result;
    }
    const double mean = sum / n;
    const double var = std::max(0.0, sum_sq / n - mean * mean);
    result = {mean, std::sqrt(var / n), static_cast<std::uint64_t>(n)};
  }
  return result;
}

void write_histogram_csv(std::ostream& out, const TacHistogram& hist, const std::string& config_hash) {
  out << "# duration_s=" << format_real(hist.duration()) << ",config_hash=" << config_hash << '\n';
  out << "bin_center_s,count\n";
  const auto& counts = hist.counts();
  for (int i = 0; i < hist.n_channels(); ++i) {
    out << format_real(hist.bin_center(i)) << ',' << counts[static_cast<std::size_t>(i)] << '\n';
  }
}

namespace {

struct PeakModel {
  Eigen::VectorXd value;
  Eigen::MatrixXd jacobian;
};

// theta = (floor, A_1..A_n, mu_1..mu_n, sigma); A_j in counts.
PeakModel evaluate_peaks(const Eigen::VectorXd& x, double bin, const Eigen::VectorXd& theta, int n) {
  const double sigma = theta[2 * n + 1];
  PeakModel m{Eigen::VectorXd::Constant(x.size(), theta[0]), Eigen::MatrixXd::Zero(x.size(), 2 * n + 2)};
  m.jacobian.col(0).setOnes();
  for (int j = 0; j < n; ++j) {
    const double area = theta[1 + j];
    const double mu = theta[1 + n + j];
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double z = (x[i] - mu) / sigma;
      const double g = bin * std::exp(-0.5 * z * z) / (sigma * std::sqrt(kTwoPi));
      m.value[i] += area * g;
      m.jacobian(i, 1 + j) = g;
      m.jacobian(i, 1 + n + j) = area * g * z / sigma;
      m.jacobian(i, 2 * n + 1) += area * g * (z * z - 1.0) / sigma;
    }
  }
  return m;
}

double weighted_chi2(const Eigen::VectorXd& y, const Eigen::VectorXd& model) {
  double chi2 = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    chi2 += (y[i] - model[i]) * (y[i] - model[i]) / std::max(model[i], 1.0);
  }
  return chi2;
}

}  // namespace

PeakFit fit_peaks(const TacHistogram& hist, std::span<const double> guesses, double width_guess,
                  double half_width) {
  if (guesses.empty()) throw DomainError("fit_peaks: no peaks requested");
  const int n = static_cast<int>(guesses.size());
  if (!(half_width > 0.0)) throw DomainError("fit_peaks: half_width must be positive");
  if (width_guess < 2.0 * hist.bin_width()) {
    PeakFit result{{}, width_guess, 0.0, 0.0, 0};
    for (const double g : guesses) result.peaks.push_back(peak_centroid(hist, g, half_width, 1));
    return result;
  }

  const double lo = *std::min_element(guesses.begin(), guesses.end()) - half_width;
  const double hi = *std::max_element(guesses.begin(), guesses.end()) + half_width;
  std::vector<double> xs, ys;
  for (int i = 0; i < hist.n_channels(); ++i) {
    const double c = hist.bin_center(i);
    if (c < lo || c > hi) continue;
    xs.push_back(c);
    ys.push_back(static_cast<double>(hist.counts()[static_cast<std::size_t>(i)]));
  }
  const auto m = static_cast<Eigen::Index>(xs.size());
  const int n_params = 2 * n + 2;
  if (m <= n_params) throw FitError("fit_peaks: fit region holds too few bins");
  const Eigen::Map<const Eigen::VectorXd> x(xs.data(), m), y(ys.data(), m);
  const double bin = hist.bin_width();

  Eigen::VectorXd theta(n_params);
  theta[0] = std::max(0.0, std::min(y.head(std::min<Eigen::Index>(m, 20)).mean(),
                                    y.tail(std::min<Eigen::Index>(m, 20)).mean()));
  for (int j = 0; j < n; ++j) {
    const auto c = gate_count(hist, guesses[static_cast<std::size_t>(j)], std::min(4.0 * width_guess, hist.range()));
    theta[1 + j] = std::max(1.0, static_cast<double>(c));
    theta[1 + n + j] = guesses[static_cast<std::size_t>(j)];
  }
  theta[2 * n + 1] = width_guess;

  double lambda = 1e-3;
  auto model = evaluate_peaks(x, bin, theta, n);
  double chi2 = weighted_chi2(y, model.value);
  bool converged = false;
  for (int it = 0; it < 200 && !converged; ++it) {
    const Eigen::VectorXd w = model.value.unaryExpr([](double v) { return 1.0 / std::max(v, 1.0); });
    const Eigen::MatrixXd jtw = model.jacobian.transpose() * w.asDiagonal();
    const Eigen::MatrixXd jtj = jtw * model.jacobian;
    const Eigen::VectorXd grad = jtw * (y - model.value);
    bool improved = false;
    for (int tries = 0; tries < 30 && !improved; ++tries) {
      Eigen::MatrixXd a = jtj;
      a.diagonal() += lambda * jtj.diagonal();
      const Eigen::VectorXd step = a.ldlt().solve(grad);
      const Eigen::VectorXd trial = theta + step;
      if (!trial.allFinite() || trial[2 * n + 1] <= 0.0) {
        lambda *= 10.0;
        continue;
      }
      auto trial_model = evaluate_peaks(x, bin, trial, n);
      const double trial_chi2 = weighted_chi2(y, trial_model.value);
      if (trial_chi2 <= chi2) {
        const double rel = (chi2 - trial_chi2) / std::max(chi2, 1.0);
        const bool small_step = (step.array().abs() <=
                                 1e-9 * (theta.array().abs() + 1e-12)).all();
        theta = trial;
        model = std::move(trial_model);
        chi2 = trial_chi2;
        lambda = std::max(lambda / 10.0, 1e-12);
        improved = true;
        converged = rel < 1e-12 || small_step;
      } else {
        lambda *= 10.0;
      }
    }
    if (!improved) converged = true;  // no downhill step left: at the minimum
  }
  if (!converged || !theta.allFinite()) {
    throw FitError("fit_peaks: did not converge (chi2 " + format_real(chi2) + ", " +
                   std::to_string(m) + " bins)");
  }

  const Eigen::VectorXd w = model.value.unaryExpr([](double v) { return 1.0 / std::max(v, 1.0); });
  const Eigen::MatrixXd fisher = model.jacobian.transpose() * w.asDiagonal() * model.jacobian;
  const Eigen::VectorXd scale = fisher.diagonal().cwiseSqrt();
  if (!(scale.minCoeff() > 0.0)) throw FitError("fit_peaks: singular Fisher matrix");
  const Eigen::VectorXd inv = scale.cwiseInverse();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(inv.asDiagonal() * fisher * inv.asDiagonal());
  const auto& ev = eig.eigenvalues();
  if (!(ev.minCoeff() > 1e-12 * ev.maxCoeff())) throw FitError("fit_peaks: singular Fisher matrix");
  const Eigen::MatrixXd cov = inv.asDiagonal() *
                              (eig.eigenvectors() * ev.cwiseInverse().asDiagonal() * eig.eigenvectors().transpose()) *
                              inv.asDiagonal();

  PeakFit result{{}, theta[2 * n + 1], theta[0], chi2, static_cast<int>(m) - n_params};
  for (int j = 0; j < n; ++j) {
    result.peaks.push_back({theta[1 + n + j], std::sqrt(std::max(cov(1 + n + j, 1 + n + j), 0.0)),
                            static_cast<std::uint64_t>(std::llround(std::max(theta[1 + j], 0.0)))});
  }
  return result;
}

}  // namespace twophoton
