#include "qdp/certify.hpp"

#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

namespace qdp {

namespace {

void check_budget_args(double p, double tau_d, int d_meas) {
  if (p == 0.0) throw NoPrivacyError();
  if (!(p > 0.0 && p < 1.0)) throw DomainError("noise parameter must lie in (0, 1)");
  if (!(tau_d >= 0.0 && tau_d <= 1.0)) throw DomainError("trace-distance radius must lie in [0, 1]");
  if (d_meas < 2) throw DomainError("measured dimension must be at least 2");
}

double runner_up(const RealVector& y, int predicted) {
  double best = -std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < y.size(); ++k) {
    if (k != predicted) best = std::max(best, y(k));
  }
  return best;
}

void check_label(Eigen::Index classes, int predicted) {
  if (classes < 2) throw DimensionError("certification needs at least two classes");
  if (predicted < 0 || predicted >= classes) throw DomainError("predicted label out of range");
}

}  // namespace

PrivacyBudget epsilon_budget(double p, double tau_d, int d_meas) {
  check_budget_args(p, tau_d, d_meas);
  PrivacyBudget b;
  b.p = p;
  b.tau_d = tau_d;
  b.d_meas = d_meas;
  b.exp_epsilon = 1.0 + static_cast<double>(d_meas) * (1.0 - p) * tau_d / p;
  b.epsilon = std::log1p(static_cast<double>(d_meas) * (1.0 - p) * tau_d / p);
  return b;
}

double max_tau(double p, double epsilon, int d_meas) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("noise parameter must lie in (0, 1)");
  if (!(epsilon >= 0.0)) throw DomainError("privacy budget must be non-negative");
  if (d_meas < 2) throw DomainError("measured dimension must be at least 2");
  return std::expm1(epsilon) * p / (static_cast<double>(d_meas) * (1.0 - p));
}

std::string to_string(CertificateMode mode) { return mode == CertificateMode::kInfinite ? "infinite" : "finite"; }

std::string to_string(CertificateStatus status) {
  switch (status) {
    case CertificateStatus::kCertified:
      return "certified";
    case CertificateStatus::kNotCertified:
      return "not-certified";
    case CertificateStatus::kNoNoise:
      return "not-certifiable: no noise";
    case CertificateStatus::kSlackExceedsEstimate:
      return "not-certifiable: slack exceeds estimate";
    case CertificateStatus::kDegenerateRunnerUp:
      return "certified: runner-up score is zero";
  }
  return "unknown";
}

namespace {

RobustnessCertificate base_certificate(CertificateMode mode, int predicted, double p, double tau_d, int d_meas) {
  RobustnessCertificate c;
  c.mode = mode;
  c.predicted = predicted;
  c.p = p;
  c.tau_d = tau_d;
  c.d_meas = d_meas;
  if (p == 0.0) {
    c.status = CertificateStatus::kNoNoise;
    c.epsilon = std::numeric_limits<double>::infinity();
    c.exp_epsilon = std::numeric_limits<double>::infinity();
    c.threshold = std::numeric_limits<double>::infinity();
    return c;
  }
  const PrivacyBudget b = epsilon_budget(p, tau_d, d_meas);
  c.epsilon = b.epsilon;
  c.exp_epsilon = b.exp_epsilon;
  c.threshold = b.exp_epsilon * b.exp_epsilon;
  return c;
}

void decide(RobustnessCertificate& c, double numerator, double denominator) {
  if (denominator <= 0.0) {
    c.B = std::numeric_limits<double>::infinity();
    c.status = CertificateStatus::kDegenerateRunnerUp;
    c.certified = true;
    return;
  }
  c.B = numerator / denominator;
  c.certified = c.B > c.threshold;
  c.status = c.certified ? CertificateStatus::kCertified : CertificateStatus::kNotCertified;
}

}  // namespace

RobustnessCertificate certify_infinite(const ScoreVector& noisy_scores, int predicted, double p, double tau_d,
                                       int d_meas) {
  check_label(noisy_scores.size(), predicted);
  RobustnessCertificate c = base_certificate(CertificateMode::kInfinite, predicted, p, tau_d, d_meas);
  c.confidence = 1.0;
  if (c.status == CertificateStatus::kNoNoise) return c;
  decide(c, noisy_scores[predicted], runner_up(noisy_scores.values(), predicted));
  return c;
}

RobustnessCertificate certify_finite(const ShotEstimate& estimate, int predicted, double zeta, double p,
                                     double tau_d, int d_meas) {
  if (!(zeta > 0.0 && zeta < 0.5)) throw DomainError("slack zeta must lie in (0, 0.5)");
  if (estimate.shots == 0) throw DomainError("shot estimate has no shots");
  const RealVector y = estimate.estimates();
  check_label(y.size(), predicted);
  RobustnessCertificate c = base_certificate(CertificateMode::kFinite, predicted, p, tau_d, d_meas);
  c.zeta = zeta;
  c.shots = estimate.shots;
  c.confidence = hoeffding_confidence(estimate.shots, zeta);
  if (c.status == CertificateStatus::kNoNoise) return c;
  const double numerator = y(predicted) - zeta;
  const double denominator = runner_up(y, predicted) + zeta;
  c.B = numerator / denominator;
  if (numerator <= 0.0) {
    c.status = CertificateStatus::kSlackExceedsEstimate;
    c.certified = false;
    return c;
  }
  c.certified = c.B > c.threshold;
  c.status = c.certified ? CertificateStatus::kCertified : CertificateStatus::kNotCertified;
  return c;
}

double max_certified_tau(const ScoreVector& noisy_scores, double p, int d_meas) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("noise parameter must lie in (0, 1)");
  if (d_meas < 2) throw DomainError("measured dimension must be at least 2");
  const int c = predict(noisy_scores);
  const double other = runner_up(noisy_scores.values(), c);
  if (other <= 0.0) return 1.0;
  const double b = noisy_scores[c] / other;
  if (b <= 1.0) return 0.0;
  return std::min(1.0, (std::sqrt(b) - 1.0) * p / (static_cast<double>(d_meas) * (1.0 - p)));
}

namespace {

void check_theorem4_args(double B, double p) {
  if (!(B >= 1.0)) throw DomainError("score ratio B must be at least 1");
  if (!(p > 0.0 && p < 1.0)) throw DomainError("noise parameter must lie in (0, 1)");
}

}  // namespace

bool theorem4_certify_exact(double B, double p, double tau_d) {
  check_theorem4_args(B, p);
  if (!(tau_d >= 0.0 && tau_d <= 1.0)) throw DomainError("trace-distance radius must lie in [0, 1]");
  const double y0 = B / (1.0 + B);
  const double y1 = 1.0 / (1.0 + B);
  const double c = (1.0 - p) / p;
  const double lhs = (1.0 - p) * (y0 - y1) / (p / 2.0 + (1.0 - p) * y1);
  const double rhs = 4.0 * c * tau_d + 4.0 * c * c * tau_d * tau_d;
  return lhs > rhs;
}

Theorem4Bounds theorem4_closed_bounds(double B, double p) {
  check_theorem4_args(B, p);
  const double c = (1.0 - p) / p;
  Theorem4Bounds out;
  out.linear_bound = (B - 1.0) / (4.0 * (B + 1.0) + 8.0 * c);
  out.quadratic_bound = std::sqrt((B - 1.0) / (4.0 * (B + 1.0) * c + 8.0 * c * c));
  out.linear_in_regime = c * out.linear_bound < 1.0;
  out.quadratic_in_regime = c * out.quadratic_bound > 1.0;
  return out;
}

bool dp_ratio_check(const LayeredCircuit& circuit, const RealVector& theta, const Povm& povm,
                    const DensityMatrix& sigma, const DensityMatrix& rho, const PrivacyBudget& budget) {
  const ScoreVector ys = exact_scores(run_circuit(sigma, circuit, theta), povm);
  const ScoreVector yr = exact_scores(run_circuit(rho, circuit, theta), povm);
  const double lo = 1.0 / budget.exp_epsilon;
  const double hi = budget.exp_epsilon;
  for (Eigen::Index k = 0; k < ys.size(); ++k) {
    if (ys[k] == 0.0) {
      if (yr[k] > 0.0) throw DomainError("ratio undefined: outcome has zero probability on sigma only");
      continue;
    }
    const double ratio = yr[k] / ys[k];
    if (ratio < lo - tol::kProperty || ratio > hi + tol::kProperty) return false;
  }
  return true;
}

void to_json(nlohmann::json& j, const PrivacyBudget& b) {
  j = {{"epsilon", b.epsilon}, {"exp_epsilon", b.exp_epsilon}, {"p", b.p}, {"tau_d", b.tau_d}, {"d_meas", b.d_meas}};
}

void to_json(nlohmann::json& j, const RobustnessCertificate& c) {
  auto finite_or_null = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  j = {{"mode", to_string(c.mode)},
       {"status", to_string(c.status)},
       {"certified", c.certified},
       {"predicted", c.predicted},
       {"tau_d", c.tau_d},
       {"B", finite_or_null(c.B)},
       {"threshold", finite_or_null(c.threshold)},
       {"epsilon", finite_or_null(c.epsilon)},
       {"exp_epsilon", finite_or_null(c.exp_epsilon)},
       {"p", c.p},
       {"d_meas", c.d_meas},
       {"confidence", c.confidence}};
  if (c.zeta) j["zeta"] = *c.zeta;
  if (c.shots) j["shots"] = *c.shots;
}

}  // namespace qdp
