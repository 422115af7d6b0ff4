#pragma once

// Privacy budgets of the depolarising channel and the robustness
// certificates they imply.

#include <cstdint>
#include <optional>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "qdp/circuits.hpp"
#include "qdp/classify.hpp"

namespace qdp {

/// p = 0: the channel gives no privacy and epsilon is undefined.
class NoPrivacyError : public DomainError {
 public:
  NoPrivacyError() : DomainError("no depolarising noise (p = 0): privacy budget undefined") {}
};

/// epsilon-QDP budget of a depolarising channel with delta = 0.
struct PrivacyBudget {
  double epsilon = 0;
  double exp_epsilon = 1;  // 1 + d_meas (1 - p) tau_d / p
  double p = 0;
  double tau_d = 0;
  int d_meas = 2;
};

/// exp_epsilon = 1 + d_meas (1 - p) tau_d / p. Throws NoPrivacyError for
/// p == 0 and DomainError for any other out-of-range argument.
PrivacyBudget epsilon_budget(double p, double tau_d, int d_meas);

/// Largest trace-distance radius with budget epsilon:
/// (e^epsilon - 1) p / (d_meas (1 - p)).
double max_tau(double p, double epsilon, int d_meas);

enum class CertificateMode { kInfinite, kFinite };

enum class CertificateStatus {
  kCertified,
  kNotCertified,
  kNoNoise,              // p == 0
  kSlackExceedsEstimate, // finite mode: estimate_C - zeta <= 0
  kDegenerateRunnerUp,   // every other score is zero; trivially certified
};

std::string to_string(CertificateMode mode);
std::string to_string(CertificateStatus status);

struct RobustnessCertificate {
  CertificateMode mode = CertificateMode::kInfinite;
  CertificateStatus status = CertificateStatus::kNotCertified;
  bool certified = false;
  int predicted = 0;
  double tau_d = 0;
  double B = 0;          // score ratio; +inf when the runner-up is zero
  double threshold = 0;  // e^{2 epsilon}
  double epsilon = 0;
  double exp_epsilon = 1;
  double p = 0;
  int d_meas = 2;
  std::optional<double> zeta;
  std::optional<std::uint64_t> shots;
  double confidence = 1;
};

/// Certifies the label `predicted` from exact noisy scores:
/// B = y_C / max_{k != C} y_k, certified iff B > e^{2 epsilon}.
RobustnessCertificate certify_infinite(const ScoreVector& noisy_scores, int predicted, double p, double tau_d,
                                       int d_meas);

/// Finite-shot variant: B = (y_C - zeta) / (max_{k != C} y_k + zeta),
/// confidence 1 - 2 exp(-2 N zeta^2).
RobustnessCertificate certify_finite(const ShotEstimate& estimate, int predicted, double zeta, double p,
                                     double tau_d, int d_meas);

/// Largest tau_d that certify_infinite accepts in the limit:
/// (sqrt(B) - 1) p / (d_meas (1 - p)); 0 when B <= 1.
double max_certified_tau(const ScoreVector& noisy_scores, double p, int d_meas);

/// Exact binary-classifier condition with y0 = B/(1+B), y1 = 1/(1+B):
/// (1-p)(y0-y1)/(p/2 + (1-p)y1) > 4c tau + 4c^2 tau^2, c = (1-p)/p.
bool theorem4_certify_exact(double B, double p, double tau_d);

struct Theorem4Bounds {
  double linear_bound = 0;     // tau < (B-1) / (4(B+1) + 8c)
  double quadratic_bound = 0;  // tau^2 < (B-1) / (4(B+1)c + 8c^2)
  bool linear_in_regime = false;     // c * linear_bound < 1
  bool quadratic_in_regime = false;  // c * quadratic_bound > 1
};

Theorem4Bounds theorem4_closed_bounds(double B, double p);

/// Runs `circuit` (which carries the noise) on sigma and rho and checks
/// e^{-eps} <= y_k(rho) / y_k(sigma) <= e^{eps} for every outcome, with
/// the property tolerance as slack. Throws DomainError when some
/// y_k(sigma) is zero while y_k(rho) is not.
bool dp_ratio_check(const LayeredCircuit& circuit, const RealVector& theta, const Povm& povm,
                    const DensityMatrix& sigma, const DensityMatrix& rho, const PrivacyBudget& budget);

void to_json(nlohmann::json& j, const PrivacyBudget& budget);
void to_json(nlohmann::json& j, const RobustnessCertificate& cert);

}  // namespace qdp
