#pragma once

// Classical baseline: polynomial-kernel perceptron with an output-layer
// Laplace mechanism, its sensitivity and certified l2 radii.

#include <cstdint>
#include <optional>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "qdp/qcore.hpp"
#include "qdp/random.hpp"

namespace qdp {

/// y0(x) = sum_i w_i (x_i . x)^n over unit-norm support points.
struct KernelPerceptron {
  std::vector<RealVector> support_points;
  RealVector signed_weights;  // w*_i y*_i
  int degree = 1;

  void validate() const;
  std::size_t size() const { return support_points.size(); }
  double max_abs_weight() const { return signed_weights.cwiseAbs().maxCoeff(); }
};

struct KernelScore {
  double raw = 0;        // unclamped y0
  double y0 = 0;         // clamped to [0, 1]
  double y1 = 0;         // 1 - y0
  bool clamped = false;  // raw fell outside [0, 1]
};

KernelScore kernel_score(const KernelPerceptron& model, const RealVector& x);

/// Laplace sample with standard deviation kappa (scale b = kappa / sqrt 2).
double sample_laplace(double kappa, Rng& rng);
double sample_laplace(double kappa, std::uint64_t seed);

struct VoteResult {
  std::vector<std::uint64_t> counts;
  std::uint64_t total = 0;
};

/// N repetitions of: Laplace noise on each entry of (y0, y1), argmax,
/// tally. Repetition r draws from derive_seed(seed, "vote", r).
VoteResult noisy_vote(const KernelPerceptron& model, const RealVector& x, double kappa, std::uint64_t repetitions,
                      std::uint64_t seed);

/// Ratio of mean noisy scores over N draws, an estimate of g(B).
double estimate_score_ratio(const KernelPerceptron& model, const RealVector& x, double kappa,
                            std::uint64_t repetitions, std::uint64_t seed);

/// sqrt(2) * M * n * max|w|, an upper bound on the l2 sensitivity of
/// x -> (y0(x), 1 - y0(x)).
double sensitivity_bound(std::size_t support_size, int degree, double max_abs_weight);

enum class RadiusStatus { kCertified, kNoMajority, kSlackExceedsVotes };

struct LaplaceRadius {
  RadiusStatus status = RadiusStatus::kNoMajority;
  double radius = 0;  // meaningful only when certified
};

/// (kappa / 2 df) ln((N_C/N - s) / (max_{k != C} N_k/N + s)),
/// s = sqrt(ln(2/(1-zeta)) / 2N).
LaplaceRadius lemma3_max_radius(const VoteResult& votes, int predicted, double zeta, double kappa, double delta_f);

/// (1/M) kappa / (2 sqrt2 n max|w|) ln g. Zero at g = 1; DomainError for g < 1.
double theorem3_max_radius(const KernelPerceptron& model, double kappa, double g_ratio);

struct L2TraceDistance {
  double l2 = 0;
  double trace = 0;
};

/// For unit vectors: l2 = |x - x'|, trace = sqrt(1 - (x.x')^2) = l2 sqrt(1 - l2^2/4).
L2TraceDistance l2_to_trace(const RealVector& x, const RealVector& x_prime);

void to_json(nlohmann::json& j, const KernelPerceptron& model);
void from_json(const nlohmann::json& j, KernelPerceptron& model);
void to_json(nlohmann::json& j, const LaplaceRadius& radius);

}  // namespace qdp
