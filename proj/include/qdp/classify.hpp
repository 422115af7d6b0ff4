#pragma once

// Class scores, argmax prediction, shot sampling and shot planning.

#include <cstdint>
#include <vector>

#include "qdp/qcore.hpp"

namespace qdp {

/// Probability vector over K classes.
class ScoreVector {
 public:
  /// Throws DomainError unless every entry is in [0, 1] and the sum is 1
  /// within the property tolerance.
  explicit ScoreVector(RealVector scores);

  Eigen::Index size() const { return scores_.size(); }
  double operator[](Eigen::Index k) const { return scores_(k); }
  const RealVector& values() const { return scores_; }

 private:
  RealVector scores_;
};

/// Outcome counts from N shots.
struct ShotEstimate {
  std::vector<std::uint64_t> counts;
  std::uint64_t shots = 0;

  RealVector estimates() const;
};

struct ShotPlan {
  double xi = 0;
  double p = 0;
  double beta = 0;
  std::uint64_t shots = 0;
};

/// scores[k] = Tr(Pi_k rho_out); the POVM is embedded to the state's
/// dimension at its declared position.
ScoreVector exact_scores(const DensityMatrix& rho_out, const Povm& povm);

/// p/K + (1 - p) y_k. Exact for POVMs whose outcomes each carry
/// Tr(Pi_k) = D/K; see noisy_scores_general otherwise.
ScoreVector noisy_scores_closed_form(const ScoreVector& y, double p);

/// p Tr(Pi_k)/D + (1 - p) y_k, the closed form for any POVM.
ScoreVector noisy_scores_general(const ScoreVector& y, double p, const std::vector<ComplexMatrix>& embedded);

/// argmax; the lowest index wins ties.
int predict(const RealVector& y);
inline int predict(const ScoreVector& y) { return predict(y.values()); }

/// y_C - max_{k != C} y_k for C = predict(y).
double score_gap(const RealVector& y);
inline double score_gap(const ScoreVector& y) { return score_gap(y.values()); }

/// One multinomial draw of N outcomes; deterministic in `seed`.
ShotEstimate sample_scores(const ScoreVector& y, std::uint64_t shots, std::uint64_t seed);

/// N = ceil( ln(2/(1-beta)) / (8 xi^2 (1-p)^2) ).
ShotPlan plan_shots(double xi, double p, double beta);

/// max(0, 1 - 2 exp(-2 N zeta^2)).
double hoeffding_confidence(std::uint64_t shots, double zeta);

}  // namespace qdp
