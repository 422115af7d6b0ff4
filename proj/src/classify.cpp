#include "qdp/classify.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "qdp/random.hpp"

namespace qdp {

ScoreVector::ScoreVector(RealVector scores) : scores_(std::move(scores)) {
  if (scores_.size() == 0) throw DimensionError("empty score vector");
  for (Eigen::Index k = 0; k < scores_.size(); ++k) {
    if (!(scores_(k) >= -tol::kProperty && scores_(k) <= 1.0 + tol::kProperty)) {
      throw DomainError("score " + std::to_string(scores_(k)) + " outside [0, 1]");
    }
    scores_(k) = std::clamp(scores_(k), 0.0, 1.0);
  }
  if (std::abs(scores_.sum() - 1.0) > tol::kProperty) {
    throw DomainError("scores sum to " + std::to_string(scores_.sum()));
  }
}

RealVector ShotEstimate::estimates() const {
  RealVector out(static_cast<Eigen::Index>(counts.size()));
  for (std::size_t k = 0; k < counts.size(); ++k) {
    out(static_cast<Eigen::Index>(k)) = static_cast<double>(counts[k]) / static_cast<double>(shots);
  }
  return out;
}

ScoreVector exact_scores(const DensityMatrix& rho_out, const Povm& povm) {
  const auto embedded = embed_povm<double>(povm, rho_out.dim());
  RealVector scores(static_cast<Eigen::Index>(embedded.size()));
  for (std::size_t k = 0; k < embedded.size(); ++k) {
    scores(static_cast<Eigen::Index>(k)) = measure_probability<double>(embedded[k], rho_out);
  }
  return ScoreVector(std::move(scores));
}

ScoreVector noisy_scores_closed_form(const ScoreVector& y, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("noise parameter outside [0, 1]");
  const double k = static_cast<double>(y.size());
  return ScoreVector((p / k + (1.0 - p) * y.values().array()).matrix());
}

ScoreVector noisy_scores_general(const ScoreVector& y, double p, const std::vector<ComplexMatrix>& embedded) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("noise parameter outside [0, 1]");
  if (static_cast<Eigen::Index>(embedded.size()) != y.size()) {
    throw DimensionError("score vector and POVM disagree on the number of outcomes");
  }
  RealVector out(y.size());
  for (Eigen::Index k = 0; k < y.size(); ++k) {
    const auto& e = embedded[static_cast<std::size_t>(k)];
    out(k) = p * e.trace().real() / static_cast<double>(e.rows()) + (1.0 - p) * y[k];
  }
  return ScoreVector(std::move(out));
}

int predict(const RealVector& y) {
  Eigen::Index best = 0;
  for (Eigen::Index k = 1; k < y.size(); ++k) {
    if (y(k) > y(best)) best = k;
  }
  return static_cast<int>(best);
}

double score_gap(const RealVector& y) {
  const int c = predict(y);
  double runner_up = -std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < y.size(); ++k) {
    if (k != c) runner_up = std::max(runner_up, y(k));
  }
  return y(c) - runner_up;
}

ShotEstimate sample_scores(const ScoreVector& y, std::uint64_t shots, std::uint64_t seed) {
  if (shots == 0) throw DomainError("shot count must be at least 1");
  const Eigen::Index k = y.size();
  std::vector<double> cumulative(static_cast<std::size_t>(k));
  double acc = 0;
  for (Eigen::Index i = 0; i < k; ++i) {
    acc += y[i];
    cumulative[static_cast<std::size_t>(i)] = acc;
  }
  ShotEstimate out;
  out.counts.assign(static_cast<std::size_t>(k), 0);
  out.shots = shots;
  Rng rng(seed);
  for (std::uint64_t s = 0; s < shots; ++s) {
    const double u = uniform01(rng) * acc;
    std::size_t outcome = 0;
    while (outcome + 1 < cumulative.size() && u >= cumulative[outcome]) ++outcome;
    ++out.counts[outcome];
  }
  return out;
}

ShotPlan plan_shots(double xi, double p, double beta) {
  if (!(xi > 0.0 && xi <= 1.0)) throw DomainError("score gap xi must lie in (0, 1]");
  if (!(p >= 0.0 && p < 1.0)) throw DomainError("noise parameter must lie in [0, 1)");
  if (!(beta > 0.0 && beta < 1.0)) throw DomainError("confidence beta must lie in (0, 1)");
  const double shrink = 1.0 - p;
  const double n = std::log(2.0 / (1.0 - beta)) / (8.0 * xi * xi * shrink * shrink);
  return {xi, p, beta, static_cast<std::uint64_t>(std::ceil(n))};
}

double hoeffding_confidence(std::uint64_t shots, double zeta) {
  const double n = static_cast<double>(shots);
  return std::max(0.0, 1.0 - 2.0 * std::exp(-2.0 * n * zeta * zeta));
}

}  // namespace qdp
