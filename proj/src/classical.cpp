#include "qdp/classical.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

namespace qdp {

namespace {

void require_unit(const RealVector& x, const char* what) {
  if (std::abs(x.norm() - 1.0) > tol::kUnitNorm) {
    throw DomainError(std::string(what) + " is not unit norm");
  }
}

}  // namespace

void KernelPerceptron::validate() const {
  if (support_points.empty()) throw DomainError("kernel perceptron has no support points");
  if (static_cast<std::size_t>(signed_weights.size()) != support_points.size()) {
    throw DimensionError("one signed weight is needed per support point");
  }
  if (degree < 1) throw DomainError("polynomial degree must be at least 1");
  const Eigen::Index dim = support_points.front().size();
  for (const auto& s : support_points) {
    if (s.size() != dim) throw DimensionError("support points differ in dimension");
    require_unit(s, "support point");
  }
}

KernelScore kernel_score(const KernelPerceptron& model, const RealVector& x) {
  model.validate();
  if (x.size() != model.support_points.front().size()) throw DimensionError("input dimension mismatch");
  require_unit(x, "kernel input");
  KernelScore s;
  for (std::size_t i = 0; i < model.size(); ++i) {
    s.raw += model.signed_weights(static_cast<Eigen::Index>(i)) * std::pow(model.support_points[i].dot(x), model.degree);
  }
  s.clamped = s.raw < 0.0 || s.raw > 1.0;
  s.y0 = std::clamp(s.raw, 0.0, 1.0);
  s.y1 = 1.0 - s.y0;
  return s;
}

double sample_laplace(double kappa, Rng& rng) {
  if (!(kappa > 0.0)) throw DomainError("Laplace kappa must be positive");
  const double b = kappa / std::sqrt(2.0);
  // Inverse CDF on u in (-1/2, 1/2).
  double u = uniform01(rng) - 0.5;
  while (u == -0.5) u = uniform01(rng) - 0.5;
  return u < 0 ? b * std::log1p(2.0 * u) : -b * std::log1p(-2.0 * u);
}

double sample_laplace(double kappa, std::uint64_t seed) {
  Rng rng(seed);
  return sample_laplace(kappa, rng);
}

VoteResult noisy_vote(const KernelPerceptron& model, const RealVector& x, double kappa, std::uint64_t repetitions,
                      std::uint64_t seed) {
  if (repetitions == 0) throw DomainError("vote needs at least one repetition");
  const KernelScore s = kernel_score(model, x);
  VoteResult v;
  v.counts.assign(2, 0);
  v.total = repetitions;
  for (std::uint64_t r = 0; r < repetitions; ++r) {
    Rng rng(derive_seed(seed, "vote", r));
    const double n0 = s.y0 + sample_laplace(kappa, rng);
    const double n1 = s.y1 + sample_laplace(kappa, rng);
    ++v.counts[n1 > n0 ? 1 : 0];
  }
  return v;
}

double estimate_score_ratio(const KernelPerceptron& model, const RealVector& x, double kappa,
                            std::uint64_t repetitions, std::uint64_t seed) {
  if (repetitions == 0) throw DomainError("estimate needs at least one repetition");
  const KernelScore s = kernel_score(model, x);
  double sum0 = 0, sum1 = 0;
  for (std::uint64_t r = 0; r < repetitions; ++r) {
    Rng rng(derive_seed(seed, "vote", r));
    sum0 += s.y0 + sample_laplace(kappa, rng);
    sum1 += s.y1 + sample_laplace(kappa, rng);
  }
  return std::max(sum0, sum1) / std::min(sum0, sum1);
}

double sensitivity_bound(std::size_t support_size, int degree, double max_abs_weight) {
  if (support_size == 0 || degree < 1 || !(max_abs_weight > 0.0)) {
    throw DomainError("sensitivity bound needs positive M, n and weight");
  }
  return std::sqrt(2.0) * static_cast<double>(support_size) * static_cast<double>(degree) * max_abs_weight;
}

LaplaceRadius lemma3_max_radius(const VoteResult& votes, int predicted, double zeta, double kappa, double delta_f) {
  if (!(zeta > 0.0 && zeta < 1.0)) throw DomainError("zeta must lie in (0, 1)");
  if (!(kappa > 0.0) || !(delta_f > 0.0)) throw DomainError("kappa and sensitivity must be positive");
  if (votes.total == 0 || predicted < 0 || static_cast<std::size_t>(predicted) >= votes.counts.size()) {
    throw DomainError("invalid vote result or label");
  }
  const double n = static_cast<double>(votes.total);
  const double slack = std::sqrt(std::log(2.0 / (1.0 - zeta)) / (2.0 * n));
  double other = 0.0;
  for (std::size_t k = 0; k < votes.counts.size(); ++k) {
    if (static_cast<int>(k) != predicted) other = std::max(other, static_cast<double>(votes.counts[k]) / n);
  }
  const double top = static_cast<double>(votes.counts[static_cast<std::size_t>(predicted)]) / n - slack;
  if (top <= 0.0) return {RadiusStatus::kSlackExceedsVotes, 0.0};
  const double radius = kappa / (2.0 * delta_f) * std::log(top / (other + slack));
  if (radius <= 0.0) return {RadiusStatus::kNoMajority, 0.0};
  return {RadiusStatus::kCertified, radius};
}

double theorem3_max_radius(const KernelPerceptron& model, double kappa, double g_ratio) {
  model.validate();
  if (!(kappa > 0.0)) throw DomainError("kappa must be positive");
  if (!(g_ratio >= 1.0)) throw DomainError("score ratio g(B) must be at least 1");
  const double m = static_cast<double>(model.size());
  return kappa / (2.0 * std::sqrt(2.0) * m * model.degree * model.max_abs_weight()) * std::log(g_ratio);
}

L2TraceDistance l2_to_trace(const RealVector& x, const RealVector& x_prime) {
  if (x.size() != x_prime.size()) throw DimensionError("l2_to_trace: dimension mismatch");
  require_unit(x, "x");
  require_unit(x_prime, "x'");
  const double c = std::clamp(x.dot(x_prime), -1.0, 1.0);
  L2TraceDistance d;
  d.l2 = (x - x_prime).norm();
  // 1 - c^2 = (1 - c)(1 + c) with 1 - c = l2^2 / 2 avoids cancellation near c = 1.
  d.trace = std::sqrt(std::max(0.0, 0.5 * d.l2 * d.l2 * (1.0 + c)));
  return d;
}

void to_json(nlohmann::json& j, const KernelPerceptron& model) {
  nlohmann::json points = nlohmann::json::array();
  for (const auto& s : model.support_points) points.push_back(std::vector<double>(s.data(), s.data() + s.size()));
  j = {{"support_points", std::move(points)},
       {"signed_weights",
        std::vector<double>(model.signed_weights.data(), model.signed_weights.data() + model.signed_weights.size())},
       {"degree", model.degree}};
}

void from_json(const nlohmann::json& j, KernelPerceptron& model) {
  try {
    KernelPerceptron m;
    for (const auto& p : j.at("support_points")) {
      const auto v = p.get<std::vector<double>>();
      m.support_points.emplace_back(Eigen::Map<const RealVector>(v.data(), static_cast<Eigen::Index>(v.size())));
    }
    const auto w = j.at("signed_weights").get<std::vector<double>>();
    m.signed_weights = Eigen::Map<const RealVector>(w.data(), static_cast<Eigen::Index>(w.size()));
    m.degree = j.at("degree").get<int>();
    m.validate();
    model = std::move(m);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("kernel perceptron: ") + e.what());
  }
}

void to_json(nlohmann::json& j, const LaplaceRadius& r) {
  const char* status = r.status == RadiusStatus::kCertified    ? "certified"
                       : r.status == RadiusStatus::kNoMajority ? "not-certifiable: no majority"
                                                               : "not-certifiable: slack exceeds votes";
  j = {{"mechanism", "laplace"}, {"status", status}, {"certified", r.status == RadiusStatus::kCertified},
       {"radius", r.radius}};
}

}  // namespace qdp
