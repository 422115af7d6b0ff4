#include "qdp/attack.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include <nlohmann/json.hpp>

#include "qdp/classical.hpp"
#include "qdp/parallel.hpp"
#include "qdp/random.hpp"

namespace qdp {

void AttackConfig::validate() const {
  if (!(radius >= 0.0)) throw DomainError("attack radius must be non-negative");
  if (steps < 1) throw DomainError("attack needs at least one step");
  if (alpha && !(*alpha >= 0.0)) throw DomainError("attack step size must be non-negative");
  if (!(gradient_step > 0.0)) throw DomainError("gradient step must be positive");
}

NoisyClassifier::NoisyClassifier(const ModelArtifact& model, double p, std::uint64_t shots, std::uint64_t seed)
    : forward_(model.circuit, model.theta, p), p_(p), shots_(shots), seed_(seed) {}

RealVector NoisyClassifier::scores(const RealVector& x) {
  const ScoreVector exact = forward_.scores(x);
  if (shots_ == 0) return exact.values();
  return sample_scores(exact, shots_, derive_seed(seed_, "shots", calls_++)).estimates();
}

double NoisyClassifier::loss(const RealVector& x, int label) {
  const double diff = static_cast<double>(label) - scores(x)(1);
  return diff * diff;
}

int NoisyClassifier::predict(const RealVector& x) { return qdp::predict(scores(x)); }

RealVector input_gradient(NoisyClassifier& classifier, const RealVector& x, int label, double h) {
  if (std::abs(x.norm() - 1.0) > tol::kUnitNorm) throw DomainError("attack input is not unit norm");
  RealVector grad(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    RealVector up = x;
    RealVector down = x;
    up(j) += h;
    down(j) -= h;
    grad(j) = (classifier.loss(up.normalized(), label) - classifier.loss(down.normalized(), label)) / (2.0 * h);
  }
  return grad;
}

RealVector input_gradient(const ModelArtifact& model, const RealVector& x, int label, double p, std::uint64_t shots,
                          std::uint64_t seed, double h) {
  NoisyClassifier classifier(model, p, shots, seed);
  return input_gradient(classifier, x, label, h);
}

RealVector project_to_ball(const RealVector& x, const RealVector& candidate, double radius) {
  if (!(radius > 0.0)) return x;
  RealVector d = candidate - x;
  const double dn = d.norm();
  if (dn > radius) d *= radius / dn;
  RealVector y = x + d;
  const double yn = y.norm();
  if (!(yn > 0.0)) return x;
  y /= yn;
  if ((y - x).norm() <= radius) return y;
  // Normalisation left the ball: walk from x along the great circle
  // towards y until the chord length equals the radius.
  RealVector tangent = y - x.dot(y) * x;
  const double tn = tangent.norm();
  if (!(tn > 0.0)) return x;
  tangent /= tn;
  const double angle = 2.0 * std::asin(std::min(1.0, radius / 2.0));
  RealVector z = std::cos(angle) * x + std::sin(angle) * tangent;
  z.normalize();
  // Rounding can leave |z - x| a few ulps above the radius.
  for (int i = 0; i < 64 && (z - x).norm() > radius; ++i) z = (x + 0.999999 * (z - x)).normalized();
  return (z - x).norm() <= radius ? z : x;
}

namespace {

int sign(double v) { return (v > 0) - (v < 0); }

AttackIterate make_iterate(NoisyClassifier& classifier, const RealVector& x0, const RealVector& x, int label) {
  AttackIterate it;
  it.x = x;
  const RealVector s = classifier.scores(x);
  const double diff = static_cast<double>(label) - s(1);
  it.loss = diff * diff;
  it.predicted = predict(s);
  const L2TraceDistance d = l2_to_trace(x0, x);
  it.l2 = d.l2;
  it.trace = d.trace;
  return it;
}

}  // namespace

AttackTrace ifgsm(NoisyClassifier& classifier, const RealVector& x, int label, const AttackConfig& config) {
  config.validate();
  const double alpha = config.step_size();
  AttackTrace trace;
  RealVector current = x;
  trace.iterates.push_back(make_iterate(classifier, x, current, label));
  for (int t = 0; t < config.steps; ++t) {
    const RealVector grad = input_gradient(classifier, current, label, config.gradient_step);
    RealVector step(grad.size());
    for (Eigen::Index j = 0; j < grad.size(); ++j) step(j) = alpha * sign(grad(j));
    current = project_to_ball(x, current + step, config.radius);
    trace.iterates.push_back(make_iterate(classifier, x, current, label));
    if (config.early_stop && trace.iterates.back().predicted != label) break;
  }
  trace.success = trace.iterates.back().predicted != label;
  return trace;
}

AttackTrace ifgsm(const ModelArtifact& model, const RealVector& x, int label, const AttackConfig& config, double p,
                  std::uint64_t shots, std::uint64_t seed) {
  NoisyClassifier classifier(model, p, shots, seed);
  return ifgsm(classifier, x, label, config);
}

bool is_adversarial(const ModelArtifact& model, const RealVector& x, const RealVector& x_adv, int label,
                    double threshold, DistanceMetric metric, double p) {
  const QnnForward forward(model.circuit, model.theta, p);
  if (predict(forward.scores(x)) != label) return false;
  if (predict(forward.scores(x_adv)) == label) return false;
  const L2TraceDistance d = l2_to_trace(x, x_adv);
  return (metric == DistanceMetric::kL2 ? d.l2 : d.trace) <= threshold;
}

double conventional_accuracy(const ModelArtifact& model, std::span<const Example> test_set,
                             const AttackConfig& config, double p, std::uint64_t n_samp, std::uint64_t seed) {
  if (test_set.empty()) return 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < test_set.size(); ++i) {
    const Example& ex = test_set[i];
    NoisyClassifier attacker(model, p);
    const AttackTrace trace = ifgsm(attacker, ex.features, ex.label, config);
    NoisyClassifier judge(model, p, n_samp, derive_seed(seed, "judge", i));
    if (judge.predict(trace.iterates.back().x) == ex.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(test_set.size());
}

std::vector<SweepRow> sweep(const ModelArtifact& model, std::span<const Example> test_set,
                            std::span<const double> p_values, std::span<const double> l_grid,
                            const AttackConfig& base, std::uint64_t n_samp, std::span<const std::uint64_t> seeds,
                            int jobs) {
  struct Task {
    double p, l;
    std::uint64_t cell, seed;
  };
  std::vector<Task> tasks;
  std::uint64_t cell = 0;
  for (const double p : p_values) {
    for (const double l : l_grid) {
      for (const std::uint64_t seed : seeds) tasks.push_back({p, l, cell, seed});
      ++cell;
    }
  }
  return parallel_map(tasks.size(), jobs, [&](std::size_t i) {
    const Task& t = tasks[i];
    AttackConfig config = base;
    config.radius = t.l;
    config.alpha.reset();
    const double acc = conventional_accuracy(model, test_set, config, t.p, n_samp, derive_seed(t.seed, "sweep", t.cell));
    return SweepRow{t.p, t.l, acc, n_samp, t.seed};
  });
}

std::vector<SweepRow> average_over_seeds(std::span<const SweepRow> rows) {
  std::vector<SweepRow> out;
  std::vector<std::size_t> counts;
  for (const auto& r : rows) {
    if (out.empty() || out.back().p != r.p || out.back().L != r.L) {
      out.push_back({r.p, r.L, 0.0, r.n_samp, 0});
      counts.push_back(0);
    }
    out.back().accuracy += r.accuracy;
    ++counts.back();
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i].accuracy /= static_cast<double>(counts[i]);
  return out;
}

std::string sweep_csv(std::span<const SweepRow> rows) {
  std::ostringstream out;
  out << "p,L,acc,n_samp,seed\n";
  char buf[128];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,", r.p, r.L, r.accuracy);
    out << buf << r.n_samp << ',' << r.seed << '\n';
  }
  return out.str();
}

std::string trace_jsonl(const AttackTrace& trace, std::size_t example_index) {
  std::string out;
  for (std::size_t t = 0; t < trace.iterates.size(); ++t) {
    const auto& it = trace.iterates[t];
    const nlohmann::json line = {{"example", example_index},
                                 {"step", t},
                                 {"x", std::vector<double>(it.x.data(), it.x.data() + it.x.size())},
                                 {"loss", it.loss},
                                 {"l2", it.l2},
                                 {"trace", it.trace},
                                 {"predicted", it.predicted}};
    out += line.dump() + "\n";
  }
  return out;
}

}  // namespace qdp
