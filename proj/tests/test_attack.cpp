#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "qdp/attack.hpp"
#include "qdp/certify.hpp"
#include "qdp/classical.hpp"
#include "qdp/random.hpp"
#include "qdp/train.hpp"

using namespace qdp;

namespace {

// Zero-angle single-layer ansatz is a CNOT controlled by the measured
// qubit, so y_1(u) = u_2^2 + u_3^2 for unit u.
ModelArtifact cnot_model() {
  ModelArtifact m;
  m.circuit = build_qnn_ansatz(2, 1);
  m.theta = RealVector::Zero(m.circuit.param_count);
  return m;
}

double toy_y1(const RealVector& u) { return u(2) * u(2) + u(3) * u(3); }

RealVector toy_gradient(const RealVector& x, int label, double p) {
  const double g = toy_y1(x);
  const double y1 = (1 - p) * g + p / 2;
  RealVector grad(4);
  for (int j = 0; j < 4; ++j) {
    const double dg = 2 * x(j) * ((j >= 2 ? 1.0 : 0.0) - g);
    grad(j) = -2 * (label - y1) * (1 - p) * dg;
  }
  return grad;
}

const Dataset& iris() {
  static const Dataset d = preprocess(load_iris(std::string(QDP_DATA_DIR) + "/iris.csv"), 0);
  return d;
}

const ModelArtifact& trained() {
  static const ModelArtifact m = train(iris(), TrainingConfig{});
  return m;
}

}  // namespace

TEST(InputGradient, ToyCircuitMatchesAnalytic) {
  const ModelArtifact m = cnot_model();
  Rng rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const RealVector x = random_unit_vector(4, rng);
    ASSERT_NEAR(qnn_scores(m, x)[1], toy_y1(x), 1e-12);
    const double p = trial % 2 ? 0.4 : 0.0;
    const int label = trial % 3 == 0;
    const RealVector fd = input_gradient(m, x, label, p);
    EXPECT_LT((fd - toy_gradient(x, label, p)).cwiseAbs().maxCoeff(), 1e-5);
  }
}

TEST(InputGradient, FlatRegionAndDeterminism) {
  // y_1 = 0 on span(e0, e1) and the loss for label 0 has a double zero there.
  const ModelArtifact m = cnot_model();
  RealVector x(4);
  x << 0.6, 0.8, 0, 0;
  EXPECT_LT(input_gradient(m, x, 0, 0.0).norm(), 1e-7);
  Rng rng(3);
  const RealVector y = random_unit_vector(4, rng);
  EXPECT_EQ(input_gradient(m, y, 1, 0.3, 100, 8), input_gradient(m, y, 1, 0.3, 100, 8));
  EXPECT_THROW(input_gradient(m, 2 * y, 1, 0.3), DomainError);
}

TEST(ProjectToBall, StaysOnSphereInsideBall) {
  Rng rng(4);
  for (int trial = 0; trial < 2000; ++trial) {
    const RealVector x = random_unit_vector(4, rng);
    RealVector c(4);
    for (auto& v : c) v = standard_normal(rng) * (trial % 4 + 1) * 0.3;
    const double radius = uniform01(rng) * 1.5;
    const RealVector y = project_to_ball(x, x + c, radius);
    EXPECT_NEAR(y.norm(), 1.0, 1e-12);
    EXPECT_LE((y - x).norm(), radius + 1e-12);
  }
  Rng other(5);
  const RealVector x = random_unit_vector(4, other);
  EXPECT_EQ(project_to_ball(x, x + RealVector::Ones(4), 0.0), x);
}

TEST(Ifgsm, ZeroRadiusIsIdentity) {
  const ModelArtifact& m = trained();
  const Example& ex = iris().test[0];
  AttackConfig cfg;
  cfg.radius = 0;
  cfg.steps = 5;
  const AttackTrace trace = ifgsm(m, ex.features, ex.label, cfg, 0.5);
  EXPECT_FALSE(trace.success);
  ASSERT_EQ(trace.iterates.size(), 6u);
  for (const auto& it : trace.iterates) {
    EXPECT_EQ(it.x, ex.features);
    EXPECT_EQ(it.l2, 0.0);
  }
}

TEST(Ifgsm, IteratesStayInBall) {
  const ModelArtifact& m = trained();
  for (const double radius : {0.05, 0.3, 0.7}) {
    AttackConfig cfg;
    cfg.radius = radius;
    cfg.steps = 20;
    for (std::size_t i = 0; i < 5; ++i) {
      const Example& ex = iris().test[i];
      const AttackTrace trace = ifgsm(m, ex.features, ex.label, cfg, 0.3);
      for (const auto& it : trace.iterates) {
        EXPECT_LE((it.x - ex.features).norm(), radius + 1e-9);
        EXPECT_LE(it.l2, radius + 1e-9);
        EXPECT_LE(it.trace, it.l2 + 1e-12);
        EXPECT_NEAR(it.x.norm(), 1.0, 1e-9);
      }
    }
  }
  AttackConfig bad;
  bad.radius = -1;
  EXPECT_THROW(ifgsm(m, iris().test[0].features, 0, bad, 0.0), DomainError);
}

TEST(Ifgsm, SeededShotsAreReproducible) {
  const ModelArtifact& m = trained();
  const Example& ex = iris().test[1];
  AttackConfig cfg;
  cfg.radius = 0.3;
  cfg.steps = 5;
  const AttackTrace a = ifgsm(m, ex.features, ex.label, cfg, 0.5, 200, 17);
  const AttackTrace b = ifgsm(m, ex.features, ex.label, cfg, 0.5, 200, 17);
  ASSERT_EQ(a.iterates.size(), b.iterates.size());
  for (std::size_t t = 0; t < a.iterates.size(); ++t) EXPECT_EQ(a.iterates[t].x, b.iterates[t].x);
}

TEST(IsAdversarial, Clauses) {
  const ModelArtifact m = cnot_model();
  RealVector zero(4), one(4), near_one(4);
  zero << 1, 0, 0, 0;
  one << 0, 0, 1, 0;
  near_one << 0.6, 0, 0.8, 0;
  EXPECT_TRUE(is_adversarial(m, zero, one, 0, 1.5, DistanceMetric::kL2));
  EXPECT_FALSE(is_adversarial(m, zero, one, 1, 1.5, DistanceMetric::kL2));  // clean point already wrong
  EXPECT_FALSE(is_adversarial(m, zero, zero, 0, 1.5, DistanceMetric::kL2));  // no flip
  EXPECT_FALSE(is_adversarial(m, zero, one, 0, 1.0, DistanceMetric::kL2));  // outside radius
  EXPECT_TRUE(is_adversarial(m, zero, one, 0, 1.0, DistanceMetric::kTrace));
  EXPECT_FALSE(is_adversarial(m, zero, near_one, 0, 0.75, DistanceMetric::kTrace));
  EXPECT_TRUE(is_adversarial(m, zero, near_one, 0, 0.8, DistanceMetric::kTrace));
  EXPECT_TRUE(is_adversarial(m, zero, near_one, 0, 0.8, DistanceMetric::kTrace, 0.9));
}

TEST(ConventionalAccuracy, ZeroRadiusIsCleanAccuracy) {
  const ModelArtifact& m = trained();
  AttackConfig cfg;
  cfg.radius = 0;
  cfg.steps = 3;
  const std::span<const Example> test(iris().test);
  EXPECT_EQ(conventional_accuracy(m, test, cfg, 0.0, 0, 1), 1.0);
  EXPECT_EQ(conventional_accuracy(m, test, cfg, 0.5, 0, 1), 1.0);
}

TEST(Sweep, GridCsvAndReproducibility) {
  const ModelArtifact& m = trained();
  const std::span<const Example> test(iris().test.data(), 3);
  const std::vector<double> ps{0.0, 0.5, 0.8};
  const std::vector<double> ls{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7};
  const std::vector<std::uint64_t> seeds{0};
  AttackConfig base;
  base.steps = 4;
  const auto rows = sweep(m, test, ps, ls, base, 50, seeds, 1);
  ASSERT_EQ(rows.size(), 21u);
  EXPECT_EQ(rows[0].p, 0.0);
  EXPECT_EQ(rows[6].L, 0.7);
  EXPECT_EQ(rows[7].p, 0.5);
  for (const auto& r : rows) {
    EXPECT_GE(r.accuracy, 0.0);
    EXPECT_LE(r.accuracy, 1.0);
  }
  const auto again = sweep(m, test, ps, ls, base, 50, seeds, 2);
  const std::string csv = sweep_csv(rows);
  EXPECT_EQ(csv, sweep_csv(again));
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "p,L,acc,n_samp,seed");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 22);
}

TEST(Sweep, AverageOverSeeds) {
  const std::vector<SweepRow> rows{{0, 0.1, 1.0, 10, 0}, {0, 0.1, 0.5, 10, 1}, {0.5, 0.1, 0.25, 10, 0},
                                   {0.5, 0.1, 0.75, 10, 1}};
  const auto mean = average_over_seeds(rows);
  ASSERT_EQ(mean.size(), 2u);
  EXPECT_EQ(mean[0].accuracy, 0.75);
  EXPECT_EQ(mean[1].accuracy, 0.5);
  EXPECT_EQ(mean[1].p, 0.5);
}

TEST(TraceJsonl, OneLinePerIterate) {
  AttackTrace trace;
  for (int t = 0; t < 3; ++t) trace.iterates.push_back({RealVector::Constant(4, 0.5), 0.1 * t, 0.01 * t, 0.005 * t, t % 2});
  std::istringstream in(trace_jsonl(trace, 7));
  std::string line;
  int count = 0;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    EXPECT_EQ(j["example"], 7);
    EXPECT_EQ(j["step"], count);
    EXPECT_EQ(j["x"].size(), 4u);
    EXPECT_EQ(j["predicted"], count % 2);
    ++count;
  }
  EXPECT_EQ(count, 3);
}

TEST(CertifiedVsAttack, CertifiedPointsNeverFlipInsideRadius) {
  const ModelArtifact& m = trained();
  const double p = 0.5;
  const double tau = 0.02;
  AttackConfig cfg;
  cfg.radius = tau;
  cfg.steps = 20;
  int certified = 0;
  for (std::size_t i = 0; i < iris().test.size(); ++i) {
    const Example& ex = iris().test[i];
    const ScoreVector clean = qnn_scores(m, ex.features, p);
    const RobustnessCertificate cert = certify_infinite(clean, predict(clean), p, tau, kQnnMeasuredDim);
    if (!cert.certified) continue;
    ++certified;
    const AttackTrace trace = ifgsm(m, ex.features, predict(clean), cfg, p);
    for (const auto& it : trace.iterates) {
      ASSERT_LE(it.trace, tau + 1e-12);
      EXPECT_EQ(it.predicted, predict(clean)) << "example " << i;
    }
  }
  EXPECT_GT(certified, 0);
}
