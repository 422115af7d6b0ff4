#include "qdp/train.hpp"

#include <cmath>
#include <numeric>

#include "qdp/random.hpp"

namespace qdp {

double squared_loss(const LayeredCircuit& circuit, const RealVector& theta, std::span<const Example> examples) {
  if (examples.empty()) return 0.0;
  const QnnForward forward(circuit, theta);
  double total = 0.0;
  for (const auto& ex : examples) {
    const double diff = static_cast<double>(ex.label) - forward.scores(ex.encoded.density())[1];
    total += diff * diff;
  }
  return total / static_cast<double>(examples.size());
}

double squared_loss(const ModelArtifact& model, std::span<const Example> examples) {
  return squared_loss(model.circuit, model.theta, examples);
}

double accuracy(const ModelArtifact& model, std::span<const Example> examples, double p) {
  if (examples.empty()) return 0.0;
  const QnnForward forward(model.circuit, model.theta, p);
  std::size_t correct = 0;
  for (const auto& ex : examples) {
    if (predict(forward.scores(ex.encoded.density())) == ex.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(examples.size());
}

RealVector zeroth_order_gradient(const std::function<double(const RealVector&)>& loss_at, const RealVector& theta,
                                 double h) {
  if (!(h > 0.0)) throw DomainError("finite-difference step must be positive");
  RealVector grad(theta.size());
  RealVector probe = theta;
  for (Eigen::Index j = 0; j < theta.size(); ++j) {
    probe(j) = theta(j) + h;
    const double up = loss_at(probe);
    probe(j) = theta(j) - h;
    const double down = loss_at(probe);
    probe(j) = theta(j);
    grad(j) = (up - down) / (2.0 * h);
  }
  return grad;
}

ModelArtifact train(const Dataset& dataset, const TrainingConfig& config) {
  if (config.epochs < 0) throw DomainError("epochs must be non-negative");
  ModelArtifact model;
  model.circuit = build_qnn_ansatz(2, config.layers);
  model.config = config;

  Rng init = make_rng(config.seed, "init");
  model.theta.resize(model.circuit.param_count);
  for (Eigen::Index j = 0; j < model.theta.size(); ++j) model.theta(j) = 2.0 * M_PI * uniform01(init);

  const std::span<const Example> train_set(dataset.train);
  auto record = [&](int epoch) {
    model.loss_trace.push_back({epoch, squared_loss(model, train_set), accuracy(model, train_set),
                                accuracy(model, dataset.test)});
  };
  record(0);

  Rng order = make_rng(config.seed, "order");
  std::vector<std::size_t> idx(train_set.size());
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    if (config.stochastic) {
      std::iota(idx.begin(), idx.end(), std::size_t{0});
      for (std::size_t i = idx.size() - 1; i > 0; --i) {
        const auto j = static_cast<std::size_t>(uniform01(order) * static_cast<double>(i + 1));
        std::swap(idx[i], idx[std::min(j, i)]);
      }
      for (const std::size_t i : idx) {
        const auto one = train_set.subspan(i, 1);
        const auto loss_at = [&](const RealVector& th) { return squared_loss(model.circuit, th, one); };
        model.theta -= config.learning_rate * zeroth_order_gradient(loss_at, model.theta, config.h);
      }
    } else {
      const auto loss_at = [&](const RealVector& th) { return squared_loss(model.circuit, th, train_set); };
      model.theta -= config.learning_rate * zeroth_order_gradient(loss_at, model.theta, config.h);
    }
    record(epoch);
  }
  return model;
}

}  // namespace qdp
