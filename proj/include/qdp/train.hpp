#pragma once

// Squared-loss training of the QNN with central finite-difference gradients.

#include <functional>
#include <span>

#include "qdp/dataset.hpp"
#include "qdp/model.hpp"

namespace qdp {

/// (1/n) sum (c*_i - y_1(x_i))^2, y_1 the noiseless class-1 probability.
double squared_loss(const LayeredCircuit& circuit, const RealVector& theta, std::span<const Example> examples);
double squared_loss(const ModelArtifact& model, std::span<const Example> examples);

/// Fraction of examples whose noiseless prediction matches the label.
double accuracy(const ModelArtifact& model, std::span<const Example> examples, double p = 0.0);

/// (f(theta + h e_j) - f(theta - h e_j)) / 2h for every coordinate j.
RealVector zeroth_order_gradient(const std::function<double(const RealVector&)>& loss_at, const RealVector& theta,
                                 double h);

/// Gradient descent on the training split. The test split is only read
/// to record accuracy in the loss trace.
ModelArtifact train(const Dataset& dataset, const TrainingConfig& config);

}  // namespace qdp
