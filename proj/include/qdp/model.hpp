#pragma once

// The trained QNN classifier: artifact, persistence and forward evaluation.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "qdp/circuits.hpp"
#include "qdp/classify.hpp"

namespace qdp {

inline constexpr int kModelSchemaVersion = 1;

struct TrainingConfig {
  int epochs = 50;
  double learning_rate = 0.01;
  int layers = 5;
  double h = 1e-4;  // finite-difference step
  std::uint64_t seed = 0;
  bool stochastic = true;  // per-example updates in shuffled order

  bool operator==(const TrainingConfig&) const = default;
};

struct EpochRecord {
  int epoch = 0;
  double loss = 0;
  double train_accuracy = 0;
  double test_accuracy = 0;

  bool operator==(const EpochRecord&) const = default;
};

struct ModelArtifact {
  LayeredCircuit circuit;
  RealVector theta;
  TrainingConfig config;
  std::vector<EpochRecord> loss_trace;
};

bool operator==(const ModelArtifact& a, const ModelArtifact& b);

/// {|0><0|, |1><1|} on qubit 0; outcome 1 is class 1.
Povm qnn_povm();

/// Measured-subsystem dimension of the QNN readout.
inline constexpr int kQnnMeasuredDim = 2;

/// Forward pass with the circuit unitary cached for one parameter vector.
/// Depolarising noise p is applied once at the output, which equals any
/// placement of channels whose composition is p.
class QnnForward {
 public:
  QnnForward(const LayeredCircuit& circuit, const RealVector& theta, double p = 0.0);

  DensityMatrix output_state(const DensityMatrix& input) const;
  ScoreVector scores(const DensityMatrix& input) const;
  ScoreVector scores(const RealVector& x) const;
  double class1_probability(const RealVector& x) const { return scores(x)[1]; }

 private:
  int num_qubits_;
  ComplexMatrix unitary_;
  double p_;
  std::vector<ComplexMatrix> povm_;
};

ScoreVector qnn_scores(const ModelArtifact& model, const RealVector& x, double p = 0.0);
int qnn_predict(const ModelArtifact& model, const RealVector& x, double p = 0.0);

void to_json(nlohmann::json& j, const ModelArtifact& model);
/// Throws SchemaError naming the first missing or malformed field.
void from_json(const nlohmann::json& j, ModelArtifact& model);

void save_model(const ModelArtifact& model, const std::filesystem::path& path);
ModelArtifact load_model(const std::filesystem::path& path);

/// Shared by every writer: 17 significant digits, "\n"-terminated.
std::string dump_json(const nlohmann::json& j);

/// Writes to a sibling temporary and renames over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace qdp
