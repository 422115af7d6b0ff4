#pragma once

// Parameterised layered circuits, amplitude encoding and depolarising noise.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "qdp/qcore.hpp"

namespace qdp {

enum class GateKind { kRotZ, kRotY, kCnot };

std::string to_string(GateKind kind);
GateKind gate_kind_from_string(const std::string& name);

struct GateSpec {
  GateKind kind = GateKind::kRotZ;
  int target = 0;
  std::optional<int> control;
  std::optional<int> param_index;

  static GateSpec rot_z(int target, int param) { return {GateKind::kRotZ, target, std::nullopt, param}; }
  static GateSpec rot_y(int target, int param) { return {GateKind::kRotY, target, std::nullopt, param}; }
  static GateSpec cnot(int control, int target) { return {GateKind::kCnot, target, control, std::nullopt}; }

  bool operator==(const GateSpec&) const = default;
};

/// A depolarising channel inserted after the first `position` gates.
struct NoisePoint {
  std::size_t position = 0;
  double p = 0.0;

  bool operator==(const NoisePoint&) const = default;
};

struct LayeredCircuit {
  int num_qubits = 1;
  std::vector<GateSpec> gates;
  std::vector<NoisePoint> noise_points;
  int param_count = 0;

  Eigen::Index dim() const { return Eigen::Index{1} << num_qubits; }

  /// Throws DomainError / DimensionError when a structural invariant is broken.
  void validate() const;

  /// 1 - prod(1 - p_i) over all noise points.
  double composed_noise() const;

  /// Copy with the noise points replaced.
  LayeredCircuit with_noise(std::vector<NoisePoint> points) const;

  bool operator==(const LayeredCircuit&) const = default;
};

/// A unit-norm real vector and its amplitude-encoded state.
struct EncodedInput {
  RealVector classical_vector;
  PureState state;

  DensityMatrix density() const { return DensityMatrix::from_pure(state); }
};

ComplexMatrix rot_z_matrix(double angle);
ComplexMatrix rot_y_matrix(double angle);

/// Full-register unitary of one gate; qubit 0 is the most significant bit.
ComplexMatrix gate_unitary(const GateSpec& gate, int num_qubits, const RealVector& theta);

/// Product of every gate unitary, ignoring noise.
ComplexMatrix circuit_unitary(const LayeredCircuit& circuit, const RealVector& theta);

/// Orthogonal matrix whose first column is x (Gram-Schmidt completion
/// against the standard basis), so that V(x)|0...0> = x.
ComplexMatrix state_preparation_unitary(const RealVector& x);

EncodedInput amplitude_encode(const RealVector& x, int num_qubits);

/// p I/D + (1 - p) rho.
DensityMatrix depolarize(const DensityMatrix& rho, double p);

/// 1 - prod(1 - p_i); every p_i must lie in [0, 1).
double compose_noise(std::span<const double> p_list);

/// Per layer: Rz Ry Rz on every qubit (three parameters each) then a CNOT
/// ladder 0->1->...->n-1. param_count = 3 * num_qubits * layers.
LayeredCircuit build_qnn_ansatz(int num_qubits, int layers);

/// Applies gates in order and the depolarising channel at each noise point.
DensityMatrix run_circuit(const DensityMatrix& input, const LayeredCircuit& circuit, const RealVector& theta);

/// Tr(Pi_0 rho_out) with Pi_0 = |0...0><0...0|, where rho_out is the
/// amplitude-encoded x propagated through `kernel_circuit` (the W ansatz).
double kernel_overlap_probability(const RealVector& x, const RealVector& theta, const LayeredCircuit& kernel_circuit);

void to_json(nlohmann::json& j, const LayeredCircuit& circuit);
void from_json(const nlohmann::json& j, LayeredCircuit& circuit);

}  // namespace qdp
