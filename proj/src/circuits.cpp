#include "qdp/circuits.hpp"

#include <cmath>
#include <set>

#include <nlohmann/json.hpp>

namespace qdp {

std::string to_string(GateKind kind) {
  switch (kind) {
    case GateKind::kRotZ:
      return "rot_z";
    case GateKind::kRotY:
      return "rot_y";
    case GateKind::kCnot:
      return "cnot";
  }
  return "unknown";
}

GateKind gate_kind_from_string(const std::string& name) {
  if (name == "rot_z") return GateKind::kRotZ;
  if (name == "rot_y") return GateKind::kRotY;
  if (name == "cnot") return GateKind::kCnot;
  throw SchemaError("unknown gate kind '" + name + "'");
}

void LayeredCircuit::validate() const {
  if (num_qubits < 1 || num_qubits > 6) {
    throw DimensionError("circuit must have between 1 and 6 qubits");
  }
  if (param_count < 0) throw DomainError("negative parameter count");
  std::set<int> used;
  for (const auto& g : gates) {
    if (g.target < 0 || g.target >= num_qubits) throw DimensionError("gate target out of range");
    if (g.kind == GateKind::kCnot) {
      if (!g.control || g.param_index) throw DomainError("cnot needs a control and no parameter");
      if (*g.control < 0 || *g.control >= num_qubits) throw DimensionError("cnot control out of range");
      if (*g.control == g.target) throw DomainError("cnot control equals target");
    } else {
      if (g.control || !g.param_index) throw DomainError("rotation needs a parameter and no control");
      if (*g.param_index < 0 || *g.param_index >= param_count) {
        throw DomainError("rotation parameter index out of range");
      }
      used.insert(*g.param_index);
    }
  }
  if (static_cast<int>(used.size()) != param_count) {
    throw DomainError("some circuit parameters are never used");
  }
  for (const auto& n : noise_points) {
    if (n.position > gates.size()) throw DomainError("noise position beyond the gate list");
    if (!(n.p >= 0.0 && n.p < 1.0)) throw DomainError("noise parameter outside [0, 1)");
  }
}

double LayeredCircuit::composed_noise() const {
  std::vector<double> ps;
  ps.reserve(noise_points.size());
  for (const auto& n : noise_points) ps.push_back(n.p);
  return compose_noise(ps);
}

LayeredCircuit LayeredCircuit::with_noise(std::vector<NoisePoint> points) const {
  LayeredCircuit out = *this;
  out.noise_points = std::move(points);
  out.validate();
  return out;
}

ComplexMatrix rot_z_matrix(double angle) {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(0, 0) = std::polar(1.0, -angle / 2);
  m(1, 1) = std::polar(1.0, angle / 2);
  return m;
}

ComplexMatrix rot_y_matrix(double angle) {
  const double c = std::cos(angle / 2);
  const double s = std::sin(angle / 2);
  ComplexMatrix m(2, 2);
  m << c, -s, s, c;
  return m;
}

namespace {

ComplexMatrix embed_single(const ComplexMatrix& g, int target, int num_qubits) {
  const Eigen::Index before = Eigen::Index{1} << target;
  const Eigen::Index after = Eigen::Index{1} << (num_qubits - target - 1);
  const ComplexMatrix left = ComplexMatrix::Identity(before, before);
  const ComplexMatrix right = ComplexMatrix::Identity(after, after);
  return tensor_product<double>(tensor_product<double>(left, g), right);
}

ComplexMatrix cnot_matrix(int control, int target, int num_qubits) {
  const Eigen::Index dim = Eigen::Index{1} << num_qubits;
  const Eigen::Index cmask = Eigen::Index{1} << (num_qubits - 1 - control);
  const Eigen::Index tmask = Eigen::Index{1} << (num_qubits - 1 - target);
  ComplexMatrix m = ComplexMatrix::Zero(dim, dim);
  for (Eigen::Index col = 0; col < dim; ++col) {
    const Eigen::Index row = (col & cmask) ? (col ^ tmask) : col;
    m(row, col) = 1.0;
  }
  return m;
}

void check_theta(const LayeredCircuit& circuit, const RealVector& theta) {
  if (theta.size() != circuit.param_count) {
    throw DimensionError("parameter vector has length " + std::to_string(theta.size()) + ", circuit expects " +
                         std::to_string(circuit.param_count));
  }
}

}  // namespace

ComplexMatrix gate_unitary(const GateSpec& gate, int num_qubits, const RealVector& theta) {
  switch (gate.kind) {
    case GateKind::kRotZ:
      return embed_single(rot_z_matrix(theta(*gate.param_index)), gate.target, num_qubits);
    case GateKind::kRotY:
      return embed_single(rot_y_matrix(theta(*gate.param_index)), gate.target, num_qubits);
    case GateKind::kCnot:
      return cnot_matrix(*gate.control, gate.target, num_qubits);
  }
  throw DomainError("unknown gate");
}

ComplexMatrix circuit_unitary(const LayeredCircuit& circuit, const RealVector& theta) {
  check_theta(circuit, theta);
  ComplexMatrix u = ComplexMatrix::Identity(circuit.dim(), circuit.dim());
  for (const auto& g : circuit.gates) u = gate_unitary(g, circuit.num_qubits, theta) * u;
  return u;
}

ComplexMatrix state_preparation_unitary(const RealVector& x) {
  const Eigen::Index dim = x.size();
  Eigen::MatrixXd basis = Eigen::MatrixXd::Zero(dim, dim);
  basis.col(0) = x;
  Eigen::Index filled = 1;
  for (Eigen::Index e = 0; e < dim && filled < dim; ++e) {
    Eigen::VectorXd v = Eigen::VectorXd::Unit(dim, e);
    // Two passes of modified Gram-Schmidt keep the columns orthonormal to
    // machine precision.
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index k = 0; k < filled; ++k) v -= basis.col(k).dot(v) * basis.col(k);
    }
    const double norm = v.norm();
    if (norm > 1e-6) basis.col(filled++) = v / norm;
  }
  return basis.cast<Complex<double>>();
}

EncodedInput amplitude_encode(const RealVector& x, int num_qubits) {
  if (num_qubits < 1 || x.size() != (Eigen::Index{1} << num_qubits)) {
    throw DimensionError("input of length " + std::to_string(x.size()) + " cannot be encoded on " +
                         std::to_string(num_qubits) + " qubits");
  }
  if (std::abs(x.norm() - 1.0) > tol::kUnitNorm) {
    throw DomainError("input vector is not unit norm (|x| = " + std::to_string(x.norm()) + ")");
  }
  // Exact renormalisation so the PureState invariant holds at 1e-10.
  const RealVector unit = x / x.norm();
  return EncodedInput{x, PureState(unit.cast<Complex<double>>())};
}

DensityMatrix depolarize(const DensityMatrix& rho, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("depolarising parameter outside [0, 1]");
  const Eigen::Index d = rho.dim();
  ComplexMatrix out = (1.0 - p) * rho.matrix();
  out.diagonal().array() += p / static_cast<double>(d);
  return DensityMatrix::trusted(std::move(out));
}

double compose_noise(std::span<const double> p_list) {
  double keep = 1.0;
  for (const double p : p_list) {
    if (!(p >= 0.0 && p < 1.0)) throw DomainError("noise parameter outside [0, 1)");
    keep *= 1.0 - p;
  }
  return 1.0 - keep;
}

LayeredCircuit build_qnn_ansatz(int num_qubits, int layers) {
  if (layers < 1) throw DomainError("ansatz needs at least one layer");
  LayeredCircuit c;
  c.num_qubits = num_qubits;
  int param = 0;
  for (int l = 0; l < layers; ++l) {
    for (int q = 0; q < num_qubits; ++q) {
      // Rz(a) Ry(b) Rz(c) as an operator product: Rz(c) acts first.
      c.gates.push_back(GateSpec::rot_z(q, param + 2));
      c.gates.push_back(GateSpec::rot_y(q, param + 1));
      c.gates.push_back(GateSpec::rot_z(q, param));
      param += 3;
    }
    for (int q = 0; q + 1 < num_qubits; ++q) c.gates.push_back(GateSpec::cnot(q, q + 1));
  }
  c.param_count = param;
  c.validate();
  return c;
}

DensityMatrix run_circuit(const DensityMatrix& input, const LayeredCircuit& circuit, const RealVector& theta) {
  check_theta(circuit, theta);
  if (input.dim() != circuit.dim()) {
    throw DimensionError("input state dimension " + std::to_string(input.dim()) + " does not match a " +
                         std::to_string(circuit.num_qubits) + "-qubit circuit");
  }
  DensityMatrix rho = input;
  ComplexMatrix pending = ComplexMatrix::Identity(circuit.dim(), circuit.dim());
  bool have_pending = false;
  auto flush = [&] {
    if (have_pending) {
      rho = apply_unitary<double>(pending, rho);
      pending.setIdentity();
      have_pending = false;
    }
  };
  auto apply_noise_at = [&](std::size_t position) {
    for (const auto& n : circuit.noise_points) {
      if (n.position == position) {
        flush();
        rho = depolarize(rho, n.p);
      }
    }
  };

  apply_noise_at(0);
  for (std::size_t i = 0; i < circuit.gates.size(); ++i) {
    pending = gate_unitary(circuit.gates[i], circuit.num_qubits, theta) * pending;
    have_pending = true;
    apply_noise_at(i + 1);
  }
  flush();
  return rho;
}

double kernel_overlap_probability(const RealVector& x, const RealVector& theta, const LayeredCircuit& kernel_circuit) {
  const EncodedInput encoded = amplitude_encode(x, kernel_circuit.num_qubits);
  const DensityMatrix out = run_circuit(encoded.density(), kernel_circuit, theta);
  return std::clamp(out(0, 0).real(), 0.0, 1.0);
}

void to_json(nlohmann::json& j, const LayeredCircuit& circuit) {
  nlohmann::json gates = nlohmann::json::array();
  for (const auto& g : circuit.gates) {
    gates.push_back({{"kind", to_string(g.kind)},
                     {"target", g.target},
                     {"control", g.control ? nlohmann::json(*g.control) : nlohmann::json(nullptr)},
                     {"param_index", g.param_index ? nlohmann::json(*g.param_index) : nlohmann::json(nullptr)}});
  }
  nlohmann::json noise = nlohmann::json::array();
  for (const auto& n : circuit.noise_points) noise.push_back({{"position", n.position}, {"p", n.p}});
  j = {{"num_qubits", circuit.num_qubits},
       {"param_count", circuit.param_count},
       {"gates", std::move(gates)},
       {"noise_points", std::move(noise)}};
}

void from_json(const nlohmann::json& j, LayeredCircuit& circuit) {
  try {
    LayeredCircuit c;
    c.num_qubits = j.at("num_qubits").get<int>();
    for (const auto& g : j.at("gates")) {
      GateSpec spec;
      spec.kind = gate_kind_from_string(g.at("kind").get<std::string>());
      spec.target = g.at("target").get<int>();
      if (g.contains("control") && !g["control"].is_null()) spec.control = g["control"].get<int>();
      if (g.contains("param_index") && !g["param_index"].is_null()) spec.param_index = g["param_index"].get<int>();
      c.gates.push_back(spec);
    }
    if (j.contains("noise_points")) {
      for (const auto& n : j["noise_points"]) {
        c.noise_points.push_back({n.at("position").get<std::size_t>(), n.at("p").get<double>()});
      }
    }
    if (j.contains("param_count")) {
      c.param_count = j["param_count"].get<int>();
    } else {
      int max_index = -1;
      for (const auto& g : c.gates) {
        if (g.param_index) max_index = std::max(max_index, *g.param_index);
      }
      c.param_count = max_index + 1;
    }
    c.validate();
    circuit = std::move(c);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("circuit: ") + e.what());
  }
}

}  // namespace qdp
