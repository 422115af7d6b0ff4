#include "qdp/model.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace qdp {

bool operator==(const ModelArtifact& a, const ModelArtifact& b) {
  return a.circuit == b.circuit && a.theta.size() == b.theta.size() && a.theta == b.theta && a.config == b.config &&
         a.loss_trace == b.loss_trace;
}

Povm qnn_povm() { return Povm::computational(1, 0); }

QnnForward::QnnForward(const LayeredCircuit& circuit, const RealVector& theta, double p)
    : num_qubits_(circuit.num_qubits), unitary_(circuit_unitary(circuit, theta)), p_(p),
      povm_(embed_povm<double>(qnn_povm(), circuit.dim())) {
  if (!(p >= 0.0 && p < 1.0)) throw DomainError("noise parameter outside [0, 1)");
}

DensityMatrix QnnForward::output_state(const DensityMatrix& input) const {
  DensityMatrix out = apply_unitary<double>(unitary_, input);
  return p_ > 0.0 ? depolarize(out, p_) : out;
}

ScoreVector QnnForward::scores(const DensityMatrix& input) const {
  const DensityMatrix out = output_state(input);
  RealVector y(static_cast<Eigen::Index>(povm_.size()));
  for (std::size_t k = 0; k < povm_.size(); ++k) {
    y(static_cast<Eigen::Index>(k)) = measure_probability<double>(povm_[k], out);
  }
  return ScoreVector(std::move(y));
}

ScoreVector QnnForward::scores(const RealVector& x) const {
  return scores(amplitude_encode(x, num_qubits_).density());
}

ScoreVector qnn_scores(const ModelArtifact& model, const RealVector& x, double p) {
  return QnnForward(model.circuit, model.theta, p).scores(x);
}

int qnn_predict(const ModelArtifact& model, const RealVector& x, double p) {
  return predict(qnn_scores(model, x, p));
}

void to_json(nlohmann::json& j, const ModelArtifact& model) {
  nlohmann::json trace = nlohmann::json::array();
  for (const auto& r : model.loss_trace) {
    trace.push_back({{"epoch", r.epoch},
                     {"loss", r.loss},
                     {"train_accuracy", r.train_accuracy},
                     {"test_accuracy", r.test_accuracy}});
  }
  j = {{"version", kModelSchemaVersion},
       {"circuit", model.circuit},
       {"theta", std::vector<double>(model.theta.data(), model.theta.data() + model.theta.size())},
       {"config",
        {{"epochs", model.config.epochs},
         {"learning_rate", model.config.learning_rate},
         {"layers", model.config.layers},
         {"h", model.config.h},
         {"seed", model.config.seed},
         {"stochastic", model.config.stochastic}}},
       {"loss_trace", std::move(trace)}};
}

namespace {

const nlohmann::json& field(const nlohmann::json& j, const char* name, const std::string& where) {
  if (!j.is_object() || !j.contains(name)) throw SchemaError(where + ": missing field '" + name + "'");
  return j.at(name);
}

}  // namespace

void from_json(const nlohmann::json& j, ModelArtifact& model) {
  try {
    const auto& version = field(j, "version", "model");
    if (!version.is_number_integer() || version.get<int>() != kModelSchemaVersion) {
      throw SchemaError("model: unsupported version " + version.dump());
    }
    ModelArtifact m;
    m.circuit = field(j, "circuit", "model").get<LayeredCircuit>();
    const auto theta = field(j, "theta", "model").get<std::vector<double>>();
    m.theta = Eigen::Map<const RealVector>(theta.data(), static_cast<Eigen::Index>(theta.size()));
    if (m.theta.size() != m.circuit.param_count) {
      throw SchemaError("model: theta has " + std::to_string(m.theta.size()) + " entries, circuit expects " +
                        std::to_string(m.circuit.param_count));
    }
    const auto& cfg = field(j, "config", "model");
    m.config.epochs = field(cfg, "epochs", "config").get<int>();
    m.config.learning_rate = field(cfg, "learning_rate", "config").get<double>();
    m.config.layers = field(cfg, "layers", "config").get<int>();
    m.config.h = field(cfg, "h", "config").get<double>();
    m.config.seed = field(cfg, "seed", "config").get<std::uint64_t>();
    m.config.stochastic = field(cfg, "stochastic", "config").get<bool>();
    for (const auto& r : field(j, "loss_trace", "model")) {
      m.loss_trace.push_back({field(r, "epoch", "loss_trace").get<int>(), field(r, "loss", "loss_trace").get<double>(),
                              field(r, "train_accuracy", "loss_trace").get<double>(),
                              field(r, "test_accuracy", "loss_trace").get<double>()});
    }
    model = std::move(m);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("model: ") + e.what());
  }
}

std::string dump_json(const nlohmann::json& j) { return j.dump(2) + "\n"; }

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write '" + tmp.string() + "'");
    out << contents;
    if (!out) throw DataError("write to '" + tmp.string() + "' failed");
  }
  std::filesystem::rename(tmp, path);
}

void save_model(const ModelArtifact& model, const std::filesystem::path& path) {
  write_file_atomic(path, dump_json(nlohmann::json(model)));
}

ModelArtifact load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open model '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(std::string("model: ") + e.what());
  }
  return j.get<ModelArtifact>();
}

}  // namespace qdp
