#pragma once

// The `qdp` command-line driver: train, certify, attack and sweep.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "qdp/model.hpp"

namespace qdp::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

inline constexpr int kOutputSchemaVersion = 1;

/// Missing or conflicting configuration; maps to exit code 2.
class UsageError : public Error {
 public:
  using Error::Error;
};

struct CertifySetting {
  double p = 0;
  double tau_d = 0;
};

/// Effective configuration of one run: the JSON config file with command
/// line flags applied on top.
struct RunConfig {
  std::string subcommand;
  std::string dataset;
  std::string model;  // defaults to <output_dir>/model.json
  std::string output_dir = "out";
  std::uint64_t seed = 0;
  int jobs = 1;

  TrainingConfig train;

  std::optional<double> p;
  std::optional<std::vector<double>> p_list;
  std::optional<double> tau_d;
  std::vector<CertifySetting> settings;
  std::string mode = "infinite";  // or "finite"
  std::optional<double> zeta;
  std::optional<std::uint64_t> shots;

  std::optional<double> attack_radius;
  int attack_steps = 50;
  bool dump_traces = true;

  std::vector<double> sweep_p_values{0.0, 0.5, 0.8};
  std::vector<double> sweep_l_grid{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7};
  std::uint64_t n_samp = 300;
  std::vector<std::uint64_t> sweep_seeds{0, 1, 2, 3, 4};

  /// p, or the composition of p_list; nullopt when neither is set.
  std::optional<double> effective_p() const;
  std::string model_path() const;

  /// Throws UsageError when a field required by `subcommand` is missing
  /// or two fields conflict.
  void validate() const;
};

void to_json(nlohmann::json& j, const RunConfig& config);
/// Reads every known field; unknown fields are rejected as usage errors.
RunConfig config_from_json(const nlohmann::json& j);

int cmd_train(const RunConfig& config, std::ostream& out);
int cmd_certify(const RunConfig& config, std::ostream& out);
int cmd_attack(const RunConfig& config, std::ostream& out);
int cmd_sweep(const RunConfig& config, std::ostream& out);

/// Parses `args` (args[0] is the program name), dispatches and maps
/// errors to exit codes: 0 success, 1 runtime failure, 2 usage error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qdp::cli
