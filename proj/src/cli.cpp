#include "qdp/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "qdp/attack.hpp"
#include "qdp/certify.hpp"
#include "qdp/parallel.hpp"
#include "qdp/random.hpp"
#include "qdp/train.hpp"

namespace qdp::cli {

namespace fs = std::filesystem;
using nlohmann::json;

std::optional<double> RunConfig::effective_p() const {
  if (p_list) return compose_noise(*p_list);
  return p;
}

std::string RunConfig::model_path() const {
  return model.empty() ? (fs::path(output_dir) / "model.json").string() : model;
}

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw UsageError(message);
}

void check_p(double p, const std::string& what) {
  require(p >= 0.0 && p < 1.0, what + " must lie in [0, 1)");
}

}  // namespace

void RunConfig::validate() const {
  static const std::set<std::string> known{"train", "certify", "attack", "sweep"};
  require(known.count(subcommand) == 1, "unknown subcommand '" + subcommand + "'");
  require(!dataset.empty(), "a dataset path is required (--dataset or \"dataset\")");
  require(!output_dir.empty(), "an output directory is required");
  require(jobs >= 1, "--jobs must be at least 1");
  require(!(p && p_list), "p and p_list are mutually exclusive");
  if (p) check_p(*p, "p");
  if (p_list) {
    for (const double v : *p_list) check_p(v, "every p_list entry");
  }
  if (tau_d) require(*tau_d >= 0.0 && *tau_d <= 1.0, "tau_d must lie in [0, 1]");
  require(mode == "infinite" || mode == "finite", "mode must be \"infinite\" or \"finite\"");

  if (subcommand == "train") {
    require(train.epochs >= 0, "epochs must be non-negative");
    require(train.learning_rate > 0.0, "learning_rate must be positive");
    require(train.layers >= 1, "layers must be at least 1");
    require(train.h > 0.0, "h must be positive");
  } else if (subcommand == "certify") {
    require(!settings.empty() || (effective_p() && tau_d),
            "certify needs \"settings\" or both a noise level (p or p_list) and tau_d");
    for (const auto& s : settings) {
      check_p(s.p, "setting p");
      require(s.tau_d >= 0.0 && s.tau_d <= 1.0, "setting tau_d must lie in [0, 1]");
    }
    if (mode == "finite") {
      require(shots.has_value(), "finite mode needs a shots count");
      require(*shots >= 1, "shots must be at least 1");
      require(zeta.has_value(), "finite mode needs zeta");
      require(*zeta > 0.0 && *zeta < 0.5, "zeta must lie in (0, 0.5)");
    }
  } else if (subcommand == "attack") {
    require(attack_radius.has_value(), "attack needs a radius (--L or attack.L)");
    require(*attack_radius >= 0.0, "attack radius must be non-negative");
    require(attack_steps >= 1, "attack needs at least one step");
    if (mode == "finite") require(shots.has_value() && *shots >= 1, "finite mode needs a shots count");
  } else if (subcommand == "sweep") {
    require(!sweep_p_values.empty(), "sweep needs at least one p value");
    require(!sweep_l_grid.empty(), "sweep needs a non-empty L grid");
    require(!sweep_seeds.empty(), "sweep needs at least one seed");
    require(attack_steps >= 1, "attack needs at least one step");
    for (const double v : sweep_p_values) check_p(v, "sweep p value");
    for (const double l : sweep_l_grid) require(l >= 0.0, "L grid entries must be non-negative");
  }
}

void to_json(json& j, const RunConfig& c) {
  j = {{"subcommand", c.subcommand},
       {"dataset", c.dataset},
       {"model", c.model_path()},
       {"output_dir", c.output_dir},
       {"seed", c.seed},
       {"jobs", c.jobs},
       {"train",
        {{"epochs", c.train.epochs},
         {"learning_rate", c.train.learning_rate},
         {"layers", c.train.layers},
         {"h", c.train.h},
         {"stochastic", c.train.stochastic}}},
       {"mode", c.mode},
       {"attack", {{"T", c.attack_steps}, {"dump_traces", c.dump_traces}}},
       {"sweep",
        {{"p_values", c.sweep_p_values}, {"L_grid", c.sweep_l_grid}, {"n_samp", c.n_samp}, {"seeds", c.sweep_seeds}}}};
  if (c.p) j["p"] = *c.p;
  if (c.p_list) j["p_list"] = *c.p_list;
  if (c.tau_d) j["tau_d"] = *c.tau_d;
  if (c.zeta) j["zeta"] = *c.zeta;
  if (c.shots) j["shots"] = *c.shots;
  if (c.attack_radius) j["attack"]["L"] = *c.attack_radius;
  if (!c.settings.empty()) {
    json s = json::array();
    for (const auto& st : c.settings) s.push_back({{"p", st.p}, {"tau_d", st.tau_d}});
    j["settings"] = std::move(s);
  }
}

namespace {

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    require(allowed.count(key) == 1, where + ": unknown field '" + key + "'");
  }
}

template <typename T>
void read(const json& j, const char* key, T& into) {
  if (j.contains(key)) into = j.at(key).get<T>();
}

template <typename T>
void read(const json& j, const char* key, std::optional<T>& into) {
  if (j.contains(key) && !j.at(key).is_null()) into = j.at(key).get<T>();
}

}  // namespace

RunConfig config_from_json(const json& j) {
  require(j.is_object(), "config must be a JSON object");
  reject_unknown(j,
                 {"subcommand", "dataset", "model", "output_dir", "seed", "jobs", "train", "p", "p_list", "tau_d",
                  "settings", "mode", "zeta", "shots", "attack", "sweep", "version"},
                 "config");
  RunConfig c;
  try {
    read(j, "subcommand", c.subcommand);
    read(j, "dataset", c.dataset);
    read(j, "model", c.model);
    read(j, "output_dir", c.output_dir);
    read(j, "seed", c.seed);
    read(j, "jobs", c.jobs);
    if (j.contains("train")) {
      const json& t = j.at("train");
      reject_unknown(t, {"epochs", "learning_rate", "layers", "h", "stochastic"}, "train");
      read(t, "epochs", c.train.epochs);
      read(t, "learning_rate", c.train.learning_rate);
      read(t, "layers", c.train.layers);
      read(t, "h", c.train.h);
      read(t, "stochastic", c.train.stochastic);
    }
    read(j, "p", c.p);
    read(j, "p_list", c.p_list);
    read(j, "tau_d", c.tau_d);
    if (j.contains("settings")) {
      for (const auto& s : j.at("settings")) {
        reject_unknown(s, {"p", "tau_d"}, "settings");
        c.settings.push_back({s.at("p").get<double>(), s.at("tau_d").get<double>()});
      }
    }
    read(j, "mode", c.mode);
    read(j, "zeta", c.zeta);
    read(j, "shots", c.shots);
    if (j.contains("attack")) {
      const json& a = j.at("attack");
      reject_unknown(a, {"L", "T", "dump_traces"}, "attack");
      read(a, "L", c.attack_radius);
      read(a, "T", c.attack_steps);
      read(a, "dump_traces", c.dump_traces);
    }
    if (j.contains("sweep")) {
      const json& s = j.at("sweep");
      reject_unknown(s, {"p_values", "L_grid", "n_samp", "seeds"}, "sweep");
      read(s, "p_values", c.sweep_p_values);
      read(s, "L_grid", c.sweep_l_grid);
      read(s, "n_samp", c.n_samp);
      read(s, "seeds", c.sweep_seeds);
    }
  } catch (const json::exception& e) {
    throw UsageError(std::string("config: ") + e.what());
  }
  return c;
}

namespace {

void echo_config(const RunConfig& config) {
  write_file_atomic(fs::path(config.output_dir) / (config.subcommand + ".config.json"), dump_json(json(config)));
}

Dataset load_split(const RunConfig& config, std::uint64_t split_seed) {
  return preprocess(load_iris(config.dataset), split_seed);
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::vector<double> as_vector(const RealVector& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

int cmd_train(const RunConfig& config, std::ostream& out) {
  const Dataset data = load_split(config, config.seed);
  TrainingConfig tc = config.train;
  tc.seed = config.seed;
  const ModelArtifact model = train(data, tc);
  save_model(model, config.model_path());

  std::ostringstream csv;
  csv << "epoch,loss,train_acc,test_acc\n";
  char buf[160];
  for (const auto& r : model.loss_trace) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g\n", r.epoch, r.loss, r.train_accuracy, r.test_accuracy);
    csv << buf;
  }
  write_file_atomic(fs::path(config.output_dir) / "loss_trace.csv", csv.str());

  const auto& last = model.loss_trace.back();
  out << "model written to " << config.model_path() << "\n"
      << "final loss " << fmt(last.loss) << ", train accuracy " << fmt(last.train_accuracy) << ", test accuracy "
      << fmt(last.test_accuracy) << "\n";
  return kExitOk;
}

int cmd_certify(const RunConfig& config, std::ostream& out) {
  const ModelArtifact model = load_model(config.model_path());
  const Dataset data = load_split(config, model.config.seed);
  std::vector<CertifySetting> settings = config.settings;
  if (settings.empty()) settings.push_back({*config.effective_p(), *config.tau_d});
  const bool finite = config.mode == "finite";

  json doc = {{"version", kOutputSchemaVersion}, {"model", config.model_path()}, {"mode", config.mode}};
  json all = json::array();
  for (std::size_t si = 0; si < settings.size(); ++si) {
    const CertifySetting s = settings[si];
    const std::uint64_t shot_root = derive_seed(config.seed, "shots", si);
    const auto certs = parallel_map(data.test.size(), config.jobs, [&](std::size_t i) {
      const Example& ex = data.test[i];
      const ScoreVector scores = qnn_scores(model, ex.features, s.p);
      if (!finite) return certify_infinite(scores, predict(scores), s.p, s.tau_d, kQnnMeasuredDim);
      const ShotEstimate est = sample_scores(scores, *config.shots, derive_seed(shot_root, "example", i));
      return certify_finite(est, predict(est.estimates()), *config.zeta, s.p, s.tau_d, kQnnMeasuredDim);
    });
    json entries = json::array();
    std::size_t certified = 0;
    for (std::size_t i = 0; i < certs.size(); ++i) {
      json e = certs[i];
      e["example"] = i;
      e["label"] = data.test[i].label;
      entries.push_back(std::move(e));
      if (certs[i].certified) ++certified;
    }
    json block = {{"p", s.p}, {"tau_d", s.tau_d}, {"certified", certified}, {"total", certs.size()},
                  {"certificates", std::move(entries)}};
    if (s.p > 0.0) {
      const PrivacyBudget b = epsilon_budget(s.p, s.tau_d, kQnnMeasuredDim);
      block["exp_epsilon"] = b.exp_epsilon;
      block["threshold"] = b.exp_epsilon * b.exp_epsilon;
      out << "p=" << fmt(s.p) << " tau_d=" << fmt(s.tau_d) << " e^eps=" << fmt(b.exp_epsilon)
          << " threshold=" << fmt(b.exp_epsilon * b.exp_epsilon) << ": certified " << certified << "/"
          << certs.size() << "\n";
    } else {
      out << "p=0 tau_d=" << fmt(s.tau_d) << ": not-certifiable: no noise (" << certs.size() << " examples)\n";
    }
    all.push_back(std::move(block));
  }
  doc["settings"] = std::move(all);
  write_file_atomic(fs::path(config.output_dir) / "certificates.json", dump_json(doc));
  return kExitOk;
}

int cmd_attack(const RunConfig& config, std::ostream& out) {
  const ModelArtifact model = load_model(config.model_path());
  const Dataset data = load_split(config, model.config.seed);
  const double p = config.effective_p().value_or(0.0);
  const std::uint64_t shots = config.mode == "finite" ? *config.shots : 0;
  AttackConfig ac;
  ac.radius = *config.attack_radius;
  ac.steps = config.attack_steps;

  struct Outcome {
    AttackTrace trace;
    int clean_predicted = 0;
    RealVector final_scores;
    std::optional<RobustnessCertificate> certificate;
  };
  const auto outcomes = parallel_map(data.test.size(), config.jobs, [&](std::size_t i) {
    const Example& ex = data.test[i];
    Outcome o;
    const ScoreVector clean = qnn_scores(model, ex.features, p);
    o.clean_predicted = predict(clean);
    o.trace = ifgsm(model, ex.features, ex.label, ac, p, shots, derive_seed(config.seed, "attack", i));
    o.final_scores = qnn_scores(model, o.trace.iterates.back().x, p).values();
    if (config.tau_d && p > 0.0) {
      o.certificate = certify_infinite(clean, o.clean_predicted, p, *config.tau_d, kQnnMeasuredDim);
    }
    return o;
  });

  json examples = json::array();
  std::string traces;
  std::size_t successes = 0, certified = 0, certified_successes = 0;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const Outcome& o = outcomes[i];
    const AttackIterate& last = o.trace.iterates.back();
    json e = {{"example", i},
              {"label", data.test[i].label},
              {"clean_predicted", o.clean_predicted},
              {"success", o.trace.success},
              {"final_predicted", last.predicted},
              {"final_scores", as_vector(o.final_scores)},
              {"l2", last.l2},
              {"trace", last.trace}};
    if (o.certificate) {
      e["certified"] = o.certificate->certified;
      if (o.certificate->certified) {
        ++certified;
        if (o.trace.success) ++certified_successes;
      }
    }
    if (o.trace.success) ++successes;
    examples.push_back(std::move(e));
    if (config.dump_traces) traces += trace_jsonl(o.trace, i);
  }
  json doc = {{"version", kOutputSchemaVersion},
              {"model", config.model_path()},
              {"p", p},
              {"L", ac.radius},
              {"T", ac.steps},
              {"shots", shots},
              {"successes", successes},
              {"total", outcomes.size()},
              {"examples", std::move(examples)}};
  if (config.tau_d) {
    doc["tau_d"] = *config.tau_d;
    doc["certified"] = certified;
    doc["certified_successes"] = certified_successes;
  }
  write_file_atomic(fs::path(config.output_dir) / "attack_report.json", dump_json(doc));
  if (config.dump_traces) write_file_atomic(fs::path(config.output_dir) / "attack_traces.jsonl", traces);

  out << "p=" << fmt(p) << " L=" << fmt(ac.radius) << ": " << successes << "/" << outcomes.size()
      << " attacks changed the label";
  if (config.tau_d && p > 0.0) {
    out << "; " << certified << " certified at tau_d=" << fmt(*config.tau_d) << ", " << certified_successes
        << " of them flipped";
  }
  out << "\n";
  return kExitOk;
}

int cmd_sweep(const RunConfig& config, std::ostream& out) {
  const ModelArtifact model = load_model(config.model_path());
  const Dataset data = load_split(config, model.config.seed);
  AttackConfig base;
  base.steps = config.attack_steps;
  const auto rows = sweep(model, data.test, config.sweep_p_values, config.sweep_l_grid, base, config.n_samp,
                          config.sweep_seeds, config.jobs);
  write_file_atomic(fs::path(config.output_dir) / "sweep.csv", sweep_csv(rows));

  // gnuplot layout: one block per p, separated by blank lines.
  std::ostringstream dat;
  dat << "# p L mean_acc\n";
  const auto means = average_over_seeds(rows);
  char buf[128];
  for (std::size_t i = 0; i < means.size(); ++i) {
    if (i > 0 && means[i].p != means[i - 1].p) dat << "\n\n";
    std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g\n", means[i].p, means[i].L, means[i].accuracy);
    dat << buf;
    out << "p=" << fmt(means[i].p) << " L=" << fmt(means[i].L) << " acc=" << fmt(means[i].accuracy) << "\n";
  }
  write_file_atomic(fs::path(config.output_dir) / "sweep_mean.dat", dat.str());
  return kExitOk;
}

namespace {

struct Overrides {
  std::string config_path;
  std::optional<std::string> dataset, model, output_dir, mode;
  std::optional<std::uint64_t> seed, shots, n_samp;
  std::optional<int> jobs, epochs, layers, steps;
  std::optional<double> lr, h, p, tau_d, zeta, radius;
  bool full_batch = false, no_traces = false;
  std::vector<double> p_list, p_values, l_grid;
  std::vector<std::uint64_t> seeds;
};

void add_options(CLI::App* sub, Overrides& o) {
  sub->add_option("--config", o.config_path, "JSON config file");
  sub->add_option("--dataset", o.dataset, "Iris CSV path");
  sub->add_option("--model", o.model, "model JSON path");
  sub->add_option("--out", o.output_dir, "output directory");
  sub->add_option("--seed", o.seed, "root seed");
  sub->add_option("--jobs", o.jobs, "worker threads");
  sub->add_option("--epochs", o.epochs);
  sub->add_option("--lr", o.lr, "learning rate");
  sub->add_option("--layers", o.layers);
  sub->add_option("--fd-step", o.h, "finite-difference step h");
  sub->add_flag("--full-batch", o.full_batch, "full-batch gradient descent");
  sub->add_option("--p", o.p, "depolarising noise");
  sub->add_option("--p-list", o.p_list, "noise per channel, composed")->delimiter(',');
  sub->add_option("--tau-d", o.tau_d, "trace-distance radius");
  sub->add_option("--mode", o.mode, "infinite or finite");
  sub->add_option("--zeta", o.zeta, "finite-sampling slack");
  sub->add_option("--shots", o.shots);
  sub->add_option("--L", o.radius, "attack l2 radius");
  sub->add_option("--T", o.steps, "attack iterations");
  sub->add_flag("--no-traces", o.no_traces, "skip the attack trace dump");
  sub->add_option("--p-values", o.p_values, "sweep noise levels")->delimiter(',');
  sub->add_option("--L-grid", o.l_grid, "sweep radii")->delimiter(',');
  sub->add_option("--n-samp", o.n_samp, "shots per sweep evaluation");
  sub->add_option("--seeds", o.seeds, "sweep replicate seeds")->delimiter(',');
}

RunConfig resolve(const std::string& subcommand, const Overrides& o, const CLI::App& sub) {
  RunConfig c;
  if (!o.config_path.empty()) {
    std::ifstream in(o.config_path);
    if (!in) throw DataError("cannot open config '" + o.config_path + "'");
    json j;
    try {
      in >> j;
    } catch (const json::parse_error& e) {
      throw UsageError(std::string("config: ") + e.what());
    }
    c = config_from_json(j);
  }
  c.subcommand = subcommand;
  for (const char* name : {"--p-list", "--p-values", "--L-grid", "--seeds"}) {
    for (const auto& raw : sub.get_option(name)->results()) {
      if (raw.empty()) throw UsageError(std::string(name) + " must not be empty");
    }
  }
  if (o.dataset) c.dataset = *o.dataset;
  if (o.model) c.model = *o.model;
  if (o.output_dir) c.output_dir = *o.output_dir;
  if (o.mode) c.mode = *o.mode;
  if (o.seed) c.seed = *o.seed;
  if (o.jobs) c.jobs = *o.jobs;
  if (o.epochs) c.train.epochs = *o.epochs;
  if (o.lr) c.train.learning_rate = *o.lr;
  if (o.layers) c.train.layers = *o.layers;
  if (o.h) c.train.h = *o.h;
  if (o.full_batch) c.train.stochastic = false;
  if (o.p) {
    c.p = *o.p;
    c.p_list.reset();
  }
  if (sub.count("--p-list") > 0) {
    c.p_list = o.p_list;
    c.p.reset();
  }
  if (o.p && sub.count("--p-list") > 0) throw UsageError("--p and --p-list are mutually exclusive");
  if (o.tau_d) c.tau_d = *o.tau_d;
  if (o.zeta) c.zeta = *o.zeta;
  if (o.shots) c.shots = *o.shots;
  if (o.radius) c.attack_radius = *o.radius;
  if (o.steps) c.attack_steps = *o.steps;
  if (o.no_traces) c.dump_traces = false;
  if (sub.count("--p-values") > 0) c.sweep_p_values = o.p_values;
  if (sub.count("--L-grid") > 0) c.sweep_l_grid = o.l_grid;
  if (o.n_samp) c.n_samp = *o.n_samp;
  if (sub.count("--seeds") > 0) c.sweep_seeds = o.seeds;
  // A (p, tau_d) pair on the command line replaces the config's settings list.
  if ((o.p || sub.count("--p-list") > 0) && o.tau_d) c.settings.clear();
  return c;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Depolarisation-noise robustness certification for quantum classifiers", "qdp"};
  app.require_subcommand(1);
  Overrides o;
  CLI::App* train_cmd = app.add_subcommand("train", "train the QNN on Iris");
  CLI::App* certify_cmd = app.add_subcommand("certify", "certify test examples");
  CLI::App* attack_cmd = app.add_subcommand("attack", "I-FGSM attack on test examples");
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "conventional accuracy over a (p, L) grid");
  for (CLI::App* sub : {train_cmd, certify_cmd, attack_cmd, sweep_cmd}) add_options(sub, o);

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  const CLI::App* sub = app.get_subcommands().front();
  try {
    const RunConfig config = resolve(sub->get_name(), o, *sub);
    config.validate();
    echo_config(config);
    if (config.subcommand == "train") return cmd_train(config, out);
    if (config.subcommand == "certify") return cmd_certify(config, out);
    if (config.subcommand == "attack") return cmd_attack(config, out);
    return cmd_sweep(config, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace qdp::cli
