// Command-line front end: parse, compile, sweep, learn, infer, verify, keydoor.
//
// Exit codes: 0 ok, 1 usage or input error, 2 verification violation.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ppabt/compiler.hpp"
#include "ppabt/experiments.hpp"
#include "ppabt/keydoor.hpp"
#include "ppabt/mission.hpp"
#include "ppabt/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ppabt;

namespace {

struct Options {
  std::string mission;
  std::string config;
  std::string policy;
  std::string out;
  std::string dot;
  std::uint64_t seed = 0;
  int trials = -1;
  int episodes = -1;
  int max_trace = -1;
  double discount = 0.9;
  int theta = -1;
  int fuzz = 0;
  unsigned workers = default_workers();
  bool irreversible = false;
  bool greedy = false;
  std::string mode = "both";
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  if (fs::path(path).has_parent_path()) fs::create_directories(fs::path(path).parent_path());
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << text;
}

json read_config(const Options& o) { return o.config.empty() ? json::object() : json::parse(read_file(o.config)); }

std::string mission_text(const Options& o, const char* fallback) { return o.mission.empty() ? fallback : read_file(o.mission); }

MissionDocument load_document(const Options& o) {
  if (o.mission.empty()) throw ConfigError("--mission is required");
  MissionDocument doc = parse_mission_document(read_file(o.mission));
  if (o.theta >= 0) doc.config.theta = o.theta;
  if (o.max_trace > 0) doc.config.t_task_max = o.max_trace;
  return doc;
}

template <class T>
void take(const json& j, const char* key, T& dst) {
  if (j.contains(key)) dst = j.at(key).get<T>();
}

int cmd_parse(const Options& o) {
  const MissionDocument doc = load_document(o);
  json j{{"mission", to_json(doc.expr)},
         {"canonical", format_mission(doc.expr)},
         {"formula", format(expand_mission(doc.expr))},
         {"theta", doc.config.theta},
         {"t_task_max", doc.config.t_task_max},
         {"alphabet", doc.config.alphabet.names()}};
  write_output(o.out, j.dump(2) + "\n");
  return 0;
}

int cmd_compile(const Options& o) {
  const MissionDocument doc = load_document(o);
  const BtTree tree = compile_mission(doc.expr, doc.config);
  write_output(o.out, to_json(tree).dump(2) + "\n");
  if (!o.dot.empty()) write_output(o.dot, export_dot(tree));
  return 0;
}

int cmd_sweep(const Options& o) {
  const json j = read_config(o);
  SweepConfig cfg;
  if (j.contains("grid")) cfg.grid = grid::grid_config_from_json(j["grid"]);
  take(j, "r_other", cfg.r_other);
  take(j, "r_good", cfg.r_good);
  take(j, "r_fire", cfg.r_fire);
  take(j, "p_in", cfg.p_in);
  take(j, "trials", cfg.trials);
  take(j, "gamma", cfg.gamma);
  take(j, "seed", cfg.seed);
  if (o.trials >= 0) cfg.trials = o.trials;
  if (o.max_trace > 0) cfg.max_trace = o.max_trace;
  if (o.theta >= 0) cfg.theta = o.theta;
  cfg.gamma = o.discount;
  if (o.seed) cfg.seed = o.seed;
  cfg.workers = o.workers;
  cfg.mission = mission_text(o, kC2hMission);
  write_output(o.out, sweep_csv(run_sweep(cfg)));
  return 0;
}

grid::Cell cell_from_json(const json& j) { return {j.at(0).get<int>(), j.at(1).get<int>()}; }

int cmd_learn(const Options& o) {
  const json j = read_config(o);
  LearningStudyConfig cfg;
  if (j.contains("grid")) cfg.grid = grid::grid_config_from_json(j["grid"]);
  if (j.contains("start")) cfg.start = cell_from_json(j["start"]);
  take(j, "p_in", cfg.p_in);
  take(j, "runs", cfg.runs);
  take(j, "inference_trials", cfg.inference_trials);
  take(j, "mu", cfg.learner.mu);
  take(j, "floor", cfg.learner.floor);
  take(j, "greedy_inference", cfg.greedy_inference);
  if (o.episodes >= 0) cfg.learner.episodes = o.episodes;
  if (o.max_trace > 0) cfg.learner.max_trace = o.max_trace;
  if (o.trials > 0) cfg.inference_trials = o.trials;
  if (o.theta >= 0) cfg.theta = o.theta;
  if (o.greedy) cfg.greedy_inference = true;
  cfg.learner.seed = o.seed;
  cfg.workers = o.workers;
  cfg.mission = mission_text(o, kC2hMission);

  const LearningStudy study = run_learning_study(cfg);
  const std::string dir = o.out.empty() ? "." : o.out;
  fs::create_directories(dir);
  write_output(dir + "/learning_runs.csv", learning_runs_csv(study.rows));
  write_output(dir + "/learning_curves.csv", learning_curves_csv(study));
  json policies = json::array();
  for (std::size_t i = 0; i < study.rows.size(); ++i)
    policies.push_back({{"p_in", study.rows[i].p_in}, {"run", study.rows[i].run}, {"policy", grid::to_json(study.policies[i])}});
  write_output(dir + "/policies.json", policies.dump(1) + "\n");
  for (double p : cfg.p_in) {
    double ls = 0, is = 0;
    int n = 0;
    for (const auto& r : study.rows)
      if (r.p_in == p) {
        ls += r.learning_success;
        is += r.inference_success;
        ++n;
      }
    std::cout << "p_in=" << p << " learning_success=" << ls / n << " inference_success=" << is / n << '\n';
  }
  return 0;
}

// Accepts a single policy object or the array written by `learn`.
int cmd_infer(const Options& o) {
  if (o.policy.empty()) throw ConfigError("--policy is required");
  const json j = read_config(o);
  grid::GridConfig g;
  if (j.contains("grid")) g = grid::grid_config_from_json(j["grid"]);
  const json pj = json::parse(read_file(o.policy));
  const GridMission m = make_grid_mission(mission_text(o, kC2hMission), o.max_trace > 0 ? std::optional<int>(o.max_trace) : std::nullopt,
                                          o.theta >= 0 ? std::optional<int>(o.theta) : std::nullopt);
  const int trials = o.trials > 0 ? o.trials : 50;
  std::ostringstream os;
  os.precision(17);
  os << "index,p_in,trials,successes,success_probability,mean_trace_length,seed\n";
  const json list = pj.is_array() ? pj : json::array({pj});
  for (std::size_t i = 0; i < list.size(); ++i) {
    const json& entry = list[i];
    grid::GridConfig gi = g;
    if (entry.contains("p_in")) gi.p_in = entry["p_in"].get<double>();
    const grid::Policy p = grid::policy_from_json(entry.contains("policy") ? entry["policy"] : entry);
    const std::uint64_t seed = derive_seed(o.seed, i);
    const EvalResult r = evaluate_policy(m, gi, p, trials, true, seed, o.greedy, o.workers);
    os << i << ',' << gi.p_in << ',' << r.trials << ',' << r.successes << ',' << r.success_probability << ','
       << r.mean_trace_length << ',' << seed << '\n';
  }
  write_output(o.out, os.str());
  return 0;
}

int cmd_verify(const Options& o) {
  const std::size_t bound = o.max_trace > 0 ? static_cast<std::size_t>(o.max_trace) : 5;
  json report;
  std::size_t violations = 0;
  std::string counterexamples;
  if (o.fuzz > 0) {
    std::mt19937_64 rng(o.seed);
    MissionConfig cfg;
    cfg.alphabet = fuzz_alphabet(MissionFuzzConfig{}.pool_size);
    cfg.t_task_max = static_cast<int>(bound);
    if (o.theta >= 0) cfg.theta = o.theta;
    report["missions"] = json::array();
    for (int i = 0; i < o.fuzz; ++i) {
      const MissionExpr e = random_mission(rng);
      const InclusionReport r = check_mission_inclusion(e, cfg, bound);
      violations += r.n_violations;
      json row = r.to_json();
      row.erase("counterexamples");
      row["mission"] = format_mission(e);
      report["missions"].push_back(std::move(row));
    }
  } else {
    const MissionDocument doc = load_document(o);
    MissionConfig cfg = doc.config;
    if (o.max_trace <= 0) cfg.t_task_max = static_cast<int>(bound);
    const InclusionReport r = check_mission_inclusion(doc.expr, cfg, bound);
    violations = r.n_violations;
    report = r.to_json();
    report["mission"] = format_mission(doc.expr);
    counterexamples = r.counterexamples_csv();
  }
  report["total_violations"] = violations;
  write_output(o.out, report.dump(2) + "\n");
  if (violations > 0 && !o.dot.empty() && !counterexamples.empty()) write_output(o.dot, counterexamples);
  if (violations > 0) std::cerr << "verification failed: " << violations << " violating trace(s)\n";
  return violations > 0 ? 2 : 0;
}

int cmd_keydoor(const Options& o) {
  const int theta = o.theta >= 0 ? o.theta : 1;
  json out = json::array();
  std::string csv;
  for (const char* mode : {"baseline", "bt"}) {
    if (o.mode != "both" && o.mode != mode) continue;
    const auto rep = keydoor::run_keydoor(std::string(mode) == "bt", o.seed, o.irreversible, theta);
    out.push_back(rep.to_json());
    const std::string c = rep.to_csv();
    csv += csv.empty() ? c : c.substr(c.find('\n') + 1);
    std::cout << mode << ": normal " << rep.successes("normal") << "/" << rep.count("normal") << ", disturbed "
              << rep.disturbed_successes() << "/15\n";
  }
  if (!o.out.empty()) write_output(o.out, out.dump(2) + "\n");
  if (!o.dot.empty()) write_output(o.dot, csv);
  return 0;
}

void dump_counterexample(const AuditFailure& e, const Options& o) {
  std::cerr << e.what() << '\n';
  std::ostringstream os;
  const Trace& t = e.trace();
  os << "position";
  for (const auto& n : t.alphabet()->names()) os << ',' << n;
  os << '\n';
  for (std::size_t i = 0; i < t.size(); ++i) {
    os << i;
    for (std::size_t a = 0; a < t.alphabet()->size(); ++a) os << ',' << ((t.bits()[i] >> a) & 1U);
    os << '\n';
  }
  const std::string path = o.out.empty() ? "" : o.out + ".counterexample.csv";
  if (path.empty())
    std::cerr << os.str();
  else
    write_output(path, os.str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mission grammar to behavior tree compiler and experiments"};
  app.require_subcommand(1, 1);
  Options o;

  auto add_common = [&](CLI::App* c) {
    c->add_option("--mission", o.mission, "Mission file");
    c->add_option("--config", o.config, "Experiment configuration (JSON)");
    c->add_option("--seed", o.seed, "Base seed");
    c->add_option("--trials", o.trials, "Trials per cell or evaluation");
    c->add_option("--episodes", o.episodes, "Learning episodes");
    c->add_option("--max-trace", o.max_trace, "Maximum trace length / t_task_max");
    c->add_option("--discount", o.discount, "Policy-iteration discount");
    c->add_option("--theta", o.theta, "Finally retry budget");
    c->add_option("--out", o.out, "Output path");
    c->add_option("--dot", o.dot, "Secondary output path (DOT tree or CSV dump)");
    c->add_option("--workers", o.workers, "Worker threads");
  };

  struct Sub {
    const char* name;
    const char* help;
    int (*run)(const Options&);
  };
  const Sub subs[] = {{"parse", "Parse a mission and print its AST as JSON", cmd_parse},
                      {"compile", "Compile a mission into a behavior tree (JSON, DOT)", cmd_compile},
                      {"sweep", "Reward and slip-probability sweep with policy iteration", cmd_sweep},
                      {"learn", "Learn action policies from mission return status", cmd_learn},
                      {"infer", "Evaluate policies with randomized starts", cmd_infer},
                      {"verify", "Bounded check that successful traces satisfy the mission", cmd_verify},
                      {"keydoor", "Scripted key-door trials, baseline vs behavior tree", cmd_keydoor}};
  int (*selected)(const Options&) = nullptr;
  for (const auto& s : subs) {
    CLI::App* c = app.add_subcommand(s.name, s.help);
    add_common(c);
    if (std::string(s.name) == "infer" || std::string(s.name) == "learn")
      c->add_flag("--greedy", o.greedy, "Take the most probable action instead of sampling");
    if (std::string(s.name) == "infer") c->add_option("--policy", o.policy, "Policy JSON (single or as written by learn)");
    if (std::string(s.name) == "verify") c->add_option("--fuzz", o.fuzz, "Check this many random missions instead of --mission");
    if (std::string(s.name) == "keydoor") {
      c->add_flag("--irreversible", o.irreversible, "Door and prize disturbances cannot be undone");
      c->add_option("--mode", o.mode, "baseline, bt or both")->check(CLI::IsMember({"baseline", "bt", "both"}));
    }
    c->callback([&selected, run = s.run] { selected = run; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    return selected(o);
  } catch (const AuditFailure& e) {
    dump_counterexample(e, o);
    return 2;
  } catch (const SyntaxError& e) {
    std::cerr << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
