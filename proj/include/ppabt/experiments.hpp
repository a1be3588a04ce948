// Grid-world experiments: reward sweep over policy-iteration planners, and
// learning/inference runs of the feedback learner. Every episode is audited
// against the mission formula.
#pragma once

#include <algorithm>
#include <atomic>
#include <bit>
#include <cstdint>
#include <exception>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "ppabt/bt.hpp"
#include "ppabt/compiler.hpp"
#include "ppabt/gridworld.hpp"
#include "ppabt/mission.hpp"
#include "ppabt/planners.hpp"
#include "ppabt/verify.hpp"

namespace ppabt {

// splitmix64 finalizer; seeds for rows and trials are derived by hashing.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0) {
  return mix64(mix64(mix64(base) ^ a) ^ b);
}

inline unsigned default_workers() { return std::max(1U, std::thread::hardware_concurrency()); }

// Runs f(0..n-1) on up to `workers` threads. The first exception thrown by
// any task is rethrown after all threads join.
template <class F>
void parallel_for(std::size_t n, unsigned workers, F&& f) {
  workers = std::max(1U, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          f(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next = n;
        }
      }
    });
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

// ---------------------------------------------------------------------------
// Grid missions
// ---------------------------------------------------------------------------

inline constexpr const char* kC2hMission = R"(# Fetch the cheese, then bring it home, never entering the fire.
alphabet Cheese Fire Home
theta 1
t_task_max 50
task cheese(post=Cheese, pre=True, gc=!Fire, tc=True, action=Cheese)
task home(post=Home, pre=Cheese, gc=!Fire, tc=True, action=Home)
mission U (F cheese) (F home)
)";

// Compiled two-phase grid mission. The first task in the mission drives the
// cheese-phase policy, the second the home-phase policy.
struct GridMission {
  MissionDocument doc;
  BtTree tree;
  Formula formula;
  std::string bindings[2];
  int first_task_node = -1;  // TaskBoundary of the first task
};

inline GridMission make_grid_mission(std::string_view text, std::optional<int> max_trace = std::nullopt,
                                     std::optional<int> theta = std::nullopt) {
  GridMission m;
  m.doc = parse_mission_document(text);
  if (max_trace) m.doc.config.t_task_max = *max_trace;
  if (theta) m.doc.config.theta = *theta;
  const auto tasks = mission_tasks(m.doc.expr);
  if (tasks.size() != 2) throw ConfigError("grid missions need exactly two tasks");
  m.bindings[0] = tasks[0]->action;
  m.bindings[1] = tasks[1]->action;
  if (m.bindings[0] == m.bindings[1]) throw ConfigError("grid mission tasks need distinct action bindings");
  m.tree = compile_mission(m.doc.expr, m.doc.config);
  m.formula = expand_mission(m.doc.expr);
  visit_preorder(m.tree, [&](const BtNode& n) {
    if (m.first_task_node < 0 && n.kind == NodeKind::Decorator && n.decorator == DecoratorKind::TaskBoundary &&
        n.label == tasks[0]->name)
      m.first_task_node = n.id;
  });
  return m;
}

inline int mouse_cell(std::uint64_t bits, const grid::GridConfig& cfg) {
  const std::uint64_t mask = (std::uint64_t{1} << cfg.cells()) - 1;
  return std::countr_zero(bits & mask);
}

// Binds both actions to `policy` (held by pointer, so learning can update it
// between episodes). Greedy runners take the most probable action.
inline std::shared_ptr<const ExecutableTree> bind_grid(const GridMission& m, const grid::GridConfig& cfg,
                                                       const grid::Policy* policy, bool greedy = false) {
  std::map<std::string, ActionRunner> runners;
  for (int ph = 0; ph < 2; ++ph) {
    const auto phase = static_cast<grid::Phase>(ph);
    runners.emplace(m.bindings[ph],
                    ActionRunner{m.bindings[ph],
                                 [policy, phase, greedy, cfg](const StateVector& sv, std::mt19937_64& rng) -> std::optional<int> {
                                   const int cell = mouse_cell(sv.bits(), cfg);
                                   return greedy ? policy->argmax(phase, cell) : policy->sample(phase, cell, rng);
                                 },
                                 nullptr, std::nullopt});
  }
  return bind_actions(m.tree, *grid::grid_alphabet(cfg), std::move(runners));
}

struct GridEpisode {
  Status status = Status::Failure;  // a trace that hits the bound counts as failure
  std::size_t length = 0;
  grid::EpisodeRecord record;
};

inline GridEpisode run_grid_episode(const GridMission& m, const std::shared_ptr<const ExecutableTree>& exec,
                                    const grid::GridConfig& cfg, grid::Cell start, std::uint64_t seed,
                                    bool record_pairs = false) {
  grid::GridEnvironment env(cfg, grid::GridState{start, false}, seed);
  env.set_home_binding(m.bindings[1]);
  BtRuntime runtime(exec, record_pairs);
  const auto max_len = static_cast<std::size_t>(m.doc.config.t_task_max) + 1;
  Episode ep = run_to_completion(runtime, env, max_len, record_pairs);
  if (!audit_trace(m.formula, ep.trace, ep.status)) throw AuditFailure("grid episode seed " + std::to_string(seed), ep.trace);

  GridEpisode out;
  out.status = ep.status == Status::Success ? Status::Success : Status::Failure;
  out.length = ep.trace.size();
  out.record.status = out.status;
  out.record.trace_length = out.length;
  if (record_pairs) {
    const auto split = ep.log.first_status(m.first_task_node, Status::Success);
    for (const auto& t : ep.log.ticks) {
      if (!t.command) continue;
      if (split && t.tick >= *split && !out.record.phase_split) out.record.phase_split = out.record.pairs.size();
      out.record.pairs.push_back({mouse_cell(t.command->state, cfg), t.command->action});
      out.record.phases.push_back(t.command->binding == m.bindings[0] ? grid::Phase::Cheese : grid::Phase::Home);
    }
    if (split && !out.record.phase_split) out.record.phase_split = out.record.pairs.size();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Reward sweep
// ---------------------------------------------------------------------------

struct SweepConfig {
  grid::GridConfig grid;
  std::vector<double> r_other;
  std::vector<double> r_good{0.1, 0.5, 1.0, 2.0, 5.0, 10.0};
  std::vector<double> r_fire{-10.0, -5.0, -2.0, -1.0, -0.5, -0.1};
  std::vector<double> p_in;
  int trials = 100;
  double gamma = 0.9;
  int max_trace = 50;
  int theta = 1;
  std::uint64_t seed = 0;
  unsigned workers = default_workers();
  std::string mission = kC2hMission;

  SweepConfig() {
    for (int i = 15; i >= 1; --i) r_other.push_back(-0.1 * i);
    r_other.push_back(-0.04);
    for (int i = 0; i < 12; ++i) p_in.push_back(0.4 + 0.05 * i);
  }

  std::size_t cells() const { return r_other.size() * r_good.size() * r_fire.size() * p_in.size(); }
};

struct SweepRow {
  std::size_t cell = 0;
  double r_other = 0, r_good = 0, r_fire = 0, p_in = 0;
  int trials = 0;
  int successes = 0;
  double success_probability = 0;
  double mean_trace_length = 0;
  std::uint64_t seed = 0;
};

// One sweep cell: plan both phases, then run `trials` missions from the
// configured start with trial seeds derived from `seed`.
inline SweepRow run_sweep_cell(const GridMission& m, const grid::GridConfig& cfg, int trials, double gamma, std::uint64_t seed) {
  SweepRow row;
  row.r_other = cfg.rewards.other;
  row.r_good = cfg.rewards.good;
  row.r_fire = cfg.rewards.fire;
  row.p_in = cfg.p_in;
  row.trials = trials;
  row.seed = seed;
  const grid::Policy policy = grid::plan_policy(cfg, gamma);
  const auto exec = bind_grid(m, cfg, &policy, true);
  double total_length = 0;
  for (int t = 0; t < trials; ++t) {
    const GridEpisode ep = run_grid_episode(m, exec, cfg, cfg.start, derive_seed(seed, static_cast<std::uint64_t>(t)));
    row.successes += ep.status == Status::Success;
    total_length += static_cast<double>(ep.length);
  }
  if (trials > 0) {
    row.success_probability = static_cast<double>(row.successes) / trials;
    row.mean_trace_length = total_length / trials;
  }
  return row;
}

inline grid::GridConfig sweep_cell_config(const SweepConfig& cfg, std::size_t index) {
  std::size_t i = index;
  grid::GridConfig g = cfg.grid;
  g.p_in = cfg.p_in[i % cfg.p_in.size()];
  i /= cfg.p_in.size();
  g.rewards.fire = cfg.r_fire[i % cfg.r_fire.size()];
  i /= cfg.r_fire.size();
  g.rewards.good = cfg.r_good[i % cfg.r_good.size()];
  i /= cfg.r_good.size();
  g.rewards.other = cfg.r_other[i];
  return g;
}

inline std::vector<SweepRow> run_sweep(const SweepConfig& cfg) {
  if (cfg.trials < 0) throw ConfigError("trials must be non-negative");
  if (cfg.trials == 0) return {};
  const GridMission m = make_grid_mission(cfg.mission, cfg.max_trace, cfg.theta);
  std::vector<SweepRow> rows(cfg.cells());
  parallel_for(rows.size(), cfg.workers, [&](std::size_t i) {
    rows[i] = run_sweep_cell(m, sweep_cell_config(cfg, i), cfg.trials, cfg.gamma, derive_seed(cfg.seed, i));
    rows[i].cell = i;
  });
  return rows;
}

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os.precision(17);
  os << "cell,r_other,r_good,r_fire,p_in,trials,successes,success_probability,mean_trace_length,seed\n";
  for (const auto& r : rows)
    os << r.cell << ',' << r.r_other << ',' << r.r_good << ',' << r.r_fire << ',' << r.p_in << ',' << r.trials << ','
       << r.successes << ',' << r.success_probability << ',' << r.mean_trace_length << ',' << r.seed << '\n';
  return os.str();
}

// ---------------------------------------------------------------------------
// Feedback learning and inference
// ---------------------------------------------------------------------------

struct CurvePoint {
  int episode = 0;
  Status status = Status::Failure;
  std::size_t trace_length = 0;
};

struct LearnResult {
  grid::Policy policy;
  std::vector<CurvePoint> curve;

  double success_rate(std::size_t from = 0, std::size_t to = SIZE_MAX) const {
    to = std::min(to, curve.size());
    if (from >= to) return 0.0;
    std::size_t n = 0;
    for (std::size_t i = from; i < to; ++i) n += curve[i].status == Status::Success;
    return static_cast<double>(n) / static_cast<double>(to - from);
  }

  double mean_length() const {
    if (curve.empty()) return 0.0;
    double s = 0;
    for (const auto& c : curve) s += static_cast<double>(c.trace_length);
    return s / static_cast<double>(curve.size());
  }
};

// Runs `cfg.episodes` episodes from `start`, updating the policy after each.
inline LearnResult learn(const GridMission& m, const grid::GridConfig& grid_cfg, const grid::LearnerConfig& cfg, grid::Cell start) {
  cfg.validate();
  LearnResult out{grid::Policy::uniform(grid_cfg.width, grid_cfg.height), {}};
  const auto exec = bind_grid(m, grid_cfg, &out.policy, false);
  for (int e = 0; e < cfg.episodes; ++e) {
    const GridEpisode ep = run_grid_episode(m, exec, grid_cfg, start, derive_seed(cfg.seed, static_cast<std::uint64_t>(e)), true);
    for (const auto& seg : grid::feedback_segments(ep.record)) grid::feedback_update(out.policy, seg, cfg.mu, cfg.floor);
    out.curve.push_back({e, ep.status, ep.length});
  }
  return out;
}

struct EvalResult {
  int trials = 0;
  int successes = 0;
  double success_probability = 0;
  double mean_trace_length = 0;
};

// Independent trials; with `randomize_start` the start cell is uniform over
// non-fire cells.
inline EvalResult evaluate_policy(const GridMission& m, const grid::GridConfig& cfg, const grid::Policy& policy, int trials,
                                  bool randomize_start, std::uint64_t seed, bool greedy = false, unsigned workers = 1) {
  if (trials < 1) throw ConfigError("trials must be positive");
  const auto exec = bind_grid(m, cfg, &policy, greedy);
  std::vector<GridEpisode> eps(static_cast<std::size_t>(trials));
  parallel_for(eps.size(), workers, [&](std::size_t t) {
    const std::uint64_t s = derive_seed(seed, t);
    grid::Cell start = cfg.start;
    if (randomize_start) {
      std::mt19937_64 pick(mix64(s));
      do {
        start = cfg.cell(std::uniform_int_distribution<int>(0, cfg.cells() - 1)(pick));
      } while (start == cfg.fire);
    }
    eps[t] = run_grid_episode(m, exec, cfg, start, s);
  });
  EvalResult r;
  r.trials = trials;
  double len = 0;
  for (const auto& e : eps) {
    r.successes += e.status == Status::Success;
    len += static_cast<double>(e.length);
  }
  r.success_probability = static_cast<double>(r.successes) / trials;
  r.mean_trace_length = len / trials;
  return r;
}

struct LearningRunRow {
  double p_in = 0;
  int run = 0;
  std::uint64_t seed = 0;
  double learning_success = 0;
  double learning_mean_length = 0;
  double inference_success = 0;
  double inference_mean_length = 0;
};

struct LearningStudyConfig {
  grid::GridConfig grid;
  grid::LearnerConfig learner;
  grid::Cell start{4, 1};
  std::vector<double> p_in{0.6, 0.8, 0.95};
  int runs = 50;
  int inference_trials = 50;
  bool greedy_inference = false;
  int theta = 1;
  unsigned workers = default_workers();
  std::string mission = kC2hMission;
};

struct LearningStudy {
  std::vector<LearningRunRow> rows;
  std::vector<grid::Policy> policies;  // parallel to rows
  std::vector<std::vector<CurvePoint>> curves;
};

// Independent learning runs per p_in, each followed by an inference
// evaluation with randomized starts.
inline LearningStudy run_learning_study(const LearningStudyConfig& cfg) {
  const GridMission m = make_grid_mission(cfg.mission, cfg.learner.max_trace, cfg.theta);
  const std::size_t n = cfg.p_in.size() * static_cast<std::size_t>(cfg.runs);
  LearningStudy out;
  out.rows.resize(n);
  out.policies.resize(n, grid::Policy::uniform(cfg.grid.width, cfg.grid.height));
  out.curves.resize(n);
  parallel_for(n, cfg.workers, [&](std::size_t i) {
    grid::GridConfig g = cfg.grid;
    g.p_in = cfg.p_in[i / static_cast<std::size_t>(cfg.runs)];
    const int run = static_cast<int>(i % static_cast<std::size_t>(cfg.runs));
    grid::LearnerConfig lc = cfg.learner;
    lc.seed = derive_seed(cfg.learner.seed, i);
    LearnResult lr = learn(m, g, lc, cfg.start);
    const EvalResult ev = evaluate_policy(m, g, lr.policy, cfg.inference_trials, true, derive_seed(lc.seed, 1, 1), cfg.greedy_inference);
    out.rows[i] = {g.p_in, run, lc.seed, lr.success_rate(), lr.mean_length(), ev.success_probability, ev.mean_trace_length};
    out.policies[i] = std::move(lr.policy);
    out.curves[i] = std::move(lr.curve);
  });
  return out;
}

inline std::string learning_runs_csv(const std::vector<LearningRunRow>& rows) {
  std::ostringstream os;
  os.precision(17);
  os << "p_in,run,seed,learning_success,learning_mean_length,inference_success,inference_mean_length\n";
  for (const auto& r : rows)
    os << r.p_in << ',' << r.run << ',' << r.seed << ',' << r.learning_success << ',' << r.learning_mean_length << ','
       << r.inference_success << ',' << r.inference_mean_length << '\n';
  return os.str();
}

inline std::string learning_curves_csv(const LearningStudy& s) {
  std::ostringstream os;
  os << "p_in,run,episode,status,trace_length\n";
  for (std::size_t i = 0; i < s.curves.size(); ++i)
    for (const auto& c : s.curves[i])
      os << s.rows[i].p_in << ',' << s.rows[i].run << ',' << c.episode << ',' << to_string(c.status) << ',' << c.trace_length << '\n';
  return os.str();
}

}  // namespace ppabt
