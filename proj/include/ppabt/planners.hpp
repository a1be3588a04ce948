// Action-node policies for the grid world: exact policy iteration over the
// analytic kernel, and the tabular learner driven by mission return status.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "ppabt/bt.hpp"
#include "ppabt/errors.hpp"
#include "ppabt/gridworld.hpp"

namespace ppabt::grid {

using Row = std::array<double, kMoves>;

// p(a | cell, phase). Deterministic policies hold one-hot rows.
struct Policy {
  enum class Kind { Deterministic, Stochastic };

  Kind kind = Kind::Stochastic;
  int width = 4;
  int height = 4;
  std::array<std::vector<Row>, 2> table;

  static Policy uniform(int width, int height) {
    Policy p;
    p.width = width;
    p.height = height;
    for (auto& t : p.table) t.assign(static_cast<std::size_t>(width * height), Row{0.25, 0.25, 0.25, 0.25});
    return p;
  }

  static Policy deterministic(int width, int height, const std::vector<int>& cheese, const std::vector<int>& home) {
    Policy p;
    p.kind = Kind::Deterministic;
    p.width = width;
    p.height = height;
    const std::vector<int>* src[2] = {&cheese, &home};
    for (int ph = 0; ph < 2; ++ph)
      for (int a : *src[ph]) {
        Row r{};
        r[static_cast<std::size_t>(a)] = 1.0;
        p.table[ph].push_back(r);
      }
    return p;
  }

  Row& row(Phase ph, int cell) { return table[static_cast<int>(ph)].at(static_cast<std::size_t>(cell)); }
  const Row& row(Phase ph, int cell) const { return table[static_cast<int>(ph)].at(static_cast<std::size_t>(cell)); }

  int sample(Phase ph, int cell, std::mt19937_64& rng) const {
    const Row& r = row(ph, cell);
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    double acc = 0.0;
    for (int a = 0; a < kMoves; ++a) {
      acc += r[static_cast<std::size_t>(a)];
      if (u < acc) return a;
    }
    for (int a = kMoves - 1; a >= 0; --a)
      if (r[static_cast<std::size_t>(a)] > 0.0) return a;
    return 0;
  }

  int argmax(Phase ph, int cell) const {
    const Row& r = row(ph, cell);
    return static_cast<int>(std::max_element(r.begin(), r.end()) - r.begin());
  }

  bool valid(double tol = 1e-9) const {
    for (const auto& t : table)
      for (const Row& r : t) {
        double sum = 0.0;
        for (double x : r) {
          if (!(x >= 0.0)) return false;
          sum += x;
        }
        if (std::abs(sum - 1.0) > tol) return false;
      }
    return true;
  }
};

inline std::string cell_key(Cell c) { return std::to_string(c.j) + "," + std::to_string(c.k); }

inline nlohmann::json to_json(const Policy& p) {
  nlohmann::json j{{"kind", p.kind == Policy::Kind::Deterministic ? "deterministic" : "stochastic"},
                   {"width", p.width},
                   {"height", p.height},
                   {"actions", {"up", "down", "left", "right"}}};
  GridConfig shape;
  shape.width = p.width;
  shape.height = p.height;
  for (int ph = 0; ph < 2; ++ph) {
    nlohmann::json rows = nlohmann::json::object();
    for (std::size_t s = 0; s < p.table[ph].size(); ++s)
      rows[cell_key(shape.cell(static_cast<int>(s)))] = p.table[ph][s];
    j[to_string(static_cast<Phase>(ph))] = std::move(rows);
  }
  return j;
}

inline Policy policy_from_json(const nlohmann::json& j) {
  Policy p = Policy::uniform(j.at("width").get<int>(), j.at("height").get<int>());
  p.kind = j.value("kind", "stochastic") == "deterministic" ? Policy::Kind::Deterministic : Policy::Kind::Stochastic;
  GridConfig shape;
  shape.width = p.width;
  shape.height = p.height;
  for (int ph = 0; ph < 2; ++ph) {
    const auto& rows = j.at(to_string(static_cast<Phase>(ph)));
    for (int s = 0; s < p.width * p.height; ++s) p.table[ph][static_cast<std::size_t>(s)] = rows.at(cell_key(shape.cell(s))).get<Row>();
  }
  if (!p.valid()) throw ConfigError("policy rows must be probability distributions");
  return p;
}

// ---------------------------------------------------------------------------
// Policy iteration
// ---------------------------------------------------------------------------

// One planning problem: arrival reward per cell and absorbing cells.
struct PhaseMdp {
  Kernel kernel;
  std::vector<double> reward;
  std::vector<bool> terminal;
};

inline PhaseMdp phase_mdp(const GridConfig& cfg, Phase phase) {
  PhaseMdp m{transition_kernel(cfg), {}, std::vector<bool>(static_cast<std::size_t>(cfg.cells()), false)};
  for (int s = 0; s < cfg.cells(); ++s) m.reward.push_back(cell_reward(cfg, s, phase));
  if (cfg.absorbing_fire) m.terminal[static_cast<std::size_t>(cfg.index(cfg.fire))] = true;
  if (cfg.absorbing_goal) m.terminal[static_cast<std::size_t>(cfg.index(phase_goal(cfg, phase)))] = true;
  return m;
}

inline void check_stochastic(const Kernel& k, double tol = 1e-9) {
  for (int s = 0; s < k.states; ++s)
    for (int a = 0; a < kMoves; ++a) {
      double sum = 0.0;
      for (int s2 = 0; s2 < k.states; ++s2) {
        if (k(s, a, s2) < 0.0) throw NonStochasticKernel("negative transition probability");
        sum += k(s, a, s2);
      }
      if (std::abs(sum - 1.0) > tol) throw NonStochasticKernel("kernel row does not sum to 1");
    }
}

// Q(s, a) = sum_s' P(s'|s,a) (R(s') + gamma V(s')), with V = 0 on absorbing cells.
inline double q_value(const PhaseMdp& m, const std::vector<double>& v, double gamma, int s, int a) {
  double q = 0.0;
  for (int s2 = 0; s2 < m.kernel.states; ++s2) {
    const double p = m.kernel(s, a, s2);
    if (p == 0.0) continue;
    q += p * (m.reward[static_cast<std::size_t>(s2)] + (m.terminal[static_cast<std::size_t>(s2)] ? 0.0 : gamma * v[static_cast<std::size_t>(s2)]));
  }
  return q;
}

// First action (Up < Down < Left < Right) within `tie` of the best Q.
// Absorbing cells get action 0.
inline std::vector<int> greedy_actions(const PhaseMdp& m, const std::vector<double>& v, double gamma, double tie = 1e-9) {
  std::vector<int> out(static_cast<std::size_t>(m.kernel.states), 0);
  for (int s = 0; s < m.kernel.states; ++s) {
    if (m.terminal[static_cast<std::size_t>(s)]) continue;
    Row q{};
    for (int a = 0; a < kMoves; ++a) q[static_cast<std::size_t>(a)] = q_value(m, v, gamma, s, a);
    const double best = *std::max_element(q.begin(), q.end());
    for (int a = 0; a < kMoves; ++a)
      if (q[static_cast<std::size_t>(a)] >= best - tie) {
        out[static_cast<std::size_t>(s)] = a;
        break;
      }
  }
  return out;
}

// Exact evaluation of a deterministic policy by a dense linear solve.
inline std::vector<double> evaluate_actions(const PhaseMdp& m, const std::vector<int>& actions, double gamma) {
  const int n = m.kernel.states;
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  for (int s = 0; s < n; ++s) {
    if (m.terminal[static_cast<std::size_t>(s)]) continue;
    const int a = actions[static_cast<std::size_t>(s)];
    for (int s2 = 0; s2 < n; ++s2) {
      const double p = m.kernel(s, a, s2);
      b(s) += p * m.reward[static_cast<std::size_t>(s2)];
      if (!m.terminal[static_cast<std::size_t>(s2)]) A(s, s2) -= gamma * p;
    }
  }
  const Eigen::VectorXd v = A.partialPivLu().solve(b);
  return std::vector<double>(v.data(), v.data() + n);
}

struct PolicyIterationResult {
  std::vector<int> actions;
  std::vector<double> values;
  int iterations = 0;
};

inline PolicyIterationResult policy_iteration(const PhaseMdp& m, double gamma, int max_iters = 1000) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("discount must lie in (0, 1)");
  check_stochastic(m.kernel);
  PolicyIterationResult r;
  r.actions.assign(static_cast<std::size_t>(m.kernel.states), 0);
  for (r.iterations = 1; r.iterations <= max_iters; ++r.iterations) {
    r.values = evaluate_actions(m, r.actions, gamma);
    std::vector<int> next = greedy_actions(m, r.values, gamma);
    if (next == r.actions) return r;
    r.actions = std::move(next);
  }
  throw NoConvergence(max_iters);
}

// Deterministic two-phase policy: one policy-iteration run per phase.
inline Policy plan_policy(const GridConfig& cfg, double gamma) {
  return Policy::deterministic(cfg.width, cfg.height, policy_iteration(phase_mdp(cfg, Phase::Cheese), gamma).actions,
                               policy_iteration(phase_mdp(cfg, Phase::Home), gamma).actions);
}

// ---------------------------------------------------------------------------
// Feedback learning
// ---------------------------------------------------------------------------

struct LearnerConfig {
  int episodes = 200;      // xi
  int max_trace = 50;      // m
  double mu = 0.9;
  double floor = 1e-3;     // epsilon
  std::uint64_t seed = 0;

  void validate() const {
    if (episodes < 0) throw ConfigError("episodes must be non-negative");
    if (max_trace < 1) throw ConfigError("max trace must be positive");
    if (!(mu > 0.0 && mu <= 1.0)) throw ConfigError("mu must lie in (0, 1]");
    if (!(floor > 0.0 && floor < 1.0 / kMoves)) throw ConfigError("floor must lie in (0, 1/4)");
  }
};

struct StateAction {
  int cell = 0;
  int action = 0;
};

// One segment of an episode trace with the status that scores it.
struct FeedbackSegment {
  Phase phase = Phase::Cheese;
  std::vector<StateAction> pairs;
  int b = 1;
};

// p(a(t)|s(t)) += mu^(m - t) * b for t = 0..m over the segment (m its final
// index); touched rows are then clamped to >= floor and renormalized.
inline void feedback_update(Policy& policy, const FeedbackSegment& seg, double mu, double floor) {
  if (seg.pairs.empty()) return;
  const std::size_t m = seg.pairs.size() - 1;
  std::vector<int> touched;
  for (std::size_t t = 0; t <= m; ++t) {
    const auto& [cell, action] = seg.pairs[t];
    policy.row(seg.phase, cell)[static_cast<std::size_t>(action)] += std::pow(mu, static_cast<double>(m - t)) * seg.b;
    touched.push_back(cell);
  }
  std::sort(touched.begin(), touched.end());
  touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
  for (int cell : touched) {
    Row& r = policy.row(seg.phase, cell);
    double sum = 0.0;
    for (double& x : r) {
      x = std::max(x, floor);
      sum += x;
    }
    for (double& x : r) x /= sum;
  }
  policy.kind = Policy::Kind::Stochastic;
}

// Trace of one grid episode split into the two task phases. `split` is the
// tick at which the first task's subtree first succeeded.
struct EpisodeRecord {
  std::vector<StateAction> pairs;
  std::vector<Phase> phases;
  Status status = Status::Running;
  std::optional<std::size_t> phase_split;  // index into pairs
  std::size_t trace_length = 0;
};

// Segments scored per the two-phase rule: without a first-phase success the
// whole trace updates phase C with the mission status; otherwise the prefix
// updates phase C with +1 and the rest updates phase H with the mission status.
inline std::vector<FeedbackSegment> feedback_segments(const EpisodeRecord& rec) {
  const int b = rec.status == Status::Success ? 1 : -1;
  if (!rec.phase_split) return {FeedbackSegment{Phase::Cheese, rec.pairs, b}};
  const auto mid = rec.pairs.begin() + static_cast<std::ptrdiff_t>(*rec.phase_split);
  return {FeedbackSegment{Phase::Cheese, {rec.pairs.begin(), mid}, 1},
          FeedbackSegment{Phase::Home, {mid, rec.pairs.end()}, b}};
}

}  // namespace ppabt::grid
