// Stochastic mouse-and-cheese grid world.
//
// Cells are 1-based (row j, column k). Up decreases j, Down increases j,
// Left decreases k, Right increases k. The intended move happens with
// probability p_in; each perpendicular move with probability (1-p_in)/2.
// Bumping into a wall leaves the mouse in place.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ppabt/bt.hpp"
#include "ppabt/errors.hpp"
#include "ppabt/ltlf.hpp"

namespace ppabt::grid {

enum class Move { Up = 0, Down = 1, Left = 2, Right = 3 };
inline constexpr int kMoves = 4;
inline constexpr std::array<Move, 4> kAllMoves{Move::Up, Move::Down, Move::Left, Move::Right};

inline const char* to_string(Move m) {
  switch (m) {
    case Move::Up: return "up";
    case Move::Down: return "down";
    case Move::Left: return "left";
    case Move::Right: return "right";
  }
  return "";
}

inline std::array<Move, 2> perpendicular(Move m) {
  if (m == Move::Up || m == Move::Down) return {Move::Left, Move::Right};
  return {Move::Up, Move::Down};
}

struct Cell {
  int j = 1;
  int k = 1;
  bool operator==(const Cell&) const = default;
};

struct Rewards {
  double other = -0.04;
  double good = 1.0;
  double fire = -1.0;
};

enum class Phase { Cheese = 0, Home = 1 };

inline const char* to_string(Phase p) { return p == Phase::Cheese ? "C" : "H"; }

struct GridConfig {
  int width = 4;
  int height = 4;
  Cell cheese{4, 4};
  Cell fire{4, 2};
  Cell home{3, 1};
  Cell start{3, 1};
  double p_in = 0.8;
  Rewards rewards;
  std::uint64_t seed = 0;
  bool absorbing_fire = true;   // planner treats fire as terminal
  bool absorbing_goal = true;   // planner treats the phase goal as terminal

  bool in_bounds(Cell c) const { return c.j >= 1 && c.j <= height && c.k >= 1 && c.k <= width; }
  int cells() const { return width * height; }
  int index(Cell c) const { return (c.j - 1) * width + (c.k - 1); }
  Cell cell(int index) const { return Cell{index / width + 1, index % width + 1}; }

  void validate() const {
    if (width < 1 || height < 1) throw ConfigError("grid dimensions must be positive");
    if (width * height + 3 > static_cast<int>(Alphabet::kMaxSize) - 8)
      throw ConfigError("grid too large for the proposition alphabet");
    for (Cell c : {cheese, fire, home, start})
      if (!in_bounds(c)) throw ConfigError("grid cell out of bounds");
    if (cheese == fire || cheese == home || fire == home) throw ConfigError("cheese, fire and home cells must be distinct");
    if (!(p_in >= 0.0 && p_in <= 1.0)) throw ConfigError("p_in must lie in [0, 1]");
  }
};

struct GridState {
  Cell mouse;
  bool has_cheese = false;
  bool operator==(const GridState&) const = default;
};

inline Cell shift(const GridConfig& cfg, Cell c, Move m) {
  Cell n = c;
  switch (m) {
    case Move::Up: --n.j; break;
    case Move::Down: ++n.j; break;
    case Move::Left: --n.k; break;
    case Move::Right: ++n.k; break;
  }
  return cfg.in_bounds(n) ? n : c;
}

// Realized direction for an intended move, drawn from one uniform sample.
inline Move realize(Move intended, double p_in, std::mt19937_64& rng) {
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  if (u < p_in) return intended;
  const auto side = perpendicular(intended);
  return u < p_in + (1.0 - p_in) / 2.0 ? side[0] : side[1];
}

inline GridState apply_move(const GridConfig& cfg, const GridState& s, Move realized) {
  GridState next{shift(cfg, s.mouse, realized), s.has_cheese};
  if (next.mouse == cfg.cheese) next.has_cheese = true;
  return next;
}

inline GridState step(const GridConfig& cfg, const GridState& s, Move intended, std::mt19937_64& rng, Move* realized_out = nullptr) {
  const Move r = realize(intended, cfg.p_in, rng);
  if (realized_out) *realized_out = r;
  return apply_move(cfg, s, r);
}

// Alphabet A_j_k for every cell in row-major order, then Cheese, Fire, Home.
inline AlphabetPtr grid_alphabet(const GridConfig& cfg) {
  auto a = std::make_shared<Alphabet>();
  for (int j = 1; j <= cfg.height; ++j)
    for (int k = 1; k <= cfg.width; ++k) a->add("A_" + std::to_string(j) + "_" + std::to_string(k));
  a->add("Cheese");
  a->add("Fire");
  a->add("Home");
  return a;
}

inline std::uint64_t proposition_bits(const GridState& s, const GridConfig& cfg) {
  const int n = cfg.cells();
  std::uint64_t bits = std::uint64_t{1} << cfg.index(s.mouse);
  if (s.has_cheese) bits |= std::uint64_t{1} << n;
  if (s.mouse == cfg.fire) bits |= std::uint64_t{1} << (n + 1);
  if (s.mouse == cfg.home) bits |= std::uint64_t{1} << (n + 2);
  return bits;
}

inline StateVector propositions(const GridState& s, const GridConfig& cfg) {
  return StateVector(grid_alphabet(cfg), proposition_bits(s, cfg));
}

// Reward for arriving in `after` while pursuing `phase`.
inline double reward(const GridState& after, const GridConfig& cfg, Phase phase) {
  if (after.mouse == cfg.fire) return cfg.rewards.fire;
  if (phase == Phase::Cheese && after.mouse == cfg.cheese) return cfg.rewards.good;
  if (phase == Phase::Home && after.mouse == cfg.home && after.has_cheese) return cfg.rewards.good;
  return cfg.rewards.other;
}

// Arrival reward by cell for a phase, assuming the mouse carries the cheese
// in the home phase.
inline double cell_reward(const GridConfig& cfg, int cell, Phase phase) {
  return reward(GridState{cfg.cell(cell), phase == Phase::Home}, cfg, phase);
}

inline Cell phase_goal(const GridConfig& cfg, Phase phase) { return phase == Phase::Cheese ? cfg.cheese : cfg.home; }

// Analytic transition kernel over cells: P[(s * 4 + a) * n + s'].
struct Kernel {
  int states = 0;
  std::vector<double> p;

  double operator()(int s, int a, int s2) const { return p[(static_cast<std::size_t>(s) * kMoves + a) * states + s2]; }
  double& at(int s, int a, int s2) { return p[(static_cast<std::size_t>(s) * kMoves + a) * states + s2]; }
};

inline Kernel transition_kernel(const GridConfig& cfg) {
  const int n = cfg.cells();
  Kernel K{n, std::vector<double>(static_cast<std::size_t>(n) * kMoves * n, 0.0)};
  for (int s = 0; s < n; ++s)
    for (Move m : kAllMoves) {
      const Cell c = cfg.cell(s);
      const auto side = perpendicular(m);
      const int a = static_cast<int>(m);
      K.at(s, a, cfg.index(shift(cfg, c, m))) += cfg.p_in;
      K.at(s, a, cfg.index(shift(cfg, c, side[0]))) += (1.0 - cfg.p_in) / 2.0;
      K.at(s, a, cfg.index(shift(cfg, c, side[1]))) += (1.0 - cfg.p_in) / 2.0;
    }
  return K;
}

// Environment adapter: commands carry a Move; no command leaves the mouse in
// place. Optionally records a trajectory for CSV dumps.
class GridEnvironment : public Environment {
 public:
  GridEnvironment(GridConfig cfg, GridState start, std::uint64_t seed)
      : cfg_(std::move(cfg)), alphabet_(grid_alphabet(cfg_)), state_(start), rng_(seed) {
    cfg_.validate();
    if (state_.mouse == cfg_.cheese) state_.has_cheese = true;
  }
  GridEnvironment(const GridConfig& cfg, std::uint64_t seed) : GridEnvironment(cfg, GridState{cfg.start, false}, seed) {}

  AlphabetPtr alphabet() const override { return alphabet_; }
  std::uint64_t observe() const override { return proposition_bits(state_, cfg_); }
  std::mt19937_64& rng() override { return rng_; }

  void advance(const std::optional<ActionCommand>& command) override {
    Row row{tick_, cfg_.index(state_.mouse), -1, -1, 0.0};
    if (command) {
      Move realized;
      const Move intended = static_cast<Move>(command->action);
      state_ = step(cfg_, state_, intended, rng_, &realized);
      row.intended = command->action;
      row.realized = static_cast<int>(realized);
      row.reward = reward(state_, cfg_, command->binding == home_binding_ ? Phase::Home : Phase::Cheese);
    }
    if (record_) rows_.push_back(row);
    ++tick_;
  }

  const GridState& state() const noexcept { return state_; }
  const GridConfig& config() const noexcept { return cfg_; }
  void set_home_binding(std::string b) { home_binding_ = std::move(b); }
  void record(bool on) { record_ = on; }

  std::string trajectory_csv() const {
    std::ostringstream os;
    os << "tick,cell,action,realized,reward\n";
    for (const auto& r : rows_) {
      const Cell c = cfg_.cell(r.cell);
      os << r.tick << ",(" << c.j << ";" << c.k << ")," << (r.intended >= 0 ? to_string(static_cast<Move>(r.intended)) : "none")
         << ',' << (r.realized >= 0 ? to_string(static_cast<Move>(r.realized)) : "none") << ',' << r.reward << '\n';
    }
    return os.str();
  }

 private:
  struct Row {
    std::size_t tick;
    int cell;
    int intended;
    int realized;
    double reward;
  };

  GridConfig cfg_;
  AlphabetPtr alphabet_;
  GridState state_;
  std::mt19937_64 rng_;
  std::string home_binding_ = "Home";
  bool record_ = false;
  std::size_t tick_ = 0;
  std::vector<Row> rows_;
};

inline nlohmann::json to_json(const GridConfig& c) {
  auto cell = [](Cell x) { return nlohmann::json::array({x.j, x.k}); };
  return {{"width", c.width},
          {"height", c.height},
          {"cheese", cell(c.cheese)},
          {"fire", cell(c.fire)},
          {"home", cell(c.home)},
          {"start", cell(c.start)},
          {"p_in", c.p_in},
          {"rewards", {{"other", c.rewards.other}, {"good", c.rewards.good}, {"fire", c.rewards.fire}}},
          {"seed", c.seed},
          {"absorbing_fire", c.absorbing_fire},
          {"absorbing_goal", c.absorbing_goal}};
}

inline GridConfig grid_config_from_json(const nlohmann::json& j) {
  GridConfig c;
  auto cell = [](const nlohmann::json& x) { return Cell{x.at(0).get<int>(), x.at(1).get<int>()}; };
  c.width = j.value("width", c.width);
  c.height = j.value("height", c.height);
  if (j.contains("cheese")) c.cheese = cell(j["cheese"]);
  if (j.contains("fire")) c.fire = cell(j["fire"]);
  if (j.contains("home")) c.home = cell(j["home"]);
  if (j.contains("start")) c.start = cell(j["start"]);
  c.p_in = j.value("p_in", c.p_in);
  if (j.contains("rewards")) {
    const auto& r = j["rewards"];
    c.rewards.other = r.value("other", c.rewards.other);
    c.rewards.good = r.value("good", c.rewards.good);
    c.rewards.fire = r.value("fire", c.rewards.fire);
  }
  c.seed = j.value("seed", c.seed);
  c.absorbing_fire = j.value("absorbing_fire", c.absorbing_fire);
  c.absorbing_goal = j.value("absorbing_goal", c.absorbing_goal);
  c.validate();
  return c;
}

}  // namespace ppabt::grid
