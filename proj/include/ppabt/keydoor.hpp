// Symbolic key-door-prize block world and the scripted trials comparing a
// compiled mission tree against a plain if-else chain of the same plans.
//
// Each stage plan needs `plan_ticks` commands to take effect. A disturbance
// hits one stage once: the blocks are displaced (the stage plan restarts)
// and the planner reports an error for one tick, or for good when the
// disturbance is irreversible.
#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ppabt/bt.hpp"
#include "ppabt/compiler.hpp"
#include "ppabt/mission.hpp"
#include "ppabt/verify.hpp"

namespace ppabt::keydoor {

inline constexpr const char* kMission = R"(# Stack the key on the door, move the stack out, then move the prize out.
alphabet NoErr KeyStacked IsKeyDoor VisibleKeyDoor KeyDoorPassive PrizePassive PrizeVisible
theta 1
t_task_max 50
task key(post=KeyStacked, pre=IsKeyDoor, gc=NoErr, tc=VisibleKeyDoor, action=StackKey)
task door(post=KeyDoorPassive, pre=KeyStacked, gc=NoErr, tc=KeyStacked, action=MoveKeyDoor)
task prize(post=PrizePassive, pre=PrizeVisible, gc=NoErr, tc=KeyDoorPassive, action=MovePrize)
mission U (F key) (U (F door) (F prize))
)";

enum class Stage { Key = 0, Door = 1, Prize = 2 };
inline constexpr std::array<const char*, 3> kStageNames{"key", "door", "prize"};
inline constexpr std::array<const char*, 3> kBindings{"StackKey", "MoveKeyDoor", "MovePrize"};

struct Disturbance {
  Stage stage = Stage::Key;
  int at_progress = 1;  // fires when the stage plan has made this many steps
};

struct ScenarioScript {
  std::optional<Disturbance> disturbance;
  bool irreversible = false;  // door and prize disturbances leave a permanent error
  int plan_ticks = 3;
  int theta = 1;
  int t_task_max = 50;
};

struct WorldState {
  bool error = false;
  bool key_stacked = false;
  bool stack_passive = false;
  bool prize_passive = false;
  bool prize_on_table = true;
};

inline AlphabetPtr world_alphabet() {
  auto a = std::make_shared<Alphabet>();
  for (const char* n : {"NoErr", "KeyStacked", "IsKeyDoor", "VisibleKeyDoor", "KeyDoorPassive", "PrizePassive", "PrizeVisible"})
    a->add(n);
  return a;
}

inline std::uint64_t world_bits(const WorldState& w) {
  const bool props[7] = {!w.error,
                         w.key_stacked,
                         true,
                         !w.key_stacked && !w.stack_passive,
                         w.stack_passive,
                         w.prize_passive,
                         w.prize_on_table && !w.prize_passive};
  std::uint64_t bits = 0;
  for (int i = 0; i < 7; ++i)
    if (props[i]) bits |= std::uint64_t{1} << i;
  return bits;
}

class World : public Environment {
 public:
  explicit World(ScenarioScript script, std::uint64_t seed = 0)
      : script_(std::move(script)), alphabet_(world_alphabet()), rng_(seed) {}

  AlphabetPtr alphabet() const override { return alphabet_; }
  std::uint64_t observe() const override { return world_bits(state_); }
  std::mt19937_64& rng() override { return rng_; }

  // Commands carry the stage index.
  void advance(const std::optional<ActionCommand>& command) override {
    if (transient_error_) {
      state_.error = false;
      transient_error_ = false;
    }
    if (command) step(static_cast<Stage>(command->action));
  }

  void step(Stage stage) {
    const auto s = static_cast<std::size_t>(stage);
    if (state_.error) return;
    ++progress_[s];
    if (pending() && script_.disturbance->stage == stage && progress_[s] == script_.disturbance->at_progress) {
      disturb(stage);
      return;
    }
    if (progress_[s] < script_.plan_ticks) return;
    progress_[s] = 0;
    switch (stage) {
      case Stage::Key: state_.key_stacked = !state_.stack_passive; break;
      case Stage::Door:
        if (state_.key_stacked) state_.stack_passive = true;
        break;
      case Stage::Prize:
        if (state_.prize_on_table) state_.prize_passive = true;
        break;
    }
  }

  const WorldState& state() const noexcept { return state_; }
  bool disturbed() const noexcept { return disturbed_; }
  bool done() const noexcept { return state_.key_stacked && state_.stack_passive && state_.prize_passive; }

 private:
  bool pending() const { return script_.disturbance && !disturbed_; }

  void disturb(Stage stage) {
    disturbed_ = true;
    progress_[static_cast<std::size_t>(stage)] = 0;
    state_.error = true;
    const bool permanent = script_.irreversible && stage != Stage::Key;
    transient_error_ = !permanent;
    if (permanent && stage == Stage::Prize) state_.prize_on_table = false;
  }

  ScenarioScript script_;
  AlphabetPtr alphabet_;
  std::mt19937_64 rng_;
  WorldState state_;
  std::array<int, 3> progress_{};
  bool transient_error_ = false;
  bool disturbed_ = false;
};

struct TrialResult {
  Status status = Status::Failure;
  std::size_t ticks = 0;
  int resets = 0;
};

// If-else chain: each stage runs only if its precondition holds, and any
// error observed while a plan runs aborts the mission.
inline TrialResult run_baseline(const ScenarioScript& script) {
  World world(script);
  TrialResult r;
  auto pre = [&](Stage s) {
    const WorldState& w = world.state();
    switch (s) {
      case Stage::Key: return !w.key_stacked;
      case Stage::Door: return w.key_stacked;
      case Stage::Prize: return w.stack_passive && w.prize_on_table;
    }
    return false;
  };
  auto post = [&](Stage s) {
    const WorldState& w = world.state();
    return s == Stage::Key ? w.key_stacked : s == Stage::Door ? w.stack_passive : w.prize_passive;
  };
  for (Stage s : {Stage::Key, Stage::Door, Stage::Prize}) {
    if (!pre(s)) return r;
    while (!post(s)) {
      if (static_cast<int>(r.ticks) >= script.t_task_max) return r;
      world.advance(ActionCommand{kBindings[static_cast<std::size_t>(s)], static_cast<int>(s), world.observe()});
      ++r.ticks;
      if (world.state().error) return r;
    }
  }
  r.status = Status::Success;
  return r;
}

// Scripted runners issue their stage index every tick they run.
inline std::map<std::string, ActionRunner> scripted_runners() {
  std::map<std::string, ActionRunner> out;
  for (int s = 0; s < 3; ++s)
    out.emplace(kBindings[static_cast<std::size_t>(s)],
                ActionRunner{kBindings[static_cast<std::size_t>(s)],
                             [s](const StateVector&, std::mt19937_64&) { return std::optional<int>{s}; }, nullptr, std::nullopt});
  return out;
}

struct CompiledMission {
  MissionDocument doc;
  Formula formula;
  std::shared_ptr<const ExecutableTree> exec;
};

inline CompiledMission compile_keydoor(const ScenarioScript& script, std::string_view text = kMission) {
  CompiledMission c;
  c.doc = parse_mission_document(text);
  c.doc.config.theta = script.theta;
  c.doc.config.t_task_max = script.t_task_max;
  const BtTree tree = compile_mission(c.doc.expr, c.doc.config);
  c.formula = expand_mission(c.doc.expr);
  c.exec = bind_actions(tree, *world_alphabet(), scripted_runners());
  return c;
}

inline TrialResult run_bt(const CompiledMission& mission, const ScenarioScript& script) {
  World world(script);
  BtRuntime runtime(mission.exec);
  Episode ep = run_to_completion(runtime, world, static_cast<std::size_t>(script.t_task_max) + 1);
  if (!audit_trace(mission.formula, ep.trace, ep.status)) throw AuditFailure("key-door trial", ep.trace);
  TrialResult r;
  r.status = ep.status == Status::Success ? Status::Success : Status::Failure;
  r.ticks = ep.trace.size();
  r.resets = ep.log.total_resets();
  return r;
}

struct TrialRow {
  int trial = 0;
  std::string condition;  // "normal" or the disturbed stage
  int at_progress = 0;
  TrialResult result;
};

struct KeydoorReport {
  std::string mode;
  bool irreversible = false;
  std::vector<TrialRow> rows;

  int successes(const std::string& condition) const {
    int n = 0;
    for (const auto& r : rows) n += r.condition == condition && r.result.status == Status::Success;
    return n;
  }
  int count(const std::string& condition) const {
    int n = 0;
    for (const auto& r : rows) n += r.condition == condition;
    return n;
  }
  int disturbed_successes() const { return successes("key") + successes("door") + successes("prize"); }

  nlohmann::json to_json() const {
    nlohmann::json j{{"mode", mode}, {"irreversible", irreversible}};
    for (const char* c : {"normal", "key", "door", "prize"})
      j["summary"][c] = {{"success", successes(c)}, {"failure", count(c) - successes(c)}};
    for (const auto& r : rows)
      j["trials"].push_back({{"trial", r.trial},
                             {"condition", r.condition},
                             {"at_progress", r.at_progress},
                             {"status", to_string(r.result.status)},
                             {"ticks", r.result.ticks},
                             {"resets", r.result.resets}});
    return j;
  }

  std::string to_csv() const {
    std::ostringstream os;
    os << "mode,trial,condition,at_progress,status,ticks,resets\n";
    for (const auto& r : rows)
      os << mode << ',' << r.trial << ',' << r.condition << ',' << r.at_progress << ',' << to_string(r.result.status) << ','
         << r.result.ticks << ',' << r.result.resets << '\n';
    return os.str();
  }
};

// 25 trials: 10 undisturbed, then 5 disturbed at each stage. The step at
// which a disturbance hits is drawn from `seed`.
inline KeydoorReport run_keydoor(bool bt_mode, std::uint64_t seed, bool irreversible = false, int theta = 1, int plan_ticks = 3) {
  KeydoorReport rep{bt_mode ? "bt" : "baseline", irreversible, {}};
  std::mt19937_64 rng(seed);
  ScenarioScript base;
  base.irreversible = irreversible;
  base.theta = theta;
  base.plan_ticks = plan_ticks;
  const CompiledMission mission = compile_keydoor(base);
  int trial = 0;
  auto run = [&](const ScenarioScript& s) { return bt_mode ? run_bt(mission, s) : run_baseline(s); };
  for (int i = 0; i < 10; ++i) rep.rows.push_back({trial++, "normal", 0, run(base)});
  for (int st = 0; st < 3; ++st)
    for (int i = 0; i < 5; ++i) {
      ScenarioScript s = base;
      const int at = std::uniform_int_distribution<int>(1, std::max(1, plan_ticks - 1))(rng);
      s.disturbance = Disturbance{static_cast<Stage>(st), at};
      rep.rows.push_back({trial++, kStageNames[static_cast<std::size_t>(st)], at, run(s)});
    }
  return rep;
}

}  // namespace ppabt::keydoor
