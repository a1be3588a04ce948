// Behavior-tree data structure and tick interpreter.
//
// Trees are immutable and shareable; all mutable execution state (latches,
// reset counters, action clocks, the mission clock) lives in a Blackboard
// indexed by node id. A BtRuntime pairs one executable tree with one
// blackboard and is the single-threaded unit of execution. Copying a
// runtime forks the execution, which the bounded checker relies on.
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "ppabt/errors.hpp"
#include "ppabt/ltlf.hpp"

namespace ppabt {

enum class Status { Success, Failure, Running };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::Success: return "success";
    case Status::Failure: return "failure";
    case Status::Running: return "running";
  }
  return "";
}

enum class NodeKind { Sequence, Selector, Parallel, Condition, Action, Decorator };
enum class DecoratorKind { Negation, PreconditionLatch, FinallyReset, MissionRoot, TaskBoundary };

// What a condition node checks inside a task tree. Only used for labels and
// for mutation testing; it has no effect on tick semantics.
enum class ConditionRole { Plain, Global, Post, Pre, Task };

inline const char* to_string(NodeKind k) {
  switch (k) {
    case NodeKind::Sequence: return "sequence";
    case NodeKind::Selector: return "selector";
    case NodeKind::Parallel: return "parallel";
    case NodeKind::Condition: return "condition";
    case NodeKind::Action: return "action";
    case NodeKind::Decorator: return "decorator";
  }
  return "";
}

inline const char* to_string(DecoratorKind k) {
  switch (k) {
    case DecoratorKind::Negation: return "negation";
    case DecoratorKind::PreconditionLatch: return "precondition_latch";
    case DecoratorKind::FinallyReset: return "finally_reset";
    case DecoratorKind::MissionRoot: return "mission_root";
    case DecoratorKind::TaskBoundary: return "task_boundary";
  }
  return "";
}

inline const char* to_string(ConditionRole r) {
  switch (r) {
    case ConditionRole::Plain: return "plain";
    case ConditionRole::Global: return "gc";
    case ConditionRole::Post: return "post";
    case ConditionRole::Pre: return "pre";
    case ConditionRole::Task: return "tc";
  }
  return "";
}

struct BtNode;
using BtTree = std::shared_ptr<const BtNode>;

struct BtNode {
  NodeKind kind = NodeKind::Condition;
  int id = 0;
  std::vector<BtTree> children;
  Formula prop;  // Condition: proposition; Action: postcondition of its task
  ConditionRole role = ConditionRole::Plain;
  std::string binding;  // Action
  std::string label;    // task name for Action / TaskBoundary
  DecoratorKind decorator = DecoratorKind::TaskBoundary;
  int theta = 0;       // FinallyReset
  int t_task_max = 1;  // MissionRoot and Action
};

// Hands out node ids in creation order, so a tree built by one builder has
// ids 0..count()-1.
class BtBuilder {
 public:
  BtTree sequence(std::vector<BtTree> children) { return control(NodeKind::Sequence, std::move(children)); }
  BtTree selector(std::vector<BtTree> children) { return control(NodeKind::Selector, std::move(children)); }
  BtTree parallel(std::vector<BtTree> children) { return control(NodeKind::Parallel, std::move(children)); }

  BtTree condition(Formula prop, ConditionRole role = ConditionRole::Plain) {
    if (!is_propositional(prop)) throw ConfigError("condition nodes take propositional formulas");
    auto n = make(NodeKind::Condition);
    n->prop = std::move(prop);
    n->role = role;
    return n;
  }

  BtTree action(std::string binding, Formula postcondition, int t_task_max, std::string task_name = {}) {
    if (t_task_max < 1) throw ConfigError("t_task_max must be >= 1");
    auto n = make(NodeKind::Action);
    n->binding = std::move(binding);
    n->prop = std::move(postcondition);
    n->t_task_max = t_task_max;
    n->label = task_name.empty() ? n->binding : std::move(task_name);
    return n;
  }

  BtTree negation(BtTree child) { return decorator(DecoratorKind::Negation, std::move(child)); }
  BtTree precondition_latch(BtTree child) { return decorator(DecoratorKind::PreconditionLatch, std::move(child)); }
  BtTree task_boundary(BtTree child, std::string task_name) {
    auto n = decorator_node(DecoratorKind::TaskBoundary, std::move(child));
    n->label = std::move(task_name);
    return n;
  }
  BtTree finally_reset(BtTree child, int theta) {
    if (theta < 0) throw ConfigError("theta must be >= 0");
    auto n = decorator_node(DecoratorKind::FinallyReset, std::move(child));
    n->theta = theta;
    return n;
  }
  BtTree mission_root(BtTree child, int t_task_max) {
    if (t_task_max < 1) throw ConfigError("t_task_max must be >= 1");
    auto n = decorator_node(DecoratorKind::MissionRoot, std::move(child));
    n->t_task_max = t_task_max;
    return n;
  }

  int count() const noexcept { return next_id_; }

 private:
  std::shared_ptr<BtNode> make(NodeKind kind) {
    auto n = std::make_shared<BtNode>();
    n->kind = kind;
    n->id = next_id_++;
    return n;
  }
  BtTree control(NodeKind kind, std::vector<BtTree> children) {
    if (children.empty()) throw ConfigError("control nodes need at least one child");
    auto n = make(kind);
    n->children = std::move(children);
    return n;
  }
  std::shared_ptr<BtNode> decorator_node(DecoratorKind kind, BtTree child) {
    if (!child) throw ConfigError("decorator needs a child");
    auto n = make(NodeKind::Decorator);
    n->decorator = kind;
    n->children.push_back(std::move(child));
    return n;
  }
  BtTree decorator(DecoratorKind kind, BtTree child) { return decorator_node(kind, std::move(child)); }

  int next_id_ = 0;
};

template <typename Fn>
void visit_preorder(const BtTree& node, Fn&& fn) {
  fn(*node);
  for (const auto& c : node->children) visit_preorder(c, fn);
}

inline std::size_t node_count(const BtTree& tree) {
  std::size_t n = 0;
  visit_preorder(tree, [&](const BtNode&) { ++n; });
  return n;
}

inline int max_node_id(const BtTree& tree) {
  int m = -1;
  visit_preorder(tree, [&](const BtNode& n) { m = std::max(m, n.id); });
  return m;
}

inline bool structurally_equal(const BtTree& a, const BtTree& b) {
  if (a->kind != b->kind || a->id != b->id || a->children.size() != b->children.size()) return false;
  if (a->role != b->role || a->binding != b->binding || a->label != b->label) return false;
  if (a->kind == NodeKind::Decorator &&
      (a->decorator != b->decorator || a->theta != b->theta || a->t_task_max != b->t_task_max))
    return false;
  if (a->kind == NodeKind::Action && a->t_task_max != b->t_task_max) return false;
  if ((a->prop || b->prop) && !(a->prop && b->prop && ppabt::structurally_equal(a->prop, b->prop))) return false;
  for (std::size_t i = 0; i < a->children.size(); ++i)
    if (!structurally_equal(a->children[i], b->children[i])) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Blackboard
// ---------------------------------------------------------------------------

struct NodeMemory {
  bool latched = false;  // PreconditionLatch success; TaskBoundary failure
  int resets = 0;        // FinallyReset resets issued
  int elapsed = 0;       // Action ticks this attempt; MissionRoot ticks
};

using BlackboardValue = std::variant<bool, std::int64_t, double, std::string>;

// Global-scope key/value store plus per-node memory.
class Blackboard {
 public:
  explicit Blackboard(std::size_t nodes = 0) : memory_(nodes) {}

  void set(const std::string& key, BlackboardValue value) { entries_[key] = std::move(value); }
  const BlackboardValue* find(const std::string& key) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? nullptr : &it->second;
  }
  const std::map<std::string, BlackboardValue>& entries() const noexcept { return entries_; }

  NodeMemory& memory(int id) { return memory_.at(static_cast<std::size_t>(id)); }
  const NodeMemory& memory(int id) const { return memory_.at(static_cast<std::size_t>(id)); }
  std::size_t node_slots() const noexcept { return memory_.size(); }

  void clear() {
    entries_.clear();
    for (auto& m : memory_) m = NodeMemory{};
  }

  bool operator==(const Blackboard& o) const {
    if (entries_ != o.entries_ || memory_.size() != o.memory_.size()) return false;
    for (std::size_t i = 0; i < memory_.size(); ++i) {
      const auto& x = memory_[i];
      const auto& y = o.memory_[i];
      if (x.latched != y.latched || x.resets != y.resets || x.elapsed != y.elapsed) return false;
    }
    return true;
  }

 private:
  std::map<std::string, BlackboardValue> entries_;
  std::vector<NodeMemory> memory_;
};

// ---------------------------------------------------------------------------
// Actions and executable trees
// ---------------------------------------------------------------------------

// Environment command emitted by an action node. `action` is interpreted by
// the environment (a grid move, a plan step, ...).
struct ActionCommand {
  std::string binding;
  int action = 0;
  std::uint64_t state = 0;  // observed state when the command was chosen
};

// Plan or policy behind an action node. The node itself applies the success
// rule (postcondition holds and clock <= budget); `plan` is only consulted
// while the action is running and may return no command.
struct ActionRunner {
  std::string binding;
  std::function<std::optional<int>(const StateVector&, std::mt19937_64&)> plan;
  Formula postcondition;              // defaults to the node's postcondition
  std::optional<int> t_task_max;      // defaults to the node's budget
};

class ExecutableTree {
 public:
  ExecutableTree(BtTree root, AlphabetPtr alphabet, std::map<std::string, ActionRunner> runners)
      : root_(std::move(root)), alphabet_(std::move(alphabet)), runners_(std::move(runners)) {
    slots_ = static_cast<std::size_t>(max_node_id(root_) + 1);
    props_.resize(slots_);
    budgets_.assign(slots_, 1);
    visit_preorder(root_, [&](const BtNode& n) {
      const auto id = static_cast<std::size_t>(n.id);
      if (n.kind == NodeKind::Condition) props_[id].emplace(n.prop, *alphabet_);
      if (n.kind != NodeKind::Action) return;
      auto it = runners_.find(n.binding);
      if (it == runners_.end()) throw UnboundAction(n.binding);
      const ActionRunner& r = it->second;
      props_[id].emplace(r.postcondition ? r.postcondition : n.prop, *alphabet_);
      budgets_[id] = r.t_task_max.value_or(n.t_task_max);
      derived_.push_back({alphabet_->find(action_atom(n.label)), IndexedFormula(n.prop, *alphabet_)});
    });
  }

  const BtTree& root() const noexcept { return root_; }
  const AlphabetPtr& alphabet() const noexcept { return alphabet_; }
  std::size_t slots() const noexcept { return slots_; }
  const IndexedFormula& prop(int id) const { return *props_.at(static_cast<std::size_t>(id)); }
  int budget(int id) const { return budgets_.at(static_cast<std::size_t>(id)); }
  const ActionRunner& runner(const std::string& binding) const { return runners_.at(binding); }

  // Sets each task's action proposition to its postcondition's value:
  // an action is true exactly when the postcondition it drives is satisfied.
  std::uint64_t with_action_props(std::uint64_t bits) const {
    for (const auto& d : derived_) {
      if (!d.index) continue;
      const std::uint64_t mask = std::uint64_t{1} << *d.index;
      bits = d.post.eval_state(bits) ? (bits | mask) : (bits & ~mask);
    }
    return bits;
  }

 private:
  struct Derived {
    std::optional<std::size_t> index;
    IndexedFormula post;
  };

  BtTree root_;
  AlphabetPtr alphabet_;
  std::map<std::string, ActionRunner> runners_;
  std::size_t slots_ = 0;
  std::vector<std::optional<IndexedFormula>> props_;
  std::vector<int> budgets_;
  std::vector<Derived> derived_;
};

// A runner whose plan never issues commands; the world evolves on its own.
inline ActionRunner passive_runner(std::string binding) {
  return ActionRunner{std::move(binding), [](const StateVector&, std::mt19937_64&) { return std::optional<int>{}; }, nullptr, std::nullopt};
}

// ---------------------------------------------------------------------------
// Ticking
// ---------------------------------------------------------------------------

struct NodeStatus {
  int id;
  Status status;
};

struct TickResult {
  Status status = Status::Running;
  std::optional<ActionCommand> command;
  std::vector<NodeStatus> visited;  // filled when logging is enabled
  int resets = 0;                   // reset signals issued this tick
};

class BtRuntime {
 public:
  explicit BtRuntime(std::shared_ptr<const ExecutableTree> tree, bool log_nodes = false)
      : tree_(std::move(tree)), blackboard_(tree_->slots()), log_nodes_(log_nodes) {}

  // Ticks the root once against `state` (bits over the tree's alphabet).
  // After the root first returns Success or Failure the runtime is halted
  // and further ticks return that status without touching the blackboard.
  TickResult tick(std::uint64_t state, std::mt19937_64& rng) {
    TickResult result;
    if (halted_) {
      result.status = *final_;
      return result;
    }
    state_ = state;
    rng_ = &rng;
    out_ = &result;
    result.status = tick_node(*tree_->root());
    out_ = nullptr;
    rng_ = nullptr;
    ++tick_index_;
    if (result.status != Status::Running) {
      halted_ = true;
      final_ = result.status;
    }
    return result;
  }

  TickResult tick(const StateVector& state, std::mt19937_64& rng) { return tick(state.bits(), rng); }

  const Blackboard& blackboard() const noexcept { return blackboard_; }
  Blackboard& blackboard() noexcept { return blackboard_; }
  const ExecutableTree& tree() const noexcept { return *tree_; }
  bool halted() const noexcept { return halted_; }
  std::size_t tick_index() const noexcept { return tick_index_; }

  // Clears latches and action clocks below `node` (reset counters of nested
  // FinallyReset nodes are kept, so every node's reset budget stays bounded).
  void reset_descendant_decorators(const BtNode& node) {
    for (const auto& child : node.children)
      visit_preorder(child, [&](const BtNode& n) {
        NodeMemory& m = blackboard_.memory(n.id);
        m.latched = false;
        m.elapsed = 0;
      });
  }

 private:
  Status record(const BtNode& n, Status s) {
    if (log_nodes_) out_->visited.push_back({n.id, s});
    return s;
  }

  Status tick_node(const BtNode& n) {
    switch (n.kind) {
      case NodeKind::Condition:
        return record(n, tree_->prop(n.id).eval_state(state_) ? Status::Success : Status::Failure);
      case NodeKind::Action: return record(n, tick_action(n));
      case NodeKind::Sequence:
        for (const auto& c : n.children) {
          const Status s = tick_node(*c);
          if (s != Status::Success) return record(n, s);
        }
        return record(n, Status::Success);
      case NodeKind::Selector:
        for (const auto& c : n.children) {
          const Status s = tick_node(*c);
          if (s != Status::Failure) return record(n, s);
        }
        return record(n, Status::Failure);
      case NodeKind::Parallel: {
        bool any_failed = false;
        bool all_succeeded = true;
        for (const auto& c : n.children) {
          const Status s = tick_node(*c);
          any_failed = any_failed || s == Status::Failure;
          all_succeeded = all_succeeded && s == Status::Success;
        }
        return record(n, any_failed ? Status::Failure : all_succeeded ? Status::Success : Status::Running);
      }
      case NodeKind::Decorator: return record(n, tick_decorator(n));
    }
    return Status::Failure;
  }

  Status tick_action(const BtNode& n) {
    NodeMemory& m = blackboard_.memory(n.id);
    const int budget = tree_->budget(n.id);
    const bool post = tree_->prop(n.id).eval_state(state_);
    const int t = m.elapsed;
    if (post && t <= budget) return Status::Success;
    if (!post && t < budget) {
      const ActionRunner& runner = tree_->runner(n.binding);
      StateVector sv(tree_->alphabet(), state_);
      if (auto cmd = runner.plan(sv, *rng_)) {
        if (out_->command) throw ConcurrentActionConflict(out_->command->binding, n.binding);
        out_->command = ActionCommand{n.binding, *cmd, state_};
      }
      ++m.elapsed;
      return Status::Running;
    }
    return Status::Failure;
  }

  Status tick_decorator(const BtNode& n) {
    const BtNode& child = *n.children.front();
    NodeMemory& m = blackboard_.memory(n.id);
    switch (n.decorator) {
      case DecoratorKind::Negation: {
        const Status s = tick_node(child);
        return s == Status::Success ? Status::Failure : s == Status::Failure ? Status::Success : s;
      }
      case DecoratorKind::TaskBoundary: {
        // A failed task stays failed until an enclosing Finally resets it.
        if (m.latched) return Status::Failure;
        const Status s = tick_node(child);
        if (s == Status::Failure) m.latched = true;
        return s;
      }
      case DecoratorKind::PreconditionLatch: {
        if (m.latched) return Status::Success;
        const Status s = tick_node(child);
        if (s == Status::Success) m.latched = true;
        return s;
      }
      case DecoratorKind::FinallyReset: {
        // Success only on a tick where the child succeeds; no success latch.
        const Status s = tick_node(child);
        if (s != Status::Failure) return s;
        if (m.resets < n.theta) {
          reset_descendant_decorators(n);
          ++m.resets;
          ++out_->resets;
          return Status::Running;
        }
        return Status::Failure;
      }
      case DecoratorKind::MissionRoot: {
        const Status s = tick_node(child);
        const int t = m.elapsed++;
        if (s == Status::Running && t + 1 >= n.t_task_max) return Status::Failure;
        return s;
      }
    }
    return Status::Failure;
  }

  std::shared_ptr<const ExecutableTree> tree_;
  Blackboard blackboard_;
  bool log_nodes_;
  bool halted_ = false;
  std::optional<Status> final_;
  std::size_t tick_index_ = 0;
  std::uint64_t state_ = 0;
  std::mt19937_64* rng_ = nullptr;
  TickResult* out_ = nullptr;
};

// ---------------------------------------------------------------------------
// Environments and episodes
// ---------------------------------------------------------------------------

class Environment {
 public:
  virtual ~Environment() = default;
  virtual AlphabetPtr alphabet() const = 0;
  virtual std::uint64_t observe() const = 0;
  // Advances one tick, applying `command` if an action issued one.
  virtual void advance(const std::optional<ActionCommand>& command) = 0;
  virtual std::mt19937_64& rng() = 0;
};

// Replays a fixed proposition stream, holding the last state once exhausted.
class StreamEnvironment : public Environment {
 public:
  StreamEnvironment(AlphabetPtr alphabet, std::vector<std::uint64_t> states, std::uint64_t seed = 0)
      : alphabet_(std::move(alphabet)), states_(std::move(states)), rng_(seed) {
    if (states_.empty()) throw ConfigError("stream environment needs at least one state");
  }
  AlphabetPtr alphabet() const override { return alphabet_; }
  std::uint64_t observe() const override { return states_[pos_]; }
  void advance(const std::optional<ActionCommand>&) override {
    if (pos_ + 1 < states_.size()) ++pos_;
  }
  std::mt19937_64& rng() override { return rng_; }

 private:
  AlphabetPtr alphabet_;
  std::vector<std::uint64_t> states_;
  std::size_t pos_ = 0;
  std::mt19937_64 rng_;
};

struct TickRecord {
  std::size_t tick = 0;
  std::uint64_t state = 0;
  Status root = Status::Running;
  std::vector<NodeStatus> nodes;
  std::optional<ActionCommand> command;
  int resets = 0;
};

struct EpisodeLog {
  std::vector<TickRecord> ticks;

  int total_resets() const {
    int n = 0;
    for (const auto& t : ticks) n += t.resets;
    return n;
  }

  // First tick at which node `id` returned `status`, if any.
  std::optional<std::size_t> first_status(int id, Status status) const {
    for (const auto& t : ticks)
      for (const auto& ns : t.nodes)
        if (ns.id == id && ns.status == status) return t.tick;
    return std::nullopt;
  }

  std::string to_jsonl(const Alphabet& alphabet) const {
    std::ostringstream os;
    for (const auto& t : ticks) {
      nlohmann::json j;
      j["tick"] = t.tick;
      j["state"] = StateVector(std::make_shared<Alphabet>(alphabet), t.state).to_json();
      j["root"] = to_string(t.root);
      nlohmann::json nodes = nlohmann::json::object();
      for (const auto& ns : t.nodes) nodes[std::to_string(ns.id)] = to_string(ns.status);
      j["nodes"] = std::move(nodes);
      if (t.command) j["command"] = {{"binding", t.command->binding}, {"action", t.command->action}};
      j["resets"] = t.resets;
      os << j.dump() << '\n';
    }
    return os.str();
  }
};

struct Episode {
  Status status = Status::Running;  // Running means the trace bound was hit
  Trace trace;
  EpisodeLog log;
};

// Observes, ticks and advances until the root halts or the trace holds
// `max_len` states. Observations are widened with the tree's action
// propositions; the environment alphabet must prefix the tree alphabet.
inline Episode run_to_completion(BtRuntime& runtime, Environment& env, std::size_t max_len, bool keep_log = true) {
  const Alphabet& tree_alpha = *runtime.tree().alphabet();
  const Alphabet& env_alpha = *env.alphabet();
  for (std::size_t i = 0; i < env_alpha.size(); ++i)
    if (i >= tree_alpha.size() || tree_alpha.name(i) != env_alpha.name(i))
      throw ConfigError("environment alphabet is not a prefix of the tree alphabet");
  if (max_len == 0) throw ConfigError("max trace length must be positive");

  std::vector<std::uint64_t> states;
  EpisodeLog log;
  Status status = Status::Running;
  while (true) {
    const std::uint64_t s = runtime.tree().with_action_props(env.observe());
    states.push_back(s);
    TickResult r = runtime.tick(s, env.rng());
    status = r.status;
    if (keep_log)
      log.ticks.push_back(TickRecord{states.size() - 1, s, r.status, std::move(r.visited), r.command, r.resets});
    if (status != Status::Running || states.size() == max_len) break;
    env.advance(r.command);
  }
  return Episode{status, Trace(runtime.tree().alphabet(), std::move(states), max_len), std::move(log)};
}

// ---------------------------------------------------------------------------
// Export
// ---------------------------------------------------------------------------

inline std::string node_symbol(const BtNode& n) {
  switch (n.kind) {
    case NodeKind::Sequence: return "→";
    case NodeKind::Selector: return "?";
    case NodeKind::Parallel: return "⇉";
    case NodeKind::Decorator: return "◇";
    case NodeKind::Action: return "□";
    case NodeKind::Condition: return "◯";
  }
  return "";
}

inline std::string node_caption(const BtNode& n) {
  switch (n.kind) {
    case NodeKind::Condition: return std::string(to_string(n.role)) + ": " + format(n.prop);
    case NodeKind::Action: return n.binding;
    case NodeKind::Decorator:
      switch (n.decorator) {
        case DecoratorKind::Negation: return "¬";
        case DecoratorKind::PreconditionLatch: return "F latch";
        case DecoratorKind::FinallyReset: return "F reset θ=" + std::to_string(n.theta);
        case DecoratorKind::MissionRoot: return "mission T=" + std::to_string(n.t_task_max);
        case DecoratorKind::TaskBoundary: return "task " + n.label;
      }
      break;
    default: break;
  }
  return {};
}

inline std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

inline std::string export_dot(const BtTree& tree) {
  std::ostringstream os;
  os << "digraph bt {\n  node [fontname=\"Helvetica\"];\n";
  visit_preorder(tree, [&](const BtNode& n) {
    const char* shape = n.kind == NodeKind::Condition ? "ellipse"
                        : n.kind == NodeKind::Action  ? "box"
                        : n.kind == NodeKind::Decorator ? "diamond"
                                                        : "square";
    std::string label = node_symbol(n);
    const std::string caption = node_caption(n);
    if (!caption.empty()) label += "\\n" + dot_escape(caption);
    os << "  n" << n.id << " [shape=" << shape << ", label=\"" << label << "\"];\n";
  });
  visit_preorder(tree, [&](const BtNode& n) {
    for (const auto& c : n.children) os << "  n" << n.id << " -> n" << c->id << ";\n";
  });
  os << "}\n";
  return os.str();
}

inline nlohmann::json to_json(const BtTree& tree) {
  const BtNode& n = *tree;
  nlohmann::json j;
  j["id"] = n.id;
  j["kind"] = to_string(n.kind);
  switch (n.kind) {
    case NodeKind::Condition:
      j["role"] = to_string(n.role);
      j["prop"] = format(n.prop);
      break;
    case NodeKind::Action:
      j["binding"] = n.binding;
      j["task"] = n.label;
      j["postcondition"] = format(n.prop);
      j["t_task_max"] = n.t_task_max;
      break;
    case NodeKind::Decorator:
      j["decorator"] = to_string(n.decorator);
      if (n.decorator == DecoratorKind::FinallyReset) j["theta"] = n.theta;
      if (n.decorator == DecoratorKind::MissionRoot) j["t_task_max"] = n.t_task_max;
      if (n.decorator == DecoratorKind::TaskBoundary) j["task"] = n.label;
      break;
    default: break;
  }
  if (!n.children.empty()) {
    j["children"] = nlohmann::json::array();
    for (const auto& c : n.children) j["children"].push_back(to_json(c));
  }
  return j;
}

}  // namespace ppabt
