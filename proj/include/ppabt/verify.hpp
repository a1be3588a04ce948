// Bounded empirical check that successful executions of a compiled tree
// satisfy the formula it was compiled from.
//
// check_inclusion drives the tree with every proposition stream up to a
// length bound. The tree is deterministic given the stream prefix, so the
// streams are explored as a prefix tree: each branch forks the runtime
// (a value copy of its blackboard) and ticks it once with the next state.
#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ppabt/bt.hpp"
#include "ppabt/compiler.hpp"
#include "ppabt/ltlf.hpp"
#include "ppabt/mission.hpp"

namespace ppabt {

inline constexpr std::size_t kMaxEnumAlphabet = 5;
inline constexpr std::size_t kMaxEnumLength = 6;

// Success implies satisfaction; failed traces may satisfy the formula.
inline bool audit_trace(const Formula& formula, const Trace& trace, Status status) {
  if (status != Status::Success) return true;
  return evaluate(formula, trace, 0);
}

inline bool audit_trace(const IndexedFormula& formula, std::span<const std::uint64_t> trace, Status status) {
  if (status != Status::Success) return true;
  return formula.holds(trace, 0);
}

// A successful episode whose trace violates the mission formula.
class AuditFailure : public Error {
 public:
  AuditFailure(const std::string& context, Trace trace)
      : Error("successful trace violates the mission formula (" + context + ")"), trace_(std::move(trace)) {}
  const Trace& trace() const noexcept { return trace_; }

 private:
  Trace trace_;
};

inline void check_enumeration_bound(std::size_t alphabet_size, std::size_t max_len) {
  if (alphabet_size > kMaxEnumAlphabet || max_len > kMaxEnumLength)
    throw BoundTooLarge("enumeration over " + std::to_string(alphabet_size) + " atoms and length " +
                        std::to_string(max_len) + " exceeds the 5-atom / length-6 guard");
  if (max_len == 0) throw BoundTooLarge("max_len must be positive");
}

// All traces of length 1..max_len over `alphabet` that satisfy `formula` at
// position 0, in length-then-lexicographic order.
inline std::vector<Trace> enumerate_language(const Formula& formula, const AlphabetPtr& alphabet, std::size_t max_len) {
  check_enumeration_bound(alphabet->size(), max_len);
  const IndexedFormula indexed(formula, *alphabet);
  const std::uint64_t valuations = std::uint64_t{1} << alphabet->size();
  std::vector<Trace> out;
  std::vector<std::uint64_t> states;
  for (std::size_t len = 1; len <= max_len; ++len) {
    states.assign(len, 0);
    while (true) {
      if (indexed.holds(states, 0)) out.emplace_back(alphabet, states, max_len);
      std::size_t k = len;
      while (k > 0 && ++states[k - 1] == valuations) states[--k] = 0;
      if (k == 0) break;
    }
  }
  return out;
}

struct InclusionReport {
  std::size_t bound = 0;
  std::size_t alphabet_size = 0;
  std::size_t n_streams = 0;  // distinct halted or bound-length prefixes explored
  std::size_t n_bt_success_traces = 0;
  std::size_t n_violations = 0;
  std::vector<Trace> counterexamples;

  nlohmann::json to_json() const {
    nlohmann::json j{{"bound", bound},
                     {"alphabet_size", alphabet_size},
                     {"n_streams", n_streams},
                     {"n_bt_success_traces", n_bt_success_traces},
                     {"n_violations", n_violations}};
    j["counterexamples"] = nlohmann::json::array();
    for (const auto& t : counterexamples) {
      nlohmann::json states = nlohmann::json::array();
      for (std::size_t i = 0; i < t.size(); ++i) states.push_back(t[i].to_json());
      j["counterexamples"].push_back(std::move(states));
    }
    return j;
  }

  // One row per (counterexample, position).
  std::string counterexamples_csv() const {
    std::ostringstream os;
    os << "trace,position";
    if (!counterexamples.empty())
      for (const auto& n : counterexamples.front().alphabet()->names()) os << ',' << n;
    os << '\n';
    for (std::size_t c = 0; c < counterexamples.size(); ++c) {
      const Trace& t = counterexamples[c];
      for (std::size_t i = 0; i < t.size(); ++i) {
        os << c << ',' << i;
        for (std::size_t a = 0; a < t.alphabet()->size(); ++a) os << ',' << ((t.bits()[i] >> a) & 1U);
        os << '\n';
      }
    }
    return os.str();
  }
};

namespace detail {

struct InclusionSearch {
  const ExecutableTree& tree;
  const IndexedFormula& formula;
  std::size_t bound;
  std::uint64_t valuations;
  InclusionReport& report;
  std::mt19937_64 rng{0};
  std::vector<std::uint64_t> states;

  void explore(const BtRuntime& runtime) {
    for (std::uint64_t v = 0; v < valuations; ++v) {
      BtRuntime fork = runtime;
      const std::uint64_t s = tree.with_action_props(v);
      states.push_back(s);
      const Status status = fork.tick(s, rng).status;
      if (status == Status::Running && states.size() < bound) {
        explore(fork);
      } else {
        ++report.n_streams;
        if (status == Status::Success) {
          ++report.n_bt_success_traces;
          if (!formula.holds(states, 0)) {
            ++report.n_violations;
            report.counterexamples.emplace_back(tree.alphabet(), states, bound);
          }
        }
      }
      states.pop_back();
    }
  }
};

}  // namespace detail

// Runs `tree` on every stream of valuations of the first `user_atoms`
// propositions of its alphabet, of length up to `bound`. Action runners
// should be passive: actions only change the world through the stream, and
// action propositions follow postcondition satisfaction.
inline InclusionReport check_inclusion(const std::shared_ptr<const ExecutableTree>& tree, const Formula& formula,
                                       std::size_t user_atoms, std::size_t bound) {
  check_enumeration_bound(user_atoms, bound);
  InclusionReport report;
  report.bound = bound;
  report.alphabet_size = user_atoms;
  const IndexedFormula indexed(formula, *tree->alphabet());
  detail::InclusionSearch search{*tree, indexed, bound, std::uint64_t{1} << user_atoms, report, {}, {}};
  BtRuntime runtime(tree);
  search.explore(runtime);
  return report;
}

// Compiles `expr`, binds passive runners and checks inclusion against the
// expanded mission formula.
inline InclusionReport check_mission_inclusion(const MissionExpr& expr, const MissionConfig& cfg, std::size_t bound) {
  const BtTree tree = compile_mission(expr, cfg);
  auto exec = bind_actions(tree, cfg.alphabet, passive_runners(tree));
  return check_inclusion(exec, expand_mission(expr), cfg.alphabet.size(), bound);
}

// Copy of `tree` with every global-constraint condition replaced by True.
inline BtTree remove_global_constraints(const BtTree& tree) {
  auto copy = std::make_shared<BtNode>(*tree);
  if (copy->kind == NodeKind::Condition && copy->role == ConditionRole::Global) copy->prop = ltl::truth();
  for (auto& c : copy->children) c = remove_global_constraints(c);
  return copy;
}

// ---------------------------------------------------------------------------
// Random missions
// ---------------------------------------------------------------------------

struct MissionFuzzConfig {
  std::size_t max_tasks = 3;
  std::size_t atoms_per_task = 3;
  std::size_t pool_size = 4;
  double finally_probability = 0.4;
};

inline Alphabet fuzz_alphabet(std::size_t pool_size) {
  Alphabet a;
  for (std::size_t i = 0; i < pool_size; ++i) a.add("p" + std::to_string(i));
  return a;
}

namespace detail {

inline Formula random_condition(std::mt19937_64& rng, const std::vector<std::string>& atoms) {
  auto pick = [&] { return ltl::atom(atoms[std::uniform_int_distribution<std::size_t>(0, atoms.size() - 1)(rng)]); };
  switch (std::uniform_int_distribution<int>(0, 5)(rng)) {
    case 0: return ltl::truth();
    case 1: return ltl::negate(pick());
    case 2: return ltl::conj(pick(), pick());
    case 3: return ltl::disj(pick(), pick());
    default: return pick();
  }
}

inline PpaTaskSpec random_task(std::mt19937_64& rng, const std::string& name, const Alphabet& pool,
                               std::size_t atoms_per_task) {
  std::vector<std::string> names = pool.names();
  std::shuffle(names.begin(), names.end(), rng);
  names.resize(std::min(atoms_per_task, names.size()));
  return PpaTaskSpec{name,
                     random_condition(rng, names),
                     random_condition(rng, names),
                     random_condition(rng, names),
                     random_condition(rng, names),
                     "act_" + name};
}

inline MissionExpr random_shape(std::mt19937_64& rng, std::vector<MissionExpr>& leaves, std::size_t lo,
                                std::size_t hi, double p_finally) {
  MissionExpr e;
  if (hi - lo == 1) {
    e = leaves[lo];
  } else {
    const std::size_t mid = std::uniform_int_distribution<std::size_t>(lo + 1, hi - 1)(rng);
    const MissionOp op = std::array{MissionOp::Or, MissionOp::And, MissionOp::Until}[std::uniform_int_distribution<int>(0, 2)(rng)];
    e = mission::binary(op, random_shape(rng, leaves, lo, mid, p_finally), random_shape(rng, leaves, mid, hi, p_finally));
  }
  if (std::bernoulli_distribution(p_finally)(rng)) e = mission::finally(e);
  return e;
}

}  // namespace detail

// Random mission over pool atoms p0..p{pool-1}: 1..max_tasks distinct tasks
// combined by | & U with F wrappers at random.
inline MissionExpr random_mission(std::mt19937_64& rng, const MissionFuzzConfig& cfg = {}) {
  const Alphabet pool = fuzz_alphabet(cfg.pool_size);
  const std::size_t n = std::uniform_int_distribution<std::size_t>(1, cfg.max_tasks)(rng);
  std::vector<MissionExpr> leaves;
  for (std::size_t i = 0; i < n; ++i)
    leaves.push_back(mission::task(detail::random_task(rng, "t" + std::to_string(i), pool, cfg.atoms_per_task)));
  return detail::random_shape(rng, leaves, 0, n, cfg.finally_probability);
}

}  // namespace ppabt
