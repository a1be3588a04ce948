#include <gtest/gtest.h>

#include <random>

#include "ppabt/bt.hpp"
#include "ppabt/compiler.hpp"
#include "ppabt/experiments.hpp"

using namespace ppabt;

namespace {

const Alphabet kAbc({"a", "b", "c"});

constexpr std::uint64_t A = 1, B = 2, C = 4;

enum class Leaf { S, F, R };

// Leaf with a fixed status: True / False conditions, or an action whose
// postcondition never holds (Running until its budget runs out).
BtTree leaf(BtBuilder& b, Leaf l, int n) {
  switch (l) {
    case Leaf::S: return b.condition(ltl::truth());
    case Leaf::F: return b.condition(ltl::falsity());
    case Leaf::R: return b.action("r" + std::to_string(n), ltl::falsity(), 100, "r" + std::to_string(n));
  }
  return nullptr;
}

std::shared_ptr<const ExecutableTree> bind_passive(const BtTree& t) { return bind_actions(t, kAbc, passive_runners(t)); }

Status tick_once(const BtTree& t, std::uint64_t state) {
  std::mt19937_64 rng(0);
  BtRuntime rt(bind_passive(t));
  return rt.tick(state, rng).status;
}

Status expected(NodeKind kind, Leaf l, Leaf r) {
  auto s = [](Leaf x) { return x == Leaf::S ? Status::Success : x == Leaf::F ? Status::Failure : Status::Running; };
  const Status x = s(l), y = s(r);
  switch (kind) {
    case NodeKind::Sequence: return x != Status::Success ? x : y;
    case NodeKind::Selector: return x != Status::Failure ? x : y;
    default:
      if (x == Status::Failure || y == Status::Failure) return Status::Failure;
      if (x == Status::Success && y == Status::Success) return Status::Success;
      return Status::Running;
  }
}

std::optional<Status> status_of(const TickResult& r, int id) {
  for (const auto& ns : r.visited)
    if (ns.id == id) return ns.status;
  return std::nullopt;
}

}  // namespace

TEST(BtTick, ControlNodeTruthTables) {
  for (NodeKind kind : {NodeKind::Sequence, NodeKind::Selector, NodeKind::Parallel})
    for (Leaf l : {Leaf::S, Leaf::F, Leaf::R})
      for (Leaf r : {Leaf::S, Leaf::F, Leaf::R}) {
        BtBuilder b;
        std::vector<BtTree> kids{leaf(b, l, 0), leaf(b, r, 1)};
        BtTree t = kind == NodeKind::Sequence ? b.sequence(kids) : kind == NodeKind::Selector ? b.selector(kids) : b.parallel(kids);
        EXPECT_EQ(tick_once(t, 0), expected(kind, l, r)) << to_string(kind) << ' ' << int(l) << ' ' << int(r);
      }
}

TEST(BtTick, SelectorEvaluatesSecondChild) {
  BtBuilder b;
  BtTree cb = b.condition(ltl::atom("b"));
  BtTree t = b.selector({b.condition(ltl::atom("a")), cb});
  std::mt19937_64 rng(0);
  BtRuntime rt(bind_passive(t), true);
  const TickResult r = rt.tick(B, rng);
  EXPECT_EQ(r.status, Status::Success);
  EXPECT_EQ(status_of(r, cb->id), Status::Success);
}

TEST(BtTick, SequenceSkipsActionAfterFailure) {
  BtBuilder b;
  BtTree act = b.action("x", ltl::atom("c"), 10, "x");
  BtTree t = b.sequence({b.condition(ltl::atom("a")), act});
  std::map<std::string, ActionRunner> runners{{"x", ActionRunner{"x", [](const StateVector&, std::mt19937_64&) { return std::optional<int>{3}; }, nullptr, std::nullopt}}};
  std::mt19937_64 rng(0);
  BtRuntime rt(bind_actions(t, kAbc, runners), true);
  const TickResult r = rt.tick(0, rng);
  EXPECT_EQ(r.status, Status::Failure);
  EXPECT_FALSE(status_of(r, act->id).has_value());
  EXPECT_FALSE(r.command.has_value());
}

TEST(BtTick, ActionSucceedsOnlyOnPostcondition) {
  BtBuilder b;
  BtTree t = b.action("x", ltl::atom("c"), 2, "x");
  auto exec = bind_passive(t);
  std::mt19937_64 rng(0);
  {
    BtRuntime rt(exec);
    EXPECT_EQ(rt.tick(C, rng).status, Status::Success);
  }
  BtRuntime rt(exec);
  EXPECT_EQ(rt.tick(0, rng).status, Status::Running);
  EXPECT_EQ(rt.tick(0, rng).status, Status::Running);
  EXPECT_EQ(rt.tick(0, rng).status, Status::Failure);
}

TEST(BtTick, NegationSwapsTerminalStatuses) {
  BtBuilder b;
  EXPECT_EQ(tick_once(b.negation(b.condition(ltl::atom("a"))), A), Status::Failure);
  BtBuilder b2;
  EXPECT_EQ(tick_once(b2.negation(b2.condition(ltl::atom("a"))), 0), Status::Success);
  BtBuilder b3;
  EXPECT_EQ(tick_once(b3.negation(leaf(b3, Leaf::R, 0)), 0), Status::Running);
}

TEST(BtTick, PreconditionLatchPassesFailureUntilSuccess) {
  BtBuilder b;
  BtTree latch = b.precondition_latch(b.condition(ltl::atom("a")));
  BtTree t = b.parallel({b.negation(latch), leaf(b, Leaf::R, 0)});
  std::mt19937_64 rng(0);
  BtRuntime rt(bind_passive(t), true);
  EXPECT_EQ(status_of(rt.tick(0, rng), latch->id), Status::Failure);
  EXPECT_EQ(status_of(rt.tick(0, rng), latch->id), Status::Failure);
  EXPECT_FALSE(rt.halted());
  EXPECT_EQ(status_of(rt.tick(A, rng), latch->id), Status::Success);
}

TEST(BtTick, PreconditionLatchHoldsAfterConditionDrops) {
  BtBuilder b;
  BtTree latch = b.precondition_latch(b.condition(ltl::atom("a")));
  BtTree t = b.parallel({latch, leaf(b, Leaf::R, 0)});
  std::mt19937_64 rng(0);
  BtRuntime rt(bind_passive(t), true);
  EXPECT_EQ(status_of(rt.tick(A, rng), latch->id), Status::Success);
  EXPECT_EQ(status_of(rt.tick(0, rng), latch->id), Status::Success);
  EXPECT_EQ(status_of(rt.tick(0, rng), latch->id), Status::Success);
}

TEST(BtTick, FinallyResetBudget) {
  for (int theta : {0, 1, 2}) {
    BtBuilder b;
    BtTree t = b.finally_reset(b.condition(ltl::atom("a")), theta);
    std::mt19937_64 rng(0);
    BtRuntime rt(bind_passive(t));
    for (int i = 0; i < theta; ++i) {
      const TickResult r = rt.tick(0, rng);
      EXPECT_EQ(r.status, Status::Running);
      EXPECT_EQ(r.resets, 1);
    }
    EXPECT_EQ(rt.tick(0, rng).status, Status::Failure) << theta;
  }
}

TEST(BtTick, FinallyResetRetriesTaskBoundary) {
  BtBuilder b;
  BtTree boundary = b.task_boundary(b.condition(ltl::atom("a")), "t");
  BtTree t = b.finally_reset(boundary, 1);
  std::mt19937_64 rng(0);
  BtRuntime rt(bind_passive(t));
  EXPECT_EQ(rt.tick(0, rng).status, Status::Running);
  EXPECT_FALSE(rt.blackboard().memory(boundary->id).latched);
  EXPECT_EQ(rt.tick(A, rng).status, Status::Success);
}

TEST(BtTick, FinallyDoesNotLatchSuccess) {
  BtBuilder b;
  BtTree fin = b.finally_reset(b.condition(ltl::atom("a")), 0);
  BtTree t = b.parallel({fin, leaf(b, Leaf::R, 0)});
  std::mt19937_64 rng(0);
  BtRuntime rt(bind_passive(t), true);
  EXPECT_EQ(status_of(rt.tick(A, rng), fin->id), Status::Success);
  EXPECT_EQ(status_of(rt.tick(0, rng), fin->id), Status::Failure);
}

TEST(BtTick, TaskBoundaryHoldsFailure) {
  BtBuilder b;
  BtTree boundary = b.task_boundary(b.condition(ltl::atom("a")), "t");
  BtTree t = b.parallel({b.negation(boundary), leaf(b, Leaf::R, 0)});
  std::mt19937_64 rng(0);
  BtRuntime rt(bind_passive(t), true);
  EXPECT_EQ(status_of(rt.tick(0, rng), boundary->id), Status::Failure);
  EXPECT_EQ(status_of(rt.tick(A, rng), boundary->id), Status::Failure);
}

TEST(BtTick, MissionRootTimeout) {
  BtBuilder b;
  BtTree t = b.mission_root(leaf(b, Leaf::R, 0), 3);
  std::mt19937_64 rng(0);
  BtRuntime rt(bind_passive(t));
  EXPECT_EQ(rt.tick(0, rng).status, Status::Running);
  EXPECT_EQ(rt.tick(0, rng).status, Status::Running);
  EXPECT_EQ(rt.tick(0, rng).status, Status::Failure);
}

TEST(BtTick, HaltedRuntimeRepeatsFinalStatus) {
  BtBuilder b;
  BtTree t = b.condition(ltl::atom("a"));
  std::mt19937_64 rng(0);
  BtRuntime rt(bind_passive(t));
  EXPECT_EQ(rt.tick(A, rng).status, Status::Success);
  const Blackboard before = rt.blackboard();
  EXPECT_EQ(rt.tick(0, rng).status, Status::Success);
  EXPECT_TRUE(rt.halted());
  EXPECT_EQ(rt.tick_index(), 1u);
  EXPECT_TRUE(rt.blackboard() == before);
}

TEST(BtTick, ConcurrentActionConflict) {
  BtBuilder b;
  BtTree t = b.parallel({b.action("x", ltl::atom("a"), 5, "x"), b.action("y", ltl::atom("b"), 5, "y")});
  auto issue = [](int a) { return [a](const StateVector&, std::mt19937_64&) { return std::optional<int>{a}; }; };
  std::map<std::string, ActionRunner> runners{{"x", {"x", issue(0), nullptr, std::nullopt}}, {"y", {"y", issue(1), nullptr, std::nullopt}}};
  std::mt19937_64 rng(0);
  BtRuntime rt(bind_actions(t, kAbc, runners));
  EXPECT_THROW(rt.tick(0, rng), ConcurrentActionConflict);
  BtRuntime ok(bind_actions(t, kAbc, runners));
  EXPECT_EQ(ok.tick(A, rng).status, Status::Running);  // only y still runs
}

TEST(BtBind, UnboundAction) {
  const MissionDocument d = parse_mission_document(kC2hMission);
  const BtTree t = compile_mission(d.expr, d.config);
  std::map<std::string, ActionRunner> runners{{"Cheese", passive_runner("Cheese")}};
  try {
    bind_actions(t, d.config.alphabet, runners);
    FAIL() << "expected UnboundAction";
  } catch (const UnboundAction& e) {
    EXPECT_EQ(e.binding(), "Home");
  }
}

TEST(BtRun, StreamEpisode) {
  BtBuilder b;
  BtTree t = b.mission_root(b.sequence({b.finally_reset(b.condition(ltl::atom("a")), 3), b.condition(ltl::atom("b"))}), 10);
  auto exec = bind_passive(t);
  BtRuntime rt(exec);
  StreamEnvironment env(std::make_shared<Alphabet>(kAbc), {0, 0, A | B});
  const Episode ep = run_to_completion(rt, env, 10);
  EXPECT_EQ(ep.status, Status::Success);
  EXPECT_EQ(ep.trace.size(), 3u);
  EXPECT_EQ(ep.log.total_resets(), 2);
}

TEST(BtExport, DotAndJson) {
  const MissionDocument d = parse_mission_document(kC2hMission);
  const BtTree t = compile_mission(d.expr, d.config);
  const std::string dot = export_dot(t);
  EXPECT_EQ(dot.rfind("digraph", 0), 0u);
  std::size_t edges = 0;
  for (std::size_t p = dot.find("->"); p != std::string::npos; p = dot.find("->", p + 2)) ++edges;
  EXPECT_EQ(edges, node_count(t) - 1);
  const auto j = to_json(t);
  EXPECT_EQ(j["kind"], "decorator");
  EXPECT_EQ(j["decorator"], to_string(DecoratorKind::MissionRoot));
}
