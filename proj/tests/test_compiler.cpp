#include <gtest/gtest.h>

#include <random>

#include "ppabt/compiler.hpp"
#include "ppabt/experiments.hpp"
#include "ppabt/keydoor.hpp"
#include "ppabt/verify.hpp"

using namespace ppabt;

namespace {

// Compact shape string: S(...) sequence, ?(...) selector, P(...) parallel,
// decorators by initial, leaves by role or binding.
std::string shape(const BtTree& t) {
  const BtNode& n = *t;
  std::string head;
  switch (n.kind) {
    case NodeKind::Sequence: head = "S"; break;
    case NodeKind::Selector: head = "?"; break;
    case NodeKind::Parallel: head = "P"; break;
    case NodeKind::Condition: return std::string(to_string(n.role)) + ":" + format(n.prop);
    case NodeKind::Action: return "act:" + n.binding;
    case NodeKind::Decorator:
      switch (n.decorator) {
        case DecoratorKind::Negation: head = "Not"; break;
        case DecoratorKind::PreconditionLatch: head = "Latch"; break;
        case DecoratorKind::FinallyReset: head = "F" + std::to_string(n.theta); break;
        case DecoratorKind::MissionRoot: head = "Root" + std::to_string(n.t_task_max); break;
        case DecoratorKind::TaskBoundary: head = "Task:" + n.label; break;
      }
  }
  std::string out = head + "(";
  for (std::size_t i = 0; i < n.children.size(); ++i) out += (i ? "," : "") + shape(n.children[i]);
  return out + ")";
}

std::string task_shape(const std::string& gc, const std::string& post, const std::string& pre, const std::string& tc,
                       const std::string& act) {
  const std::string g = std::string(to_string(ConditionRole::Global)) + ":" + gc;
  return "?(P(" + g + "," + to_string(ConditionRole::Post) + ":" + post + "),P(P(" + g + ",Latch(" +
         to_string(ConditionRole::Pre) + ":" + pre + ")),S(" + to_string(ConditionRole::Task) + ":" + tc + ",S(act:" + act +
         "," + g + "))))";
}

}  // namespace

TEST(Compiler, CheeseTaskTemplate) {
  const MissionDocument d = parse_mission_document(kC2hMission);
  const BtTree t = compile_task(*d.tasks.at("cheese"), d.config);
  EXPECT_EQ(shape(t), task_shape("! Fire", "Cheese", "True", "True", "Cheese"));
  EXPECT_EQ(node_count(t), 14u);
}

TEST(Compiler, KeyTaskConstraintIsLeftOfUntil) {
  const MissionDocument d = parse_mission_document(keydoor::kMission);
  const BtTree t = compile_task(*d.tasks.at("key"), d.config);
  EXPECT_EQ(shape(t), task_shape("NoErr", "KeyStacked", "IsKeyDoor", "VisibleKeyDoor", "StackKey"));
}

TEST(Compiler, TrivialPostconditionSucceedsImmediately) {
  const Alphabet a({"g"});
  const PpaTaskSpec spec{"t", ltl::truth(), ltl::atom("g"), ltl::atom("g"), ltl::truth(), "X"};
  MissionConfig cfg;
  cfg.alphabet = a;
  const BtTree t = compile_task(spec, cfg);
  BtRuntime rt(bind_actions(t, a, passive_runners(t)));
  std::mt19937_64 rng(0);
  EXPECT_EQ(rt.tick(1, rng).status, Status::Success);
  BtRuntime rt2(bind_actions(t, a, passive_runners(t)));
  EXPECT_EQ(rt2.tick(0, rng).status, Status::Failure);
}

TEST(Compiler, C2hMissionShape) {
  const MissionDocument d = parse_mission_document(kC2hMission);
  const BtTree t = compile_mission(d.expr, d.config);
  const std::string expected = "Root50(S(F1(Task:cheese(" + task_shape("! Fire", "Cheese", "True", "True", "Cheese") +
                               ")),F1(Task:home(" + task_shape("! Fire", "Home", "Cheese", "True", "Home") + "))))";
  EXPECT_EQ(shape(t), expected);
}

TEST(Compiler, SingleTaskMission) {
  const MissionDocument d = parse_mission_document("alphabet a\ntask t(post=a, action=X)\nmission t\n");
  const BtTree t = compile_mission(d.expr, d.config);
  ASSERT_EQ(t->decorator, DecoratorKind::MissionRoot);
  ASSERT_EQ(t->children.front()->decorator, DecoratorKind::TaskBoundary);
  EXPECT_EQ(t->children.front()->children.front()->kind, NodeKind::Selector);
}

TEST(Compiler, KeydoorNestedSequences) {
  const MissionDocument d = parse_mission_document(keydoor::kMission);
  const BtTree t = compile_mission(d.expr, d.config);
  const BtNode& body = *t->children.front();
  ASSERT_EQ(body.kind, NodeKind::Sequence);
  EXPECT_EQ(body.children[0]->children[0]->label, "key");
  ASSERT_EQ(body.children[1]->kind, NodeKind::Sequence);
  EXPECT_EQ(body.children[1]->children[0]->children[0]->label, "door");
  EXPECT_EQ(body.children[1]->children[1]->children[0]->label, "prize");
}

TEST(Compiler, PureAndLinear) {
  std::mt19937_64 rng(31);
  for (int i = 0; i < 200; ++i) {
    const MissionExpr e = random_mission(rng);
    MissionConfig cfg;
    cfg.alphabet = fuzz_alphabet(4);
    const BtTree a = compile_mission(e, cfg);
    const BtTree b = compile_mission(e, cfg);
    EXPECT_TRUE(structurally_equal(a, b));
    EXPECT_LE(node_count(a), 15 * mission_size(e) + 1);
  }
}

TEST(Compiler, ActionPropositionFollowsPostcondition) {
  const MissionDocument d = parse_mission_document(kC2hMission);
  const BtTree t = compile_mission(d.expr, d.config);
  auto exec = bind_actions(t, d.config.alphabet, passive_runners(t));
  const Alphabet& a = *exec->alphabet();
  const std::uint64_t cheese = std::uint64_t{1} << a.index_of("Cheese");
  const std::uint64_t widened = exec->with_action_props(cheese);
  EXPECT_TRUE((widened >> a.index_of("__action_cheese")) & 1U);
  EXPECT_FALSE((widened >> a.index_of("__action_home")) & 1U);
}
