// MissionExpr -> behavior tree translation.
#pragma once

#include <map>
#include <memory>
#include <string>

#include "ppabt/bt.hpp"
#include "ppabt/mission.hpp"

namespace ppabt {

// Task tree for one PPA task:
//
//   ?  ( ⇉ (gc, post),
//        ⇉ ( ⇉ (gc, latch(pre)),
//            → (tc, → (action, gc)) ) )
inline BtTree compile_task(const PpaTaskSpec& spec, const MissionConfig& cfg, BtBuilder& b) {
  validate_task(spec);
  cfg.validate();
  BtTree done = b.parallel({b.condition(spec.gc, ConditionRole::Global), b.condition(spec.poc, ConditionRole::Post)});
  BtTree ready = b.parallel({b.condition(spec.gc, ConditionRole::Global),
                             b.precondition_latch(b.condition(spec.prc, ConditionRole::Pre))});
  BtTree act = b.sequence({b.action(spec.action, spec.poc, cfg.t_task_max, spec.name),
                           b.condition(spec.gc, ConditionRole::Global)});
  BtTree until = b.sequence({b.condition(spec.tc, ConditionRole::Task), act});
  return b.selector({done, b.parallel({ready, until})});
}

inline BtTree compile_task(const PpaTaskSpec& spec, const MissionConfig& cfg) {
  BtBuilder b;
  return compile_task(spec, cfg, b);
}

namespace detail {

inline BtTree compile_mission_body(const MissionExpr& e, const MissionConfig& cfg, BtBuilder& b) {
  switch (e->op) {
    case MissionOp::Task: return b.task_boundary(compile_task(*e->task, cfg, b), e->task->name);
    case MissionOp::Finally: return b.finally_reset(compile_mission_body(e->lhs, cfg, b), cfg.theta);
    case MissionOp::Or:
      return b.selector({compile_mission_body(e->lhs, cfg, b), compile_mission_body(e->rhs, cfg, b)});
    case MissionOp::And:
      return b.parallel({compile_mission_body(e->lhs, cfg, b), compile_mission_body(e->rhs, cfg, b)});
    case MissionOp::Until:
      return b.sequence({compile_mission_body(e->lhs, cfg, b), compile_mission_body(e->rhs, cfg, b)});
  }
  throw ConfigError("corrupt mission expression");
}

}  // namespace detail

// Mission tree: a MissionRoot clock over the operator structure, with
// | -> selector, & -> parallel, U -> sequence, F -> FinallyReset(theta) and
// each task wrapped in a TaskBoundary.
inline BtTree compile_mission(const MissionExpr& expr, const MissionConfig& cfg) {
  cfg.validate();
  BtBuilder b;
  BtTree body = detail::compile_mission_body(expr, cfg, b);
  return b.mission_root(body, cfg.t_task_max);
}

// User alphabet extended with the action proposition of every action node.
inline AlphabetPtr tree_alphabet(const Alphabet& user, const BtTree& tree) {
  auto out = std::make_shared<Alphabet>(user);
  visit_preorder(tree, [&](const BtNode& n) {
    if (n.kind == NodeKind::Action) out->add(action_atom(n.label));
  });
  return out;
}

// Attaches a runner to every action node. Throws UnboundAction naming the
// first binding without a runner.
inline std::shared_ptr<const ExecutableTree> bind_actions(const BtTree& tree, const Alphabet& user_alphabet,
                                                          std::map<std::string, ActionRunner> runners) {
  return std::make_shared<const ExecutableTree>(tree, tree_alphabet(user_alphabet, tree), std::move(runners));
}

// Runner map with a command-free runner for every binding in the tree.
inline std::map<std::string, ActionRunner> passive_runners(const BtTree& tree) {
  std::map<std::string, ActionRunner> out;
  visit_preorder(tree, [&](const BtNode& n) {
    if (n.kind == NodeKind::Action) out.emplace(n.binding, passive_runner(n.binding));
  });
  return out;
}

}  // namespace ppabt
