// Task and mission front-end.
//
// A PPA task bundles four propositional conditions and an action binding.
// Its LTLf meaning is
//
//   | (& (G gc) post) (& (& (G gc) (F pre)) (U tc (& __action_<name> (G gc))))
//
// Missions combine tasks with prefix | & U F:
//
//   mission ::= L1 | '|' mission L1
//   L1      ::= L2 | '&' L1 L2
//   L2      ::= L3 | 'U' L2 L3
//   L3      ::= 'F' L3 | '(' mission ')' | task-literal | task-name
//
// Mission documents may also carry declarations before the expression:
//
//   # comment
//   alphabet Cheese Fire Home
//   theta 1
//   t_task_max 50
//   task cheese(post=Cheese, pre=True, gc=!Fire, tc=True, action=Cheese)
//   mission U (F cheese) (F task(home, post=Home, pre=Cheese, gc=!Fire))
//
// Condition fields use infix `! & | ( )` over alphabet atoms and True/False.
#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ppabt/errors.hpp"
#include "ppabt/lexer.hpp"
#include "ppabt/ltlf.hpp"

namespace ppabt {

struct PpaTaskSpec {
  std::string name;
  Formula poc;
  Formula prc;
  Formula gc;
  Formula tc;
  std::string action;  // planner binding key

  bool operator==(const PpaTaskSpec& o) const {
    return name == o.name && action == o.action && structurally_equal(poc, o.poc) &&
           structurally_equal(prc, o.prc) && structurally_equal(gc, o.gc) && structurally_equal(tc, o.tc);
  }
};

struct MissionConfig {
  int t_task_max = 50;
  int theta = 1;
  Alphabet alphabet;

  void validate() const {
    if (t_task_max < 1) throw ConfigError("t_task_max must be >= 1");
    if (theta < 0) throw ConfigError("theta must be >= 0");
  }
};

enum class MissionOp { Task, Or, And, Until, Finally };

struct MissionNode;
using MissionExpr = std::shared_ptr<const MissionNode>;

struct MissionNode {
  MissionOp op = MissionOp::Task;
  std::shared_ptr<const PpaTaskSpec> task;  // Task only
  MissionExpr lhs;                          // Finally child or left operand
  MissionExpr rhs;
};

namespace mission {

inline MissionExpr task(PpaTaskSpec spec) {
  return std::make_shared<MissionNode>(
      MissionNode{MissionOp::Task, std::make_shared<const PpaTaskSpec>(std::move(spec)), nullptr, nullptr});
}
inline MissionExpr task(std::shared_ptr<const PpaTaskSpec> spec) {
  return std::make_shared<MissionNode>(MissionNode{MissionOp::Task, std::move(spec), nullptr, nullptr});
}
inline MissionExpr finally(MissionExpr child) {
  return std::make_shared<MissionNode>(MissionNode{MissionOp::Finally, nullptr, std::move(child), nullptr});
}
inline MissionExpr binary(MissionOp op, MissionExpr a, MissionExpr b) {
  return std::make_shared<MissionNode>(MissionNode{op, nullptr, std::move(a), std::move(b)});
}
inline MissionExpr disj(MissionExpr a, MissionExpr b) { return binary(MissionOp::Or, std::move(a), std::move(b)); }
inline MissionExpr conj(MissionExpr a, MissionExpr b) { return binary(MissionOp::And, std::move(a), std::move(b)); }
inline MissionExpr until(MissionExpr a, MissionExpr b) { return binary(MissionOp::Until, std::move(a), std::move(b)); }

}  // namespace mission

inline bool is_binary(MissionOp op) { return op == MissionOp::Or || op == MissionOp::And || op == MissionOp::Until; }

inline bool structurally_equal(const MissionExpr& a, const MissionExpr& b) {
  if (a == b) return true;
  if (!a || !b || a->op != b->op) return false;
  if (a->op == MissionOp::Task) return *a->task == *b->task;
  if (!structurally_equal(a->lhs, b->lhs)) return false;
  return !is_binary(a->op) || structurally_equal(a->rhs, b->rhs);
}

inline void collect_tasks(const MissionExpr& e, std::vector<std::shared_ptr<const PpaTaskSpec>>& out) {
  if (e->op == MissionOp::Task) {
    for (const auto& t : out)
      if (t->name == e->task->name) return;
    out.push_back(e->task);
    return;
  }
  collect_tasks(e->lhs, out);
  if (is_binary(e->op)) collect_tasks(e->rhs, out);
}

// Distinct tasks of a mission in first-occurrence order.
inline std::vector<std::shared_ptr<const PpaTaskSpec>> mission_tasks(const MissionExpr& e) {
  std::vector<std::shared_ptr<const PpaTaskSpec>> out;
  collect_tasks(e, out);
  return out;
}

inline std::size_t mission_size(const MissionExpr& e) {
  if (!e) return 0;
  return 1 + mission_size(e->lhs) + mission_size(e->rhs);
}

// ---------------------------------------------------------------------------
// Task expansion
// ---------------------------------------------------------------------------

inline void check_condition(const Formula& f, const char* field) {
  if (!f) throw ConfigError(std::string("task condition '") + field + "' missing");
  if (!is_propositional(f)) throw TemporalOperatorInCondition(field);
  for (const auto& a : atoms_of(f))
    if (is_action_atom(a)) throw ReservedAtom(a);
}

inline void validate_task(const PpaTaskSpec& spec) {
  if (!is_valid_identifier(spec.name)) throw ConfigError("invalid task name '" + spec.name + "'");
  if (!is_valid_identifier(spec.action)) throw ConfigError("invalid action binding '" + spec.action + "'");
  check_condition(spec.poc, "post");
  check_condition(spec.prc, "pre");
  check_condition(spec.gc, "gc");
  check_condition(spec.tc, "tc");
}

inline Formula expand_task(const PpaTaskSpec& spec) {
  validate_task(spec);
  using namespace ltl;
  Formula always_gc = globally(spec.gc);
  Formula done = conj(always_gc, spec.poc);
  Formula ready = conj(always_gc, finally(spec.prc));
  Formula act = until(spec.tc, conj(atom(action_atom(spec.name)), always_gc));
  return disj(done, conj(ready, act));
}

inline Formula expand_mission(const MissionExpr& e) {
  switch (e->op) {
    case MissionOp::Task: return expand_task(*e->task);
    case MissionOp::Finally: return ltl::finally(expand_mission(e->lhs));
    case MissionOp::Or: return ltl::disj(expand_mission(e->lhs), expand_mission(e->rhs));
    case MissionOp::And: return ltl::conj(expand_mission(e->lhs), expand_mission(e->rhs));
    case MissionOp::Until: return ltl::until(expand_mission(e->lhs), expand_mission(e->rhs));
  }
  throw ConfigError("corrupt mission expression");
}

// Alphabet of a mission's expanded formula: the user alphabet followed by
// one action proposition per task.
inline Alphabet mission_alphabet(const Alphabet& user, const MissionExpr& e) {
  Alphabet out = user;
  for (const auto& t : mission_tasks(e)) out.add(action_atom(t->name));
  return out;
}

// ---------------------------------------------------------------------------
// Concrete syntax
// ---------------------------------------------------------------------------

inline std::string format_condition(const Formula& f) {
  switch (f->op) {
    case Op::Atom: return f->name;
    case Op::Not: return "!" + (f->lhs->op == Op::Atom ? f->lhs->name : "(" + format_condition(f->lhs) + ")");
    case Op::And:
    case Op::Or: {
      auto side = [](const Formula& g) { return g->op == Op::Atom || g->op == Op::Not ? format_condition(g) : "(" + format_condition(g) + ")"; };
      return side(f->lhs) + (f->op == Op::And ? " & " : " | ") + side(f->rhs);
    }
    default: throw TemporalOperatorInCondition("format");
  }
}

inline std::string format_task_literal(const PpaTaskSpec& t) {
  return "task(" + t.name + ", post=" + format_condition(t.poc) + ", pre=" + format_condition(t.prc) +
         ", gc=" + format_condition(t.gc) + ", tc=" + format_condition(t.tc) + ", action=" + t.action + ")";
}

// Canonical prefix text with every task written as a literal.
inline std::string format_mission(const MissionExpr& e) {
  auto operand = [](const MissionExpr& m) {
    return m->op == MissionOp::Task ? format_mission(m) : "(" + format_mission(m) + ")";
  };
  switch (e->op) {
    case MissionOp::Task: return format_task_literal(*e->task);
    case MissionOp::Finally: return "F " + operand(e->lhs);
    case MissionOp::Or: return "| " + operand(e->lhs) + " " + operand(e->rhs);
    case MissionOp::And: return "& " + operand(e->lhs) + " " + operand(e->rhs);
    case MissionOp::Until: return "U " + operand(e->lhs) + " " + operand(e->rhs);
  }
  return {};
}

struct MissionDocument {
  MissionExpr expr;
  MissionConfig config;
  std::map<std::string, std::shared_ptr<const PpaTaskSpec>> tasks;
};

namespace detail {

class MissionParser {
 public:
  MissionParser(std::string_view text, const Alphabet* alphabet)
      : cur_(tokenize(text, true)), external_alphabet_(alphabet) {
    if (alphabet) doc_.config.alphabet = *alphabet;
  }

  MissionDocument parse_document() {
    while (true) {
      const Token& t = cur_.peek();
      if (t.is_ident("alphabet") && cur_.peek(1).kind == TokenKind::Identifier) {
        parse_alphabet();
      } else if (t.is_ident("theta") && cur_.peek(1).kind == TokenKind::Integer) {
        cur_.take();
        doc_.config.theta = std::stoi(cur_.take().text);
      } else if (t.is_ident("t_task_max") && cur_.peek(1).kind == TokenKind::Integer) {
        cur_.take();
        doc_.config.t_task_max = std::stoi(cur_.take().text);
      } else if (t.is_ident("task") && cur_.peek(1).kind == TokenKind::Identifier) {
        cur_.take();
        register_task(parse_task_body());
      } else {
        break;
      }
    }
    if (cur_.peek().is_ident("mission") && !doc_.tasks.count("mission")) cur_.take();
    if (cur_.at_end()) cur_.fail("mission expression");
    doc_.expr = mission_expr();
    if (!cur_.at_end()) cur_.fail("end of input");
    doc_.config.validate();
    return std::move(doc_);
  }

 private:
  void parse_alphabet() {
    cur_.take();
    while (cur_.peek().kind == TokenKind::Identifier && !is_keyword(cur_.peek().text)) {
      Token tok = cur_.take();
      if (is_action_atom(tok.text)) throw ReservedAtom(tok.text);
      if (is_constant_atom(tok.text) || is_operator_word(tok.text))
        throw SyntaxError(tok.offset, tok.line, tok.column, "proposition name", tok.describe());
      doc_.config.alphabet.add(tok.text);
    }
    declared_alphabet_ = true;
  }

  static bool is_keyword(std::string_view w) {
    return w == "alphabet" || w == "theta" || w == "t_task_max" || w == "task" || w == "mission";
  }

  bool atom_known(const std::string& name) const {
    if (external_alphabet_ || declared_alphabet_) return doc_.config.alphabet.contains(name);
    return true;
  }

  void register_task(std::shared_ptr<const PpaTaskSpec> spec) {
    if (doc_.tasks.count(spec->name)) throw DuplicateTaskName(spec->name);
    doc_.tasks.emplace(spec->name, std::move(spec));
  }

  // After the `task` keyword: either `name(fields)` or `(name, fields)`.
  std::shared_ptr<const PpaTaskSpec> parse_task_body() {
    PpaTaskSpec spec;
    bool literal = cur_.peek().is_punct('(');
    if (literal) cur_.take();
    spec.name = cur_.expect_identifier("task name").text;
    if (literal) {
      if (cur_.peek().is_punct(',')) cur_.take();
    } else {
      cur_.expect_punct('(');
    }
    std::map<std::string, bool> seen;
    while (!cur_.peek().is_punct(')')) {
      Token key = cur_.expect_identifier("task field");
      if (seen[key.text]) throw SyntaxError(key.offset, key.line, key.column, "distinct field", key.describe());
      seen[key.text] = true;
      cur_.expect_punct('=');
      if (key.text == "action") {
        spec.action = cur_.expect_identifier("action binding").text;
      } else {
        Formula cond = condition_or();
        if (key.text == "post") spec.poc = cond;
        else if (key.text == "pre") spec.prc = cond;
        else if (key.text == "gc") spec.gc = cond;
        else if (key.text == "tc") spec.tc = cond;
        else throw SyntaxError(key.offset, key.line, key.column, "post, pre, gc, tc or action", key.describe());
      }
      if (!cur_.peek().is_punct(',')) break;
      cur_.take();
    }
    cur_.expect_punct(')');
    if (!spec.poc) throw SyntaxError(cur_.peek().offset, cur_.peek().line, cur_.peek().column, "post= field", "task without postcondition");
    if (!spec.prc) spec.prc = ltl::truth();
    if (!spec.gc) spec.gc = ltl::truth();
    if (!spec.tc) spec.tc = ltl::truth();
    if (spec.action.empty()) spec.action = spec.name;
    validate_task(spec);
    return std::make_shared<const PpaTaskSpec>(std::move(spec));
  }

  Formula condition_or() {
    Formula f = condition_and();
    while (cur_.peek().is_punct('|')) {
      cur_.take();
      f = ltl::disj(f, condition_and());
    }
    return f;
  }
  Formula condition_and() {
    Formula f = condition_not();
    while (cur_.peek().is_punct('&')) {
      cur_.take();
      f = ltl::conj(f, condition_not());
    }
    return f;
  }
  Formula condition_not() {
    if (cur_.peek().is_punct('!')) {
      cur_.take();
      return ltl::negate(condition_not());
    }
    if (cur_.peek().is_punct('(')) {
      cur_.take();
      Formula f = condition_or();
      cur_.expect_punct(')');
      return f;
    }
    const Token& t = cur_.peek();
    if (t.kind != TokenKind::Identifier) cur_.fail("proposition");
    if (is_operator_word(t.text)) throw TemporalOperatorInCondition(t.text);
    Token tok = cur_.take();
    if (is_action_atom(tok.text)) throw ReservedAtom(tok.text);
    if (!is_constant_atom(tok.text) && !atom_known(tok.text)) throw UnknownAtom(tok.text);
    return ltl::atom(tok.text);
  }

  MissionExpr mission_expr() {
    if (cur_.peek().is_punct('|')) {
      cur_.take();
      MissionExpr lhs = mission_expr();
      MissionExpr rhs = level1();
      return mission::disj(std::move(lhs), std::move(rhs));
    }
    return level1();
  }
  MissionExpr level1() {
    if (cur_.peek().is_punct('&')) {
      cur_.take();
      MissionExpr lhs = level1();
      MissionExpr rhs = level2();
      return mission::conj(std::move(lhs), std::move(rhs));
    }
    return level2();
  }
  MissionExpr level2() {
    if (cur_.peek().is_ident("U")) {
      cur_.take();
      MissionExpr lhs = level2();
      MissionExpr rhs = level3();
      return mission::until(std::move(lhs), std::move(rhs));
    }
    return level3();
  }
  MissionExpr level3() {
    const Token& t = cur_.peek();
    if (t.is_ident("F")) {
      cur_.take();
      return mission::finally(level3());
    }
    if (t.is_punct('(')) {
      cur_.take();
      MissionExpr inner = mission_expr();
      cur_.expect_punct(')');
      return inner;
    }
    if (t.is_ident("task") && cur_.peek(1).is_punct('(')) {
      cur_.take();
      auto spec = parse_task_body();
      register_task(spec);
      return mission::task(spec);
    }
    if (t.kind == TokenKind::Identifier && !is_operator_word(t.text)) {
      Token tok = cur_.take();
      auto it = doc_.tasks.find(tok.text);
      if (it == doc_.tasks.end())
        throw SyntaxError(tok.offset, tok.line, tok.column, "declared task name", tok.describe());
      return mission::task(it->second);
    }
    cur_.fail("'F', '(', task literal or task name");
  }

  TokenCursor cur_;
  const Alphabet* external_alphabet_;
  bool declared_alphabet_ = false;
  MissionDocument doc_;
};

}  // namespace detail

// Parses a mission document (declarations optional). With an alphabet,
// condition atoms outside it are rejected; otherwise an `alphabet` line in
// the text, if present, plays that role.
inline MissionDocument parse_mission_document(std::string_view text, const Alphabet* alphabet = nullptr) {
  return detail::MissionParser(text, alphabet).parse_document();
}

inline MissionExpr parse_mission(std::string_view text, const Alphabet* alphabet = nullptr) {
  return parse_mission_document(text, alphabet).expr;
}

inline MissionExpr parse_mission(std::string_view text, const Alphabet& alphabet) { return parse_mission(text, &alphabet); }

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

inline nlohmann::json to_json(const PpaTaskSpec& t) {
  return {{"name", t.name},
          {"post", to_json(t.poc)},
          {"pre", to_json(t.prc)},
          {"gc", to_json(t.gc)},
          {"tc", to_json(t.tc)},
          {"action", t.action}};
}

inline nlohmann::json to_json(const MissionExpr& e) {
  switch (e->op) {
    case MissionOp::Task: return {{"op", "task"}, {"task", to_json(*e->task)}};
    case MissionOp::Finally: return {{"op", "finally"}, {"arg", to_json(e->lhs)}};
    case MissionOp::Or: return {{"op", "or"}, {"lhs", to_json(e->lhs)}, {"rhs", to_json(e->rhs)}};
    case MissionOp::And: return {{"op", "and"}, {"lhs", to_json(e->lhs)}, {"rhs", to_json(e->rhs)}};
    case MissionOp::Until: return {{"op", "until"}, {"lhs", to_json(e->lhs)}, {"rhs", to_json(e->rhs)}};
  }
  return {};
}

inline PpaTaskSpec task_from_json(const nlohmann::json& j) {
  PpaTaskSpec t{j.at("name").get<std::string>(),
                formula_from_json(j.at("post")),
                formula_from_json(j.at("pre")),
                formula_from_json(j.at("gc")),
                formula_from_json(j.at("tc")),
                j.at("action").get<std::string>()};
  validate_task(t);
  return t;
}

inline MissionExpr mission_from_json(const nlohmann::json& j) {
  const std::string op = j.at("op").get<std::string>();
  if (op == "task") return mission::task(task_from_json(j.at("task")));
  if (op == "finally") return mission::finally(mission_from_json(j.at("arg")));
  MissionOp kind;
  if (op == "or") kind = MissionOp::Or;
  else if (op == "and") kind = MissionOp::And;
  else if (op == "until") kind = MissionOp::Until;
  else throw ConfigError("unknown mission op '" + op + "'");
  return mission::binary(kind, mission_from_json(j.at("lhs")), mission_from_json(j.at("rhs")));
}

}  // namespace ppabt
