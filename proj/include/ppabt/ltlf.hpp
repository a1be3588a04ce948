// LTLf formulas over finite traces: AST, prefix parser, canonical printer,
// JSON export and the satisfaction relation.
//
// Concrete syntax (prefix, ASCII):
//
//   psi ::= L1 | '|' psi L1
//   L1  ::= L2 | '&' L1 L2
//   L2  ::= L3 | 'U' L2 L3
//   L3  ::= L4 | '!' L3 | 'X' L3 | 'F' L3 | 'G' L3
//   L4  ::= atom | '(' psi ')'
//
// Unary operators bind tighter than U, U tighter than &, & tighter than |,
// and binary operators associate to the left. `format` emits the canonical
// form in which every non-atomic operand is parenthesized.
#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "ppabt/errors.hpp"
#include "ppabt/lexer.hpp"

namespace ppabt {

inline constexpr std::string_view kTrueAtom = "True";
inline constexpr std::string_view kFalseAtom = "False";

// Reserved proposition recording that a task's action has achieved its
// postcondition.
inline constexpr std::string_view kActionPrefix = "__action_";

inline std::string action_atom(std::string_view task_name) { return std::string(kActionPrefix) + std::string(task_name); }
inline bool is_action_atom(std::string_view name) { return name.starts_with(kActionPrefix); }

inline bool is_constant_atom(std::string_view name) { return name == kTrueAtom || name == kFalseAtom; }

inline bool is_operator_word(std::string_view name) {
  return name == "U" || name == "F" || name == "G" || name == "X";
}

inline bool is_valid_identifier(std::string_view name) {
  if (name.empty() || !detail::is_ident_start(name.front())) return false;
  return std::all_of(name.begin(), name.end(), detail::is_ident_char);
}

// ---------------------------------------------------------------------------
// Alphabet / StateVector / Trace
// ---------------------------------------------------------------------------

// Ordered set of proposition names. A state is a bit vector indexed by the
// position of each name, so an alphabet holds at most 64 propositions.
class Alphabet {
 public:
  static constexpr std::size_t kMaxSize = 64;

  Alphabet() = default;
  explicit Alphabet(const std::vector<std::string>& names) {
    for (const auto& n : names) add(n);
  }

  std::size_t add(const std::string& name) {
    if (auto found = find(name)) return *found;
    if (!is_valid_identifier(name) || is_operator_word(name) || is_constant_atom(name))
      throw ConfigError("invalid proposition name '" + name + "'");
    if (names_.size() == kMaxSize) throw ConfigError("alphabet exceeds 64 propositions");
    index_.emplace(name, names_.size());
    names_.push_back(name);
    return names_.size() - 1;
  }

  std::optional<std::size_t> find(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t index_of(std::string_view name) const {
    if (auto found = find(name)) return *found;
    throw UnknownAtom(std::string(name));
  }

  bool contains(std::string_view name) const { return find(name).has_value(); }
  std::size_t size() const noexcept { return names_.size(); }
  const std::vector<std::string>& names() const noexcept { return names_; }
  const std::string& name(std::size_t i) const { return names_.at(i); }

  bool operator==(const Alphabet& other) const { return names_ == other.names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::size_t> index_;
};

using AlphabetPtr = std::shared_ptr<const Alphabet>;

// Total assignment of the alphabet's propositions.
class StateVector {
 public:
  StateVector() = default;
  StateVector(AlphabetPtr alphabet, std::uint64_t bits) : alphabet_(std::move(alphabet)), bits_(bits) {}

  bool get(std::string_view name) const {
    if (name == kTrueAtom) return true;
    if (name == kFalseAtom) return false;
    return (bits_ >> alphabet_->index_of(name)) & 1U;
  }
  bool operator[](std::string_view name) const { return get(name); }

  void set(std::string_view name, bool value) {
    const std::uint64_t mask = std::uint64_t{1} << alphabet_->index_of(name);
    bits_ = value ? (bits_ | mask) : (bits_ & ~mask);
  }

  std::uint64_t bits() const noexcept { return bits_; }
  const AlphabetPtr& alphabet() const noexcept { return alphabet_; }

  nlohmann::json to_json() const {
    nlohmann::json j = nlohmann::json::object();
    for (std::size_t i = 0; i < alphabet_->size(); ++i) j[alphabet_->name(i)] = ((bits_ >> i) & 1U) != 0;
    return j;
  }

 private:
  AlphabetPtr alphabet_;
  std::uint64_t bits_ = 0;
};

// Nonempty finite sequence of states over one alphabet, bounded by max_len.
class Trace {
 public:
  Trace(AlphabetPtr alphabet, std::vector<std::uint64_t> states, std::size_t max_len)
      : alphabet_(std::move(alphabet)), states_(std::move(states)), max_len_(max_len) {
    if (!alphabet_) throw InvalidTrace("trace has no alphabet");
    if (max_len_ == 0) throw InvalidTrace("max trace length must be positive");
    if (states_.empty()) throw InvalidTrace("empty trace");
    if (states_.size() > max_len_)
      throw InvalidTrace("trace length " + std::to_string(states_.size()) + " exceeds bound " +
                         std::to_string(max_len_));
  }

  Trace(AlphabetPtr alphabet, std::vector<std::uint64_t> states)
      : Trace(alphabet, states, std::max<std::size_t>(states.size(), 1)) {}

  std::size_t size() const noexcept { return states_.size(); }
  std::size_t max_len() const noexcept { return max_len_; }
  const AlphabetPtr& alphabet() const noexcept { return alphabet_; }
  std::span<const std::uint64_t> bits() const noexcept { return states_; }
  StateVector operator[](std::size_t i) const {
    if (i >= states_.size()) throw IndexOutOfRange(i, states_.size());
    return {alphabet_, states_[i]};
  }

  bool operator==(const Trace& other) const {
    return *alphabet_ == *other.alphabet_ && states_ == other.states_;
  }

 private:
  AlphabetPtr alphabet_;
  std::vector<std::uint64_t> states_;
  std::size_t max_len_;
};

// ---------------------------------------------------------------------------
// Formula
// ---------------------------------------------------------------------------

enum class Op { Atom, Not, And, Or, Next, Until, Finally, Globally };

struct FormulaNode;
using Formula = std::shared_ptr<const FormulaNode>;

struct FormulaNode {
  Op op = Op::Atom;
  std::string name;  // Atom only
  Formula lhs;       // unary child or left operand
  Formula rhs;       // right operand of binary operators
};

inline bool is_unary(Op op) { return op == Op::Not || op == Op::Next || op == Op::Finally || op == Op::Globally; }
inline bool is_binary(Op op) { return op == Op::And || op == Op::Or || op == Op::Until; }
inline bool is_temporal(Op op) {
  return op == Op::Next || op == Op::Until || op == Op::Finally || op == Op::Globally;
}

namespace ltl {

inline Formula atom(std::string name) {
  if (!is_valid_identifier(name)) throw ConfigError("invalid atom name '" + name + "'");
  return std::make_shared<FormulaNode>(FormulaNode{Op::Atom, std::move(name), nullptr, nullptr});
}
inline Formula unary(Op op, Formula child) {
  return std::make_shared<FormulaNode>(FormulaNode{op, {}, std::move(child), nullptr});
}
inline Formula binary(Op op, Formula lhs, Formula rhs) {
  return std::make_shared<FormulaNode>(FormulaNode{op, {}, std::move(lhs), std::move(rhs)});
}
inline Formula truth() { return atom(std::string(kTrueAtom)); }
inline Formula falsity() { return atom(std::string(kFalseAtom)); }
inline Formula negate(Formula f) { return unary(Op::Not, std::move(f)); }
inline Formula next(Formula f) { return unary(Op::Next, std::move(f)); }
inline Formula finally(Formula f) { return unary(Op::Finally, std::move(f)); }
inline Formula globally(Formula f) { return unary(Op::Globally, std::move(f)); }
inline Formula conj(Formula a, Formula b) { return binary(Op::And, std::move(a), std::move(b)); }
inline Formula disj(Formula a, Formula b) { return binary(Op::Or, std::move(a), std::move(b)); }
inline Formula until(Formula a, Formula b) { return binary(Op::Until, std::move(a), std::move(b)); }

}  // namespace ltl

inline bool structurally_equal(const Formula& a, const Formula& b) {
  if (a == b) return true;
  if (!a || !b || a->op != b->op) return false;
  if (a->op == Op::Atom) return a->name == b->name;
  if (!structurally_equal(a->lhs, b->lhs)) return false;
  return !is_binary(a->op) || structurally_equal(a->rhs, b->rhs);
}

inline std::size_t formula_size(const Formula& f) {
  if (!f) return 0;
  return 1 + formula_size(f->lhs) + formula_size(f->rhs);
}

inline std::size_t formula_depth(const Formula& f) {
  if (!f) return 0;
  return 1 + std::max(formula_depth(f->lhs), formula_depth(f->rhs));
}

inline bool is_propositional(const Formula& f) {
  if (f->op == Op::Atom) return true;
  if (is_temporal(f->op)) return false;
  return is_propositional(f->lhs) && (!is_binary(f->op) || is_propositional(f->rhs));
}

inline void collect_atoms(const Formula& f, std::set<std::string>& out) {
  if (f->op == Op::Atom) {
    if (!is_constant_atom(f->name)) out.insert(f->name);
    return;
  }
  collect_atoms(f->lhs, out);
  if (is_binary(f->op)) collect_atoms(f->rhs, out);
}

inline std::set<std::string> atoms_of(const Formula& f) {
  std::set<std::string> out;
  collect_atoms(f, out);
  return out;
}

// ---------------------------------------------------------------------------
// Printing
// ---------------------------------------------------------------------------

inline const char* op_symbol(Op op) {
  switch (op) {
    case Op::Not: return "!";
    case Op::And: return "&";
    case Op::Or: return "|";
    case Op::Next: return "X";
    case Op::Until: return "U";
    case Op::Finally: return "F";
    case Op::Globally: return "G";
    case Op::Atom: break;
  }
  return "";
}

inline std::string format(const Formula& f) {
  if (f->op == Op::Atom) return f->name;
  auto operand = [](const Formula& g) { return g->op == Op::Atom ? format(g) : "(" + format(g) + ")"; };
  std::string out = op_symbol(f->op);
  out += ' ';
  out += operand(f->lhs);
  if (is_binary(f->op)) {
    out += ' ';
    out += operand(f->rhs);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

namespace detail {

class LtlParser {
 public:
  LtlParser(std::string_view text, const Alphabet* alphabet)
      : cur_(tokenize(text)), alphabet_(alphabet) {}

  Formula parse_document() {
    Formula f = psi();
    if (!cur_.at_end()) cur_.fail("end of input");
    return f;
  }

 private:
  Formula psi() {
    if (cur_.peek().is_punct('|')) {
      cur_.take();
      Formula lhs = psi();
      Formula rhs = l1();
      return ltl::disj(std::move(lhs), std::move(rhs));
    }
    return l1();
  }

  Formula l1() {
    if (cur_.peek().is_punct('&')) {
      cur_.take();
      Formula lhs = l1();
      Formula rhs = l2();
      return ltl::conj(std::move(lhs), std::move(rhs));
    }
    return l2();
  }

  Formula l2() {
    if (cur_.peek().is_ident("U")) {
      cur_.take();
      Formula lhs = l2();
      Formula rhs = l3();
      return ltl::until(std::move(lhs), std::move(rhs));
    }
    return l3();
  }

  Formula l3() {
    const Token& t = cur_.peek();
    if (t.is_punct('!')) {
      cur_.take();
      return ltl::negate(l3());
    }
    if (t.is_ident("X")) {
      cur_.take();
      return ltl::next(l3());
    }
    if (t.is_ident("F")) {
      cur_.take();
      return ltl::finally(l3());
    }
    if (t.is_ident("G")) {
      cur_.take();
      return ltl::globally(l3());
    }
    return l4();
  }

  Formula l4() {
    const Token& t = cur_.peek();
    if (t.is_punct('(')) {
      cur_.take();
      Formula inner = psi();
      cur_.expect_punct(')');
      return inner;
    }
    if (t.kind == TokenKind::Identifier && !is_operator_word(t.text)) {
      Token tok = cur_.take();
      if (alphabet_ && !is_constant_atom(tok.text) && !alphabet_->contains(tok.text))
        throw UnknownAtom(tok.text);
      return ltl::atom(tok.text);
    }
    cur_.fail("atom or '('");
  }

  TokenCursor cur_;
  const Alphabet* alphabet_;
};

}  // namespace detail

// Parses prefix LTLf text. When `alphabet` is given, every atom other than
// True/False must belong to it.
inline Formula parse_ltlf(std::string_view text, const Alphabet* alphabet = nullptr) {
  return detail::LtlParser(text, alphabet).parse_document();
}

inline Formula parse_ltlf(std::string_view text, const Alphabet& alphabet) { return parse_ltlf(text, &alphabet); }

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

inline const char* op_json_name(Op op) {
  switch (op) {
    case Op::Atom: return "atom";
    case Op::Not: return "not";
    case Op::And: return "and";
    case Op::Or: return "or";
    case Op::Next: return "next";
    case Op::Until: return "until";
    case Op::Finally: return "finally";
    case Op::Globally: return "globally";
  }
  return "";
}

inline nlohmann::json to_json(const Formula& f) {
  nlohmann::json j;
  j["op"] = op_json_name(f->op);
  if (f->op == Op::Atom) {
    j["name"] = f->name;
  } else if (is_binary(f->op)) {
    j["lhs"] = to_json(f->lhs);
    j["rhs"] = to_json(f->rhs);
  } else {
    j["arg"] = to_json(f->lhs);
  }
  return j;
}

inline Formula formula_from_json(const nlohmann::json& j) {
  const std::string op = j.at("op").get<std::string>();
  if (op == "atom") return ltl::atom(j.at("name").get<std::string>());
  static const std::array<std::pair<std::string_view, Op>, 7> kOps{{{"not", Op::Not},
                                                                   {"and", Op::And},
                                                                   {"or", Op::Or},
                                                                   {"next", Op::Next},
                                                                   {"until", Op::Until},
                                                                   {"finally", Op::Finally},
                                                                   {"globally", Op::Globally}}};
  for (const auto& [name, kind] : kOps) {
    if (name != op) continue;
    if (is_binary(kind)) return ltl::binary(kind, formula_from_json(j.at("lhs")), formula_from_json(j.at("rhs")));
    return ltl::unary(kind, formula_from_json(j.at("arg")));
  }
  throw ConfigError("unknown formula op '" + op + "'");
}

// ---------------------------------------------------------------------------
// Satisfaction
// ---------------------------------------------------------------------------

// Formula flattened in post-order with atoms resolved to alphabet indices.
// Children always precede their parents, so one forward sweep over the
// nodes fills the (subformula, position) memo table.
class IndexedFormula {
 public:
  IndexedFormula(const Formula& f, const Alphabet& alphabet) { root_ = flatten(f, alphabet); }

  struct Node {
    Op op;
    int atom;  // alphabet index, or -1 for True, -2 for False
    std::size_t lhs;
    std::size_t rhs;
  };

  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  std::size_t root() const noexcept { return root_; }

  // Truth of a propositional formula on one state. Temporal operators are
  // rejected because their value depends on more than one position.
  bool eval_state(std::uint64_t state) const {
    std::vector<char> val(nodes_.size());
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      const Node& n = nodes_[i];
      switch (n.op) {
        case Op::Atom: val[i] = atom_value(n, state); break;
        case Op::Not: val[i] = !val[n.lhs]; break;
        case Op::And: val[i] = val[n.lhs] && val[n.rhs]; break;
        case Op::Or: val[i] = val[n.lhs] || val[n.rhs]; break;
        default: throw ConfigError("eval_state on a temporal formula");
      }
    }
    return val[root_];
  }

  // table[node * len + pos] = trace suffix at pos satisfies node. Positions
  // range over the realized trace; X at the last position is false.
  std::vector<char> satisfaction_table(std::span<const std::uint64_t> trace) const {
    const std::size_t len = trace.size();
    std::vector<char> table(nodes_.size() * len);
    auto at = [&](std::size_t node, std::size_t pos) -> char& { return table[node * len + pos]; };
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      const Node& n = nodes_[i];
      for (std::size_t p = len; p-- > 0;) {
        const bool last = p + 1 == len;
        char v = 0;
        switch (n.op) {
          case Op::Atom: v = atom_value(n, trace[p]); break;
          case Op::Not: v = !at(n.lhs, p); break;
          case Op::And: v = at(n.lhs, p) && at(n.rhs, p); break;
          case Op::Or: v = at(n.lhs, p) || at(n.rhs, p); break;
          case Op::Next: v = !last && at(n.lhs, p + 1); break;
          case Op::Until: v = at(n.rhs, p) || (at(n.lhs, p) && !last && at(i, p + 1)); break;
          case Op::Finally: v = at(n.lhs, p) || (!last && at(i, p + 1)); break;
          case Op::Globally: v = at(n.lhs, p) && (last || at(i, p + 1)); break;
        }
        at(i, p) = v;
      }
    }
    return table;
  }

  bool holds(std::span<const std::uint64_t> trace, std::size_t index = 0) const {
    if (index >= trace.size()) throw IndexOutOfRange(index, trace.size());
    return satisfaction_table(trace)[root_ * trace.size() + index];
  }

 private:
  static bool atom_value(const Node& n, std::uint64_t state) {
    if (n.atom == -1) return true;
    if (n.atom == -2) return false;
    return (state >> n.atom) & 1U;
  }

  std::size_t flatten(const Formula& f, const Alphabet& alphabet) {
    Node n{f->op, 0, 0, 0};
    if (f->op == Op::Atom) {
      if (f->name == kTrueAtom) n.atom = -1;
      else if (f->name == kFalseAtom) n.atom = -2;
      else n.atom = static_cast<int>(alphabet.index_of(f->name));
    } else {
      n.lhs = flatten(f->lhs, alphabet);
      if (is_binary(f->op)) n.rhs = flatten(f->rhs, alphabet);
    }
    nodes_.push_back(n);
    return nodes_.size() - 1;
  }

  std::vector<Node> nodes_;
  std::size_t root_ = 0;
};

inline bool evaluate(const Formula& formula, const Trace& trace, std::size_t index = 0) {
  if (index >= trace.size()) throw IndexOutOfRange(index, trace.size());
  return IndexedFormula(formula, *trace.alphabet()).holds(trace.bits(), index);
}

// Propositional truth on a single state.
inline bool evaluate_state(const Formula& formula, const StateVector& state) {
  return IndexedFormula(formula, *state.alphabet()).eval_state(state.bits());
}

}  // namespace ppabt
