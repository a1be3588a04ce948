// Independent reference implementations used only by the tests.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "ppabt/gridworld.hpp"
#include "ppabt/ltlf.hpp"
#include "ppabt/planners.hpp"

namespace oracle {

using ppabt::Formula;
using ppabt::Op;

// Direct recursive reading of the finite-trace semantics, quantifying over
// suffix positions instead of using the unrolled recurrences.
inline bool sat(const Formula& f, const std::vector<std::uint64_t>& w, std::size_t i, const ppabt::Alphabet& a) {
  const std::size_t n = w.size();
  switch (f->op) {
    case Op::Atom:
      if (f->name == "True") return true;
      if (f->name == "False") return false;
      return (w[i] >> a.index_of(f->name)) & 1U;
    case Op::Not: return !sat(f->lhs, w, i, a);
    case Op::And: return sat(f->lhs, w, i, a) && sat(f->rhs, w, i, a);
    case Op::Or: return sat(f->lhs, w, i, a) || sat(f->rhs, w, i, a);
    case Op::Next: return i + 1 < n && sat(f->lhs, w, i + 1, a);
    case Op::Finally:
      for (std::size_t j = i; j < n; ++j)
        if (sat(f->lhs, w, j, a)) return true;
      return false;
    case Op::Globally:
      for (std::size_t j = i; j < n; ++j)
        if (!sat(f->lhs, w, j, a)) return false;
      return true;
    case Op::Until:
      for (std::size_t j = i; j < n; ++j) {
        if (sat(f->rhs, w, j, a)) return true;
        if (!sat(f->lhs, w, j, a)) return false;
      }
      return false;
  }
  return false;
}

inline Formula random_formula(std::mt19937_64& rng, const std::vector<std::string>& atoms, int depth) {
  namespace L = ppabt::ltl;
  std::uniform_int_distribution<int> pick_op(0, 8);
  const int op = depth <= 0 ? 0 : pick_op(rng);
  auto sub = [&] { return random_formula(rng, atoms, depth - 1); };
  switch (op) {
    case 1: return L::negate(sub());
    case 2: return L::conj(sub(), sub());
    case 3: return L::disj(sub(), sub());
    case 4: return L::next(sub());
    case 5: return L::until(sub(), sub());
    case 6: return L::finally(sub());
    case 7: return L::globally(sub());
    default: {
      const std::size_t k = std::uniform_int_distribution<std::size_t>(0, atoms.size() + 1)(rng);
      if (k == atoms.size()) return L::truth();
      if (k == atoms.size() + 1) return L::falsity();
      return L::atom(atoms[k]);
    }
  }
}

inline std::vector<std::uint64_t> random_trace(std::mt19937_64& rng, std::size_t atoms, std::size_t max_len) {
  const std::size_t len = std::uniform_int_distribution<std::size_t>(1, max_len)(rng);
  std::vector<std::uint64_t> w(len);
  for (auto& s : w) s = std::uniform_int_distribution<std::uint64_t>(0, (std::uint64_t{1} << atoms) - 1)(rng);
  return w;
}

struct ViResult {
  std::vector<double> values;
  std::vector<int> actions;
};

// Value iteration on the grid MDP, built from the slip rule directly rather
// than from the library kernel. Absorbing cells keep value zero.
inline ViResult value_iteration(const ppabt::grid::GridConfig& cfg, ppabt::grid::Phase phase, double gamma, double tol = 1e-13) {
  using namespace ppabt::grid;
  const int n = cfg.cells();
  const Cell goal = phase == Phase::Cheese ? cfg.cheese : cfg.home;
  auto absorbing = [&](int s) { return cfg.cell(s) == cfg.fire || cfg.cell(s) == goal; };
  auto arrive = [&](Cell c) {
    if (c == cfg.fire) return cfg.rewards.fire;
    if (c == goal) return cfg.rewards.good;
    return cfg.rewards.other;
  };
  auto move = [&](Cell c, int dj, int dk) {
    Cell d{c.j + dj, c.k + dk};
    return (d.j < 1 || d.j > cfg.height || d.k < 1 || d.k > cfg.width) ? c : d;
  };
  const int dj[4] = {-1, 1, 0, 0};
  const int dk[4] = {0, 0, -1, 1};
  auto q = [&](const std::vector<double>& v, int s, int a) {
    const Cell c = cfg.cell(s);
    const int side0 = a < 2 ? 2 : 0;
    const int side1 = a < 2 ? 3 : 1;
    const std::pair<int, double> outcomes[3] = {{a, cfg.p_in}, {side0, (1 - cfg.p_in) / 2}, {side1, (1 - cfg.p_in) / 2}};
    double total = 0;
    for (auto [m, p] : outcomes) {
      const Cell d = move(c, dj[m], dk[m]);
      const int s2 = cfg.index(d);
      total += p * (arrive(d) + (absorbing(s2) ? 0.0 : gamma * v[static_cast<std::size_t>(s2)]));
    }
    return total;
  };
  std::vector<double> v(static_cast<std::size_t>(n), 0.0);
  for (int iter = 0; iter < 100000; ++iter) {
    double delta = 0;
    std::vector<double> next(v.size(), 0.0);
    for (int s = 0; s < n; ++s) {
      if (absorbing(s)) continue;
      double best = -1e300;
      for (int a = 0; a < 4; ++a) best = std::max(best, q(v, s, a));
      next[static_cast<std::size_t>(s)] = best;
      delta = std::max(delta, std::abs(best - v[static_cast<std::size_t>(s)]));
    }
    v = std::move(next);
    if (delta < tol) break;
  }
  ViResult r{v, std::vector<int>(static_cast<std::size_t>(n), 0)};
  for (int s = 0; s < n; ++s) {
    if (absorbing(s)) continue;
    double best = -1e300;
    for (int a = 0; a < 4; ++a) best = std::max(best, q(v, s, a));
    for (int a = 0; a < 4; ++a)
      if (q(v, s, a) >= best - 1e-9) {
        r.actions[static_cast<std::size_t>(s)] = a;
        break;
      }
  }
  return r;
}

}  // namespace oracle
