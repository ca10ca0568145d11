// Independent oracles used by the unit and acceptance suites. These
// deliberately re-derive results from first principles instead of calling
// the library paths they check.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "fuzzloc/dedup.hpp"
#include "fuzzloc/query.hpp"
#include "fuzzloc/rules.hpp"
#include "fuzzloc/store.hpp"

namespace oracles {

// Piecewise-linear membership evaluation, written separately from
// MembershipFunction::evaluate.
inline double mf_eval(const fuzzloc::fuzzy::MembershipFunction& mf, double x) {
  using Shape = fuzzloc::fuzzy::MembershipFunction::Shape;
  const auto& p = mf.params();
  auto ramp_up = [](double x, double a, double b) {
    if (x <= a) return a == b ? 1.0 : 0.0;
    if (x >= b) return 1.0;
    return (x - a) / (b - a);
  };
  auto ramp_down = [](double x, double c, double d) {
    if (x <= c) return 1.0;
    if (x >= d) return c == d ? 1.0 : 0.0;
    return (d - x) / (d - c);
  };
  switch (mf.shape()) {
    case Shape::Triangular:
      if (x < p[0] || x > p[2]) return 0.0;
      if (x == p[1]) return 1.0;
      return std::min(ramp_up(x, p[0], p[1]), ramp_down(x, p[1], p[2]));
    case Shape::Trapezoidal:
      if (x < p[0] || x > p[3]) return 0.0;
      return std::min(ramp_up(x, p[0], p[1]), ramp_down(x, p[2], p[3]));
    case Shape::CrispThreshold:
      return fuzzloc::fuzzy::compare(mf.op(), x, p[0]) ? 1.0 : 0.0;
  }
  return 0.0;
}

// Trapezoidal-rule centroid of min(mu(x), alpha) over [lo, hi].
inline double clipped_centroid(const fuzzloc::fuzzy::MembershipFunction& mf,
                               double alpha, double lo, double hi,
                               int intervals = 200000) {
  double num = 0.0, den = 0.0;
  const double h = (hi - lo) / intervals;
  auto f = [&](double x) { return std::min(mf_eval(mf, x), alpha); };
  for (int i = 0; i <= intervals; ++i) {
    const double x = lo + h * i;
    const double w = (i == 0 || i == intervals) ? 0.5 : 1.0;
    num += w * x * f(x);
    den += w * f(x);
  }
  return num / den;
}

// Full Mamdani pipeline recomputation: fuzzify, left-associative min/max
// fold, clip, pointwise max, discrete centroid on the kb's grid.
struct MamdaniResult {
  std::map<std::string, std::map<std::string, double>> activations;
  double score = 0.0;
  bool no_fire = false;
};

inline MamdaniResult mamdani(const fuzzloc::kb::KnowledgeBase& kb,
                             const std::map<std::string, double>& inputs) {
  namespace fz = fuzzloc::fuzzy;
  std::map<std::string, std::map<std::string, double>> degrees;
  for (const auto& var : kb.inputs) {
    double x = std::clamp(inputs.at(var.name()), var.lo(), var.hi());
    for (const auto& t : var.terms())
      degrees[var.name()][t.label] = mf_eval(t.mf, x);
  }

  // output variables in dependency order (inputs first, then chained)
  std::vector<std::string> pending;
  for (const auto& v : kb.outputs) pending.push_back(v.name());
  std::vector<std::string> order;
  while (!pending.empty()) {
    bool progressed = false;
    for (auto it = pending.begin(); it != pending.end();) {
      bool ready = true;
      for (const auto& rule : kb.rules) {
        if (rule.consequent_variable != *it) continue;
        for (const auto& atom : rule.atoms)
          if (kb.output(atom.variable) != nullptr &&
              std::find(order.begin(), order.end(), atom.variable) ==
                  order.end() &&
              atom.variable != *it)
            ready = false;
      }
      if (ready) {
        order.push_back(*it);
        it = pending.erase(it);
        progressed = true;
      } else {
        ++it;
      }
    }
    if (!progressed) break;  // cycle; validate() rejects these
  }

  MamdaniResult result;
  std::map<std::string, std::vector<double>> aggregate;
  for (const auto& out_name : order) {
    const auto* out = kb.output(out_name);
    std::map<std::string, double> act;
    for (const auto& t : out->terms()) act[t.label] = 0.0;
    for (const auto& rule : kb.rules) {
      if (rule.consequent_variable != out_name) continue;
      double acc = degrees.at(rule.atoms[0].variable).at(rule.atoms[0].term);
      for (std::size_t i = 1; i < rule.atoms.size(); ++i) {
        const double d =
            degrees.at(rule.atoms[i].variable).at(rule.atoms[i].term);
        acc = rule.connectives[i - 1] == fuzzloc::kb::Connective::And
                  ? std::min(acc, d)
                  : std::max(acc, d);
      }
      act[rule.consequent_term] = std::max(act[rule.consequent_term], acc);
    }
    std::vector<double> agg(static_cast<std::size_t>(kb.grid), 0.0);
    const double step = (out->hi() - out->lo()) / (kb.grid - 1);
    for (const auto& t : out->terms())
      for (int i = 0; i < kb.grid; ++i)
        agg[static_cast<std::size_t>(i)] =
            std::max(agg[static_cast<std::size_t>(i)],
                     std::min(mf_eval(t.mf, out->lo() + step * i), act[t.label]));
    aggregate[out_name] = agg;
    result.activations[out_name] = act;
    degrees[out_name] = std::move(act);
  }

  const std::string risk =
      kb.risk_variable.empty() ? kb.outputs.front().name() : kb.risk_variable;
  const auto* risk_var = kb.output(risk);
  const auto& agg = aggregate.at(risk);
  const double step = (risk_var->hi() - risk_var->lo()) / (kb.grid - 1);
  double num = 0.0, den = 0.0;
  for (int i = 0; i < kb.grid; ++i) {
    num += (risk_var->lo() + step * i) * agg[static_cast<std::size_t>(i)];
    den += agg[static_cast<std::size_t>(i)];
  }
  if (den == 0.0) {
    result.no_fire = true;
    result.score = (risk_var->lo() + risk_var->hi()) / 2.0;
  } else {
    result.score = num / den;
  }
  return result;
}

// Reference crisp row filter, used against crisp-only query ASTs.
inline bool crisp_row_matches(const fuzzloc::query::Expr& e,
                              const fuzzloc::store::CsvTable& table,
                              std::size_t row) {
  using namespace fuzzloc::query;
  if (const auto* cmp = std::get_if<Comparison>(&e.node)) {
    const auto col = table.column_index(cmp->column);
    const std::string& cell = table.cell(row, *col);
    if (const auto* num = std::get_if<double>(&cmp->value)) {
      const auto value = fuzzloc::store::CsvTable::parse_number(cell);
      if (!value) return false;
      switch (cmp->op) {
        case fuzzloc::fuzzy::CompareOp::Eq: return *value == *num;
        case fuzzloc::fuzzy::CompareOp::Ne: return *value != *num;
        case fuzzloc::fuzzy::CompareOp::Lt: return *value < *num;
        case fuzzloc::fuzzy::CompareOp::Le: return *value <= *num;
        case fuzzloc::fuzzy::CompareOp::Gt: return *value > *num;
        case fuzzloc::fuzzy::CompareOp::Ge: return *value >= *num;
      }
      return false;
    }
    const std::string& lit = std::get<std::string>(cmp->value);
    switch (cmp->op) {
      case fuzzloc::fuzzy::CompareOp::Eq: return cell == lit;
      case fuzzloc::fuzzy::CompareOp::Ne: return cell != lit;
      case fuzzloc::fuzzy::CompareOp::Lt: return cell < lit;
      case fuzzloc::fuzzy::CompareOp::Le: return cell <= lit;
      case fuzzloc::fuzzy::CompareOp::Gt: return cell > lit;
      case fuzzloc::fuzzy::CompareOp::Ge: return cell >= lit;
    }
    return false;
  }
  if (const auto* n = std::get_if<NotExpr>(&e.node))
    return !crisp_row_matches(*n->child, table, row);
  const auto& bin = std::get<BinaryExpr>(e.node);
  const bool l = crisp_row_matches(*bin.lhs, table, row);
  const bool r = crisp_row_matches(*bin.rhs, table, row);
  return bin.op == BinaryExpr::Op::And ? (l && r) : (l || r);
}

// Naive recursive Levenshtein, exponential; only for short strings.
inline std::size_t naive_levenshtein(const std::string& a,
                                     const std::string& b) {
  std::function<std::size_t(std::size_t, std::size_t)> rec =
      [&](std::size_t i, std::size_t j) -> std::size_t {
    if (i == a.size()) return b.size() - j;
    if (j == b.size()) return a.size() - i;
    if (a[i] == b[j]) return rec(i + 1, j + 1);
    return 1 + std::min({rec(i + 1, j), rec(i, j + 1), rec(i + 1, j + 1)});
  };
  return rec(0, 0);
}

// All-pairs duplicate grouping with BFS connected components; shares the
// pair scorer with the implementation but not the blocking or union-find.
inline std::vector<std::vector<long>> all_pairs_groups(
    const std::vector<fuzzloc::dedup::SubscriberRecord>& records,
    double threshold, const fuzzloc::dedup::MatchTables& tables) {
  namespace dd = fuzzloc::dedup;
  std::vector<dd::SubscriberRecord> norm;
  for (const auto& r : records) norm.push_back(dd::normalize(r, tables));
  const std::size_t n = norm.size();
  std::vector<std::vector<std::size_t>> adj(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      if (norm[i].all_empty() || norm[j].all_empty()) continue;
      if (dd::similarity(norm[i], norm[j], tables).combined >= threshold) {
        adj[i].push_back(j);
        adj[j].push_back(i);
      }
    }
  std::vector<bool> seen(n, false);
  std::vector<std::vector<long>> groups;
  for (std::size_t i = 0; i < n; ++i) {
    if (seen[i] || adj[i].empty()) continue;
    std::vector<std::size_t> queue{i};
    std::vector<long> members;
    seen[i] = true;
    while (!queue.empty()) {
      const std::size_t cur = queue.back();
      queue.pop_back();
      members.push_back(norm[cur].row_id);
      for (std::size_t next : adj[cur])
        if (!seen[next]) {
          seen[next] = true;
          queue.push_back(next);
        }
    }
    std::sort(members.begin(), members.end());
    groups.push_back(std::move(members));
  }
  std::sort(groups.begin(), groups.end());
  return groups;
}

}  // namespace oracles
