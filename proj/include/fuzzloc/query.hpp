#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "fuzzloc/fuzzy.hpp"
#include "fuzzloc/store.hpp"

namespace fuzzloc::query {

// A literal is either numeric or a quoted string.
using Literal = std::variant<double, std::string>;
std::string print_literal(const Literal& lit);

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Comparison {
  std::string column;  // as written, e.g. "imei#"
  fuzzy::CompareOp op;
  Literal value;
};

struct FuzzyPredicate {
  std::string column;
  std::string term;
};

struct NotExpr {
  ExprPtr child;
};

struct BinaryExpr {
  enum class Op { And, Or } op;
  ExprPtr lhs;
  ExprPtr rhs;
};

struct Expr {
  std::variant<Comparison, FuzzyPredicate, NotExpr, BinaryExpr> node;
};

bool equal(const ExprPtr& a, const ExprPtr& b);

struct QueryAst {
  bool star = false;
  std::vector<std::string> columns;  // empty iff star
  std::string table;
  ExprPtr where;  // null when absent

  bool operator==(const QueryAst& other) const {
    return star == other.star && columns == other.columns &&
           table == other.table && equal(where, other.where);
  }
};

// `SELECT cols FROM ident [WHERE expr]` with precedence NOT > AND > OR and
// parenthesized subexpressions. Keywords are case-insensitive; identifiers
// admit a trailing '#'.
QueryAst parse_query(const std::string& text);
std::string print_query(const QueryAst& q);

// Per-column linguistic variables layered over the store, with optional
// materialized per-row degrees.
class Catalog {
 public:
  struct Entry {
    std::string table;
    std::string column;  // normalized
    fuzzy::LinguisticVariable variable;
    // row id -> term -> degree; empty when not materialized
    std::map<long, std::map<std::string, double>> materialized;
  };

  // Replaces any existing entry for (table, column); a replace drops the
  // previous materialization.
  const Entry& fuzzify_column(const store::CsvTable& table_data,
                              const std::string& table,
                              const std::string& column,
                              fuzzy::LinguisticVariable variable,
                              bool materialize = false);

  const Entry* find(const std::string& table, const std::string& column) const;
  const std::vector<Entry>& entries() const { return entries_; }

  nlohmann::json to_json() const;
  static Catalog from_json(const nlohmann::json& j);
  void save(const std::string& path) const;
  static Catalog load(const std::string& path);

 private:
  std::vector<Entry> entries_;
};

struct RankedRow {
  long row_id;
  std::vector<std::string> values;  // projected columns, in select order
  double degree;
};

struct ExecuteResult {
  std::vector<std::string> columns;  // resolved projection header
  std::vector<RankedRow> rows;
};

// Evaluates the query: crisp predicates score 0/1, fuzzy predicates score
// mu_term(value), AND/OR/NOT fold min/max/1-d. Rows with degree >= alpha
// (and > 0) are returned sorted by degree descending, row id ascending.
ExecuteResult execute(const QueryAst& q, const store::CsvTable& table_data,
                      const Catalog& catalog, double alpha);

// Textual evaluation plan: which predicates are crisp vs fuzzy and which
// catalog entries the fuzzy ones bind (MISSING when unfuzzified).
std::string explain(const QueryAst& q, const Catalog& catalog);

}  // namespace fuzzloc::query
