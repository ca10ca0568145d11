#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "fuzzloc/query.hpp"
#include "oracles.hpp"

using namespace fuzzloc::query;
namespace fz = fuzzloc::fuzzy;
namespace st = fuzzloc::store;
using fuzzloc::ParseError;
using fuzzloc::SemanticError;

namespace {

std::mt19937_64 rng(41755ULL);

st::CsvTable demo_table() {
  return st::CsvTable::load(std::string(FUZZLOC_DATA) +
                            "/demo/subscribers.csv");
}

Catalog demo_catalog() {
  return Catalog::load(std::string(FUZZLOC_DATA) + "/demo/catalog.json");
}

// random crisp expression over the synthetic numeric columns a,b,c
ExprPtr random_crisp_expr(int depth) {
  static const char* cols[] = {"a", "b", "c"};
  static const fz::CompareOp ops[] = {fz::CompareOp::Eq, fz::CompareOp::Ne,
                                      fz::CompareOp::Lt, fz::CompareOp::Le,
                                      fz::CompareOp::Gt, fz::CompareOp::Ge};
  if (depth == 0 || rng() % 3 == 0) {
    Comparison c{cols[rng() % 3], ops[rng() % 6],
                 Literal{static_cast<double>(rng() % 100)}};
    return std::make_shared<const Expr>(Expr{std::move(c)});
  }
  switch (rng() % 3) {
    case 0:
      return std::make_shared<const Expr>(
          Expr{NotExpr{random_crisp_expr(depth - 1)}});
    case 1:
      return std::make_shared<const Expr>(
          Expr{BinaryExpr{BinaryExpr::Op::And, random_crisp_expr(depth - 1),
                          random_crisp_expr(depth - 1)}});
    default:
      return std::make_shared<const Expr>(
          Expr{BinaryExpr{BinaryExpr::Op::Or, random_crisp_expr(depth - 1),
                          random_crisp_expr(depth - 1)}});
  }
}

st::CsvTable random_numeric_table(std::size_t rows) {
  std::vector<std::vector<std::string>> data;
  for (std::size_t i = 0; i < rows; ++i)
    data.push_back({std::to_string(rng() % 100), std::to_string(rng() % 100),
                    std::to_string(rng() % 100)});
  return st::CsvTable({"a", "b", "c"}, std::move(data));
}

}  // namespace

TEST_CASE("parse the crisp selection query") {
  auto q = parse_query(
      "SELECT subscriber_name, imei#, sim#, La, mobile, bill_payment "
      "FROM SUBSCRIBER_PROFILE WHERE bill_payment <=3000");
  CHECK_FALSE(q.star);
  REQUIRE(q.columns.size() == 6);
  CHECK(q.columns[1] == "imei#");
  CHECK(q.table == "SUBSCRIBER_PROFILE");
  REQUIRE(q.where);
  const auto& cmp = std::get<Comparison>(q.where->node);
  CHECK(cmp.column == "bill_payment");
  CHECK(cmp.op == fz::CompareOp::Le);
  CHECK(std::get<double>(cmp.value) == 3000.0);
}

TEST_CASE("parse the fuzzy OR query") {
  auto q = parse_query(
      "SELECT subscriber_name FROM SUBSCRIBER_PROFILE "
      "WHERE bill_payment IS HIGH OR bill_payment > 3000");
  REQUIRE(q.where);
  const auto& bin = std::get<BinaryExpr>(q.where->node);
  CHECK(bin.op == BinaryExpr::Op::Or);
  const auto& fp = std::get<FuzzyPredicate>(bin.lhs->node);
  CHECK(fp.column == "bill_payment");
  CHECK(fp.term == "HIGH");
  const auto& cmp = std::get<Comparison>(bin.rhs->node);
  CHECK(cmp.op == fz::CompareOp::Gt);
}

TEST_CASE("precedence is NOT over AND over OR") {
  auto q = parse_query("SELECT * FROM t WHERE a = 1 OR NOT b = 2 AND c = 3");
  // expect: a=1 OR ((NOT b=2) AND c=3)
  const auto& top = std::get<BinaryExpr>(q.where->node);
  CHECK(top.op == BinaryExpr::Op::Or);
  const auto& rhs = std::get<BinaryExpr>(top.rhs->node);
  CHECK(rhs.op == BinaryExpr::Op::And);
  CHECK(std::holds_alternative<NotExpr>(rhs.lhs->node));

  auto paren = parse_query("SELECT * FROM t WHERE (a = 1 OR b = 2) AND c = 3");
  const auto& ptop = std::get<BinaryExpr>(paren.where->node);
  CHECK(ptop.op == BinaryExpr::Op::And);
}

TEST_CASE("star select and string and exponent literals") {
  auto q = parse_query(
      "select * from t where name = 'O''Neil' and a >= 1.5e3");
  CHECK(q.star);
  CHECK(q.columns.empty());
  const auto& bin = std::get<BinaryExpr>(q.where->node);
  CHECK(std::get<std::string>(std::get<Comparison>(bin.lhs->node).value) ==
        "O'Neil");
  CHECK(std::get<double>(std::get<Comparison>(bin.rhs->node).value) == 1500.0);
}

TEST_CASE("malformed queries raise parse errors") {
  CHECK_THROWS_AS(parse_query("SELECT FROM t"), ParseError);
  CHECK_THROWS_AS(parse_query("SELECT a, FROM t"), ParseError);
  CHECK_THROWS_AS(parse_query("SELECT a"), ParseError);
  CHECK_THROWS_AS(parse_query("SELECT a FROM t WHERE"), ParseError);
  CHECK_THROWS_AS(parse_query("SELECT a FROM t WHERE a ="), ParseError);
  CHECK_THROWS_AS(parse_query("SELECT a FROM t WHERE (a = 1"), ParseError);
  CHECK_THROWS_AS(parse_query("SELECT a FROM t WHERE a = 'open"), ParseError);
  CHECK_THROWS_AS(parse_query("SELECT a FROM t extra"), ParseError);
}

TEST_CASE("print then parse round trips") {
  const char* samples[] = {
      "SELECT a, b FROM t WHERE a = 1 AND (b = 2 OR c = 3)",
      "SELECT * FROM t WHERE NOT (a IS HIGH OR b < 2)",
      "SELECT imei# FROM SUBSCRIBER_PROFILE WHERE bill_payment IS LOW",
      "SELECT a FROM t WHERE name = 'x y'",
      "SELECT a FROM t",
  };
  for (const char* s : samples) {
    auto q = parse_query(s);
    auto text = print_query(q);
    auto back = parse_query(text);
    CHECK(back == q);
    CHECK(print_query(back) == text);
  }
}

TEST_CASE("random crisp ASTs round trip through the printer") {
  for (int trial = 0; trial < 500; ++trial) {
    QueryAst q;
    q.star = rng() % 2 == 0;
    if (!q.star) q.columns = {"a", "b"};
    q.table = "t";
    if (rng() % 5 != 0) q.where = random_crisp_expr(3);
    auto text = print_query(q);
    auto back = parse_query(text);
    CHECK(back == q);
    CHECK(print_query(back) == text);
  }
}

TEST_CASE("catalog fuzzify, find, and replacement semantics") {
  auto table = demo_table();
  Catalog cat;
  fz::LinguisticVariable v(
      "bill_payment", 0, 10000,
      {{"LOW", fz::MembershipFunction::trapezoidal(0, 0, 1000, 3000)},
       {"HIGH", fz::MembershipFunction::trapezoidal(2000, 4000, 10000, 10000)}});
  const auto& e = cat.fuzzify_column(table, "SUBSCRIBER_PROFILE",
                                     "Bill_Payment#", v, true);
  CHECK(e.column == "bill_payment");  // normalized
  CHECK(e.materialized.size() == table.row_count());
  CHECK(e.materialized.at(4).at("HIGH") == doctest::Approx(0.75));  // 3500

  REQUIRE(cat.find("SUBSCRIBER_PROFILE", "bill_payment") != nullptr);
  CHECK(cat.find("SUBSCRIBER_PROFILE", "BILL_PAYMENT#") != nullptr);
  CHECK(cat.find("SUBSCRIBER_PROFILE", "mobile") == nullptr);

  // replacing drops the old materialization
  cat.fuzzify_column(table, "SUBSCRIBER_PROFILE", "bill_payment", v, false);
  CHECK(cat.entries().size() == 1);
  CHECK(cat.find("SUBSCRIBER_PROFILE", "bill_payment")->materialized.empty());
}

TEST_CASE("fuzzifying a non-numeric column fails") {
  auto table = demo_table();
  Catalog cat;
  fz::LinguisticVariable v(
      "v", 0, 10,
      {{"LOW", fz::MembershipFunction::triangular(0, 0, 5)},
       {"HIGH", fz::MembershipFunction::triangular(5, 10, 10)}});
  CHECK_THROWS_AS(
      cat.fuzzify_column(table, "SUBSCRIBER_PROFILE", "subscriber_name", v),
      SemanticError);
  CHECK_THROWS_AS(cat.fuzzify_column(table, "SUBSCRIBER_PROFILE", "missing", v),
                  SemanticError);
}

TEST_CASE("materialized degrees agree with direct evaluation") {
  auto table = demo_table();
  auto cat = demo_catalog();
  const auto* e = cat.find("SUBSCRIBER_PROFILE", "bill_payment");
  REQUIRE(e != nullptr);
  Catalog mat;
  const auto& m = mat.fuzzify_column(table, "SUBSCRIBER_PROFILE",
                                     "bill_payment", e->variable, true);
  auto col = *table.column_index("bill_payment");
  for (std::size_t r = 0; r < table.row_count(); ++r) {
    double v = *st::CsvTable::parse_number(table.cell(r, col));
    auto f = e->variable.fuzzify(v);
    for (const auto& td : f.terms)
      CHECK(m.materialized.at(static_cast<long>(r)).at(td.label) ==
            doctest::Approx(td.degree));
  }
}

TEST_CASE("catalog JSON round trip") {
  auto cat = demo_catalog();
  auto j = cat.to_json();
  auto back = Catalog::from_json(j);
  CHECK(back.to_json() == j);
  REQUIRE(back.find("SUBSCRIBER_PROFILE", "bill_payment") != nullptr);
  CHECK(back.find("SUBSCRIBER_PROFILE", "bill_payment")->variable ==
        cat.find("SUBSCRIBER_PROFILE", "bill_payment")->variable);
}

TEST_CASE("crisp execution matches the brute-force filter") {
  auto table = random_numeric_table(200);
  Catalog cat;
  for (int trial = 0; trial < 300; ++trial) {
    QueryAst q;
    q.star = true;
    q.table = "t";
    q.where = random_crisp_expr(3);
    auto result = execute(q, table, cat, 0.0);
    std::set<long> got;
    for (const auto& row : result.rows) {
      CHECK(row.degree == 1.0);  // crisp rows score exactly 1
      got.insert(row.row_id);
    }
    std::set<long> want;
    for (std::size_t r = 0; r < table.row_count(); ++r)
      if (oracles::crisp_row_matches(*q.where, table, r))
        want.insert(static_cast<long>(r));
    CHECK(got == want);
  }
}

TEST_CASE("the crisp demo query returns the documented rows") {
  auto table = demo_table();
  auto q = parse_query(
      "SELECT subscriber_name, imei#, sim#, La, mobile, bill_payment "
      "FROM SUBSCRIBER_PROFILE WHERE bill_payment <=3000");
  auto r = execute(q, table, demo_catalog(), 0.0);
  REQUIRE(r.rows.size() == 4);
  std::vector<long> ids;
  for (const auto& row : r.rows) ids.push_back(row.row_id);
  CHECK(ids == std::vector<long>{0, 1, 2, 7});
  CHECK(r.columns.size() == 6);
  CHECK(r.rows[0].values[0] == "Arun Kumar");
  CHECK(r.rows[0].values[5] == "1200");
}

TEST_CASE("fuzzy predicates score mu and rank the result") {
  auto table = demo_table();
  auto cat = demo_catalog();
  auto q = parse_query(
      "SELECT subscriber_name, bill_payment FROM SUBSCRIBER_PROFILE "
      "WHERE bill_payment IS HIGH");
  auto r = execute(q, table, cat, 0.0);
  const auto* entry = cat.find("SUBSCRIBER_PROFILE", "bill_payment");
  auto col = *table.column_index("bill_payment");
  // every returned degree is mu_HIGH(value); ordering is degree desc, id asc
  double prev = 2.0;
  for (const auto& row : r.rows) {
    double v = *st::CsvTable::parse_number(table.cell(row.row_id, col));
    double mu = entry->variable.term("HIGH")->mf.evaluate(v);
    CHECK(row.degree == doctest::Approx(mu));
    CHECK(row.degree <= prev + 1e-12);
    prev = row.degree;
  }
  // 3000 -> 0.5 sits below the fully HIGH rows
  bool found = false;
  for (const auto& row : r.rows)
    if (row.row_id == 2) {
      CHECK(row.degree == doctest::Approx(0.5));
      found = true;
    }
  CHECK(found);
}

TEST_CASE("OR of fuzzy and crisp takes the max degree") {
  auto table = demo_table();
  auto cat = demo_catalog();
  auto q = parse_query(
      "SELECT subscriber_name FROM SUBSCRIBER_PROFILE "
      "WHERE bill_payment IS HIGH OR bill_payment > 3000");
  auto r = execute(q, table, cat, 0.0);
  const auto* entry = cat.find("SUBSCRIBER_PROFILE", "bill_payment");
  auto col = *table.column_index("bill_payment");
  for (const auto& row : r.rows) {
    double v = *st::CsvTable::parse_number(table.cell(row.row_id, col));
    double want = std::max(entry->variable.term("HIGH")->mf.evaluate(v),
                           v > 3000 ? 1.0 : 0.0);
    CHECK(row.degree == doctest::Approx(want));
  }
}

TEST_CASE("alpha cut keeps only rows at or above the threshold") {
  auto table = demo_table();
  auto cat = demo_catalog();
  auto q = parse_query(
      "SELECT subscriber_name FROM SUBSCRIBER_PROFILE "
      "WHERE bill_payment IS HIGH");
  std::size_t prev = table.row_count() + 1;
  for (double alpha : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    auto r = execute(q, table, cat, alpha);
    for (const auto& row : r.rows) CHECK(row.degree >= alpha);
    CHECK(r.rows.size() <= prev);  // result shrinks as alpha grows
    prev = r.rows.size();
  }
  // zero-degree rows never appear, even at alpha 0
  auto r0 = execute(q, table, cat, 0.0);
  for (const auto& row : r0.rows) CHECK(row.degree > 0.0);
}

TEST_CASE("NOT inverts the degree") {
  auto table = demo_table();
  auto cat = demo_catalog();
  auto pos = parse_query(
      "SELECT subscriber_name FROM SUBSCRIBER_PROFILE "
      "WHERE bill_payment IS HIGH");
  auto neg = parse_query(
      "SELECT subscriber_name FROM SUBSCRIBER_PROFILE "
      "WHERE NOT bill_payment IS HIGH");
  auto rp = execute(pos, table, cat, 0.0);
  auto rn = execute(neg, table, cat, 0.0);
  std::map<long, double> pdeg;
  for (const auto& row : rp.rows) pdeg[row.row_id] = row.degree;
  for (const auto& row : rn.rows) {
    double p = pdeg.count(row.row_id) ? pdeg[row.row_id] : 0.0;
    CHECK(row.degree == doctest::Approx(1.0 - p));
  }
}

TEST_CASE("fuzzy predicate without a catalog entry is a semantic error") {
  auto table = demo_table();
  Catalog empty;
  auto q = parse_query(
      "SELECT subscriber_name FROM SUBSCRIBER_PROFILE "
      "WHERE bill_payment IS HIGH");
  CHECK_THROWS_AS(execute(q, table, empty, 0.0), SemanticError);

  auto cat = demo_catalog();
  auto bad_term = parse_query(
      "SELECT subscriber_name FROM SUBSCRIBER_PROFILE "
      "WHERE bill_payment IS ENORMOUS");
  CHECK_THROWS_AS(execute(bad_term, table, cat, 0.0), SemanticError);

  auto bad_col = parse_query("SELECT missing FROM SUBSCRIBER_PROFILE");
  CHECK_THROWS_AS(execute(bad_col, table, cat, 0.0), SemanticError);
}

TEST_CASE("explain reports crisp, bound, and missing predicates") {
  auto cat = demo_catalog();
  auto q = parse_query(
      "SELECT subscriber_name FROM SUBSCRIBER_PROFILE "
      "WHERE bill_payment IS HIGH AND La = 2 AND mobile IS ROAMY");
  auto text = explain(q, cat);
  CHECK(text.find("crisp") != std::string::npos);
  CHECK(text.find("bill_payment IS HIGH") != std::string::npos);
  CHECK(text.find("SUBSCRIBER_PROFILE.bill_payment") != std::string::npos);
  CHECK(text.find("MISSING") != std::string::npos);
}
