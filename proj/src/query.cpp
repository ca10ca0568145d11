#include "fuzzloc/query.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <sstream>

#include "fuzzloc/io.hpp"

namespace fuzzloc::query {

namespace {

std::string upper(std::string s) {
  for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct Token {
  enum class Kind { Ident, Number, String, Symbol, End } kind;
  std::string text;
  double number = 0.0;
  int column = 0;
};

class Lexer {
 public:
  explicit Lexer(const std::string& text) : text_(text) { advance(); }

  const Token& peek() const { return current_; }
  Token take() {
    Token t = current_;
    advance();
    return t;
  }

 private:
  void advance() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
    const int start = static_cast<int>(pos_) + 1;
    if (pos_ >= text_.size()) {
      current_ = {Token::Kind::End, "", 0.0, start};
      return;
    }
    const char c = text_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::string out;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
              text_[pos_] == '_' || text_[pos_] == '#'))
        out += text_[pos_++];
      current_ = {Token::Kind::Ident, out, 0.0, start};
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && pos_ + 1 < text_.size() &&
         std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])))) {
      std::string out;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
              text_[pos_] == '.' || text_[pos_] == '-' || text_[pos_] == '+')) {
        // accept exponent forms like 1e-3; stop '-'/'+' unless after e/E
        const char d = text_[pos_];
        if ((d == '-' || d == '+') &&
            !(out.size() && (out.back() == 'e' || out.back() == 'E')))
          break;
        out += d;
        ++pos_;
      }
      try {
        std::size_t consumed = 0;
        const double v = std::stod(out, &consumed);
        if (consumed != out.size()) throw std::invalid_argument(out);
        current_ = {Token::Kind::Number, out, v, start};
      } catch (...) {
        throw ParseError("malformed number: " + out, 1, start);
      }
      return;
    }
    if (c == '\'') {
      ++pos_;
      std::string out;
      while (pos_ < text_.size()) {
        if (text_[pos_] == '\'') {
          if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '\'') {
            out += '\'';
            pos_ += 2;
            continue;
          }
          ++pos_;
          current_ = {Token::Kind::String, out, 0.0, start};
          return;
        }
        out += text_[pos_++];
      }
      throw ParseError("unterminated string literal", 1, start);
    }
    // symbols: multi-char comparators first
    for (const char* sym : {"<=", ">=", "<>", "!="}) {
      if (text_.compare(pos_, 2, sym) == 0) {
        pos_ += 2;
        current_ = {Token::Kind::Symbol, sym, 0.0, start};
        return;
      }
    }
    if (std::string("(),*=<>").find(c) != std::string::npos) {
      ++pos_;
      current_ = {Token::Kind::Symbol, std::string(1, c), 0.0, start};
      return;
    }
    throw ParseError(std::string("unexpected character '") + c + "'", 1, start);
  }

  const std::string& text_;
  std::size_t pos_ = 0;
  Token current_;
};

bool is_keyword(const Token& t, const char* kw) {
  return t.kind == Token::Kind::Ident && upper(t.text) == kw;
}

bool is_symbol(const Token& t, const char* sym) {
  return t.kind == Token::Kind::Symbol && t.text == sym;
}

class Parser {
 public:
  explicit Parser(const std::string& text) : lex_(text) {}

  QueryAst parse() {
    QueryAst q;
    expect_keyword("SELECT");
    if (is_symbol(lex_.peek(), "*")) {
      lex_.take();
      q.star = true;
    } else {
      q.columns.push_back(expect_ident("column name"));
      while (is_symbol(lex_.peek(), ",")) {
        lex_.take();
        q.columns.push_back(expect_ident("column name"));
      }
    }
    expect_keyword("FROM");
    q.table = expect_ident("table name");
    if (is_keyword(lex_.peek(), "WHERE")) {
      lex_.take();
      q.where = parse_or();
    }
    const Token& tail = lex_.peek();
    if (tail.kind != Token::Kind::End)
      throw ParseError("trailing input after query", 1, tail.column);
    return q;
  }

 private:
  ExprPtr parse_or() {
    ExprPtr lhs = parse_and();
    while (is_keyword(lex_.peek(), "OR")) {
      lex_.take();
      ExprPtr rhs = parse_and();
      lhs = std::make_shared<Expr>(
          Expr{BinaryExpr{BinaryExpr::Op::Or, lhs, rhs}});
    }
    return lhs;
  }

  ExprPtr parse_and() {
    ExprPtr lhs = parse_factor();
    while (is_keyword(lex_.peek(), "AND")) {
      lex_.take();
      ExprPtr rhs = parse_factor();
      lhs = std::make_shared<Expr>(
          Expr{BinaryExpr{BinaryExpr::Op::And, lhs, rhs}});
    }
    return lhs;
  }

  ExprPtr parse_factor() {
    if (is_keyword(lex_.peek(), "NOT")) {
      lex_.take();
      return std::make_shared<Expr>(Expr{NotExpr{parse_factor()}});
    }
    if (is_symbol(lex_.peek(), "(")) {
      lex_.take();
      ExprPtr inner = parse_or();
      if (!is_symbol(lex_.peek(), ")"))
        throw ParseError("expected ')'", 1, lex_.peek().column);
      lex_.take();
      return inner;
    }
    const std::string column = expect_ident("column name");
    const Token& next = lex_.peek();
    if (is_keyword(next, "IS")) {
      lex_.take();
      const std::string term = expect_ident("term label");
      return std::make_shared<Expr>(Expr{FuzzyPredicate{column, term}});
    }
    if (next.kind == Token::Kind::Symbol) {
      const Token op_tok = lex_.take();
      fuzzy::CompareOp op;
      try {
        op = fuzzy::compare_op_from_symbol(op_tok.text);
      } catch (const SemanticError&) {
        throw ParseError("expected comparison operator or IS", 1,
                         op_tok.column);
      }
      const Token lit = lex_.take();
      if (lit.kind == Token::Kind::Number)
        return std::make_shared<Expr>(Expr{Comparison{column, op, lit.number}});
      if (lit.kind == Token::Kind::String)
        return std::make_shared<Expr>(Expr{Comparison{column, op, lit.text}});
      throw ParseError("expected literal after comparison operator", 1,
                       lit.column);
    }
    throw ParseError("expected comparison operator or IS", 1, next.column);
  }

  std::string expect_ident(const char* what) {
    const Token& t = lex_.peek();
    if (t.kind != Token::Kind::Ident)
      throw ParseError(std::string("expected ") + what, 1, t.column);
    for (const char* kw : {"SELECT", "FROM", "WHERE", "AND", "OR", "NOT", "IS"})
      if (upper(t.text) == kw)
        throw ParseError(std::string("expected ") + what + ", got keyword " +
                             t.text,
                         1, t.column);
    return lex_.take().text;
  }

  void expect_keyword(const char* kw) {
    const Token& t = lex_.peek();
    if (!is_keyword(t, kw))
      throw ParseError(std::string("expected ") + kw, 1, t.column);
    lex_.take();
  }

  Lexer lex_;
};

int precedence(const Expr& e) {
  if (std::holds_alternative<BinaryExpr>(e.node))
    return std::get<BinaryExpr>(e.node).op == BinaryExpr::Op::Or ? 1 : 2;
  return 3;  // NOT and atoms bind tightest
}

void print_expr(std::ostringstream& out, const ExprPtr& e, int min_prec) {
  const int prec = precedence(*e);
  const bool parens = prec < min_prec;
  if (parens) out << "(";
  if (const auto* cmp = std::get_if<Comparison>(&e->node)) {
    out << cmp->column << " " << fuzzy::to_symbol(cmp->op) << " "
        << print_literal(cmp->value);
  } else if (const auto* fp = std::get_if<FuzzyPredicate>(&e->node)) {
    out << fp->column << " IS " << fp->term;
  } else if (const auto* n = std::get_if<NotExpr>(&e->node)) {
    out << "NOT ";
    print_expr(out, n->child, 3);
  } else {
    const auto& bin = std::get<BinaryExpr>(e->node);
    const int my = precedence(*e);
    print_expr(out, bin.lhs, my);
    out << (bin.op == BinaryExpr::Op::And ? " AND " : " OR ");
    // right child needs strictly higher precedence to reparse left-assoc
    print_expr(out, bin.rhs, my + 1);
  }
  if (parens) out << ")";
}

}  // namespace

std::string print_literal(const Literal& lit) {
  if (const auto* num = std::get_if<double>(&lit)) return format_number(*num);
  std::string out = "'";
  for (char c : std::get<std::string>(lit)) {
    if (c == '\'') out += '\'';
    out += c;
  }
  out += "'";
  return out;
}

bool equal(const ExprPtr& a, const ExprPtr& b) {
  if (!a || !b) return !a && !b;
  if (a->node.index() != b->node.index()) return false;
  if (const auto* ca = std::get_if<Comparison>(&a->node)) {
    const auto& cb = std::get<Comparison>(b->node);
    return ca->column == cb.column && ca->op == cb.op && ca->value == cb.value;
  }
  if (const auto* fa = std::get_if<FuzzyPredicate>(&a->node)) {
    const auto& fb = std::get<FuzzyPredicate>(b->node);
    return fa->column == fb.column && fa->term == fb.term;
  }
  if (const auto* na = std::get_if<NotExpr>(&a->node))
    return equal(na->child, std::get<NotExpr>(b->node).child);
  const auto& ba = std::get<BinaryExpr>(a->node);
  const auto& bb = std::get<BinaryExpr>(b->node);
  return ba.op == bb.op && equal(ba.lhs, bb.lhs) && equal(ba.rhs, bb.rhs);
}

QueryAst parse_query(const std::string& text) { return Parser(text).parse(); }

std::string print_query(const QueryAst& q) {
  std::ostringstream out;
  out << "SELECT ";
  if (q.star) {
    out << "*";
  } else {
    for (std::size_t i = 0; i < q.columns.size(); ++i) {
      if (i > 0) out << ", ";
      out << q.columns[i];
    }
  }
  out << " FROM " << q.table;
  if (q.where) {
    out << " WHERE ";
    print_expr(out, q.where, 0);
  }
  return out.str();
}

const Catalog::Entry& Catalog::fuzzify_column(const store::CsvTable& table_data,
                                              const std::string& table,
                                              const std::string& column,
                                              fuzzy::LinguisticVariable variable,
                                              bool materialize) {
  const std::string norm = store::normalize_column_name(column);
  const auto col = table_data.column_index(column);
  if (!col) throw SemanticError("unknown column: " + column);
  if (!table_data.is_numeric_column(*col))
    throw SemanticError("column is not numeric: " + column);

  Entry entry{table, norm, std::move(variable), {}};
  if (materialize) {
    for (std::size_t r = 0; r < table_data.row_count(); ++r) {
      const auto value = store::CsvTable::parse_number(table_data.cell(r, *col));
      if (!value) continue;
      auto& degrees = entry.materialized[static_cast<long>(r)];
      for (const auto& td : entry.variable.fuzzify(*value).terms)
        degrees[td.label] = td.degree;
    }
  }
  for (Entry& existing : entries_) {
    if (existing.table == table && existing.column == norm) {
      existing = std::move(entry);
      return existing;
    }
  }
  entries_.push_back(std::move(entry));
  return entries_.back();
}

const Catalog::Entry* Catalog::find(const std::string& table,
                                    const std::string& column) const {
  const std::string norm = store::normalize_column_name(column);
  for (const Entry& e : entries_)
    if (e.table == table && e.column == norm) return &e;
  return nullptr;
}

nlohmann::json Catalog::to_json() const {
  nlohmann::json entries = nlohmann::json::array();
  for (const Entry& e : entries_) {
    nlohmann::json je{{"table", e.table},
                      {"column", e.column},
                      {"variable", fuzzy::to_json(e.variable)}};
    if (!e.materialized.empty()) {
      nlohmann::json m = nlohmann::json::object();
      for (const auto& [row, degrees] : e.materialized)
        m[std::to_string(row)] = degrees;
      je["materialized"] = std::move(m);
    }
    entries.push_back(std::move(je));
  }
  return {{"entries", entries}};
}

Catalog Catalog::from_json(const nlohmann::json& j) {
  Catalog catalog;
  for (const auto& je : j.at("entries")) {
    Entry entry{je.at("table").get<std::string>(),
                store::normalize_column_name(je.at("column").get<std::string>()),
                fuzzy::variable_from_json(je.at("variable")),
                {}};
    if (je.contains("materialized"))
      for (const auto& [row, degrees] : je["materialized"].items())
        entry.materialized[std::stol(row)] =
            degrees.get<std::map<std::string, double>>();
    catalog.entries_.push_back(std::move(entry));
  }
  return catalog;
}

void Catalog::save(const std::string& path) const {
  io::write_file_atomic(path, to_json().dump(2) + "\n");
}

Catalog Catalog::load(const std::string& path) {
  try {
    return from_json(nlohmann::json::parse(io::read_file(path)));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("catalog " + path + ": " + e.what());
  }
}

namespace {

double eval_expr(const Expr& e, const store::CsvTable& table_data,
                 std::size_t row, const std::string& table,
                 const Catalog& catalog) {
  if (const auto* cmp = std::get_if<Comparison>(&e.node)) {
    const auto col = table_data.column_index(cmp->column);
    if (!col) throw SemanticError("unknown column: " + cmp->column);
    const std::string& cell = table_data.cell(row, *col);
    if (const auto* num = std::get_if<double>(&cmp->value)) {
      const auto value = store::CsvTable::parse_number(cell);
      if (!value) return 0.0;
      return fuzzy::compare(cmp->op, *value, *num) ? 1.0 : 0.0;
    }
    const std::string& lit = std::get<std::string>(cmp->value);
    const int c = cell.compare(lit);
    bool match = false;
    switch (cmp->op) {
      case fuzzy::CompareOp::Eq: match = c == 0; break;
      case fuzzy::CompareOp::Ne: match = c != 0; break;
      case fuzzy::CompareOp::Lt: match = c < 0; break;
      case fuzzy::CompareOp::Le: match = c <= 0; break;
      case fuzzy::CompareOp::Gt: match = c > 0; break;
      case fuzzy::CompareOp::Ge: match = c >= 0; break;
    }
    return match ? 1.0 : 0.0;
  }
  if (const auto* fp = std::get_if<FuzzyPredicate>(&e.node)) {
    const Catalog::Entry* entry = catalog.find(table, fp->column);
    if (entry == nullptr)
      throw SemanticError("column not fuzzified: " + fp->column);
    const fuzzy::FuzzySet* term_set = entry->variable.term(fp->term);
    if (term_set == nullptr) {
      std::string available;
      for (const auto& label : entry->variable.term_labels()) {
        if (!available.empty()) available += ", ";
        available += label;
      }
      throw SemanticError("unknown term " + fp->term + " for column " +
                          fp->column + " (available: " + available + ")");
    }
    const auto col = table_data.column_index(fp->column);
    if (!col) throw SemanticError("unknown column: " + fp->column);
    const auto value = store::CsvTable::parse_number(table_data.cell(row, *col));
    if (!value) return 0.0;
    for (const auto& td : entry->variable.fuzzify(*value).terms)
      if (td.label == fp->term) return td.degree;
    return 0.0;
  }
  if (const auto* n = std::get_if<NotExpr>(&e.node))
    return fuzzy::not_degree(eval_expr(*n->child, table_data, row, table, catalog));
  const auto& bin = std::get<BinaryExpr>(e.node);
  const double l = eval_expr(*bin.lhs, table_data, row, table, catalog);
  const double r = eval_expr(*bin.rhs, table_data, row, table, catalog);
  return bin.op == BinaryExpr::Op::And ? fuzzy::and_degree(l, r)
                                       : fuzzy::or_degree(l, r);
}

}  // namespace

ExecuteResult execute(const QueryAst& q, const store::CsvTable& table_data,
                      const Catalog& catalog, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw SemanticError("alpha threshold outside [0,1]");

  ExecuteResult result;
  std::vector<std::size_t> projection;
  if (q.star) {
    result.columns = table_data.header();
    for (std::size_t i = 0; i < table_data.column_count(); ++i)
      projection.push_back(i);
  } else {
    for (const std::string& name : q.columns) {
      const auto col = table_data.column_index(name);
      if (!col) throw SemanticError("unknown column: " + name);
      projection.push_back(*col);
      result.columns.push_back(table_data.header()[*col]);
    }
  }

  for (std::size_t r = 0; r < table_data.row_count(); ++r) {
    const double degree =
        q.where ? eval_expr(*q.where, table_data, r, q.table, catalog) : 1.0;
    if (degree <= 0.0 || degree < alpha) continue;
    RankedRow row{static_cast<long>(r), {}, degree};
    row.values.reserve(projection.size());
    for (std::size_t col : projection) row.values.push_back(table_data.cell(r, col));
    result.rows.push_back(std::move(row));
  }
  std::stable_sort(result.rows.begin(), result.rows.end(),
                   [](const RankedRow& a, const RankedRow& b) {
                     if (a.degree != b.degree) return a.degree > b.degree;
                     return a.row_id < b.row_id;
                   });
  return result;
}

namespace {

void explain_expr(std::ostringstream& out, const Expr& e,
                  const std::string& table, const Catalog& catalog) {
  if (const auto* cmp = std::get_if<Comparison>(&e.node)) {
    out << "  crisp: " << cmp->column << " " << fuzzy::to_symbol(cmp->op) << " "
        << print_literal(cmp->value) << "\n";
  } else if (const auto* fp = std::get_if<FuzzyPredicate>(&e.node)) {
    out << "  fuzzy: " << fp->column << " IS " << fp->term << " -> ";
    if (const Catalog::Entry* entry = catalog.find(table, fp->column)) {
      out << "catalog " << entry->table << "." << entry->column << " (terms:";
      for (const auto& label : entry->variable.term_labels()) out << " " << label;
      out << ")";
      if (entry->variable.term(fp->term) == nullptr) out << " [unknown term]";
    } else {
      out << "MISSING";
    }
    out << "\n";
  } else if (const auto* n = std::get_if<NotExpr>(&e.node)) {
    explain_expr(out, *n->child, table, catalog);
  } else {
    const auto& bin = std::get<BinaryExpr>(e.node);
    explain_expr(out, *bin.lhs, table, catalog);
    explain_expr(out, *bin.rhs, table, catalog);
  }
}

}  // namespace

std::string explain(const QueryAst& q, const Catalog& catalog) {
  std::ostringstream out;
  out << "plan for table " << q.table << "\n";
  if (!q.where) {
    out << "  full scan, no predicates\n";
    return out.str();
  }
  explain_expr(out, *q.where, q.table, catalog);
  return out.str();
}

}  // namespace fuzzloc::query
