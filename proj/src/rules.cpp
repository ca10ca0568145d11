#include "fuzzloc/rules.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include "fuzzloc/io.hpp"

namespace fuzzloc::kb {

namespace {

std::string upper(std::string s) {
  for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '#';
}

struct Token {
  enum class Kind { Ident, End } kind;
  std::string text;   // unquoted content
  bool quoted = false;
  int column = 0;     // 1-based
};

// Rule-language lexer: bare identifiers, double-quoted identifiers (for
// names containing spaces), nothing else.
class Lexer {
 public:
  Lexer(const std::string& text, int line) : text_(text), line_(line) {}

  Token next() {
    skip_ws();
    if (pos_ >= text_.size()) return {Token::Kind::End, "", false, col()};
    const int start = col();
    char c = text_[pos_];
    if (c == '"') {
      ++pos_;
      std::string out;
      while (pos_ < text_.size() && text_[pos_] != '"') out += text_[pos_++];
      if (pos_ >= text_.size())
        throw ParseError("unterminated quoted identifier", line_, start);
      ++pos_;
      return {Token::Kind::Ident, out, true, start};
    }
    if (is_ident_char(c)) {
      std::string out;
      while (pos_ < text_.size() && is_ident_char(text_[pos_]))
        out += text_[pos_++];
      return {Token::Kind::Ident, out, false, start};
    }
    throw ParseError(std::string("unexpected character '") + c + "'", line_,
                     start);
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
  }
  int col() const { return static_cast<int>(pos_) + 1; }

  const std::string& text_;
  std::size_t pos_ = 0;
  int line_;
};

bool is_keyword(const Token& t, const char* kw) {
  return t.kind == Token::Kind::Ident && !t.quoted && upper(t.text) == kw;
}

constexpr const char* kKeywords[] = {"IF", "IS", "AND", "OR", "THEN"};

bool needs_quoting(const std::string& ident) {
  if (ident.empty()) return true;
  for (char c : ident)
    if (!is_ident_char(c)) return true;
  const std::string up = upper(ident);
  for (const char* kw : kKeywords)
    if (up == kw) return true;
  return false;
}

std::string print_ident(const std::string& ident) {
  if (!needs_quoting(ident)) return ident;
  return "\"" + ident + "\"";
}

}  // namespace

Rule parse_rule(const std::string& text, std::string id, int line) {
  Lexer lex(text, line);
  Rule rule;
  rule.id = std::move(id);

  auto expect_ident = [&](const char* what) -> Token {
    Token t = lex.next();
    if (t.kind != Token::Kind::Ident)
      throw ParseError(std::string("expected ") + what, line, t.column);
    return t;
  };
  auto expect_keyword = [&](const char* kw) {
    Token t = lex.next();
    if (!is_keyword(t, kw))
      throw ParseError(std::string("expected ") + kw, line, t.column);
  };

  expect_keyword("IF");
  while (true) {
    Token var = expect_ident("variable name");
    if (!var.quoted) {
      for (const char* kw : kKeywords)
        if (upper(var.text) == kw)
          throw ParseError("expected variable name, got keyword " + var.text,
                           line, var.column);
    }
    expect_keyword("IS");
    Token term = expect_ident("term label");
    rule.atoms.push_back({var.text, term.text});

    Token next = lex.next();
    if (is_keyword(next, "AND")) {
      rule.connectives.push_back(Connective::And);
      continue;
    }
    if (is_keyword(next, "OR")) {
      rule.connectives.push_back(Connective::Or);
      continue;
    }
    if (is_keyword(next, "THEN")) break;
    throw ParseError("expected AND, OR or THEN", line, next.column);
  }

  Token cvar = expect_ident("consequent variable");
  expect_keyword("IS");
  Token cterm = expect_ident("consequent term");
  rule.consequent_variable = cvar.text;
  rule.consequent_term = cterm.text;

  Token tail = lex.next();
  if (tail.kind != Token::Kind::End)
    throw ParseError("trailing input after rule", line, tail.column);
  return rule;
}

std::string print_rule(const Rule& rule) {
  std::ostringstream out;
  out << "IF ";
  for (std::size_t i = 0; i < rule.atoms.size(); ++i) {
    if (i > 0)
      out << (rule.connectives[i - 1] == Connective::And ? " AND " : " OR ");
    out << print_ident(rule.atoms[i].variable) << " IS "
        << print_ident(rule.atoms[i].term);
  }
  out << " THEN " << print_ident(rule.consequent_variable) << " IS "
      << print_ident(rule.consequent_term);
  return out.str();
}

std::vector<Rule> parse_rule_file(const std::string& content,
                                  const std::string& id_prefix) {
  std::vector<Rule> rules;
  std::istringstream in(content);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string text = raw;
    if (auto hash = text.find('#'); hash != std::string::npos) {
      // '#' inside quotes stays; a comment hash is preceded by start/space.
      bool in_quote = false;
      for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] == '"') in_quote = !in_quote;
        if (text[i] == '#' && !in_quote &&
            (i == 0 || std::isspace(static_cast<unsigned char>(text[i - 1])))) {
          text = text.substr(0, i);
          break;
        }
      }
    }
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    rules.push_back(parse_rule(
        text, id_prefix + std::to_string(rules.size() + 1), line));
  }
  return rules;
}

const char* to_string(RiskLevel level) {
  switch (level) {
    case RiskLevel::LR: return "LR";
    case RiskLevel::SR: return "SR";
    case RiskLevel::HR: return "HR";
  }
  return "?";
}

RiskLevel classify(double score, double t1, double t2) {
  if (!(t1 < t2)) throw SemanticError("classify: thresholds require t1 < t2");
  if (score < t1) return RiskLevel::LR;
  if (score < t2) return RiskLevel::SR;
  return RiskLevel::HR;
}

const fuzzy::LinguisticVariable* KnowledgeBase::input(
    const std::string& name) const {
  for (const auto& v : inputs)
    if (v.name() == name) return &v;
  return nullptr;
}

const fuzzy::LinguisticVariable* KnowledgeBase::output(
    const std::string& name) const {
  for (const auto& v : outputs)
    if (v.name() == name) return &v;
  return nullptr;
}

std::vector<Diagnostic> KnowledgeBase::validate() {
  std::vector<Diagnostic> diags;
  if (outputs.empty())
    diags.push_back({"", "knowledge base declares no output variable"});
  if (!risk_variable.empty() && output(risk_variable) == nullptr)
    diags.push_back({"", "risk variable " + risk_variable +
                             " is not a declared output variable"});

  auto resolve = [&](const std::string& var) -> const fuzzy::LinguisticVariable* {
    if (const auto* v = input(var)) return v;
    return output(var);
  };

  for (Rule& rule : rules) {
    rule.kind = RuleKind::Ground;
    for (const RuleAtom& atom : rule.atoms) {
      const auto* v = resolve(atom.variable);
      if (v == nullptr) {
        diags.push_back({rule.id, "unknown variable " + atom.variable});
        continue;
      }
      if (v->term(atom.term) == nullptr)
        diags.push_back({rule.id, "unknown term " + atom.term +
                                      " of variable " + atom.variable});
      if (output(atom.variable) != nullptr) rule.kind = RuleKind::Meta;
    }
    const auto* cv = output(rule.consequent_variable);
    if (cv == nullptr) {
      diags.push_back({rule.id, "consequent variable " +
                                    rule.consequent_variable +
                                    " is not a declared output variable"});
    } else if (cv->term(rule.consequent_term) == nullptr) {
      diags.push_back({rule.id, "unknown term " + rule.consequent_term +
                                    " of variable " +
                                    rule.consequent_variable});
    }
  }

  // Meta-rule cycle check on the output-variable dependency graph.
  std::map<std::string, std::set<std::string>> deps;  // var -> vars it needs
  for (const Rule& rule : rules)
    for (const RuleAtom& atom : rule.atoms)
      if (output(atom.variable) != nullptr)
        deps[rule.consequent_variable].insert(atom.variable);
  std::map<std::string, int> state;  // 0 unseen, 1 in stack, 2 done
  std::vector<std::string> stack;
  auto dfs = [&](auto&& self, const std::string& var) -> bool {
    state[var] = 1;
    for (const auto& next : deps[var]) {
      if (state[next] == 1) return false;
      if (state[next] == 0 && !self(self, next)) return false;
    }
    state[var] = 2;
    return true;
  };
  for (const auto& [var, _] : deps)
    if (state[var] == 0 && !dfs(dfs, var)) {
      diags.push_back({"", "cycle among meta-rules involving variable " + var});
      break;
    }

  return diags;
}

double KnowledgeBase::evaluate_antecedent(
    const Rule& rule,
    const std::map<std::string, std::map<std::string, double>>& degrees) const {
  auto atom_degree = [&](const RuleAtom& atom) -> double {
    auto it = degrees.find(atom.variable);
    if (it == degrees.end())
      throw SemanticError("missing variable in input map: " + atom.variable);
    auto jt = it->second.find(atom.term);
    return jt == it->second.end() ? 0.0 : jt->second;
  };
  double acc = atom_degree(rule.atoms.at(0));
  for (std::size_t i = 1; i < rule.atoms.size(); ++i) {
    const double d = atom_degree(rule.atoms[i]);
    acc = rule.connectives[i - 1] == Connective::And ? fuzzy::and_degree(acc, d)
                                                     : fuzzy::or_degree(acc, d);
  }
  return acc;
}

std::vector<std::string> KnowledgeBase::output_evaluation_order() const {
  std::map<std::string, std::set<std::string>> deps;
  for (const Rule& rule : rules)
    for (const RuleAtom& atom : rule.atoms)
      if (output(atom.variable) != nullptr)
        deps[rule.consequent_variable].insert(atom.variable);

  std::vector<std::string> order;
  std::set<std::string> done;
  auto visit = [&](auto&& self, const std::string& var) -> void {
    if (done.count(var)) return;
    done.insert(var);
    for (const auto& next : deps[var]) self(self, next);
    order.push_back(var);
  };
  for (const auto& v : outputs) visit(visit, v.name());
  return order;
}

RiskAssessment KnowledgeBase::infer(
    const std::map<std::string, double>& crisp_inputs) const {
  RiskAssessment result;

  std::map<std::string, std::map<std::string, double>> degrees;
  for (const auto& var : inputs) {
    auto it = crisp_inputs.find(var.name());
    if (it == crisp_inputs.end())
      throw SemanticError("missing input variable: " + var.name());
    const fuzzy::FuzzifyResult f = var.fuzzify(it->second);
    result.clamped_input = result.clamped_input || f.clamped;
    auto& m = degrees[var.name()];
    for (const auto& td : f.terms) m[td.label] = td.degree;
  }

  std::map<std::string, fuzzy::DiscreteFuzzySet> aggregates;
  for (const std::string& out_name : output_evaluation_order()) {
    const fuzzy::LinguisticVariable* out_var = output(out_name);
    std::map<std::string, double> activation;
    for (const auto& t : out_var->terms()) activation[t.label] = 0.0;

    for (const Rule& rule : rules) {
      if (rule.consequent_variable != out_name) continue;
      const double act = evaluate_antecedent(rule, degrees);
      if (act > 0.0) result.fired_rules.push_back(rule.id);
      activation[rule.consequent_term] =
          fuzzy::or_degree(activation[rule.consequent_term], act);
    }

    fuzzy::DiscreteFuzzySet aggregate;
    for (const auto& t : out_var->terms()) {
      const auto clipped = fuzzy::clip(t, activation[t.label], out_var->lo(),
                                       out_var->hi(), grid);
      aggregate = fuzzy::aggregate_max(aggregate, clipped);
    }
    aggregates[out_name] = aggregate;
    result.activations[out_name] = activation;
    degrees[out_name] = std::move(activation);  // feeds meta-rule atoms
  }

  const std::string& risk = risk_variable.empty() && !outputs.empty()
                                ? outputs.front().name()
                                : risk_variable;
  const fuzzy::LinguisticVariable* risk_var = output(risk);
  if (risk_var == nullptr)
    throw SemanticError("risk variable not declared: " + risk);
  const auto& risk_aggregate = aggregates.at(risk);
  if (risk_aggregate.all_zero()) {
    // No-fire policy: report standard risk, flagged, at the universe midpoint.
    result.no_fire = true;
    result.score = (risk_var->lo() + risk_var->hi()) / 2.0;
    result.level = RiskLevel::SR;
    return result;
  }
  result.score = fuzzy::defuzzify_centroid(risk_aggregate);
  result.level = classify(result.score, threshold_low, threshold_high);
  return result;
}

KnowledgeBase load_kb_manifest(const std::string& manifest_path) {
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(io::read_file(manifest_path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("kb manifest " + manifest_path + ": " + e.what());
  }

  KnowledgeBase kb;
  auto load_vars = [&](const char* key,
                       std::vector<fuzzy::LinguisticVariable>& dest) {
    for (const auto& rel : manifest.at(key)) {
      const std::string path =
          io::sibling_path(manifest_path, rel.get<std::string>());
      nlohmann::json doc;
      try {
        doc = nlohmann::json::parse(io::read_file(path));
      } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("variable file " + path + ": " + e.what());
      }
      if (doc.is_array())
        for (const auto& v : doc) dest.push_back(fuzzy::variable_from_json(v));
      else
        dest.push_back(fuzzy::variable_from_json(doc));
    }
  };
  load_vars("input_variables", kb.inputs);
  load_vars("output_variables", kb.outputs);

  int file_index = 0;
  for (const auto& rel : manifest.at("rules")) {
    const std::string path =
        io::sibling_path(manifest_path, rel.get<std::string>());
    ++file_index;
    const std::string prefix =
        manifest.at("rules").size() > 1
            ? "f" + std::to_string(file_index) + ".r"
            : "r";
    for (Rule& r : parse_rule_file(io::read_file(path), prefix))
      kb.rules.push_back(std::move(r));
  }

  if (manifest.contains("risk_variable"))
    kb.risk_variable = manifest["risk_variable"].get<std::string>();
  if (manifest.contains("thresholds")) {
    const auto t = manifest["thresholds"].get<std::vector<double>>();
    if (t.size() != 2) throw SemanticError("thresholds must be [t1, t2]");
    kb.threshold_low = t[0];
    kb.threshold_high = t[1];
  }
  if (manifest.contains("grid")) kb.grid = manifest["grid"].get<int>();

  if (auto diags = kb.validate(); !diags.empty()) {
    std::string msg = "knowledge base " + manifest_path + " invalid:";
    for (const auto& d : diags)
      msg += "\n  " + (d.rule_id.empty() ? "" : d.rule_id + ": ") + d.message;
    throw SemanticError(msg);
  }
  return kb;
}

nlohmann::json to_json(const RiskAssessment& a) {
  return {{"activations", a.activations},
          {"score", a.score},
          {"level", to_string(a.level)},
          {"fired_rules", a.fired_rules},
          {"no_fire", a.no_fire},
          {"clamped_input", a.clamped_input}};
}

}  // namespace fuzzloc::kb
