#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fuzzloc/fuzzy.hpp"

namespace fuzzloc::kb {

enum class Connective { And, Or };

struct RuleAtom {
  std::string variable;
  std::string term;

  bool operator==(const RuleAtom&) const = default;
};

enum class RuleKind { Ground, Meta };

// IF <atom> ((AND|OR) <atom>)* THEN <variable> IS <term>.
// Antecedent evaluates left-associatively with no precedence between
// connectives.
struct Rule {
  std::string id;
  std::vector<RuleAtom> atoms;
  std::vector<Connective> connectives;  // size atoms.size() - 1
  std::string consequent_variable;
  std::string consequent_term;
  RuleKind kind = RuleKind::Ground;

  bool same_text(const Rule& other) const {
    return atoms == other.atoms && connectives == other.connectives &&
           consequent_variable == other.consequent_variable &&
           consequent_term == other.consequent_term;
  }
};

Rule parse_rule(const std::string& text, std::string id = "", int line = 1);
std::string print_rule(const Rule& rule);

// Rule files: UTF-8 text, one rule per line, '#' starts a comment.
std::vector<Rule> parse_rule_file(const std::string& content,
                                  const std::string& id_prefix = "r");

struct Diagnostic {
  std::string rule_id;  // empty for kb-level problems
  std::string message;
};

enum class RiskLevel { LR, SR, HR };
const char* to_string(RiskLevel level);

struct RiskAssessment {
  // output variable -> term -> aggregated activation degree
  std::map<std::string, std::map<std::string, double>> activations;
  double score = 0.0;
  RiskLevel level = RiskLevel::SR;
  std::vector<std::string> fired_rules;
  bool no_fire = false;
  bool clamped_input = false;
};

RiskLevel classify(double score, double t1, double t2);

class KnowledgeBase {
 public:
  std::vector<fuzzy::LinguisticVariable> inputs;
  std::vector<fuzzy::LinguisticVariable> outputs;
  std::vector<Rule> rules;
  std::string risk_variable;  // the output variable that gets defuzzified
  double threshold_low = 33.0;
  double threshold_high = 66.0;
  int grid = 101;

  const fuzzy::LinguisticVariable* input(const std::string& name) const;
  const fuzzy::LinguisticVariable* output(const std::string& name) const;

  // Resolves variables/terms, checks output usage and meta-rule acyclicity,
  // and tags each rule Ground or Meta. Empty result means valid.
  std::vector<Diagnostic> validate();

  RiskAssessment infer(const std::map<std::string, double>& crisp_inputs) const;

  double evaluate_antecedent(
      const Rule& rule,
      const std::map<std::string, std::map<std::string, double>>& degrees)
      const;

 private:
  std::vector<std::string> output_evaluation_order() const;
};

// KB manifest: JSON listing variable-definition files, rule files, the risk
// variable and classification thresholds. Paths resolve relative to the
// manifest's directory.
KnowledgeBase load_kb_manifest(const std::string& manifest_path);

nlohmann::json to_json(const RiskAssessment& a);

}  // namespace fuzzloc::kb
