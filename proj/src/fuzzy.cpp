#include "fuzzloc/fuzzy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fuzzloc::fuzzy {

const char* to_symbol(CompareOp op) {
  switch (op) {
    case CompareOp::Eq: return "=";
    case CompareOp::Ne: return "<>";
    case CompareOp::Lt: return "<";
    case CompareOp::Le: return "<=";
    case CompareOp::Gt: return ">";
    case CompareOp::Ge: return ">=";
  }
  return "?";
}

CompareOp compare_op_from_symbol(const std::string& symbol) {
  if (symbol == "=" || symbol == "==") return CompareOp::Eq;
  if (symbol == "<>" || symbol == "!=") return CompareOp::Ne;
  if (symbol == "<") return CompareOp::Lt;
  if (symbol == "<=") return CompareOp::Le;
  if (symbol == ">") return CompareOp::Gt;
  if (symbol == ">=") return CompareOp::Ge;
  throw SemanticError("unknown comparison operator: " + symbol);
}

bool compare(CompareOp op, double lhs, double rhs) {
  switch (op) {
    case CompareOp::Eq: return lhs == rhs;
    case CompareOp::Ne: return lhs != rhs;
    case CompareOp::Lt: return lhs < rhs;
    case CompareOp::Le: return lhs <= rhs;
    case CompareOp::Gt: return lhs > rhs;
    case CompareOp::Ge: return lhs >= rhs;
  }
  return false;
}

MembershipFunction MembershipFunction::triangular(double a, double b,
                                                  double c) {
  if (!(a <= b && b <= c))
    throw SemanticError("triangular parameters must satisfy a <= b <= c");
  if (!(std::isfinite(a) && std::isfinite(b) && std::isfinite(c)))
    throw SemanticError("triangular parameters must be finite");
  return MembershipFunction(Shape::Triangular, {a, b, c}, CompareOp::Le);
}

MembershipFunction MembershipFunction::trapezoidal(double a, double b, double c,
                                                   double d) {
  if (!(a <= b && b <= c && c <= d))
    throw SemanticError("trapezoidal parameters must satisfy a <= b <= c <= d");
  if (!(std::isfinite(a) && std::isfinite(b) && std::isfinite(c) &&
        std::isfinite(d)))
    throw SemanticError("trapezoidal parameters must be finite");
  return MembershipFunction(Shape::Trapezoidal, {a, b, c, d}, CompareOp::Le);
}

MembershipFunction MembershipFunction::crisp_threshold(CompareOp op,
                                                       double bound) {
  if (!std::isfinite(bound))
    throw SemanticError("crisp threshold bound must be finite");
  return MembershipFunction(Shape::CrispThreshold, {bound}, op);
}

namespace {

double rising(double x, double a, double b) {
  // Degenerate edge (a == b) is a vertical jump; x == b is handled by callers.
  if (a == b) return 1.0;
  return (x - a) / (b - a);
}

double falling(double x, double b, double c) {
  if (b == c) return 1.0;
  return (c - x) / (c - b);
}

}  // namespace

double MembershipFunction::evaluate(double x) const {
  switch (shape_) {
    case Shape::Triangular: {
      const double a = params_[0], b = params_[1], c = params_[2];
      if (x < a || x > c) return 0.0;
      if (x == b) return 1.0;
      if (x < b) return rising(x, a, b);
      return falling(x, b, c);
    }
    case Shape::Trapezoidal: {
      const double a = params_[0], b = params_[1], c = params_[2],
                   d = params_[3];
      if (x < a || x > d) return 0.0;
      if (x >= b && x <= c) return 1.0;
      if (x < b) return rising(x, a, b);
      return falling(x, c, d);
    }
    case Shape::CrispThreshold:
      return compare(op_, x, params_[0]) ? 1.0 : 0.0;
  }
  return 0.0;
}

double MembershipFunction::support_lo() const {
  if (shape_ == Shape::CrispThreshold)
    return -std::numeric_limits<double>::infinity();
  return params_.front();
}

double MembershipFunction::support_hi() const {
  if (shape_ == Shape::CrispThreshold)
    return std::numeric_limits<double>::infinity();
  return params_.back();
}

DiscreteFuzzySet::DiscreteFuzzySet(std::vector<double> xs,
                                   std::vector<double> mus)
    : xs_(std::move(xs)), mus_(std::move(mus)) {
  if (xs_.size() != mus_.size())
    throw SemanticError("discrete fuzzy set: xs and mus differ in length");
  for (std::size_t i = 1; i < xs_.size(); ++i)
    if (!(xs_[i - 1] < xs_[i]))
      throw SemanticError("discrete fuzzy set: xs must be strictly increasing");
  for (double mu : mus_)
    if (!(mu >= 0.0 && mu <= 1.0))
      throw SemanticError("discrete fuzzy set: degree outside [0,1]");
}

bool DiscreteFuzzySet::all_zero() const {
  return std::all_of(mus_.begin(), mus_.end(),
                     [](double mu) { return mu == 0.0; });
}

LinguisticVariable::LinguisticVariable(std::string name, double lo, double hi,
                                       std::vector<FuzzySet> terms)
    : name_(std::move(name)), lo_(lo), hi_(hi), terms_(std::move(terms)) {
  if (name_.empty()) throw SemanticError("linguistic variable: empty name");
  if (!(lo_ < hi_))
    throw SemanticError("linguistic variable " + name_ +
                        ": universe requires lo < hi");
  if (terms_.size() < 2)
    throw SemanticError("linguistic variable " + name_ +
                        ": needs at least 2 terms");
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    const FuzzySet& t = terms_[i];
    if (t.label.empty())
      throw SemanticError("linguistic variable " + name_ + ": empty term label");
    for (std::size_t j = i + 1; j < terms_.size(); ++j)
      if (terms_[j].label == t.label)
        throw SemanticError("linguistic variable " + name_ +
                            ": duplicate term label " + t.label);
    if (t.mf.has_bounded_support() &&
        (t.mf.support_lo() < lo_ || t.mf.support_hi() > hi_))
      throw SemanticError("linguistic variable " + name_ + ": term " + t.label +
                          " support exceeds the universe");
  }
}

const FuzzySet* LinguisticVariable::term(const std::string& label) const {
  for (const FuzzySet& t : terms_)
    if (t.label == label) return &t;
  return nullptr;
}

std::vector<std::string> LinguisticVariable::term_labels() const {
  std::vector<std::string> labels;
  labels.reserve(terms_.size());
  for (const FuzzySet& t : terms_) labels.push_back(t.label);
  return labels;
}

FuzzifyResult LinguisticVariable::fuzzify(double x) const {
  FuzzifyResult result;
  double v = x;
  if (v < lo_) {
    v = lo_;
    result.clamped = true;
  } else if (v > hi_) {
    v = hi_;
    result.clamped = true;
  }
  result.used_value = v;
  result.terms.reserve(terms_.size());
  for (const FuzzySet& t : terms_)
    result.terms.push_back({t.label, t.mf.evaluate(v)});
  return result;
}

double and_degree(double a, double b) { return std::min(a, b); }
double or_degree(double a, double b) { return std::max(a, b); }
double not_degree(double a) { return 1.0 - a; }

double defuzzify_centroid(const DiscreteFuzzySet& s) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    num += s.xs()[i] * s.mus()[i];
    den += s.mus()[i];
  }
  if (den == 0.0) throw SemanticError("empty aggregate");
  return num / den;
}

DiscreteFuzzySet clip(const FuzzySet& set, double alpha, double lo, double hi,
                      int grid) {
  if (grid < 2) throw SemanticError("clip: grid must be >= 2");
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw SemanticError("clip: alpha outside [0,1]");
  std::vector<double> xs(static_cast<std::size_t>(grid));
  std::vector<double> mus(static_cast<std::size_t>(grid));
  const double step = (hi - lo) / (grid - 1);
  for (int i = 0; i < grid; ++i) {
    const double x = lo + step * i;
    xs[static_cast<std::size_t>(i)] = x;
    mus[static_cast<std::size_t>(i)] = std::min(set.mf.evaluate(x), alpha);
  }
  return DiscreteFuzzySet(std::move(xs), std::move(mus));
}

DiscreteFuzzySet aggregate_max(const DiscreteFuzzySet& a,
                               const DiscreteFuzzySet& b) {
  if (a.size() == 0) return b;
  if (b.size() == 0) return a;
  if (a.size() != b.size() || a.xs() != b.xs())
    throw SemanticError("aggregate_max: incompatible sample grids");
  std::vector<double> mus(a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    mus[i] = std::max(a.mus()[i], b.mus()[i]);
  return DiscreteFuzzySet(a.xs(), std::move(mus));
}

nlohmann::json to_json(const MembershipFunction& mf) {
  nlohmann::json j;
  switch (mf.shape()) {
    case MembershipFunction::Shape::Triangular:
      j["shape"] = "triangular";
      break;
    case MembershipFunction::Shape::Trapezoidal:
      j["shape"] = "trapezoidal";
      break;
    case MembershipFunction::Shape::CrispThreshold:
      j["shape"] = "crisp_threshold";
      j["op"] = to_symbol(mf.op());
      break;
  }
  j["params"] = mf.params();
  return j;
}

nlohmann::json to_json(const FuzzySet& set) {
  nlohmann::json j = to_json(set.mf);
  j["label"] = set.label;
  return j;
}

nlohmann::json to_json(const LinguisticVariable& var) {
  nlohmann::json terms = nlohmann::json::array();
  for (const FuzzySet& t : var.terms()) terms.push_back(to_json(t));
  return {{"name", var.name()},
          {"universe", {var.lo(), var.hi()}},
          {"terms", terms}};
}

MembershipFunction membership_function_from_json(const nlohmann::json& j) {
  const std::string shape = j.at("shape").get<std::string>();
  const auto params = j.at("params").get<std::vector<double>>();
  if (shape == "triangular") {
    if (params.size() != 3)
      throw SemanticError("triangular expects 3 params");
    return MembershipFunction::triangular(params[0], params[1], params[2]);
  }
  if (shape == "trapezoidal") {
    if (params.size() != 4)
      throw SemanticError("trapezoidal expects 4 params");
    return MembershipFunction::trapezoidal(params[0], params[1], params[2],
                                           params[3]);
  }
  if (shape == "crisp_threshold") {
    if (params.size() != 1)
      throw SemanticError("crisp_threshold expects 1 param");
    return MembershipFunction::crisp_threshold(
        compare_op_from_symbol(j.at("op").get<std::string>()), params[0]);
  }
  throw SemanticError("unknown membership function shape: " + shape);
}

FuzzySet fuzzy_set_from_json(const nlohmann::json& j) {
  return FuzzySet{j.at("label").get<std::string>(),
                  membership_function_from_json(j)};
}

LinguisticVariable variable_from_json(const nlohmann::json& j) {
  const auto universe = j.at("universe").get<std::vector<double>>();
  if (universe.size() != 2)
    throw SemanticError("variable universe must be [lo, hi]");
  std::vector<FuzzySet> terms;
  for (const auto& t : j.at("terms")) terms.push_back(fuzzy_set_from_json(t));
  return LinguisticVariable(j.at("name").get<std::string>(), universe[0],
                            universe[1], std::move(terms));
}

}  // namespace fuzzloc::fuzzy
