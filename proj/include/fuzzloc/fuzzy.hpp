#pragma once

#include <string>
#include <vector>

#include "fuzzloc/errors.hpp"
#include "json.hpp"

namespace fuzzloc::fuzzy {

enum class CompareOp { Eq, Ne, Lt, Le, Gt, Ge };

const char* to_symbol(CompareOp op);
CompareOp compare_op_from_symbol(const std::string& symbol);
bool compare(CompareOp op, double lhs, double rhs);

// Piecewise-linear membership function over a numeric universe. Parameter
// ordering is validated at construction; evaluate() is total and always
// lands in [0,1].
class MembershipFunction {
 public:
  enum class Shape { Triangular, Trapezoidal, CrispThreshold };

  static MembershipFunction triangular(double a, double b, double c);
  static MembershipFunction trapezoidal(double a, double b, double c, double d);
  static MembershipFunction crisp_threshold(CompareOp op, double bound);

  double evaluate(double x) const;

  Shape shape() const { return shape_; }
  const std::vector<double>& params() const { return params_; }
  CompareOp op() const { return op_; }  // CrispThreshold only

  // [support_lo, support_hi]: outside this interval the degree is 0.
  // Unbounded for crisp thresholds.
  double support_lo() const;
  double support_hi() const;
  bool has_bounded_support() const { return shape_ != Shape::CrispThreshold; }

  bool operator==(const MembershipFunction&) const = default;

 private:
  MembershipFunction(Shape shape, std::vector<double> params, CompareOp op)
      : shape_(shape), params_(std::move(params)), op_(op) {}

  Shape shape_;
  std::vector<double> params_;
  CompareOp op_ = CompareOp::Le;
};

struct FuzzySet {
  std::string label;
  MembershipFunction mf;

  bool operator==(const FuzzySet&) const = default;
};

// Sampled fuzzy set: strictly increasing support points with degrees in [0,1].
class DiscreteFuzzySet {
 public:
  DiscreteFuzzySet() = default;
  DiscreteFuzzySet(std::vector<double> xs, std::vector<double> mus);

  const std::vector<double>& xs() const { return xs_; }
  const std::vector<double>& mus() const { return mus_; }
  std::size_t size() const { return xs_.size(); }
  bool all_zero() const;

 private:
  std::vector<double> xs_;
  std::vector<double> mus_;
};

struct TermDegree {
  std::string label;
  double degree;
};

struct FuzzifyResult {
  std::vector<TermDegree> terms;  // one entry per term, in term order
  bool clamped = false;
  double used_value = 0.0;  // x after clamping to the universe
};

class LinguisticVariable {
 public:
  LinguisticVariable(std::string name, double lo, double hi,
                     std::vector<FuzzySet> terms);

  const std::string& name() const { return name_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  const std::vector<FuzzySet>& terms() const { return terms_; }
  const FuzzySet* term(const std::string& label) const;
  std::vector<std::string> term_labels() const;

  FuzzifyResult fuzzify(double x) const;

  bool operator==(const LinguisticVariable&) const = default;

 private:
  std::string name_;
  double lo_;
  double hi_;
  std::vector<FuzzySet> terms_;
};

// Goedel connectives.
double and_degree(double a, double b);
double or_degree(double a, double b);
double not_degree(double a);

// Weighted center of the sampled set: sum(x*mu)/sum(mu).
// Throws SemanticError("empty aggregate") when every degree is 0.
double defuzzify_centroid(const DiscreteFuzzySet& s);

// Sample min(mu(x), alpha) on a uniform grid over [lo, hi]. grid >= 2.
DiscreteFuzzySet clip(const FuzzySet& set, double alpha, double lo, double hi,
                      int grid);

// Pointwise max of two sets sampled on the same grid.
DiscreteFuzzySet aggregate_max(const DiscreteFuzzySet& a,
                               const DiscreteFuzzySet& b);

nlohmann::json to_json(const MembershipFunction& mf);
nlohmann::json to_json(const FuzzySet& set);
nlohmann::json to_json(const LinguisticVariable& var);
MembershipFunction membership_function_from_json(const nlohmann::json& j);
FuzzySet fuzzy_set_from_json(const nlohmann::json& j);
LinguisticVariable variable_from_json(const nlohmann::json& j);

}  // namespace fuzzloc::fuzzy
