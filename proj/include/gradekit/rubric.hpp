#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "gradekit/rational.hpp"

namespace gradekit {

/// Subset of criterion labels ('A'..'Z') an answer satisfies.
using CriteriaSet = std::set<char>;

std::string criteria_to_string(const CriteriaSet& set);  // "A, B"

/// One grading criterion: a theme the answer must contain to earn the points.
/// The explanation is shown to the grader for feedback purposes only and never
/// enters scoring.
struct Criterion {
  char label = 0;
  std::string description;
  std::optional<std::string> explanation;
  Rational points;
};

class RubricError : public std::runtime_error {
 public:
  RubricError(std::string message, int line = 0, int column = 0)
      : std::runtime_error(format(message, line, column)),
        line_(line),
        column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  static std::string format(const std::string& message, int line, int column);
  int line_ = 0;
  int column_ = 0;
};

/// Expression tree combining satisfied-criteria points into a final score.
/// Grammar: expr := term ('+' term)* ; term := factor ('*' factor)* ;
/// factor := number | LABEL | min(expr, expr, ...) | max(...) | (expr).
class ScoreExpression {
 public:
  enum class Kind { Literal, Ref, Add, Mul, Min, Max };

  struct Node {
    Kind kind = Kind::Literal;
    Rational literal;             // Literal
    char label = 0;               // Ref
    std::vector<Node> children;   // Add/Mul: exactly 2; Min/Max: >= 2
  };

  // Throws RubricError with a 1-based column on syntax errors.
  static ScoreExpression parse(std::string_view source);

  static ScoreExpression make_literal(Rational value);
  static ScoreExpression make_ref(char label);
  static ScoreExpression make_add(ScoreExpression lhs, ScoreExpression rhs);
  static ScoreExpression make_mul(ScoreExpression lhs, ScoreExpression rhs);
  static ScoreExpression make_min(std::vector<ScoreExpression> args);
  static ScoreExpression make_max(std::vector<ScoreExpression> args);

  Rational evaluate(const std::function<Rational(char)>& binding) const;
  std::string to_string() const;
  std::vector<char> referenced_labels() const;  // sorted, unique
  const Node& root() const { return root_; }

 private:
  ScoreExpression() = default;
  Node root_;
};

/// A per-exercise grading rubric: ordered criteria plus an optional score
/// expression. Without an expression the score is the plain sum of satisfied
/// points. Immutable after construction; safe to share across threads.
struct Rubric {
  std::string exercise_id;
  std::optional<std::string> preamble;
  std::vector<Criterion> criteria;
  std::optional<ScoreExpression> expression;

  bool has_label(char label) const;
  const Criterion* find(char label) const;
  std::vector<char> labels() const;
};

struct Diagnostic {
  std::string code;     // stable machine key, e.g. "raw-sum-exceeds-one"
  std::string message;  // human-readable
};

/// Parses one rubric JSON document. Hard errors (syntax, duplicate label,
/// points out of [0,1], undefined label in the expression) throw RubricError;
/// softer invariant breaches are left to validate().
Rubric parse_rubric(std::string_view json_text);

std::string serialize_rubric(const Rubric& rubric);

/// Final score for a satisfied set: the expression with each satisfied
/// reference bound to its points and each unsatisfied reference bound to 0;
/// plain sum when no expression is present. Throws RubricError when the
/// satisfied set names an unknown label.
Rational evaluate(const Rubric& rubric, const CriteriaSet& satisfied);

/// Diagnostic evaluator: plain sum of satisfied points, ignoring any score
/// expression. This is the quantity that can exceed 1 on overlapping rubrics.
Rational raw_sum(const Rubric& rubric, const CriteriaSet& satisfied);

/// Empty result iff all rubric invariants hold, including score range [0,1]
/// over every criteria subset (verified by exhaustive enumeration).
std::vector<Diagnostic> validate(const Rubric& rubric);

}  // namespace gradekit
