#include "gradekit/rubric.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>

#include "gradekit/util.hpp"

namespace gradekit {

using json = nlohmann::json;

std::string criteria_to_string(const CriteriaSet& set) {
  std::string out;
  for (char c : set) {
    if (!out.empty()) out += ", ";
    out.push_back(c);
  }
  return out;
}

std::string RubricError::format(const std::string& message, int line, int column) {
  if (line <= 0 && column <= 0) return message;
  std::ostringstream os;
  if (line > 0) os << "line " << line << ", ";
  os << "column " << column << ": " << message;
  return os.str();
}

// ---------------------------------------------------------------------------
// Expression parsing
// ---------------------------------------------------------------------------

namespace {

class ExprParser {
 public:
  explicit ExprParser(std::string_view src) : src_(src) {}

  ScoreExpression::Node parse() {
    ScoreExpression::Node node = parse_expr();
    skip_spaces();
    if (pos_ != src_.size()) {
      fail("unexpected trailing input");
    }
    return node;
  }

 private:
  using Node = ScoreExpression::Node;
  using Kind = ScoreExpression::Kind;

  [[noreturn]] void fail(const std::string& message) const {
    throw RubricError(message, 0, static_cast<int>(pos_) + 1);
  }

  void skip_spaces() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool consume(char c) {
    skip_spaces();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  char peek() {
    skip_spaces();
    return pos_ < src_.size() ? src_[pos_] : '\0';
  }

  Node parse_expr() {
    Node lhs = parse_term();
    while (consume('+')) {
      Node rhs = parse_term();
      Node add;
      add.kind = Kind::Add;
      add.children.push_back(std::move(lhs));
      add.children.push_back(std::move(rhs));
      lhs = std::move(add);
    }
    return lhs;
  }

  Node parse_term() {
    Node lhs = parse_factor();
    while (consume('*')) {
      Node rhs = parse_factor();
      Node mul;
      mul.kind = Kind::Mul;
      mul.children.push_back(std::move(lhs));
      mul.children.push_back(std::move(rhs));
      lhs = std::move(mul);
    }
    return lhs;
  }

  Node parse_factor() {
    skip_spaces();
    if (pos_ >= src_.size()) fail("unexpected end of expression");
    char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      Node inner = parse_expr();
      if (!consume(')')) fail("expected ')'");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      return parse_number();
    }
    if (c >= 'A' && c <= 'Z') {
      ++pos_;
      if (pos_ < src_.size() && std::isalnum(static_cast<unsigned char>(src_[pos_]))) {
        fail("criterion labels are single letters A-Z");
      }
      Node ref;
      ref.kind = Kind::Ref;
      ref.label = c;
      return ref;
    }
    if (match_keyword("min")) return parse_call(Kind::Min);
    if (match_keyword("max")) return parse_call(Kind::Max);
    fail(std::string("unexpected character '") + c + "'");
  }

  bool match_keyword(std::string_view kw) {
    skip_spaces();
    if (src_.substr(pos_, kw.size()) != kw) return false;
    size_t after = pos_ + kw.size();
    if (after < src_.size() && std::isalnum(static_cast<unsigned char>(src_[after]))) return false;
    pos_ = after;
    return true;
  }

  Node parse_call(Kind kind) {
    if (!consume('(')) fail("expected '(' after min/max");
    Node call;
    call.kind = kind;
    call.children.push_back(parse_expr());
    if (!consume(',')) fail("min/max take at least two arguments");
    call.children.push_back(parse_expr());
    while (consume(',')) {
      call.children.push_back(parse_expr());
    }
    if (!consume(')')) fail("expected ')'");
    return call;
  }

  Node parse_number() {
    size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.')) {
      ++pos_;
    }
    std::string text(src_.substr(start, pos_ - start));
    Node lit;
    lit.kind = Kind::Literal;
    try {
      lit.literal = Rational::from_decimal(text);
    } catch (const std::exception& e) {
      pos_ = start;
      fail(std::string("bad numeric literal: ") + e.what());
    }
    return lit;
  }

  std::string_view src_;
  size_t pos_ = 0;
};

void collect_labels(const ScoreExpression::Node& node, std::set<char>& out) {
  if (node.kind == ScoreExpression::Kind::Ref) out.insert(node.label);
  for (const auto& child : node.children) collect_labels(child, out);
}

Rational eval_node(const ScoreExpression::Node& node,
                   const std::function<Rational(char)>& binding) {
  using Kind = ScoreExpression::Kind;
  switch (node.kind) {
    case Kind::Literal:
      return node.literal;
    case Kind::Ref:
      return binding(node.label);
    case Kind::Add:
      return eval_node(node.children[0], binding) + eval_node(node.children[1], binding);
    case Kind::Mul:
      return eval_node(node.children[0], binding) * eval_node(node.children[1], binding);
    case Kind::Min: {
      Rational best = eval_node(node.children[0], binding);
      for (size_t i = 1; i < node.children.size(); ++i) {
        best = Rational::min(best, eval_node(node.children[i], binding));
      }
      return best;
    }
    case Kind::Max: {
      Rational best = eval_node(node.children[0], binding);
      for (size_t i = 1; i < node.children.size(); ++i) {
        best = Rational::max(best, eval_node(node.children[i], binding));
      }
      return best;
    }
  }
  throw std::logic_error("unreachable expression kind");
}

// Parenthesization: '+' is the lowest level, '*' binds tighter, everything
// else is atomic. A child is wrapped iff its level is looser than the parent.
int node_level(const ScoreExpression::Node& node) {
  switch (node.kind) {
    case ScoreExpression::Kind::Add:
      return 1;
    case ScoreExpression::Kind::Mul:
      return 2;
    default:
      return 3;
  }
}

void render_node(const ScoreExpression::Node& node, std::string& out) {
  using Kind = ScoreExpression::Kind;
  auto render_child = [&out](const ScoreExpression::Node& child, int parent_level) {
    bool wrap = node_level(child) < parent_level;
    if (wrap) out.push_back('(');
    render_node(child, out);
    if (wrap) out.push_back(')');
  };
  switch (node.kind) {
    case Kind::Literal:
      out += node.literal.to_decimal_trimmed(9);
      return;
    case Kind::Ref:
      out.push_back(node.label);
      return;
    case Kind::Add:
      render_child(node.children[0], 1);
      out += " + ";
      render_child(node.children[1], 1);
      return;
    case Kind::Mul:
      render_child(node.children[0], 2);
      out += " * ";
      render_child(node.children[1], 2);
      return;
    case Kind::Min:
    case Kind::Max:
      out += node.kind == Kind::Min ? "min(" : "max(";
      for (size_t i = 0; i < node.children.size(); ++i) {
        if (i > 0) out += ", ";
        render_node(node.children[i], out);
      }
      out.push_back(')');
      return;
  }
}

}  // namespace

ScoreExpression ScoreExpression::parse(std::string_view source) {
  ExprParser parser(source);
  ScoreExpression expr;
  expr.root_ = parser.parse();
  return expr;
}

ScoreExpression ScoreExpression::make_literal(Rational value) {
  ScoreExpression e;
  e.root_.kind = Kind::Literal;
  e.root_.literal = value;
  return e;
}

ScoreExpression ScoreExpression::make_ref(char label) {
  ScoreExpression e;
  e.root_.kind = Kind::Ref;
  e.root_.label = label;
  return e;
}

ScoreExpression ScoreExpression::make_add(ScoreExpression lhs, ScoreExpression rhs) {
  ScoreExpression e;
  e.root_.kind = Kind::Add;
  e.root_.children.push_back(std::move(lhs.root_));
  e.root_.children.push_back(std::move(rhs.root_));
  return e;
}

ScoreExpression ScoreExpression::make_mul(ScoreExpression lhs, ScoreExpression rhs) {
  ScoreExpression e;
  e.root_.kind = Kind::Mul;
  e.root_.children.push_back(std::move(lhs.root_));
  e.root_.children.push_back(std::move(rhs.root_));
  return e;
}

ScoreExpression ScoreExpression::make_min(std::vector<ScoreExpression> args) {
  if (args.size() < 2) throw std::invalid_argument("min needs at least two arguments");
  ScoreExpression e;
  e.root_.kind = Kind::Min;
  for (auto& a : args) e.root_.children.push_back(std::move(a.root_));
  return e;
}

ScoreExpression ScoreExpression::make_max(std::vector<ScoreExpression> args) {
  if (args.size() < 2) throw std::invalid_argument("max needs at least two arguments");
  ScoreExpression e;
  e.root_.kind = Kind::Max;
  for (auto& a : args) e.root_.children.push_back(std::move(a.root_));
  return e;
}

Rational ScoreExpression::evaluate(const std::function<Rational(char)>& binding) const {
  return eval_node(root_, binding);
}

std::string ScoreExpression::to_string() const {
  std::string out;
  render_node(root_, out);
  return out;
}

std::vector<char> ScoreExpression::referenced_labels() const {
  std::set<char> labels;
  collect_labels(root_, labels);
  return std::vector<char>(labels.begin(), labels.end());
}

// ---------------------------------------------------------------------------
// Rubric
// ---------------------------------------------------------------------------

bool Rubric::has_label(char label) const { return find(label) != nullptr; }

const Criterion* Rubric::find(char label) const {
  for (const auto& c : criteria) {
    if (c.label == label) return &c;
  }
  return nullptr;
}

std::vector<char> Rubric::labels() const {
  std::vector<char> out;
  out.reserve(criteria.size());
  for (const auto& c : criteria) out.push_back(c.label);
  return out;
}

namespace {

std::pair<int, int> line_col_of_offset(std::string_view text, size_t offset) {
  int line = 1;
  int col = 1;
  for (size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace

Rubric parse_rubric(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    auto [line, col] = line_col_of_offset(json_text, e.byte > 0 ? e.byte - 1 : 0);
    throw RubricError(std::string("rubric syntax error: ") + e.what(), line, col);
  }
  if (!doc.is_object()) {
    throw RubricError("rubric document must be a JSON object");
  }

  Rubric rubric;
  if (!doc.contains("exercise_id") || !doc["exercise_id"].is_string()) {
    throw RubricError("missing string field 'exercise_id'");
  }
  rubric.exercise_id = doc["exercise_id"].get<std::string>();
  if (doc.contains("preamble") && !doc["preamble"].is_null()) {
    if (!doc["preamble"].is_string()) throw RubricError("'preamble' must be a string or null");
    rubric.preamble = doc["preamble"].get<std::string>();
  }
  if (!doc.contains("criteria") || !doc["criteria"].is_array()) {
    throw RubricError("missing array field 'criteria'");
  }

  for (const auto& item : doc["criteria"]) {
    if (!item.is_object()) throw RubricError("criteria entries must be objects");
    Criterion criterion;
    if (!item.contains("label") || !item["label"].is_string()) {
      throw RubricError("criterion missing string field 'label'");
    }
    std::string label = item["label"].get<std::string>();
    if (label.size() != 1 || label[0] < 'A' || label[0] > 'Z') {
      throw RubricError("criterion label must be a single letter A-Z, got '" + label + "'");
    }
    criterion.label = label[0];
    if (rubric.has_label(criterion.label)) {
      throw RubricError(std::string("duplicate criterion label '") + criterion.label + "'");
    }
    if (!item.contains("description") || !item["description"].is_string()) {
      throw RubricError(std::string("criterion ") + criterion.label +
                        " missing string field 'description'");
    }
    criterion.description = item["description"].get<std::string>();
    if (item.contains("explanation") && !item["explanation"].is_null()) {
      if (!item["explanation"].is_string()) {
        throw RubricError("criterion 'explanation' must be a string or null");
      }
      criterion.explanation = item["explanation"].get<std::string>();
    }
    if (!item.contains("points") || !item["points"].is_number()) {
      throw RubricError(std::string("criterion ") + criterion.label +
                        " missing numeric field 'points'");
    }
    criterion.points = Rational::from_double(item["points"].get<double>());
    if (criterion.points < Rational(0) || criterion.points > Rational(1)) {
      throw RubricError(std::string("criterion ") + criterion.label + " points " +
                        criterion.points.to_decimal_trimmed() + " out of range [0, 1]");
    }
    rubric.criteria.push_back(std::move(criterion));
  }

  if (doc.contains("expression") && !doc["expression"].is_null()) {
    if (!doc["expression"].is_string()) {
      throw RubricError("'expression' must be a string or null");
    }
    rubric.expression = ScoreExpression::parse(doc["expression"].get<std::string>());
    for (char label : rubric.expression->referenced_labels()) {
      if (!rubric.has_label(label)) {
        throw RubricError(std::string("undefined criterion ") + label + " in expression");
      }
    }
  }
  return rubric;
}

std::string serialize_rubric(const Rubric& rubric) {
  json doc;
  doc["exercise_id"] = rubric.exercise_id;
  doc["preamble"] = rubric.preamble ? json(*rubric.preamble) : json(nullptr);
  doc["expression"] = rubric.expression ? json(rubric.expression->to_string()) : json(nullptr);
  json criteria = json::array();
  for (const auto& c : rubric.criteria) {
    json item;
    item["label"] = std::string(1, c.label);
    item["description"] = c.description;
    item["explanation"] = c.explanation ? json(*c.explanation) : json(nullptr);
    item["points"] = c.points.to_double();
    criteria.push_back(std::move(item));
  }
  doc["criteria"] = std::move(criteria);
  return doc.dump(2) + "\n";
}

Rational evaluate(const Rubric& rubric, const CriteriaSet& satisfied) {
  for (char label : satisfied) {
    if (!rubric.has_label(label)) {
      throw RubricError(std::string("unknown criterion ") + label + " in satisfied set");
    }
  }
  if (!rubric.expression) {
    return raw_sum(rubric, satisfied);
  }
  return rubric.expression->evaluate([&](char label) {
    if (satisfied.count(label) == 0) return Rational(0);
    return rubric.find(label)->points;
  });
}

Rational raw_sum(const Rubric& rubric, const CriteriaSet& satisfied) {
  Rational total(0);
  for (char label : satisfied) {
    const Criterion* c = rubric.find(label);
    if (c == nullptr) {
      throw RubricError(std::string("unknown criterion ") + label + " in satisfied set");
    }
    total = total + c->points;
  }
  return total;
}

std::vector<Diagnostic> validate(const Rubric& rubric) {
  std::vector<Diagnostic> out;
  auto add = [&out](std::string code, std::string message) {
    out.push_back({std::move(code), std::move(message)});
  };

  if (rubric.criteria.empty()) {
    add("no-criteria", "rubric '" + rubric.exercise_id + "' has no criteria");
    return out;
  }
  std::set<char> seen;
  for (const auto& c : rubric.criteria) {
    if (c.label < 'A' || c.label > 'Z') {
      add("bad-label", "criterion label must be a single letter A-Z");
      continue;
    }
    if (!seen.insert(c.label).second) {
      add("duplicate-label", std::string("duplicate criterion label '") + c.label + "'");
    }
    if (c.description.empty()) {
      add("empty-description", std::string("criterion ") + c.label + " has an empty description");
    }
    if (c.points < Rational(0) || c.points > Rational(1)) {
      add("points-out-of-range", std::string("criterion ") + c.label + " points " +
                                     c.points.to_decimal_trimmed() + " outside [0, 1]");
    }
  }

  if (rubric.expression) {
    for (char label : rubric.expression->referenced_labels()) {
      if (!rubric.has_label(label)) {
        add("undefined-label", std::string("expression references undefined criterion ") + label);
      }
    }
  }
  if (!out.empty()) return out;  // subset enumeration needs a well-formed rubric

  const size_t k = rubric.criteria.size();
  if (!rubric.expression) {
    Rational total(0);
    for (const auto& c : rubric.criteria) total = total + c.points;
    if (total > Rational(1)) {
      add("raw-sum-exceeds-one", "maximum raw sum " + total.to_decimal_trimmed() +
                                     " exceeds 1; expression required");
    }
    return out;
  }

  if (k > 16) {
    add("too-many-criteria", "cannot enumerate subsets for " + std::to_string(k) + " criteria");
    return out;
  }
  // Monotone operators would allow checking only the full set, but exhaustive
  // enumeration is cheap at rubric scale and catches products of fractions.
  for (std::uint32_t mask = 0; mask < (1u << k); ++mask) {
    CriteriaSet subset;
    for (size_t i = 0; i < k; ++i) {
      if (mask & (1u << i)) subset.insert(rubric.criteria[i].label);
    }
    Rational value = evaluate(rubric, subset);
    if (value < Rational(0) || value > Rational(1)) {
      add("expression-out-of-range", "expression yields " + value.to_decimal_trimmed() +
                                         " for satisfied set {" + criteria_to_string(subset) +
                                         "}, outside [0, 1]");
      return out;
    }
  }
  return out;
}

}  // namespace gradekit
