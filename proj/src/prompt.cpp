#include "gradekit/prompt.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>

#include "gradekit/util.hpp"

namespace gradekit {

using json = nlohmann::json;

std::string variant_name(PromptVariant variant) {
  switch (variant) {
    case PromptVariant::RubricOnly:
      return "rubric";
    case PromptVariant::ExamplesOnly:
      return "examples";
    case PromptVariant::RubricAndExamples:
      return "both";
  }
  throw std::logic_error("unreachable variant");
}

PromptVariant variant_from_name(std::string_view name) {
  std::string n = to_lower(trim(name));
  if (n == "rubric") return PromptVariant::RubricOnly;
  if (n == "examples") return PromptVariant::ExamplesOnly;
  if (n == "both") return PromptVariant::RubricAndExamples;
  throw PromptError("unknown prompt variant '" + std::string(name) +
                    "' (expected rubric|examples|both)");
}

TemplateSet TemplateSet::load_dir(const std::filesystem::path& dir) {
  TemplateSet set;
  set.system = read_file(dir / "system.txt");
  set.user = read_file(dir / "user.txt");
  set.revision_system = read_file(dir / "revision_system.txt");
  set.revision_user = read_file(dir / "revision_user.txt");
  return set;
}

ResponseParseError::ResponseParseError(ResponseErrorKind kind, std::string detail)
    : std::runtime_error([&] {
        switch (kind) {
          case ResponseErrorKind::NoJsonFound:
            return "no JSON object found in completion: " + detail;
          case ResponseErrorKind::MissingField:
            return "completion JSON missing field '" + detail + "'";
          case ResponseErrorKind::UnknownCriterion:
            return "unknown criterion '" + detail + "' in satisfied_criteria";
          case ResponseErrorKind::ScoreOutOfRange:
            return "reported score out of range: " + detail;
        }
        return std::string("response parse error");
      }()),
      kind_(kind),
      detail_(std::move(detail)) {}

// ---------------------------------------------------------------------------
// Template substitution
// ---------------------------------------------------------------------------

namespace {

// Replaces every {{name}} with its value. Each substituted name must occur at
// least once, and the template may not contain markers outside `values`.
std::string substitute(const std::string& tmpl, const std::map<std::string, std::string>& values,
                       const std::string& template_name) {
  std::string out;
  out.reserve(tmpl.size());
  std::map<std::string, int> uses;
  size_t pos = 0;
  while (pos < tmpl.size()) {
    size_t open = tmpl.find("{{", pos);
    if (open == std::string::npos) {
      out.append(tmpl, pos, std::string::npos);
      break;
    }
    out.append(tmpl, pos, open - pos);
    size_t close = tmpl.find("}}", open + 2);
    if (close == std::string::npos) {
      throw PromptError("unterminated placeholder in template '" + template_name + "'");
    }
    std::string name = trim(tmpl.substr(open + 2, close - open - 2));
    auto it = values.find(name);
    if (it == values.end()) {
      throw PromptError("unknown placeholder {{" + name + "}} in template '" + template_name +
                        "'");
    }
    out += it->second;
    ++uses[name];
    pos = close + 2;
  }
  for (const auto& [name, value] : values) {
    (void)value;
    if (uses[name] == 0) {
      throw PromptError("missing template placeholder {{" + name + "}} in template '" +
                        template_name + "'");
    }
  }
  return out;
}

std::string render_examples_block(const std::vector<GradedExample>& examples) {
  std::ostringstream os;
  os << "# Graded examples\n";
  os << "Previously graded submissions for this exercise, corrected by the course staff.\n";
  for (size_t i = 0; i < examples.size(); ++i) {
    const auto& ex = examples[i];
    os << "\n## Example " << (i + 1) << "\n";
    os << "Submission:\n" << ex.text << "\n";
    os << "Satisfied criteria: "
       << (ex.satisfied.empty() ? std::string("none") : criteria_to_string(ex.satisfied)) << "\n";
    os << "Score: " << ex.score.to_decimal(4) << "\n";
    os << "Feedback: " << ex.feedback << "\n";
  }
  os << "\n";
  return os.str();
}

}  // namespace

std::string render_rubric_block(const Rubric& rubric) {
  std::ostringstream os;
  os << "# Grading rubric\n";
  if (rubric.preamble) {
    os << *rubric.preamble << "\n";
  }
  for (const auto& c : rubric.criteria) {
    os << "- " << c.label << " (" << c.points.to_decimal_trimmed() << " points): "
       << c.description << "\n";
    if (c.explanation) {
      os << "  Explanation (for feedback only, not a grading requirement): " << *c.explanation
         << "\n";
    }
  }
  if (rubric.expression) {
    os << "Final score = " << rubric.expression->to_string() << "\n";
  } else {
    os << "Final score = sum of the points of all satisfied criteria\n";
  }
  os << "\n";
  return os.str();
}

std::string escape_submission(std::string_view submission) {
  std::vector<std::string> lines = split_lines(submission);
  std::string out;
  for (size_t i = 0; i < lines.size(); ++i) {
    if (lines[i] == kSubmissionOpen || lines[i] == kSubmissionClose) {
      out.push_back(' ');
    }
    out += lines[i];
    if (i + 1 < lines.size()) out.push_back('\n');
  }
  return out;
}

PromptBundle render(const ExercisePacket& packet, PromptVariant variant,
                    const TemplateSet& templates) {
  if (packet.question.empty()) throw PromptError("packet question is empty");
  if (packet.submission.empty()) throw PromptError("packet submission is empty");

  const bool want_rubric = variant != PromptVariant::ExamplesOnly;
  const bool want_examples = variant != PromptVariant::RubricOnly;
  if (want_examples && packet.examples.empty()) {
    throw PromptError("variant '" + variant_name(variant) + "' needs graded examples but none " +
                      "were provided for exercise '" + packet.rubric.exercise_id + "'");
  }

  std::string submission_block = std::string(kSubmissionOpen) + "\n" +
                                 escape_submission(packet.submission);
  if (submission_block.empty() || submission_block.back() != '\n') submission_block += "\n";
  submission_block += kSubmissionClose;

  std::map<std::string, std::string> values = {
      {"question", packet.question},
      {"reference_answer", packet.reference_answer},
      {"rubric", want_rubric ? render_rubric_block(packet.rubric) : std::string()},
      {"examples", want_examples ? render_examples_block(packet.examples) : std::string()},
      {"submission", submission_block},
  };

  PromptBundle bundle;
  bundle.system_text = substitute(templates.system, {}, "system");
  bundle.user_text = substitute(templates.user, values, "user");
  return bundle;
}

// ---------------------------------------------------------------------------
// Response parsing
// ---------------------------------------------------------------------------

namespace {

// Finds the first balanced {...} region that parses as a JSON object.
std::optional<json> first_json_object(std::string_view raw) {
  for (size_t start = 0; start < raw.size(); ++start) {
    if (raw[start] != '{') continue;
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (size_t i = start; i < raw.size(); ++i) {
      char c = raw[i];
      if (in_string) {
        if (escaped) {
          escaped = false;
        } else if (c == '\\') {
          escaped = true;
        } else if (c == '"') {
          in_string = false;
        }
        continue;
      }
      if (c == '"') {
        in_string = true;
      } else if (c == '{') {
        ++depth;
      } else if (c == '}') {
        --depth;
        if (depth == 0) {
          json parsed = json::parse(raw.substr(start, i - start + 1), nullptr, false);
          if (!parsed.is_discarded() && parsed.is_object()) {
            return parsed;
          }
          break;  // balanced but not valid JSON; try the next '{'
        }
      }
    }
  }
  return std::nullopt;
}

// "a", " b.", "(C)", "criterion D" all normalize to their single letter.
std::optional<char> normalize_label(std::string_view entry) {
  std::string s = trim(entry);
  auto strip = [](std::string& str) {
    while (!str.empty() && !std::isalnum(static_cast<unsigned char>(str.front()))) {
      str.erase(str.begin());
    }
    while (!str.empty() && !std::isalnum(static_cast<unsigned char>(str.back()))) {
      str.pop_back();
    }
  };
  strip(s);
  std::string lower = to_lower(s);
  if (lower.rfind("criterion", 0) == 0 || lower.rfind("criteria", 0) == 0) {
    size_t space = s.find_last_of(" \t");
    if (space != std::string::npos) {
      s = s.substr(space + 1);
      strip(s);
    }
  }
  if (s.size() != 1 || !std::isalpha(static_cast<unsigned char>(s[0]))) {
    return std::nullopt;
  }
  return static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
}

// Generous sanity bound for the reported score. A mis-tallied 1.25 must still
// parse (the cross-check corrects it); negative or wild values are garbage.
constexpr double kMaxReportedScore = 10.0;

}  // namespace

GradeResponse parse_response(std::string_view raw, const Rubric& rubric) {
  std::optional<json> object = first_json_object(raw);
  if (!object) {
    std::string preview(raw.substr(0, 80));
    throw ResponseParseError(ResponseErrorKind::NoJsonFound, preview);
  }
  const json& doc = *object;

  if (!doc.contains("score") || !(doc["score"].is_number() || doc["score"].is_string())) {
    throw ResponseParseError(ResponseErrorKind::MissingField, "score");
  }
  if (!doc.contains("feedback") || !doc["feedback"].is_string()) {
    throw ResponseParseError(ResponseErrorKind::MissingField, "feedback");
  }
  if (!doc.contains("satisfied_criteria") || !doc["satisfied_criteria"].is_array()) {
    throw ResponseParseError(ResponseErrorKind::MissingField, "satisfied_criteria");
  }

  GradeResponse response;
  if (doc["score"].is_string()) {
    try {
      response.score = Rational::from_decimal(doc["score"].get<std::string>());
    } catch (const std::exception&) {
      throw ResponseParseError(ResponseErrorKind::ScoreOutOfRange,
                               "non-numeric score '" + doc["score"].get<std::string>() + "'");
    }
  } else {
    double value = doc["score"].get<double>();
    if (!std::isfinite(value)) {
      throw ResponseParseError(ResponseErrorKind::ScoreOutOfRange, "non-finite score");
    }
    response.score = Rational::from_double(value);
  }
  if (response.score < Rational(0) || response.score > Rational::from_double(kMaxReportedScore)) {
    throw ResponseParseError(ResponseErrorKind::ScoreOutOfRange,
                             response.score.to_decimal_trimmed());
  }

  response.feedback = doc["feedback"].get<std::string>();

  for (const auto& entry : doc["satisfied_criteria"]) {
    if (!entry.is_string()) {
      throw ResponseParseError(ResponseErrorKind::UnknownCriterion, entry.dump());
    }
    std::string text = entry.get<std::string>();
    std::optional<char> label = normalize_label(text);
    if (!label) {
      throw ResponseParseError(ResponseErrorKind::UnknownCriterion, text);
    }
    if (!rubric.has_label(*label)) {
      throw ResponseParseError(ResponseErrorKind::UnknownCriterion, std::string(1, *label));
    }
    response.satisfied.insert(*label);
  }
  return response;
}

ReconciledGrade crosscheck_tally(const GradeResponse& response, const Rubric& rubric) {
  ReconciledGrade grade;
  grade.response = response;
  grade.recomputed_score = evaluate(rubric, response.satisfied);
  Rational tolerance(1, 1000000);
  grade.tally_mismatch = (response.score - grade.recomputed_score).abs() > tolerance;
  grade.final_score = grade.recomputed_score;
  return grade;
}

PromptBundle render_tone_revision(std::string_view ta_feedback, const TemplateSet& templates) {
  if (trim(ta_feedback).empty()) {
    throw PromptError("cannot revise empty feedback");
  }
  PromptBundle bundle;
  bundle.system_text = substitute(templates.revision_system, {}, "revision_system");
  bundle.user_text = substitute(templates.revision_user,
                                {{"feedback", std::string(ta_feedback)}}, "revision_user");
  return bundle;
}

}  // namespace gradekit
