#include "gradekit/course.hpp"

#include <json.hpp>

#include <algorithm>
#include <set>

#include "gradekit/util.hpp"

namespace gradekit {

using json = nlohmann::json;
namespace fs = std::filesystem;

const Exercise* Course::find(const std::string& exercise_id) const {
  for (const auto& e : exercises) {
    if (e.id == exercise_id) return &e;
  }
  return nullptr;
}

CriteriaSet criteria_from_json_array(const std::vector<std::string>& labels) {
  CriteriaSet set;
  for (const auto& label : labels) {
    std::string t = trim(label);
    if (t.size() != 1 || t[0] < 'A' || t[0] > 'Z') {
      throw DataError("criterion label must be a single letter A-Z, got '" + label + "'");
    }
    set.insert(t[0]);
  }
  return set;
}

namespace {

// Applies fn to every non-empty line; line numbers are 1-based in errors.
template <typename Fn>
void for_each_jsonl(const fs::path& path, Fn&& fn) {
  std::string content = read_file(path);
  std::vector<std::string> lines = split_lines(content);
  for (size_t i = 0; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    json doc = json::parse(lines[i], nullptr, false);
    if (doc.is_discarded()) {
      throw DataError(path.string() + ":" + std::to_string(i + 1) + ": malformed JSON line");
    }
    if (doc.is_object() && doc.contains("_meta")) continue;  // provenance record
    try {
      fn(doc);
    } catch (const std::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(i + 1) + ": " + e.what());
    }
  }
}

std::string require_string(const json& doc, const char* field) {
  if (!doc.contains(field) || !doc[field].is_string()) {
    throw DataError(std::string("missing string field '") + field + "'");
  }
  return doc[field].get<std::string>();
}

}  // namespace

Course load_course(const fs::path& path) {
  json doc = json::parse(read_file(path), nullptr, false);
  if (doc.is_discarded() || !doc.is_object() || !doc.contains("exercises") ||
      !doc["exercises"].is_array()) {
    throw DataError(path.string() + ": expected {\"exercises\": [...]}");
  }
  Course course;
  std::set<std::string> ids;
  for (const auto& item : doc["exercises"]) {
    Exercise exercise;
    exercise.id = require_string(item, "id");
    if (!ids.insert(exercise.id).second) {
      throw DataError(path.string() + ": duplicate exercise id '" + exercise.id + "'");
    }
    exercise.question = require_string(item, "question");
    exercise.reference_answer = require_string(item, "reference_answer");
    exercise.difficulty = require_string(item, "difficulty");
    if (std::find(kDifficultyLevels.begin(), kDifficultyLevels.end(), exercise.difficulty) ==
        kDifficultyLevels.end()) {
      throw DataError(path.string() + ": exercise '" + exercise.id + "' has unknown difficulty '" +
                      exercise.difficulty + "'");
    }
    std::string rubric_rel = require_string(item, "rubric");
    fs::path rubric_path = path.parent_path() / rubric_rel;
    exercise.rubric = parse_rubric(read_file(rubric_path));
    if (exercise.rubric.exercise_id != exercise.id) {
      throw DataError(rubric_path.string() + ": rubric exercise_id '" +
                      exercise.rubric.exercise_id + "' does not match exercise '" + exercise.id +
                      "'");
    }
    course.exercises.push_back(std::move(exercise));
  }
  return course;
}

std::vector<Submission> load_submissions(const fs::path& path) {
  std::vector<Submission> out;
  std::set<std::string> ids;
  for_each_jsonl(path, [&](const json& doc) {
    Submission s;
    s.answer_id = require_string(doc, "answer_id");
    if (!ids.insert(s.answer_id).second) {
      throw DataError("duplicate answer_id '" + s.answer_id + "'");
    }
    s.student_id = require_string(doc, "student_id");
    s.exercise_id = require_string(doc, "exercise_id");
    s.text = require_string(doc, "text");
    s.consent = doc.value("consent", true);
    out.push_back(std::move(s));
  });
  return out;
}

std::map<std::string, std::vector<GradedExample>> load_examples(const fs::path& path) {
  std::map<std::string, std::vector<GradedExample>> out;
  for_each_jsonl(path, [&](const json& doc) {
    std::string exercise_id = require_string(doc, "exercise_id");
    GradedExample example;
    example.text = require_string(doc, "text");
    example.satisfied = criteria_from_json_array(
        doc.at("satisfied").get<std::vector<std::string>>());
    example.score = Rational::from_double(doc.at("score").get<double>());
    example.feedback = require_string(doc, "feedback");
    out[exercise_id].push_back(std::move(example));
  });
  return out;
}

std::vector<GoldLabel> load_gold(const fs::path& path) {
  std::vector<GoldLabel> out;
  std::set<std::string> ids;
  for_each_jsonl(path, [&](const json& doc) {
    GoldLabel label;
    label.answer_id = require_string(doc, "answer_id");
    if (!ids.insert(label.answer_id).second) {
      throw DataError("duplicate gold answer_id '" + label.answer_id + "'");
    }
    label.satisfied = criteria_from_json_array(
        doc.at("satisfied").get<std::vector<std::string>>());
    label.source = doc.value("source", std::string());
    out.push_back(std::move(label));
  });
  return out;
}

std::vector<TaGrade> load_ta_grades(const fs::path& path) {
  std::vector<TaGrade> out;
  for_each_jsonl(path, [&](const json& doc) {
    TaGrade grade;
    grade.answer_id = require_string(doc, "answer_id");
    grade.satisfied = criteria_from_json_array(
        doc.at("satisfied").get<std::vector<std::string>>());
    grade.feedback = require_string(doc, "feedback");
    out.push_back(std::move(grade));
  });
  return out;
}

}  // namespace gradekit
