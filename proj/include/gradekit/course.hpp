#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "gradekit/prompt.hpp"
#include "gradekit/rubric.hpp"

namespace gradekit {

inline const std::vector<std::string> kDifficultyLevels = {"trivial", "easy", "medium", "hard",
                                                           "open-ended"};

struct Exercise {
  std::string id;
  std::string question;
  std::string reference_answer;
  std::string difficulty;  // one of kDifficultyLevels
  Rubric rubric;
};

struct Course {
  std::vector<Exercise> exercises;
  const Exercise* find(const std::string& exercise_id) const;
};

struct Submission {
  std::string answer_id;
  std::string student_id;
  std::string exercise_id;
  std::string text;
  bool consent = true;
};

/// TA-assigned satisfied set for one answer; the evaluation gold standard.
struct GoldLabel {
  std::string answer_id;
  CriteriaSet satisfied;
  std::string source;  // optional tag for the grader who produced it
};

/// Operational TA grading input for answers routed to a human grader.
struct TaGrade {
  std::string answer_id;
  CriteriaSet satisfied;
  std::string feedback;
};

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// course.json: {"exercises": [{"id", "question", "reference_answer",
// "difficulty", "rubric": <path relative to course.json>}]}
Course load_course(const std::filesystem::path& path);

// submissions.jsonl: {"answer_id", "student_id", "exercise_id", "text", "consent"}
std::vector<Submission> load_submissions(const std::filesystem::path& path);

// examples.jsonl: {"exercise_id", "text", "satisfied": [..], "score", "feedback"}
std::map<std::string, std::vector<GradedExample>> load_examples(
    const std::filesystem::path& path);

// gold.jsonl: {"answer_id", "satisfied": [..], "source"?}
std::vector<GoldLabel> load_gold(const std::filesystem::path& path);

// ta_grades.jsonl: {"answer_id", "satisfied": [..], "feedback"}
std::vector<TaGrade> load_ta_grades(const std::filesystem::path& path);

CriteriaSet criteria_from_json_array(const std::vector<std::string>& labels);

}  // namespace gradekit
