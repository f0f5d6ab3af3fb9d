#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "gradekit/rational.hpp"
#include "gradekit/rubric.hpp"

namespace gradekit {

/// Which exercise-specific sections the user prompt carries.
enum class PromptVariant { RubricOnly, ExamplesOnly, RubricAndExamples };

std::string variant_name(PromptVariant variant);                 // "rubric" | "examples" | "both"
PromptVariant variant_from_name(std::string_view name);          // throws on unknown

/// A TA-corrected submission shown to the grader as a worked example.
struct GradedExample {
  std::string text;
  CriteriaSet satisfied;
  Rational score;
  std::string feedback;
};

struct ExercisePacket {
  std::string question;
  std::string reference_answer;
  Rubric rubric;
  std::vector<GradedExample> examples;
  std::string submission;
  std::string submission_id;
};

struct PromptBundle {
  std::string system_text;
  std::string user_text;
};

/// Named prompt templates with {{placeholder}} markers. The grading user
/// template must contain {{question}}, {{reference_answer}}, {{rubric}},
/// {{examples}} and {{submission}}; the system templates take no placeholders
/// so they stay byte-identical across exercises.
struct TemplateSet {
  std::string system;
  std::string user;
  std::string revision_system;
  std::string revision_user;

  // Loads system.txt, user.txt, revision_system.txt, revision_user.txt.
  static TemplateSet load_dir(const std::filesystem::path& dir);
};

class PromptError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ResponseErrorKind { NoJsonFound, MissingField, UnknownCriterion, ScoreOutOfRange };

class ResponseParseError : public std::runtime_error {
 public:
  ResponseParseError(ResponseErrorKind kind, std::string detail);
  ResponseErrorKind kind() const { return kind_; }
  const std::string& detail() const { return detail_; }

 private:
  ResponseErrorKind kind_;
  std::string detail_;
};

/// Structured grader output.
struct GradeResponse {
  Rational score;
  std::string feedback;
  CriteriaSet satisfied;
};

/// A grader response with the score recomputed from the satisfied-criteria
/// set. The recomputed value is authoritative: final_score always equals
/// recomputed_score, and tally_mismatch records whether the grader's own
/// arithmetic disagreed by more than 1e-6.
struct ReconciledGrade {
  GradeResponse response;
  Rational recomputed_score;
  bool tally_mismatch = false;
  Rational final_score;
};

// Delimiters wrapping the student submission in the user prompt. Submission
// lines equal to a delimiter are prefixed with a space so the boundary stays
// unambiguous for a line-based reader.
inline constexpr std::string_view kSubmissionOpen = "<<<SUBMISSION>>>";
inline constexpr std::string_view kSubmissionClose = "<<</SUBMISSION>>>";

std::string escape_submission(std::string_view submission);

/// Renders the system/user prompt pair. The system text depends only on the
/// template set; the user text carries the exercise material with rubric and
/// example sections included per variant. Deterministic: same inputs, same
/// bytes.
PromptBundle render(const ExercisePacket& packet, PromptVariant variant,
                    const TemplateSet& templates);

/// Rubric section as shown in the prompt (exposed for the dry-run report).
std::string render_rubric_block(const Rubric& rubric);

/// Extracts the first balanced JSON object from the completion (code fences
/// and surrounding prose are tolerated), normalizes satisfied_criteria entries
/// to single letters, and rejects labels outside the rubric.
GradeResponse parse_response(std::string_view raw, const Rubric& rubric);

/// Recomputes the score from the satisfied set and flags tally mismatches.
ReconciledGrade crosscheck_tally(const GradeResponse& response, const Rubric& rubric);

/// Prompt asking the model to rewrite TA feedback in its own tone while
/// preserving the content. The score is not part of the prompt; revision can
/// never alter it.
PromptBundle render_tone_revision(std::string_view ta_feedback, const TemplateSet& templates);

}  // namespace gradekit
