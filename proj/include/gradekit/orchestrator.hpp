#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "gradekit/course.hpp"
#include "gradekit/gateway.hpp"
#include "gradekit/prompt.hpp"

namespace gradekit {

enum class GraderKind { Llm, Human, HumanLlmRevised };

std::string grader_kind_name(GraderKind kind);
GraderKind grader_kind_from_name(std::string_view name);

struct GraderSpec {
  std::string grader_id;
  GraderKind kind = GraderKind::Llm;
  std::optional<BackendConfig> backend;  // required for llm and human-llm-revised
  double assignment_weight = 0.0;
};

// graders.json: [{"grader_id", "kind", "assignment_weight", "backend": {...}|null}]
std::vector<GraderSpec> load_graders(const std::filesystem::path& path);
const GraderSpec* find_grader(const std::vector<GraderSpec>& graders, const std::string& id);

/// Blinded answer → grader mapping, drawn independently per answer from the
/// configured weights. Students never see this table.
struct AssignmentPlan {
  std::map<std::string, std::string> assigned;  // answer_id -> grader_id
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, double>> weights;  // snapshot at draw time
};

/// Weights must sum to 1 within 1e-9. Deterministic for a fixed seed; each
/// answer consumes exactly one uniform draw, in input order.
AssignmentPlan assign(const std::vector<std::string>& answer_ids,
                      const std::vector<GraderSpec>& graders, std::uint64_t seed);

/// Like assign(), but answers from non-consenting students are forced onto the
/// human grader afterwards, without disturbing the draw sequence.
AssignmentPlan assign_with_consent(const std::vector<Submission>& submissions,
                                   const std::vector<GraderSpec>& graders, std::uint64_t seed);

enum class GradeStatus { AutoGraded, PendingHuman, HumanGraded, RegradeRequested, Regraded };

std::string status_name(GradeStatus status);
GradeStatus status_from_name(std::string_view name);

struct GradeRecord {
  std::string answer_id;
  std::string grader_id;  // internal only; never reaches student exports
  std::string exercise_id;
  std::string student_id;
  GradeStatus status = GradeStatus::PendingHuman;
  std::optional<ReconciledGrade> grade;  // absent while pending
  std::string variant;                   // prompt variant for auto grades
  std::vector<std::string> flags;        // e.g. "injection-heuristic", "parse-error: ..."
  std::string ts;

  std::string to_jsonl() const;
  static GradeRecord from_jsonl(const std::string& line);
};

/// Append-only JSONL store. Nothing is ever rewritten: updates append a new
/// snapshot and the latest record per answer wins.
class RecordStore {
 public:
  explicit RecordStore(std::filesystem::path file);
  void append(const GradeRecord& record);
  std::vector<GradeRecord> read_all() const;
  static std::vector<GradeRecord> read_file(const std::filesystem::path& file);
  static std::map<std::string, GradeRecord> latest_by_answer(
      const std::vector<GradeRecord>& records);
  const std::filesystem::path& path() const { return file_; }

 private:
  std::filesystem::path file_;
  mutable std::mutex mutex_;
};

class OrchestratorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GradingContext {
  const Course* course = nullptr;
  std::map<std::string, std::vector<GradedExample>> examples;  // by exercise
  TemplateSet templates;
  PromptVariant variant = PromptVariant::RubricAndExamples;
  std::uint64_t sampling_seed = 0;
  std::size_t examples_per_prompt = 10;
  bool resample_per_submission = false;
  int worker_threads = 4;
};

/// True when the submission matches a prompt-injection heuristic; such answers
/// are routed to a human instead of an LLM.
bool injection_suspect(std::string_view submission_text);

/// Grades every assigned answer. LLM answers flow through prompt rendering,
/// the gateway and the tally cross-check; human and human-LLM-revised answers
/// come back pending-human; per-answer failures degrade to pending-human with
/// a flag rather than being dropped. Records are returned in submission order.
std::vector<GradeRecord> run_grading(const AssignmentPlan& plan,
                                     const std::vector<Submission>& submissions,
                                     const std::vector<GraderSpec>& graders,
                                     const GradingContext& context, Gateway& gateway);

/// Applies TA-entered grades to pending-human / regrade-requested records.
/// For human-llm-revised graders the feedback is additionally rewritten
/// through the grader's backend (content kept, tone changed, score untouched).
/// Returns the new record snapshots to append.
std::vector<GradeRecord> apply_human_grades(const std::map<std::string, GradeRecord>& latest,
                                            const std::vector<TaGrade>& ta_grades,
                                            const std::vector<GraderSpec>& graders,
                                            const GradingContext& context, Gateway& gateway);

/// Marks an auto-graded answer for human review. Idempotent on repeat calls;
/// pending or already human-graded answers are rejected.
GradeRecord request_regrade(RecordStore& store, const std::string& answer_id);

/// Per-student feedback documents (student_id -> markdown). Contains scores
/// and feedback only: no grader ids, kinds, or model names. Throws
/// OrchestratorError listing the offending answers when any record is still
/// pending or awaiting a regrade.
std::map<std::string, std::string> export_student_view(
    const std::map<std::string, GradeRecord>& latest, const Course& course);

}  // namespace gradekit
