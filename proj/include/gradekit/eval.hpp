#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "gradekit/course.hpp"
#include "gradekit/orchestrator.hpp"

namespace gradekit {

/// One binary satisfied/unsatisfied call, grader vs TA gold, for a single
/// (answer, criterion) pair.
struct CriterionOutcome {
  std::string answer_id;
  std::string exercise_id;
  std::string grader;   // grader_id of the prediction
  std::string variant;  // prompt variant of the prediction
  char criterion = 0;
  bool gold = false;
  bool predicted = false;
};

struct OutcomeJoin {
  std::vector<CriterionOutcome> outcomes;
  std::vector<std::string> missing_predicted;  // gold present, prediction absent
  std::vector<std::string> missing_gold;       // prediction present, gold absent
};

class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Expands gold labels and graded records into one outcome per (answer,
/// rubric criterion). Answers missing on either side are reported in the
/// join, never silently dropped. Only records carrying a grade participate.
OutcomeJoin criterion_outcomes(const std::vector<GoldLabel>& gold,
                               const std::vector<GradeRecord>& predicted, const Course& course);

/// Fraction of outcomes where the grader's call matches gold.
double classification_accuracy(std::span<const CriterionOutcome> outcomes);

/// Signed per-answer grading difference: (predicted satisfied count − gold
/// satisfied count) / criteria count, in [−1, 1]. Positive = more lenient.
struct DiffStats {
  std::vector<double> per_answer;   // normalized differences, answer order
  std::vector<double> raw_counts;   // unnormalized count differences
  double mean = 0.0;
  double stddev = 0.0;              // sample standard deviation (n−1)
};

DiffStats grading_difference(std::span<const CriterionOutcome> outcomes);

/// Percentile bootstrap: resamples data with replacement B times, applies the
/// statistic, and returns the empirical 2.5/97.5 percentiles (for level 0.95).
/// Deterministic given seed. B must be >= 1000.
std::pair<double, double> bootstrap_ci(
    const std::function<double(const std::vector<double>&)>& statistic,
    const std::vector<double>& data, int resamples, std::uint64_t seed, double level = 0.95);

/// One grouping cell of the evaluation report. "all" marks a collapsed axis.
struct MetricReport {
  std::string grader = "all";
  std::string difficulty = "all";
  std::string variant = "all";
  std::size_t n_outcomes = 0;
  std::size_t n_answers = 0;
  double ca = 0.0, ca_lo = 0.0, ca_hi = 0.0;
  double mean_diff = 0.0, mean_lo = 0.0, mean_hi = 0.0;
  double mean_diff_raw = 0.0;  // unnormalized criteria-count difference
  double std_diff = 0.0, std_lo = 0.0, std_hi = 0.0;
};

struct ReportOptions {
  int bootstrap_resamples = 2000;
  std::uint64_t bootstrap_seed = 0;
};

/// Rows for: each grader overall, each (grader, difficulty), each variant
/// overall and each (variant, difficulty); cells ordered by group key.
std::vector<MetricReport> metric_reports(const OutcomeJoin& join, const Course& course,
                                         const ReportOptions& options);

/// Ablation view over runs of the same answers under different prompt
/// variants. Throws EvalError when the answer sets differ between variants.
std::vector<MetricReport> ablation_report(const OutcomeJoin& join, const Course& course,
                                          const ReportOptions& options);

/// Mean feedback lengths per (grader, gold-correctness) cell. An answer is
/// correct when its gold satisfied set scores exactly 1 under the rubric.
struct FeedbackLengthCell {
  std::string grader;
  bool correct = false;
  std::size_t n = 0;
  double mean_chars = 0.0;
  double mean_words = 0.0;
};

std::vector<FeedbackLengthCell> feedback_length_stats(const std::vector<GradeRecord>& records,
                                                      const std::vector<GoldLabel>& gold,
                                                      const Course& course);

std::string report_csv(const std::vector<MetricReport>& rows);
std::string feedback_csv(const std::vector<FeedbackLengthCell>& cells);
std::string report_markdown(const std::vector<MetricReport>& rows,
                            const std::vector<FeedbackLengthCell>& feedback,
                            const OutcomeJoin& join);

}  // namespace gradekit
