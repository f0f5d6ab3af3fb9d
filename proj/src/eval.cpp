#include "gradekit/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "gradekit/rng.hpp"

namespace gradekit {

OutcomeJoin criterion_outcomes(const std::vector<GoldLabel>& gold,
                               const std::vector<GradeRecord>& predicted, const Course& course) {
  std::map<std::string, const GoldLabel*> gold_by_answer;
  for (const auto& label : gold) gold_by_answer[label.answer_id] = &label;

  OutcomeJoin join;
  std::set<std::string> predicted_answers;
  for (const auto& record : predicted) {
    if (!record.grade) continue;
    // only grader predictions count; TA-entered grades are the gold side
    if (record.status != GradeStatus::AutoGraded &&
        record.status != GradeStatus::RegradeRequested) {
      continue;
    }
    predicted_answers.insert(record.answer_id);
    auto it = gold_by_answer.find(record.answer_id);
    if (it == gold_by_answer.end()) {
      join.missing_gold.push_back(record.answer_id);
      continue;
    }
    const Exercise* exercise = course.find(record.exercise_id);
    if (exercise == nullptr) {
      throw EvalError("record for answer '" + record.answer_id + "' names unknown exercise '" +
                      record.exercise_id + "'");
    }
    const GoldLabel& label = *it->second;
    for (char criterion : label.satisfied) {
      if (!exercise->rubric.has_label(criterion)) {
        throw EvalError("gold label for answer '" + record.answer_id +
                        "' uses criterion '" + std::string(1, criterion) +
                        "' absent from rubric '" + exercise->id + "'");
      }
    }
    for (const auto& criterion : exercise->rubric.criteria) {
      CriterionOutcome outcome;
      outcome.answer_id = record.answer_id;
      outcome.exercise_id = record.exercise_id;
      outcome.grader = record.grader_id;
      outcome.variant = record.variant;
      outcome.criterion = criterion.label;
      outcome.gold = label.satisfied.count(criterion.label) > 0;
      outcome.predicted = record.grade->response.satisfied.count(criterion.label) > 0;
      join.outcomes.push_back(std::move(outcome));
    }
  }
  for (const auto& label : gold) {
    if (predicted_answers.count(label.answer_id) == 0) {
      join.missing_predicted.push_back(label.answer_id);
    }
  }
  return join;
}

double classification_accuracy(std::span<const CriterionOutcome> outcomes) {
  if (outcomes.empty()) {
    throw EvalError("classification accuracy over empty outcome list");
  }
  std::size_t agree = 0;
  for (const auto& o : outcomes) {
    if (o.gold == o.predicted) ++agree;
  }
  return static_cast<double>(agree) / static_cast<double>(outcomes.size());
}

DiffStats grading_difference(std::span<const CriterionOutcome> outcomes) {
  if (outcomes.empty()) {
    throw EvalError("grading difference over empty outcome list");
  }
  struct Tally {
    int predicted = 0;
    int gold = 0;
    int criteria = 0;
  };
  // answer order = first appearance in the outcome stream
  std::vector<std::string> order;
  std::map<std::string, Tally> by_answer;
  for (const auto& o : outcomes) {
    auto [it, inserted] = by_answer.try_emplace(o.answer_id);
    if (inserted) order.push_back(o.answer_id);
    it->second.criteria += 1;
    it->second.predicted += o.predicted ? 1 : 0;
    it->second.gold += o.gold ? 1 : 0;
  }

  DiffStats stats;
  for (const auto& answer_id : order) {
    const Tally& t = by_answer.at(answer_id);
    stats.raw_counts.push_back(static_cast<double>(t.predicted - t.gold));
    stats.per_answer.push_back(static_cast<double>(t.predicted - t.gold) /
                               static_cast<double>(t.criteria));
  }
  double sum = 0.0;
  for (double d : stats.per_answer) sum += d;
  stats.mean = sum / static_cast<double>(stats.per_answer.size());
  if (stats.per_answer.size() > 1) {
    double ss = 0.0;
    for (double d : stats.per_answer) ss += (d - stats.mean) * (d - stats.mean);
    stats.stddev = std::sqrt(ss / static_cast<double>(stats.per_answer.size() - 1));
  }
  return stats;
}

std::pair<double, double> bootstrap_ci(
    const std::function<double(const std::vector<double>&)>& statistic,
    const std::vector<double>& data, int resamples, std::uint64_t seed, double level) {
  if (data.empty()) {
    throw EvalError("bootstrap over empty data");
  }
  if (resamples < 1000) {
    throw EvalError("bootstrap needs at least 1000 resamples");
  }
  std::mt19937_64 rng(seed);
  std::vector<double> stats(static_cast<size_t>(resamples));
  std::vector<double> resample(data.size());
  for (int b = 0; b < resamples; ++b) {
    for (size_t i = 0; i < data.size(); ++i) {
      resample[i] = data[bounded(rng, data.size())];
    }
    stats[static_cast<size_t>(b)] = statistic(resample);
  }
  std::sort(stats.begin(), stats.end());
  double alpha = (1.0 - level) / 2.0;
  // order statistics at the nearest ranks
  auto at_quantile = [&stats](double q) {
    double pos = q * static_cast<double>(stats.size() - 1);
    size_t idx = static_cast<size_t>(std::llround(pos));
    return stats[std::min(idx, stats.size() - 1)];
  };
  return {at_quantile(alpha), at_quantile(1.0 - alpha)};
}

namespace {

double mean_of(const std::vector<double>& xs) {
  double sum = 0.0;
  for (double x : xs) sum += x;
  return xs.empty() ? 0.0 : sum / static_cast<double>(xs.size());
}

double sample_std(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  double m = mean_of(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

MetricReport cell_report(std::span<const CriterionOutcome> outcomes, const ReportOptions& options,
                         std::uint64_t cell_seed) {
  MetricReport row;
  row.n_outcomes = outcomes.size();
  row.ca = classification_accuracy(outcomes);
  DiffStats diff = grading_difference(outcomes);
  row.n_answers = diff.per_answer.size();
  row.mean_diff = diff.mean;
  row.std_diff = diff.stddev;
  row.mean_diff_raw = mean_of(diff.raw_counts);

  std::vector<double> agreement;
  agreement.reserve(outcomes.size());
  for (const auto& o : outcomes) agreement.push_back(o.gold == o.predicted ? 1.0 : 0.0);

  std::uint64_t seed = cell_seed;
  std::tie(row.ca_lo, row.ca_hi) =
      bootstrap_ci(mean_of, agreement, options.bootstrap_resamples, derive_seed(seed, "ca"));
  std::tie(row.mean_lo, row.mean_hi) = bootstrap_ci(mean_of, diff.per_answer,
                                                    options.bootstrap_resamples,
                                                    derive_seed(seed, "mean"));
  std::tie(row.std_lo, row.std_hi) = bootstrap_ci(sample_std, diff.per_answer,
                                                  options.bootstrap_resamples,
                                                  derive_seed(seed, "std"));
  return row;
}

std::string difficulty_of(const Course& course, const std::string& exercise_id) {
  const Exercise* exercise = course.find(exercise_id);
  return exercise != nullptr ? exercise->difficulty : std::string("unknown");
}

struct GroupKey {
  std::string grader = "all";
  std::string difficulty = "all";
  std::string variant = "all";
  bool operator<(const GroupKey& other) const {
    return std::tie(grader, variant, difficulty) <
           std::tie(other.grader, other.variant, other.difficulty);
  }
};

std::vector<MetricReport> build_rows(const OutcomeJoin& join, const ReportOptions& options,
                                     const std::function<std::vector<GroupKey>(
                                         const CriterionOutcome&)>& keys_for) {
  std::map<GroupKey, std::vector<CriterionOutcome>> groups;
  for (const auto& outcome : join.outcomes) {
    for (const auto& key : keys_for(outcome)) {
      groups[key].push_back(outcome);
    }
  }
  std::vector<MetricReport> rows;
  for (const auto& [key, outcomes] : groups) {
    std::uint64_t cell_seed = derive_seed(options.bootstrap_seed,
                                          key.grader + "|" + key.difficulty + "|" + key.variant);
    MetricReport row = cell_report(outcomes, options, cell_seed);
    row.grader = key.grader;
    row.difficulty = key.difficulty;
    row.variant = key.variant;
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

std::vector<MetricReport> metric_reports(const OutcomeJoin& join, const Course& course,
                                         const ReportOptions& options) {
  return build_rows(join, options, [&course](const CriterionOutcome& o) {
    std::string difficulty = difficulty_of(course, o.exercise_id);
    std::vector<GroupKey> keys;
    keys.push_back({});  // grand total
    keys.push_back({o.grader, "all", "all"});
    keys.push_back({o.grader, difficulty, "all"});
    keys.push_back({"all", difficulty, "all"});
    return keys;
  });
}

std::vector<MetricReport> ablation_report(const OutcomeJoin& join, const Course& course,
                                          const ReportOptions& options) {
  // variant runs must cover identical answer sets
  std::map<std::string, std::set<std::string>> answers_by_variant;
  for (const auto& o : join.outcomes) {
    answers_by_variant[o.variant].insert(o.answer_id);
  }
  if (answers_by_variant.size() > 1) {
    const auto& reference = answers_by_variant.begin()->second;
    for (const auto& [variant, answers] : answers_by_variant) {
      if (answers != reference) {
        throw EvalError("variant '" + variant + "' covers a different answer set than variant '" +
                        answers_by_variant.begin()->first + "'");
      }
    }
  }
  return build_rows(join, options, [&course](const CriterionOutcome& o) {
    std::string difficulty = difficulty_of(course, o.exercise_id);
    std::vector<GroupKey> keys;
    keys.push_back({"all", "all", o.variant});
    keys.push_back({"all", difficulty, o.variant});
    return keys;
  });
}

std::vector<FeedbackLengthCell> feedback_length_stats(const std::vector<GradeRecord>& records,
                                                      const std::vector<GoldLabel>& gold,
                                                      const Course& course) {
  std::map<std::string, const GoldLabel*> gold_by_answer;
  for (const auto& label : gold) gold_by_answer[label.answer_id] = &label;

  struct Acc {
    std::size_t n = 0;
    double chars = 0.0;
    double words = 0.0;
  };
  std::map<std::pair<std::string, bool>, Acc> cells;
  for (const auto& record : records) {
    if (!record.grade) continue;
    auto it = gold_by_answer.find(record.answer_id);
    if (it == gold_by_answer.end()) continue;
    const Exercise* exercise = course.find(record.exercise_id);
    if (exercise == nullptr) continue;
    bool correct = evaluate(exercise->rubric, it->second->satisfied) == Rational(1);
    const std::string& feedback = record.grade->response.feedback;
    std::istringstream words(feedback);
    std::size_t word_count = 0;
    std::string w;
    while (words >> w) ++word_count;
    Acc& acc = cells[{record.grader_id, correct}];
    acc.n += 1;
    acc.chars += static_cast<double>(feedback.size());
    acc.words += static_cast<double>(word_count);
  }

  std::vector<FeedbackLengthCell> out;
  for (const auto& [key, acc] : cells) {
    FeedbackLengthCell cell;
    cell.grader = key.first;
    cell.correct = key.second;
    cell.n = acc.n;
    cell.mean_chars = acc.chars / static_cast<double>(acc.n);
    cell.mean_words = acc.words / static_cast<double>(acc.n);
    out.push_back(std::move(cell));
  }
  return out;
}

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << std::fixed << v;
  return os.str();
}

}  // namespace

std::string report_csv(const std::vector<MetricReport>& rows) {
  std::ostringstream os;
  os << "grader,difficulty,variant,n_outcomes,n_answers,ca,ca_lo,ca_hi,"
        "mean_diff,mean_lo,mean_hi,mean_diff_raw,std_diff,std_lo,std_hi\n";
  for (const auto& r : rows) {
    os << r.grader << ',' << r.difficulty << ',' << r.variant << ',' << r.n_outcomes << ','
       << r.n_answers << ',' << fmt(r.ca) << ',' << fmt(r.ca_lo) << ',' << fmt(r.ca_hi) << ','
       << fmt(r.mean_diff) << ',' << fmt(r.mean_lo) << ',' << fmt(r.mean_hi) << ','
       << fmt(r.mean_diff_raw) << ',' << fmt(r.std_diff) << ',' << fmt(r.std_lo) << ','
       << fmt(r.std_hi) << '\n';
  }
  return os.str();
}

std::string feedback_csv(const std::vector<FeedbackLengthCell>& cells) {
  std::ostringstream os;
  os << "grader,correct,n,mean_chars,mean_words\n";
  for (const auto& c : cells) {
    os << c.grader << ',' << (c.correct ? "true" : "false") << ',' << c.n << ','
       << fmt(c.mean_chars) << ',' << fmt(c.mean_words) << '\n';
  }
  return os.str();
}

std::string report_markdown(const std::vector<MetricReport>& rows,
                            const std::vector<FeedbackLengthCell>& feedback,
                            const OutcomeJoin& join) {
  std::ostringstream os;
  os << "# Grading evaluation report\n\n";
  os << "Outcomes: " << join.outcomes.size() << " (answer, criterion) pairs";
  if (!join.missing_predicted.empty()) {
    os << "; " << join.missing_predicted.size() << " gold answers without predictions";
  }
  if (!join.missing_gold.empty()) {
    os << "; " << join.missing_gold.size() << " predictions without gold";
  }
  os << "\n\n";

  os << "## Classification accuracy and grading difference\n\n";
  os << "| grader | difficulty | variant | n | CA [95% CI] | mean diff [95% CI] | std diff |\n";
  os << "|---|---|---|---|---|---|---|\n";
  for (const auto& r : rows) {
    os << "| " << r.grader << " | " << r.difficulty << " | " << r.variant << " | " << r.n_outcomes
       << " | " << fmt(r.ca) << " [" << fmt(r.ca_lo) << ", " << fmt(r.ca_hi) << "] | "
       << fmt(r.mean_diff) << " [" << fmt(r.mean_lo) << ", " << fmt(r.mean_hi) << "] | "
       << fmt(r.std_diff) << " |\n";
  }

  if (!feedback.empty()) {
    os << "\n## Feedback lengths\n\n";
    os << "| grader | answers | n | mean chars | mean words |\n";
    os << "|---|---|---|---|---|\n";
    for (const auto& c : feedback) {
      os << "| " << c.grader << " | " << (c.correct ? "correct" : "incorrect") << " | " << c.n
         << " | " << fmt(c.mean_chars) << " | " << fmt(c.mean_words) << " |\n";
    }
  }
  return os.str();
}

}  // namespace gradekit
