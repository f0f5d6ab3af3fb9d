#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "gradekit/eval.hpp"
#include "gradekit/rng.hpp"
#include "testsupport.hpp"

using namespace gradekit;
namespace ts = gradekit::testsupport;

namespace {

// two-criterion course used by most cases here
Course tiny_course() {
  Course course;
  Exercise e;
  e.id = "ex";
  e.question = "q";
  e.reference_answer = "r";
  e.difficulty = "easy";
  e.rubric.exercise_id = "ex";
  e.rubric.criteria.push_back({'A', "a", std::nullopt, Rational(1, 2)});
  e.rubric.criteria.push_back({'B', "b", std::nullopt, Rational(1, 2)});
  course.exercises.push_back(std::move(e));
  return course;
}

GradeRecord record_for(const std::string& answer_id, CriteriaSet satisfied,
                       const std::string& grader = "m", const std::string& variant = "both",
                       const std::string& exercise = "ex") {
  GradeRecord record;
  record.answer_id = answer_id;
  record.grader_id = grader;
  record.exercise_id = exercise;
  record.student_id = "s";
  record.status = GradeStatus::AutoGraded;
  ReconciledGrade grade;
  grade.response.satisfied = std::move(satisfied);
  grade.response.feedback = "fb";
  record.grade = grade;
  record.variant = variant;
  return record;
}

GoldLabel gold_for(const std::string& answer_id, CriteriaSet satisfied) {
  return {answer_id, std::move(satisfied), "ta"};
}

// independent naive recomputation straight from (gold, predicted) tuples
struct NaiveStats {
  double ca;
  double mean;
  double stddev;
};

NaiveStats naive_stats(const std::vector<CriterionOutcome>& outcomes) {
  int agree = 0;
  std::map<std::string, std::vector<const CriterionOutcome*>> per_answer;
  for (const auto& o : outcomes) {
    if (o.gold == o.predicted) ++agree;
    per_answer[o.answer_id].push_back(&o);
  }
  std::vector<double> diffs;
  for (const auto& [answer, list] : per_answer) {
    (void)answer;
    int pred = 0, gold = 0;
    for (const auto* o : list) {
      pred += o->predicted ? 1 : 0;
      gold += o->gold ? 1 : 0;
    }
    diffs.push_back(double(pred - gold) / double(list.size()));
  }
  double mean = 0;
  for (double d : diffs) mean += d;
  mean /= diffs.size();
  double ss = 0;
  for (double d : diffs) ss += (d - mean) * (d - mean);
  double sd = diffs.size() > 1 ? std::sqrt(ss / (diffs.size() - 1)) : 0.0;
  return {double(agree) / outcomes.size(), mean, sd};
}

}  // namespace

TEST_CASE("outcomes enumerate every rubric criterion") {
  Course course = tiny_course();
  std::vector<GoldLabel> gold = {gold_for("a1", {'A'})};
  std::vector<GradeRecord> predicted = {record_for("a1", {'A', 'B'})};
  OutcomeJoin join = criterion_outcomes(gold, predicted, course);
  REQUIRE(join.outcomes.size() == 2);
  CHECK(join.outcomes[0].criterion == 'A');
  CHECK(join.outcomes[0].gold);
  CHECK(join.outcomes[0].predicted);
  CHECK(join.outcomes[1].criterion == 'B');
  CHECK(!join.outcomes[1].gold);
  CHECK(join.outcomes[1].predicted);
}

TEST_CASE("answers missing on either side are reported, not dropped") {
  Course course = tiny_course();
  std::vector<GoldLabel> gold = {gold_for("a1", {'A'}), gold_for("a2", {'B'})};
  std::vector<GradeRecord> predicted = {record_for("a1", {'A'}), record_for("a3", {})};
  OutcomeJoin join = criterion_outcomes(gold, predicted, course);
  CHECK(join.outcomes.size() == 2);  // only a1 joined
  REQUIRE(join.missing_predicted.size() == 1);
  CHECK(join.missing_predicted[0] == "a2");
  REQUIRE(join.missing_gold.size() == 1);
  CHECK(join.missing_gold[0] == "a3");
}

TEST_CASE("a 36-exercise course with 1-4 criteria each yields 61 criterion segments") {
  // 17 x 1 + 13 x 2 + 6 x 3 = 61 criteria over 36 exercises
  Course course;
  std::vector<GoldLabel> gold;
  std::vector<GradeRecord> predicted;
  int exercise_index = 0;
  auto add_exercises = [&](int count, int criteria) {
    for (int i = 0; i < count; ++i) {
      Exercise e;
      e.id = "q" + std::to_string(++exercise_index);
      e.question = "q";
      e.reference_answer = "r";
      e.difficulty = "easy";
      e.rubric.exercise_id = e.id;
      for (int c = 0; c < criteria; ++c) {
        e.rubric.criteria.push_back(
            {static_cast<char>('A' + c), "c", std::nullopt, Rational(1, 4)});
      }
      std::string answer = "ans-" + e.id;
      gold.push_back(gold_for(answer, {'A'}));
      predicted.push_back(record_for(answer, {'A'}, "m", "both", e.id));
      course.exercises.push_back(std::move(e));
    }
  };
  add_exercises(17, 1);
  add_exercises(13, 2);
  add_exercises(6, 3);
  REQUIRE(course.exercises.size() == 36);

  OutcomeJoin join = criterion_outcomes(gold, predicted, course);
  std::set<std::pair<std::string, char>> segments;
  for (const auto& o : join.outcomes) segments.insert({o.exercise_id, o.criterion});
  CHECK(segments.size() == 61);
  CHECK(join.outcomes.size() == 61);  // one answer per exercise
}

TEST_CASE("classification accuracy is a plain agreement count") {
  std::vector<CriterionOutcome> outcomes(4);
  outcomes[0].gold = true;
  outcomes[0].predicted = true;
  outcomes[1].gold = false;
  outcomes[1].predicted = true;
  outcomes[2].gold = true;
  outcomes[2].predicted = true;
  outcomes[3].gold = false;
  outcomes[3].predicted = false;
  for (size_t i = 0; i < outcomes.size(); ++i) outcomes[i].answer_id = "a" + std::to_string(i);
  CHECK(classification_accuracy(outcomes) == doctest::Approx(0.75));

  for (auto& o : outcomes) o.predicted = o.gold;
  CHECK(classification_accuracy(outcomes) == doctest::Approx(1.0));

  CHECK_THROWS_AS(classification_accuracy({}), EvalError);
}

TEST_CASE("grading difference definition and sign convention") {
  Course course = tiny_course();
  // gold {A}, predicted {A,B} on a 2-criterion rubric: +0.5 (lenient)
  std::vector<GoldLabel> gold = {gold_for("a1", {'A'}), gold_for("a2", {'A', 'B'})};
  std::vector<GradeRecord> predicted = {record_for("a1", {'A', 'B'}),
                                        record_for("a2", {'A', 'B'})};
  OutcomeJoin join = criterion_outcomes(gold, predicted, course);
  DiffStats stats = grading_difference(join.outcomes);
  REQUIRE(stats.per_answer.size() == 2);
  CHECK(stats.per_answer[0] == doctest::Approx(0.5));
  CHECK(stats.per_answer[1] == doctest::Approx(0.0));
  CHECK(stats.raw_counts[0] == doctest::Approx(1.0));
}

TEST_CASE("the 45/5/50 leniency fixture reproduces the hand-computed mean") {
  // x = 0.5: 45% of answers at +0.5, 5% at -0.5, 50% at 0 -> mean 0.40 * 0.5 = 0.2
  Course course = tiny_course();
  std::vector<GoldLabel> gold;
  std::vector<GradeRecord> predicted;
  for (int i = 0; i < 100; ++i) {
    std::string id = "a" + std::to_string(i);
    if (i < 45) {
      gold.push_back(gold_for(id, {'A'}));
      predicted.push_back(record_for(id, {'A', 'B'}));  // over-graded
    } else if (i < 50) {
      gold.push_back(gold_for(id, {'A', 'B'}));
      predicted.push_back(record_for(id, {'A'}));  // under-graded
    } else {
      gold.push_back(gold_for(id, {'A'}));
      predicted.push_back(record_for(id, {'A'}));  // correct
    }
  }
  OutcomeJoin join = criterion_outcomes(gold, predicted, course);
  DiffStats stats = grading_difference(join.outcomes);
  CHECK(stats.mean == doctest::Approx(0.40 * 0.5).epsilon(1e-12));
  NaiveStats naive = naive_stats(join.outcomes);
  CHECK(stats.mean == doctest::Approx(naive.mean).epsilon(1e-12));
  CHECK(classification_accuracy(join.outcomes) == doctest::Approx(naive.ca).epsilon(1e-12));
}

TEST_CASE("harness statistics equal naive recomputation on random fixtures") {
  Course course = tiny_course();
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<GoldLabel> gold;
    std::vector<GradeRecord> predicted;
    int n = 5 + int(bounded(rng, 50));
    for (int i = 0; i < n; ++i) {
      std::string id = "a" + std::to_string(i);
      CriteriaSet g, p;
      if (bounded(rng, 2)) g.insert('A');
      if (bounded(rng, 2)) g.insert('B');
      if (bounded(rng, 2)) p.insert('A');
      if (bounded(rng, 2)) p.insert('B');
      gold.push_back(gold_for(id, g));
      predicted.push_back(record_for(id, p));
    }
    OutcomeJoin join = criterion_outcomes(gold, predicted, course);
    NaiveStats naive = naive_stats(join.outcomes);
    DiffStats stats = grading_difference(join.outcomes);
    CHECK(classification_accuracy(join.outcomes) == doctest::Approx(naive.ca).epsilon(1e-12));
    CHECK(stats.mean == doctest::Approx(naive.mean).epsilon(1e-12));
    CHECK(stats.stddev == doctest::Approx(naive.stddev).epsilon(1e-12));
  }
}

TEST_CASE("bootstrap: constant data, determinism, coverage of the point estimate") {
  std::vector<double> constant(100, 0.8);
  auto mean = [](const std::vector<double>& xs) {
    double s = 0;
    for (double x : xs) s += x;
    return s / xs.size();
  };
  auto [lo, hi] = bootstrap_ci(mean, constant, 2000, 7);
  CHECK(lo == doctest::Approx(0.8));
  CHECK(hi == doctest::Approx(0.8));

  std::mt19937_64 rng(3);
  std::vector<double> data;
  for (int i = 0; i < 200; ++i) data.push_back(unit_double(rng));
  auto first = bootstrap_ci(mean, data, 2000, 99);
  auto second = bootstrap_ci(mean, data, 2000, 99);
  CHECK(first.first == second.first);
  CHECK(first.second == second.second);

  double point = mean(data);
  CHECK(first.first <= point);
  CHECK(point <= first.second);

  CHECK_THROWS_AS(bootstrap_ci(mean, {}, 2000, 1), EvalError);
  CHECK_THROWS_AS(bootstrap_ci(mean, data, 10, 1), EvalError);
}

TEST_CASE("bootstrap width tracks the analytic normal approximation") {
  // Bernoulli(0.9), n=500: analytic 95% width = 2 * 1.96 * sqrt(0.9*0.1/500)
  std::mt19937_64 rng(12);
  std::vector<double> data;
  for (int i = 0; i < 500; ++i) data.push_back(unit_double(rng) < 0.9 ? 1.0 : 0.0);
  auto mean = [](const std::vector<double>& xs) {
    double s = 0;
    for (double x : xs) s += x;
    return s / xs.size();
  };
  auto [lo, hi] = bootstrap_ci(mean, data, 2000, 21);
  double width = hi - lo;
  double analytic = 2.0 * 1.959963985 * std::sqrt(0.9 * 0.1 / 500.0);
  CHECK(width == doctest::Approx(analytic).epsilon(0.20));
}

TEST_CASE("ablation report propagates variant signs and grid shape") {
  Course course = tiny_course();
  std::vector<GoldLabel> gold;
  std::vector<GradeRecord> rubric_run, examples_run, both_run;
  for (int i = 0; i < 30; ++i) {
    std::string id = "a" + std::to_string(i);
    gold.push_back(gold_for(id, {'A', 'B'}));
    rubric_run.push_back(record_for(id, {'A'}, "m", "rubric"));        // stricter
    examples_run.push_back(record_for(id, {'A', 'B'}, "m", "examples"));  // matches gold
    both_run.push_back(record_for(id, {'A', 'B'}, "m", "both"));
  }
  // examples variant over-predicts on half the answers
  for (int i = 0; i < 30; i += 2) {
    gold[static_cast<size_t>(i)].satisfied = {'A'};
    rubric_run[static_cast<size_t>(i)].grade->response.satisfied = {};
    examples_run[static_cast<size_t>(i)].grade->response.satisfied = {'A', 'B'};
    both_run[static_cast<size_t>(i)].grade->response.satisfied = {'A'};
  }
  std::vector<GradeRecord> all;
  all.insert(all.end(), rubric_run.begin(), rubric_run.end());
  all.insert(all.end(), examples_run.begin(), examples_run.end());
  all.insert(all.end(), both_run.begin(), both_run.end());
  // merged store would keep one record per answer; tag ids per variant instead
  for (auto& r : all) r.answer_id += "-" + r.variant;
  std::vector<GoldLabel> gold_all;
  for (const auto& variant : {"rubric", "examples", "both"}) {
    for (const auto& label : gold) {
      gold_all.push_back({label.answer_id + "-" + variant, label.satisfied, "ta"});
    }
  }
  OutcomeJoin join = criterion_outcomes(gold_all, all, course);

  // identical answer sets across variants is required: strip the tags back
  for (auto& o : join.outcomes) {
    o.answer_id = o.answer_id.substr(0, o.answer_id.find('-', 2));
  }
  ReportOptions options;
  options.bootstrap_resamples = 1000;
  auto rows = ablation_report(join, course, options);

  std::map<std::string, double> overall_mean;
  for (const auto& row : rows) {
    if (row.difficulty == "all") overall_mean[row.variant] = row.mean_diff;
  }
  REQUIRE(overall_mean.size() == 3);
  CHECK(overall_mean["rubric"] < 0.0);
  CHECK(overall_mean["examples"] > 0.0);
  CHECK(overall_mean["both"] == doctest::Approx(0.0));
}

TEST_CASE("ablation rejects mismatched answer sets") {
  Course course = tiny_course();
  std::vector<GoldLabel> gold = {gold_for("a1", {'A'}), gold_for("a2", {'A'})};
  std::vector<GradeRecord> runs = {record_for("a1", {'A'}, "m", "rubric"),
                                   record_for("a2", {'A'}, "m", "examples")};
  OutcomeJoin join = criterion_outcomes(gold, runs, course);
  ReportOptions options;
  options.bootstrap_resamples = 1000;
  CHECK_THROWS_AS(ablation_report(join, course, options), EvalError);
}

TEST_CASE("metric report covers grader and difficulty cells") {
  ts::Fixture fixture = ts::write_fixture(ts::fresh_dir("eval-fixture"), {});
  Course course = load_course(fixture.course_file);
  std::vector<GoldLabel> gold = load_gold(fixture.gold_file);
  std::vector<GradeRecord> records;
  for (const auto& label : gold) {
    // perfect grader named by exercise difficulty bucket
    std::string exercise = label.answer_id.substr(2, 3);
    records.push_back(record_for(label.answer_id, label.satisfied, "m", "both", exercise));
  }
  ReportOptions options;
  options.bootstrap_resamples = 1000;
  OutcomeJoin join = criterion_outcomes(gold, records, course);
  auto rows = metric_reports(join, course, options);
  bool overall = false, easy_cell = false;
  for (const auto& row : rows) {
    if (row.grader == "all" && row.difficulty == "all") {
      overall = true;
      CHECK(row.ca == doctest::Approx(1.0));
      CHECK(row.mean_diff == doctest::Approx(0.0));
      CHECK(row.ca_lo <= row.ca);
      CHECK(row.ca <= row.ca_hi);
    }
    if (row.grader == "m" && row.difficulty == "easy") easy_cell = true;
  }
  CHECK(overall);
  CHECK(easy_cell);

  // difficulty cells partition the outcomes: per-grader cell n's sum to the
  // grader's overall n, and every exercise lands in exactly one cell
  std::map<std::string, std::size_t> difficulty_n;
  std::size_t grader_total = 0;
  for (const auto& row : rows) {
    if (row.grader != "m") continue;
    if (row.difficulty == "all") {
      grader_total = row.n_outcomes;
    } else {
      difficulty_n[row.difficulty] += row.n_outcomes;
    }
  }
  std::size_t sum = 0;
  for (const auto& [difficulty, n] : difficulty_n) {
    (void)difficulty;
    sum += n;
  }
  CHECK(sum == grader_total);
  CHECK(difficulty_n.size() == 3);  // easy, medium, hard in the fixture
}

TEST_CASE("feedback lengths split by gold correctness") {
  Course course = tiny_course();
  std::vector<GoldLabel> gold = {gold_for("a1", {'A', 'B'}), gold_for("a2", {'A'}),
                                 gold_for("a3", {'A', 'B'})};
  std::vector<GradeRecord> records = {record_for("a1", {'A', 'B'}, "ta"),
                                      record_for("a2", {'A'}, "ta"),
                                      record_for("a3", {'A', 'B'}, "llm")};
  records[0].grade->response.feedback = "ok";                       // correct, TA style
  records[1].grade->response.feedback = "Missing the second part."; // incorrect
  records[2].grade->response.feedback = "Great answer, well done."; // correct, LLM style
  auto cells = feedback_length_stats(records, gold, course);
  REQUIRE(cells.size() == 3);
  for (const auto& cell : cells) {
    if (cell.grader == "ta" && cell.correct) {
      CHECK(cell.n == 1);
      CHECK(cell.mean_chars == doctest::Approx(2.0));
      CHECK(cell.mean_words == doctest::Approx(1.0));
    }
    if (cell.grader == "ta" && !cell.correct) {
      CHECK(cell.mean_chars == doctest::Approx(24.0));
    }
    if (cell.grader == "llm") {
      CHECK(cell.correct);
      CHECK(cell.mean_chars == doctest::Approx(24.0));
    }
  }
}
