// Acceptance suite: one check per release criterion, one PASS/FAIL line each.
// Run with the path to the gradekit binary as the only argument; the two
// pipeline criteria shell out to it.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>
#include <vector>

#include "gradekit/course.hpp"
#include "gradekit/eval.hpp"
#include "gradekit/orchestrator.hpp"
#include "gradekit/preference.hpp"
#include "gradekit/prompt.hpp"
#include "gradekit/rng.hpp"
#include "gradekit/rubric.hpp"
#include "gradekit/sampler.hpp"
#include "gradekit/util.hpp"
#include "testsupport.hpp"

using namespace gradekit;
namespace ts = gradekit::testsupport;
namespace fs = std::filesystem;

namespace {

std::string g_gradekit_bin;

class CheckFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void require(bool condition, const std::string& message) {
  if (!condition) throw CheckFailure(message);
}

// --------------------------------------------------------------------------
// criterion 1: expression evaluator vs a brute-force bottom-up interpreter
// --------------------------------------------------------------------------

// Post-order, stack-based evaluation over the expression tree: an independent
// path from ScoreExpression::evaluate's recursive binding walk.
Rational brute_force_eval(const ScoreExpression::Node& root,
                          const std::map<char, Rational>& bindings) {
  using Node = ScoreExpression::Node;
  using Kind = ScoreExpression::Kind;
  struct Frame {
    const Node* node;
    size_t next_child = 0;
  };
  std::vector<Frame> stack{{&root}};
  std::vector<Rational> values;
  while (!stack.empty()) {
    Frame& frame = stack.back();
    const Node* node = frame.node;
    if (frame.next_child < node->children.size()) {
      stack.push_back({&node->children[frame.next_child++]});
      continue;
    }
    stack.pop_back();
    switch (node->kind) {
      case Kind::Literal:
        values.push_back(node->literal);
        break;
      case Kind::Ref:
        values.push_back(bindings.at(node->label));
        break;
      default: {
        size_t argc = node->children.size();
        std::vector<Rational> args(values.end() - static_cast<std::ptrdiff_t>(argc),
                                   values.end());
        values.resize(values.size() - argc);
        Rational result = args[0];
        for (size_t i = 1; i < argc; ++i) {
          switch (node->kind) {
            case Kind::Add:
              result = result + args[i];
              break;
            case Kind::Mul:
              result = result * args[i];
              break;
            case Kind::Min:
              result = Rational::min(result, args[i]);
              break;
            case Kind::Max:
              result = Rational::max(result, args[i]);
              break;
            default:
              throw std::logic_error("bad node");
          }
        }
        values.push_back(result);
        break;
      }
    }
  }
  require(values.size() == 1, "oracle stack imbalance");
  return values.back();
}

std::string random_expression_source(std::mt19937_64& rng, const std::vector<char>& labels,
                                     int depth) {
  auto literal = [&rng] {
    int v = static_cast<int>(bounded(rng, 21));  // 0.00 .. 1.00 in twentieths
    if (v == 20) return std::string("1");
    char buf[8];
    std::snprintf(buf, sizeof(buf), "0.%02d", v * 5);
    return std::string(buf);
  };
  if (depth <= 0 || bounded(rng, 4) == 0) {
    if (!labels.empty() && bounded(rng, 2) == 0) {
      return std::string(1, labels[bounded(rng, labels.size())]);
    }
    return literal();
  }
  switch (bounded(rng, 5)) {
    case 0:
      return "(" + random_expression_source(rng, labels, depth - 1) + " + " +
             random_expression_source(rng, labels, depth - 1) + ")";
    case 1:
      return "(" + random_expression_source(rng, labels, depth - 1) + " * " +
             random_expression_source(rng, labels, depth - 1) + ")";
    case 2:
      return "min(" + random_expression_source(rng, labels, depth - 1) + ", " +
             random_expression_source(rng, labels, depth - 1) + ")";
    case 3:
      return "max(" + random_expression_source(rng, labels, depth - 1) + ", " +
             random_expression_source(rng, labels, depth - 1) + ", " +
             random_expression_source(rng, labels, depth - 1) + ")";
    default:
      return random_expression_source(rng, labels, depth - 1) + " + " +
             random_expression_source(rng, labels, depth - 1);
  }
}

void criterion_1_expression_oracle() {
  std::mt19937_64 rng(1001);
  for (int trial = 0; trial < 200; ++trial) {
    size_t k = 1 + bounded(rng, 6);
    Rubric rubric;
    rubric.exercise_id = "oracle";
    std::vector<char> labels;
    for (size_t i = 0; i < k; ++i) {
      char label = static_cast<char>('A' + i);
      labels.push_back(label);
      rubric.criteria.push_back({label, "c", std::nullopt,
                                 Rational(static_cast<int>(bounded(rng, 11)), 10)});
    }
    std::string source = random_expression_source(rng, labels, 3);
    rubric.expression = ScoreExpression::parse(source);

    for (std::uint32_t mask = 0; mask < (1u << k); ++mask) {
      CriteriaSet subset;
      std::map<char, Rational> bindings;
      for (size_t i = 0; i < k; ++i) {
        if (mask & (1u << i)) {
          subset.insert(labels[i]);
          bindings[labels[i]] = rubric.criteria[i].points;
        } else {
          bindings[labels[i]] = Rational(0);
        }
      }
      Rational expected = brute_force_eval(rubric.expression->root(), bindings);
      Rational actual = evaluate(rubric, subset);
      require(actual == expected, "mismatch on '" + source + "' subset mask " +
                                     std::to_string(mask) + ": evaluate=" +
                                     actual.to_decimal_trimmed() + " oracle=" +
                                     expected.to_decimal_trimmed());
    }
  }
}

// --------------------------------------------------------------------------
// criterion 2: the three-criterion overflow rubric
// --------------------------------------------------------------------------

void criterion_2_overflow_rubric() {
  Rubric no_expression = parse_rubric(R"json({"exercise_id": "fig2", "criteria": [
    {"label": "A", "description": "first part", "points": 0.5},
    {"label": "B", "description": "second part", "points": 0.5},
    {"label": "C", "description": "partial aspect", "points": 0.25}]})json");
  require(raw_sum(no_expression, {'A', 'B', 'C'}) == Rational(5, 4),
          "raw sum must be exactly 1.25");
  auto diagnostics = validate(no_expression);
  bool rejected = false;
  for (const auto& d : diagnostics) rejected = rejected || d.code == "raw-sum-exceeds-one";
  require(rejected, "plain-sum rubric over 1 must be rejected by validation");

  Rubric clamped = parse_rubric(R"json({"exercise_id": "fig2", "expression": "min(1, A + B + C)",
    "criteria": [
    {"label": "A", "description": "first part", "points": 0.5},
    {"label": "B", "description": "second part", "points": 0.5},
    {"label": "C", "description": "partial aspect", "points": 0.25}]})json");
  require(validate(clamped).empty(), "clamped rubric must validate cleanly");
  require(evaluate(clamped, {'A', 'B', 'C'}) == Rational(1),
          "clamped score for {A,B,C} must be exactly 1");
}

// --------------------------------------------------------------------------
// criterion 3: one tally mistake in 333 responses
// --------------------------------------------------------------------------

void criterion_3_tally_crosscheck() {
  Rubric rubric = parse_rubric(R"json({"exercise_id": "tally", "expression": "min(1, A + B + C)",
    "criteria": [
    {"label": "A", "description": "a", "points": 0.5},
    {"label": "B", "description": "b", "points": 0.5},
    {"label": "C", "description": "c", "points": 0.25}]})json");
  std::mt19937_64 rng(3003);
  const int kResponses = 333;
  const int wrong_index = static_cast<int>(bounded(rng, kResponses));
  int mismatches = 0;
  for (int i = 0; i < kResponses; ++i) {
    CriteriaSet satisfied;
    if (bounded(rng, 2)) satisfied.insert('A');
    if (bounded(rng, 2)) satisfied.insert('B');
    if (bounded(rng, 2)) satisfied.insert('C');
    Rational true_score = evaluate(rubric, satisfied);
    GradeResponse response{true_score, "fb", satisfied};
    if (i == wrong_index) {
      response.score = true_score + Rational(1, 4);  // the one careless tally
    }
    ReconciledGrade grade = crosscheck_tally(response, rubric);
    require(grade.final_score == grade.recomputed_score,
            "final score must equal the recomputed score");
    if (grade.tally_mismatch) {
      ++mismatches;
      require(i == wrong_index, "mismatch flagged on a correct response");
      require(grade.final_score == true_score, "the wrong tally must be corrected");
    }
  }
  require(mismatches == 1,
          "expected exactly 1 mismatch in 333, got " + std::to_string(mismatches));
}

// --------------------------------------------------------------------------
// criterion 4: group-uniform sampling and the 10-example cap
// --------------------------------------------------------------------------

void criterion_4_sampler() {
  std::vector<GradedExample> pool;
  for (int i = 0; i < 100; ++i) {
    pool.push_back({"member-" + std::to_string(i), {'A'}, Rational(0), "fb"});
  }
  pool.push_back({"lone", {}, Rational(0), "fb"});

  const int kTrials = 100000;
  int lone_hits = 0;
  for (int seed = 0; seed < kTrials; ++seed) {
    auto picked = sample_examples(pool, 1, static_cast<std::uint64_t>(seed));
    require(picked.size() == 1, "k=1 draw must return one example");
    if (picked[0].text == "lone") ++lone_hits;
  }
  double frequency = static_cast<double>(lone_hits) / kTrials;
  require(std::abs(frequency - 0.5) <= 0.01,
          "small-group frequency " + std::to_string(frequency) + " outside 0.5 +/- 0.01");

  std::mt19937_64 rng(4004);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<GradedExample> random_pool;
    size_t n = 1 + bounded(rng, 40);
    for (size_t i = 0; i < n; ++i) {
      CriteriaSet set;
      if (bounded(rng, 2)) set.insert('A');
      if (bounded(rng, 2)) set.insert('B');
      random_pool.push_back({"e" + std::to_string(i), set, Rational(0), "fb"});
    }
    auto picked = sample_examples(random_pool, 10, rng());
    require(picked.size() <= 10, "cap of 10 examples exceeded");
    require(picked.size() == std::min<size_t>(10, n), "sampler under-filled the prompt");
    bool threw = false;
    try {
      sample_examples(random_pool, 11, 1);
    } catch (const std::invalid_argument&) {
      threw = true;
    }
    require(threw, "k=11 must be rejected");
  }
}

// --------------------------------------------------------------------------
// criterion 5: eight-grader assignment shares
// --------------------------------------------------------------------------

void criterion_5_assignment_shares() {
  std::vector<GraderSpec> graders;
  BackendConfig backend;
  backend.endpoint_url = "replay://unused";
  backend.model_name = "m";
  for (const char* id : {"m1", "m2", "m3", "m4", "m5", "m6"}) {
    graders.push_back({id, GraderKind::Llm, backend, 0.125});
  }
  graders.push_back({"ta", GraderKind::Human, std::nullopt, 0.125});
  graders.push_back({"ta-gpt-revised", GraderKind::HumanLlmRevised, backend, 0.125});

  std::vector<std::string> answers;
  for (int i = 0; i < 10000; ++i) answers.push_back("a" + std::to_string(i));

  AssignmentPlan plan = assign(answers, graders, 5005);
  AssignmentPlan again = assign(answers, graders, 5005);
  require(plan.assigned == again.assigned, "assignment must be deterministic under the seed");

  int human_union = 0;
  for (const auto& [answer, grader] : plan.assigned) {
    (void)answer;
    if (grader == "ta" || grader == "ta-gpt-revised") ++human_union;
  }
  double share = human_union / 10000.0;
  require(std::abs(share - 0.25) <= 0.02,
          "TA union share " + std::to_string(share) + " outside 0.25 +/- 0.02");
}

// --------------------------------------------------------------------------
// criterion 6: eval harness vs naive loops
// --------------------------------------------------------------------------

struct NaiveEval {
  double ca;
  double mean;
  double stddev;
};

NaiveEval naive_eval(const std::vector<CriterionOutcome>& outcomes) {
  int agree = 0;
  std::vector<std::string> order;
  std::map<std::string, std::array<int, 3>> per_answer;  // pred, gold, count
  for (const auto& o : outcomes) {
    if (o.gold == o.predicted) ++agree;
    auto [it, inserted] = per_answer.try_emplace(o.answer_id, std::array<int, 3>{0, 0, 0});
    if (inserted) order.push_back(o.answer_id);
    (*it).second[0] += o.predicted ? 1 : 0;
    (*it).second[1] += o.gold ? 1 : 0;
    (*it).second[2] += 1;
  }
  std::vector<double> diffs;
  for (const auto& id : order) {
    const auto& t = per_answer.at(id);
    diffs.push_back(static_cast<double>(t[0] - t[1]) / static_cast<double>(t[2]));
  }
  double mean = 0;
  for (double d : diffs) mean += d;
  mean /= static_cast<double>(diffs.size());
  double ss = 0;
  for (double d : diffs) ss += (d - mean) * (d - mean);
  double sd = diffs.size() > 1 ? std::sqrt(ss / static_cast<double>(diffs.size() - 1)) : 0.0;
  return {static_cast<double>(agree) / static_cast<double>(outcomes.size()), mean, sd};
}

Course two_criterion_course() {
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

GradeRecord simple_record(const std::string& answer_id, CriteriaSet satisfied) {
  GradeRecord record;
  record.answer_id = answer_id;
  record.grader_id = "m";
  record.exercise_id = "ex";
  record.student_id = "s";
  record.status = GradeStatus::AutoGraded;
  ReconciledGrade grade;
  grade.response.satisfied = std::move(satisfied);
  grade.response.feedback = "fb";
  record.grade = grade;
  record.variant = "both";
  return record;
}

void criterion_6_eval_oracle() {
  Course course = two_criterion_course();
  std::mt19937_64 rng(6006);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<GoldLabel> gold;
    std::vector<GradeRecord> predicted;
    int n = 4 + static_cast<int>(bounded(rng, 80));
    for (int i = 0; i < n; ++i) {
      std::string id = "a" + std::to_string(i);
      CriteriaSet g, p;
      if (bounded(rng, 2)) g.insert('A');
      if (bounded(rng, 2)) g.insert('B');
      if (bounded(rng, 2)) p.insert('A');
      if (bounded(rng, 2)) p.insert('B');
      gold.push_back({id, g, "ta"});
      predicted.push_back(simple_record(id, p));
    }
    OutcomeJoin join = criterion_outcomes(gold, predicted, course);
    NaiveEval naive = naive_eval(join.outcomes);
    DiffStats stats = grading_difference(join.outcomes);
    require(classification_accuracy(join.outcomes) == naive.ca, "CA differs from naive loops");
    require(stats.mean == naive.mean, "mean diff differs from naive loops");
    require(stats.stddev == naive.stddev, "std diff differs from naive loops");
  }

  // the 45/5/50 leniency frame, x = 0.5 per answer
  std::vector<GoldLabel> gold;
  std::vector<GradeRecord> predicted;
  for (int i = 0; i < 100; ++i) {
    std::string id = "a" + std::to_string(i);
    if (i < 45) {
      gold.push_back({id, {'A'}, "ta"});
      predicted.push_back(simple_record(id, {'A', 'B'}));
    } else if (i < 50) {
      gold.push_back({id, {'A', 'B'}, "ta"});
      predicted.push_back(simple_record(id, {'A'}));
    } else {
      gold.push_back({id, {'A'}, "ta"});
      predicted.push_back(simple_record(id, {'A'}));
    }
  }
  OutcomeJoin join = criterion_outcomes(gold, predicted, course);
  DiffStats stats = grading_difference(join.outcomes);
  require(stats.mean == 0.40 * 0.5,
          "45/5/50 fixture mean " + std::to_string(stats.mean) + " != 0.20");
}

// --------------------------------------------------------------------------
// criterion 7: bootstrap behaviour
// --------------------------------------------------------------------------

void criterion_7_bootstrap() {
  auto mean = [](const std::vector<double>& xs) {
    double s = 0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
  };

  std::vector<double> constant(100, 0.8);
  auto [clo, chi] = bootstrap_ci(mean, constant, 2000, 7007);
  require(clo == chi, "constant data must give a zero-width interval");
  require(std::abs(clo - 0.8) < 1e-12, "constant-data interval must sit at the data value");

  std::mt19937_64 rng(7008);
  std::vector<double> bernoulli;
  for (int i = 0; i < 500; ++i) bernoulli.push_back(unit_double(rng) < 0.9 ? 1.0 : 0.0);
  auto [lo, hi] = bootstrap_ci(mean, bernoulli, 2000, 7009);
  auto [lo2, hi2] = bootstrap_ci(mean, bernoulli, 2000, 7009);
  require(lo == lo2 && hi == hi2, "bootstrap must be seed-deterministic");
  double width = hi - lo;
  double analytic = 2.0 * 1.959963985 * std::sqrt(0.9 * 0.1 / 500.0);
  require(std::abs(width - analytic) <= 0.20 * analytic,
          "bootstrap width " + std::to_string(width) + " outside 20% of analytic " +
              std::to_string(analytic));
}

// --------------------------------------------------------------------------
// criterion 8: ordered probit pmf and gradient
// --------------------------------------------------------------------------

void criterion_8_ordered_probit() {
  std::mt19937_64 rng(8008);
  for (int trial = 0; trial < 10000; ++trial) {
    double mu = 16.0 * unit_double(rng) - 8.0;
    std::vector<double> cut(4);
    cut[0] = 4.0 * unit_double(rng) - 3.0;
    for (int k = 1; k < 4; ++k) cut[k] = cut[k - 1] + 0.05 + 2.0 * unit_double(rng);
    auto pmf = ordered_probit_pmf(mu, cut);
    double sum = std::accumulate(pmf.begin(), pmf.end(), 0.0);
    require(std::abs(sum - 1.0) <= 1e-12,
            "pmf sum " + std::to_string(sum) + " violates 1e-12 tolerance");
  }

  ts::RatingsSpec spec;
  spec.gamma = {{"ta", -0.4}, {"llm", 0.4}};
  spec.exercises = 5;
  spec.students = 12;
  spec.count = 50;
  spec.seed = 8010;
  std::vector<Rating> ratings = ts::synthesize_ratings(spec);
  const double h = 1e-5;
  int draws_done = 0;
  for (int draw = 0; draw < 50; ++draw) {
    for (bool split : {false, true}) {
      PreferenceModel model(ratings, 5, split);
      std::vector<double> theta(model.dim());
      for (auto& v : theta) v = unit_double(rng) - 0.5;
      std::vector<double> grad(model.dim());
      model.grad_log_posterior(theta, grad);
      for (size_t j = 0; j < model.dim(); ++j) {
        std::vector<double> up = theta, down = theta;
        up[j] += h;
        down[j] -= h;
        double numeric = (model.log_posterior(up) - model.log_posterior(down)) / (2 * h);
        double scale = std::max({1.0, std::abs(grad[j]), std::abs(numeric)});
        require(std::abs(grad[j] - numeric) / scale < 1e-5,
                "gradient component " + model.param_names()[j] + " off by " +
                    std::to_string(std::abs(grad[j] - numeric) / scale));
      }
      ++draws_done;
    }
  }
  require(draws_done == 100, "expected 100 randomized gradient draws");
}

// --------------------------------------------------------------------------
// criterion 9: posterior recovery of a planted contrast
// --------------------------------------------------------------------------

void criterion_9_posterior_recovery() {
  ts::RatingsSpec spec;
  spec.gamma = {{"ta", -0.4}, {"llm", 0.4}};  // contrast +0.8
  spec.exercises = 5;
  spec.students = 20;
  spec.count = 2000;
  spec.seed = 9001;
  std::vector<Rating> ratings = ts::synthesize_ratings(spec);

  PreferenceConfig config;
  config.iterations = 1300;
  config.warmup = 600;
  config.chains = 4;
  config.leapfrog_steps = 128;
  config.seed = 9002;
  PosteriorDraws draws = sample_posterior(ratings, config);
  require(draws.divergences == 0, "divergent transitions in the recovery run");

  double max_rhat = 0.0;
  for (double r : draws.rhat) max_rhat = std::max(max_rhat, r);
  require(max_rhat < 1.05, "max split R-hat " + std::to_string(max_rhat) + " >= 1.05");

  auto rows = contrasts_vs_reference(draws, ratings, "ta");
  const ContrastRow* llm = nullptr;
  for (const auto& row : rows) {
    if (row.grader == "llm") llm = &row;
  }
  require(llm != nullptr, "missing llm contrast row");
  require(std::abs(llm->mean - 0.8) <= 0.15,
          "posterior mean contrast " + std::to_string(llm->mean) + " outside 0.8 +/- 0.15");
  require(llm->lo <= 0.8 && 0.8 <= llm->hi,
          "95% interval [" + std::to_string(llm->lo) + ", " + std::to_string(llm->hi) +
              "] misses 0.8");
}

// --------------------------------------------------------------------------
// criteria 10 and 11: blinded pipeline and determinism (via the CLI binary)
// --------------------------------------------------------------------------

ts::Fixture g_pipeline_fixture;  // shared between criteria 10 and 11

void criterion_10_blinded_pipeline() {
  require(!g_gradekit_bin.empty(), "gradekit binary path missing (pass as argv[1])");
  g_pipeline_fixture = ts::write_fixture(ts::fresh_dir("acceptance-pipeline"));
  ts::record_fixtures(g_pipeline_fixture, PromptVariant::RubricAndExamples, 22, 10);

  std::string config = " --config '" + g_pipeline_fixture.config_file.string() + "'";
  for (const char* step : {"grade", "eval", "prefs", "report"}) {
    std::string output;
    int code = ts::run_command(g_gradekit_bin + " " + step + config, &output);
    require(code == 0, std::string(step) + " exited " + std::to_string(code) + ": " + output);
  }

  fs::path exports = g_pipeline_fixture.output_dir / "exports";
  require(fs::exists(exports), "exports directory missing after grade");
  std::vector<std::string> forbidden = g_pipeline_fixture.grader_ids;
  forbidden.insert(forbidden.end(), g_pipeline_fixture.model_names.begin(),
                   g_pipeline_fixture.model_names.end());
  size_t documents = 0;
  for (const auto& entry : fs::directory_iterator(exports)) {
    ++documents;
    std::string text = read_file(entry.path());
    for (const auto& word : forbidden) {
      require(!ts::contains_token(text, word),
              "export " + entry.path().filename().string() + " leaks '" + word + "'");
    }
  }
  require(documents == 20, "expected 20 student exports, found " + std::to_string(documents));

  std::string summary = read_file(g_pipeline_fixture.output_dir / "summary.md");
  require(summary.find("Classification accuracy") != std::string::npos,
          "summary.md lacks the accuracy table");
  require(summary.find("mean diff") != std::string::npos, "summary.md lacks the bias column");
  require(summary.find("Satisfaction contrasts") != std::string::npos,
          "summary.md lacks the contrast table");
}

void criterion_11_determinism() {
  require(fs::exists(g_pipeline_fixture.output_dir / "grades.jsonl"),
          "criterion 10 must run first");
  auto artifact = [&](const fs::path& dir, const std::string& name) {
    return ts::strip_timestamps(read_file(dir / name));
  };
  std::string grades_a = artifact(g_pipeline_fixture.output_dir, "grades.jsonl");
  std::string report_a = artifact(g_pipeline_fixture.output_dir, "report.csv");
  std::string contrasts_a = artifact(g_pipeline_fixture.output_dir, "contrasts.csv");

  fs::path second = g_pipeline_fixture.root / "out-rerun";
  std::string config = " --config '" + g_pipeline_fixture.config_file.string() + "'" +
                       " --output-dir '" + second.string() + "'";
  for (const char* step : {"grade", "eval", "prefs"}) {
    std::string output;
    int code = ts::run_command(g_gradekit_bin + " " + step + config, &output);
    require(code == 0, std::string(step) + " rerun exited " + std::to_string(code) + ": " + output);
  }
  require(artifact(second, "grades.jsonl") == grades_a, "grades.jsonl differs across reruns");
  require(artifact(second, "report.csv") == report_a, "report.csv differs across reruns");
  require(artifact(second, "contrasts.csv") == contrasts_a,
          "contrasts.csv differs across reruns");
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 1) g_gradekit_bin = argv[1];

  struct Criterion {
    int id;
    std::string name;
    std::function<void()> run;
  };
  std::vector<Criterion> criteria = {
      {1, "expression evaluator matches the brute-force interpreter on 200 random rubrics",
       criterion_1_expression_oracle},
      {2, "overflow rubric: raw sum 1.25, rejected without expression, clamps to 1.0",
       criterion_2_overflow_rubric},
      {3, "tally cross-check flags exactly the one wrong score in 333 responses",
       criterion_3_tally_crosscheck},
      {4, "example sampler is uniform over groups and capped at 10", criterion_4_sampler},
      {5, "TA + revised assignment share is 25% +/- 2% over 10k answers",
       criterion_5_assignment_shares},
      {6, "eval statistics equal naive-loop recomputation; 45/5/50 mean is 0.20",
       criterion_6_eval_oracle},
      {7, "bootstrap: zero-width on constants, ~analytic width on Bernoulli(0.9)",
       criterion_7_bootstrap},
      {8, "ordered-probit pmf sums to 1 within 1e-12; gradients match finite differences",
       criterion_8_ordered_probit},
      {9, "posterior recovers a planted 0.8 contrast within 0.15, R-hat < 1.05",
       criterion_9_posterior_recovery},
      {10, "end-to-end pipeline on the replay fixture; exports leak no grader identity",
       criterion_10_blinded_pipeline},
      {11, "rerun with identical seeds reproduces grades.jsonl, report.csv, contrasts.csv",
       criterion_11_determinism},
  };

  int failures = 0;
  for (const auto& criterion : criteria) {
    auto start = std::chrono::steady_clock::now();
    std::string verdict = "PASS";
    std::string detail;
    try {
      criterion.run();
    } catch (const std::exception& e) {
      verdict = "FAIL";
      detail = e.what();
      ++failures;
    }
    auto seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start);
    std::ostringstream line;
    line << verdict << " criterion " << criterion.id << ": " << criterion.name << " ("
         << std::fixed;
    line.precision(1);
    line << seconds.count() << "s)";
    if (!detail.empty()) line << " -- " << detail;
    std::cout << line.str() << std::endl;
  }
  if (failures > 0) {
    std::cout << failures << " criterion(s) failed" << std::endl;
    return 1;
  }
  std::cout << "all 11 criteria passed" << std::endl;
  return 0;
}
