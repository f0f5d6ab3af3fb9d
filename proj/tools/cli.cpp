#include "cli.hpp"

#include <json.hpp>

#include <algorithm>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "gradekit/course.hpp"
#include "gradekit/eval.hpp"
#include "gradekit/gateway.hpp"
#include "gradekit/orchestrator.hpp"
#include "gradekit/preference.hpp"
#include "gradekit/prompt.hpp"
#include "gradekit/rubric.hpp"
#include "gradekit/sampler.hpp"
#include "gradekit/util.hpp"

namespace gradekit::cli {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

fs::path resolve(const fs::path& base, const std::string& value) {
  fs::path p(value);
  return p.is_absolute() ? p : base / p;
}

void require_exists(const fs::path& path, const char* what) {
  if (!fs::exists(path)) {
    throw ConfigError(std::string(what) + " not found: " + path.string());
  }
}

}  // namespace

RunConfig RunConfig::load(const fs::path& path) {
  std::string raw = read_file(path);
  json doc = json::parse(raw, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw ConfigError(path.string() + ": config must be a JSON object");
  }
  RunConfig config;
  config.config_path = path;
  config.config_hash = sha256_hex(raw);
  fs::path base = path.parent_path();

  auto need_path = [&](const char* field) {
    if (!doc.contains(field) || !doc[field].is_string()) {
      throw ConfigError(path.string() + ": missing string field '" + field + "'");
    }
    return resolve(base, doc[field].get<std::string>());
  };
  config.course = need_path("course");
  config.submissions = need_path("submissions");
  config.examples = need_path("examples");
  config.graders = need_path("graders");
  config.templates_dir = need_path("templates_dir");
  config.output_dir = need_path("output_dir");

  auto optional_path = [&](const char* field) -> std::optional<fs::path> {
    if (!doc.contains(field) || doc[field].is_null()) return std::nullopt;
    return resolve(base, doc[field].get<std::string>());
  };
  config.gold = optional_path("gold");
  config.ta_grades = optional_path("ta_grades");
  config.ratings = optional_path("ratings");
  if (auto cache = optional_path("cache_dir")) {
    config.cache_dir = *cache;
  } else {
    config.cache_dir = config.output_dir / "cache";
  }

  config.variant = doc.value("variant", std::string("both"));
  variant_from_name(config.variant);  // validates

  if (doc.contains("seeds")) {
    const json& s = doc["seeds"];
    config.seeds.assignment = s.value("assignment", config.seeds.assignment);
    config.seeds.sampling = s.value("sampling", config.seeds.sampling);
    config.seeds.bootstrap = s.value("bootstrap", config.seeds.bootstrap);
    config.seeds.mcmc = s.value("mcmc", config.seeds.mcmc);
  }
  config.examples_per_prompt = doc.value("examples_per_prompt", config.examples_per_prompt);
  config.resample_per_submission =
      doc.value("resample_per_submission", config.resample_per_submission);
  config.bootstrap_resamples = doc.value("bootstrap_resamples", config.bootstrap_resamples);
  config.max_in_flight = doc.value("max_in_flight", config.max_in_flight);
  config.worker_threads = doc.value("worker_threads", config.worker_threads);
  config.endpoint_override = doc.value("endpoint_override", std::string());
  config.dry_run_grader = doc.value("dry_run_grader", std::string());

  if (doc.contains("mcmc")) {
    const json& m = doc["mcmc"];
    config.mcmc.iterations = m.value("iterations", config.mcmc.iterations);
    config.mcmc.warmup = m.value("warmup", config.mcmc.warmup);
    config.mcmc.chains = m.value("chains", config.mcmc.chains);
    config.mcmc.leapfrog_steps = m.value("leapfrog_steps", config.mcmc.leapfrog_steps);
    config.mcmc.rating_levels = m.value("rating_levels", config.mcmc.rating_levels);
    config.mcmc.split_by_correctness =
        m.value("split_by_correctness", config.mcmc.split_by_correctness);
    config.mcmc.sampler = m.value("sampler", config.mcmc.sampler);
    config.mcmc.reference_grader = m.value("reference_grader", config.mcmc.reference_grader);
  }

  require_exists(config.course, "course file");
  require_exists(config.submissions, "submissions file");
  require_exists(config.examples, "examples file");
  require_exists(config.graders, "graders file");
  require_exists(config.templates_dir, "templates directory");
  if (config.gold) require_exists(*config.gold, "gold file");
  if (config.ta_grades) require_exists(*config.ta_grades, "ta_grades file");
  if (config.ratings) require_exists(*config.ratings, "ratings file");
  fs::create_directories(config.output_dir);
  return config;
}

std::string RunConfig::provenance() const {
  std::ostringstream os;
  os << kToolVersion << " config_hash=" << config_hash << " variant=" << variant
     << " seed_assignment=" << seeds.assignment << " seed_sampling=" << seeds.sampling
     << " seed_bootstrap=" << seeds.bootstrap << " seed_mcmc=" << seeds.mcmc;
  return os.str();
}

// ---------------------------------------------------------------------------
// shared loading helpers
// ---------------------------------------------------------------------------

namespace {

struct LoadedStudy {
  Course course;
  std::vector<Submission> submissions;
  std::map<std::string, std::vector<GradedExample>> examples;
  std::vector<GraderSpec> graders;
  TemplateSet templates;
};

LoadedStudy load_study(const RunConfig& config) {
  LoadedStudy study;
  study.course = load_course(config.course);
  study.submissions = load_submissions(config.submissions);
  study.examples = load_examples(config.examples);
  study.graders = load_graders(config.graders);
  study.templates = TemplateSet::load_dir(config.templates_dir);
  if (!config.endpoint_override.empty()) {
    for (auto& grader : study.graders) {
      if (grader.backend) grader.backend->endpoint_url = config.endpoint_override;
    }
  }
  return study;
}

GradingContext make_context(const RunConfig& config, const LoadedStudy& study) {
  GradingContext context;
  context.course = &study.course;
  context.examples = study.examples;
  context.templates = study.templates;
  context.variant = variant_from_name(config.variant);
  context.sampling_seed = config.seeds.sampling;
  context.examples_per_prompt = config.examples_per_prompt;
  context.resample_per_submission = config.resample_per_submission;
  context.worker_threads = config.worker_threads;
  return context;
}

std::string meta_line(const RunConfig& config) {
  json meta;
  meta["_meta"]["tool"] = kToolVersion;
  meta["_meta"]["config_hash"] = config.config_hash;
  meta["_meta"]["variant"] = config.variant;
  meta["_meta"]["seeds"] = {{"assignment", config.seeds.assignment},
                            {"sampling", config.seeds.sampling},
                            {"bootstrap", config.seeds.bootstrap},
                            {"mcmc", config.seeds.mcmc}};
  return meta.dump();
}

fs::path grades_path(const RunConfig& config) { return config.output_dir / "grades.jsonl"; }

int count_status(const std::map<std::string, GradeRecord>& latest, GradeStatus status) {
  int n = 0;
  for (const auto& [id, record] : latest) {
    (void)id;
    if (record.status == status) ++n;
  }
  return n;
}

}  // namespace

// ---------------------------------------------------------------------------
// validate
// ---------------------------------------------------------------------------

int cmd_validate(const RunConfig& config) {
  std::vector<std::string> problems;
  auto complain = [&problems](const std::string& message) { problems.push_back(message); };

  LoadedStudy study;
  try {
    study = load_study(config);
  } catch (const std::exception& e) {
    std::cout << "INVALID: " << e.what() << "\n";
    return kDataError;
  }

  for (const auto& exercise : study.course.exercises) {
    for (const auto& diagnostic : validate(exercise.rubric)) {
      complain("exercise '" + exercise.id + "': " + diagnostic.message);
    }
  }

  // template placeholders, exercised through a rendering round
  try {
    Rubric dummy;
    dummy.exercise_id = "placeholder-check";
    dummy.criteria.push_back({'A', "placeholder", std::nullopt, Rational(1)});
    ExercisePacket packet;
    packet.question = "q";
    packet.reference_answer = "r";
    packet.rubric = dummy;
    packet.examples.push_back({"example", {'A'}, Rational(1), "ok"});
    packet.submission = "s";
    packet.submission_id = "check";
    render(packet, PromptVariant::RubricAndExamples, study.templates);
    render_tone_revision("sample feedback", study.templates);
  } catch (const PromptError& e) {
    complain(std::string("templates: ") + e.what());
  }

  double weight_sum = 0.0;
  for (const auto& grader : study.graders) weight_sum += grader.assignment_weight;
  if (std::abs(weight_sum - 1.0) > 1e-9) {
    complain("grader weights sum to " + std::to_string(weight_sum) + ", expected 1");
  }

  for (const auto& submission : study.submissions) {
    if (study.course.find(submission.exercise_id) == nullptr) {
      complain("submission '" + submission.answer_id + "' names unknown exercise '" +
               submission.exercise_id + "'");
    }
  }

  for (const auto& [exercise_id, examples] : study.examples) {
    const Exercise* exercise = study.course.find(exercise_id);
    if (exercise == nullptr) {
      complain("examples reference unknown exercise '" + exercise_id + "'");
      continue;
    }
    for (size_t i = 0; i < examples.size(); ++i) {
      const GradedExample& example = examples[i];
      for (char label : example.satisfied) {
        if (!exercise->rubric.has_label(label)) {
          complain("example " + std::to_string(i + 1) + " for '" + exercise_id +
                   "' uses unknown criterion " + std::string(1, label));
        }
      }
      try {
        Rational expected = evaluate(exercise->rubric, example.satisfied);
        if (expected != example.score) {
          complain("example " + std::to_string(i + 1) + " for '" + exercise_id + "' scores " +
                   example.score.to_decimal_trimmed() + " but the rubric computes " +
                   expected.to_decimal_trimmed());
        }
      } catch (const std::exception& e) {
        complain("example " + std::to_string(i + 1) + " for '" + exercise_id + "': " + e.what());
      }
    }
  }

  if (config.gold) {
    try {
      auto gold = load_gold(*config.gold);
      std::map<std::string, const Submission*> by_answer;
      for (const auto& s : study.submissions) by_answer[s.answer_id] = &s;
      for (const auto& label : gold) {
        auto it = by_answer.find(label.answer_id);
        if (it == by_answer.end()) {
          complain("gold label for unknown answer '" + label.answer_id + "'");
          continue;
        }
        const Exercise* exercise = study.course.find(it->second->exercise_id);
        for (char c : label.satisfied) {
          if (exercise != nullptr && !exercise->rubric.has_label(c)) {
            complain("gold label for '" + label.answer_id + "' uses unknown criterion " +
                     std::string(1, c));
          }
        }
      }
    } catch (const std::exception& e) {
      complain(std::string("gold: ") + e.what());
    }
  }

  if (problems.empty()) {
    std::cout << "OK: course, rubrics, templates, graders and data files are consistent\n";
    return kOk;
  }
  for (const auto& problem : problems) {
    std::cout << "INVALID: " << problem << "\n";
  }
  return kDataError;
}

// ---------------------------------------------------------------------------
// grade
// ---------------------------------------------------------------------------

int cmd_grade(const RunConfig& config) {
  LoadedStudy study = load_study(config);

  AssignmentPlan plan = assign_with_consent(study.submissions, study.graders,
                                            config.seeds.assignment);
  GradingContext context = make_context(config, study);
  Gateway gateway({config.cache_dir, config.max_in_flight});

  std::vector<GradeRecord> records =
      run_grading(plan, study.submissions, study.graders, context, gateway);

  if (config.ta_grades) {
    auto ta_grades = load_ta_grades(*config.ta_grades);
    auto latest = RecordStore::latest_by_answer(records);
    std::vector<GradeRecord> updates =
        apply_human_grades(latest, ta_grades, study.graders, context, gateway);
    for (auto& update : updates) records.push_back(std::move(update));
  }

  std::ostringstream out;
  out << meta_line(config) << "\n";
  for (const auto& record : records) out << record.to_jsonl() << "\n";
  write_file_atomic(grades_path(config), out.str());

  auto latest = RecordStore::latest_by_answer(records);
  int pending = count_status(latest, GradeStatus::PendingHuman);
  std::cout << "graded " << latest.size() << " answers ("
            << count_status(latest, GradeStatus::AutoGraded) << " auto, "
            << count_status(latest, GradeStatus::HumanGraded) << " human, " << pending
            << " pending-human)\n";
  std::cout << "wrote " << grades_path(config).string() << "\n";

  if (pending == 0) {
    auto documents = export_student_view(latest, study.course);
    fs::path export_dir = config.output_dir / "exports";
    for (const auto& [student_id, text] : documents) {
      write_file_atomic(export_dir / (student_id + ".md"),
                        text + "\n<!-- " + config.provenance() + " -->\n");
    }
    std::cout << "wrote " << documents.size() << " student exports under "
              << export_dir.string() << "\n";
  } else {
    std::cout << "exports skipped: " << pending << " answers still need human grading\n";
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// dry-run
// ---------------------------------------------------------------------------

int cmd_dry_run(const RunConfig& config) {
  if (!config.gold) {
    std::cout << "dry-run needs a 'gold' file in the config\n";
    return kDataError;
  }
  LoadedStudy study = load_study(config);
  std::vector<GoldLabel> gold = load_gold(*config.gold);
  if (gold.empty()) {
    std::cout << "dry-run: gold file has no labels\n";
    return kDataError;
  }

  const GraderSpec* grader = nullptr;
  if (!config.dry_run_grader.empty()) {
    grader = find_grader(study.graders, config.dry_run_grader);
    if (grader == nullptr || grader->kind != GraderKind::Llm) {
      std::cout << "dry-run grader '" << config.dry_run_grader << "' is not an LLM grader\n";
      return kDataError;
    }
  } else {
    for (const auto& g : study.graders) {
      if (g.kind == GraderKind::Llm) {
        grader = &g;
        break;
      }
    }
    if (grader == nullptr) {
      std::cout << "no LLM grader configured\n";
      return kDataError;
    }
  }

  std::map<std::string, const GoldLabel*> gold_by_answer;
  for (const auto& label : gold) gold_by_answer[label.answer_id] = &label;
  std::vector<Submission> labelled;
  for (const auto& submission : study.submissions) {
    if (gold_by_answer.count(submission.answer_id)) labelled.push_back(submission);
  }
  if (labelled.empty()) {
    std::cout << "dry-run: no submissions match the gold labels\n";
    return kDataError;
  }

  // every labelled answer goes to the chosen grader
  AssignmentPlan plan;
  plan.seed = config.seeds.assignment;
  for (const auto& submission : labelled) {
    plan.assigned[submission.answer_id] = grader->grader_id;
  }
  GradingContext context = make_context(config, study);
  Gateway gateway({config.cache_dir, config.max_in_flight});
  std::vector<GradeRecord> records =
      run_grading(plan, labelled, study.graders, context, gateway);

  struct Mismatch {
    std::string exercise_id, answer_id;
    char criterion;
    bool gold_value, predicted;
  };
  std::vector<Mismatch> mismatches;
  int failures = 0;
  OutcomeJoin join = criterion_outcomes(gold, records, study.course);
  for (const auto& outcome : join.outcomes) {
    if (outcome.gold != outcome.predicted) {
      mismatches.push_back({outcome.exercise_id, outcome.answer_id, outcome.criterion,
                            outcome.gold, outcome.predicted});
    }
  }
  for (const auto& record : records) {
    if (!record.grade) ++failures;
  }
  std::stable_sort(mismatches.begin(), mismatches.end(), [](const auto& a, const auto& b) {
    return std::tie(a.exercise_id, a.answer_id, a.criterion) <
           std::tie(b.exercise_id, b.answer_id, b.criterion);
  });

  std::ostringstream report;
  report << "# Rubric dry-run: " << grader->grader_id << "\n\n";
  report << "Graded " << labelled.size() << " TA-labelled submissions; " << mismatches.size()
         << " criterion mismatches";
  if (failures > 0) report << "; " << failures << " answers failed to grade";
  report << ".\n";
  if (!mismatches.empty()) {
    report << "\n| exercise | answer | criterion | TA | " << grader->grader_id << " |\n";
    report << "|---|---|---|---|---|\n";
    for (const auto& m : mismatches) {
      report << "| " << m.exercise_id << " | " << m.answer_id << " | " << m.criterion << " | "
             << (m.gold_value ? "satisfied" : "not satisfied") << " | "
             << (m.predicted ? "satisfied" : "not satisfied") << " |\n";
    }
    report << "\nInspect the wording of the criteria above and refine the rubric, then rerun.\n";
  }
  report << "\n<!-- " << config.provenance() << " -->\n";

  fs::path report_path = config.output_dir / "dry_run_report.md";
  write_file_atomic(report_path, report.str());
  std::cout << report.str();
  std::cout << "wrote " << report_path.string() << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

int cmd_eval(const RunConfig& config) {
  if (!config.gold) {
    std::cout << "eval needs a 'gold' file in the config\n";
    return kDataError;
  }
  if (!fs::exists(grades_path(config))) {
    std::cout << "no grades at " << grades_path(config).string() << "; run 'grade' first\n";
    return kDataError;
  }
  Course course = load_course(config.course);
  std::vector<GoldLabel> gold = load_gold(*config.gold);
  std::vector<GradeRecord> all_records = RecordStore::read_file(grades_path(config));
  auto latest_map = RecordStore::latest_by_answer(all_records);
  std::vector<GradeRecord> latest;
  latest.reserve(latest_map.size());
  for (const auto& [id, record] : latest_map) {
    (void)id;
    latest.push_back(record);
  }

  OutcomeJoin join = criterion_outcomes(gold, latest, course);
  if (join.outcomes.empty()) {
    std::cout << "no overlapping answers between gold labels and grades\n";
    return kDataError;
  }
  ReportOptions options;
  options.bootstrap_resamples = config.bootstrap_resamples;
  options.bootstrap_seed = config.seeds.bootstrap;

  std::vector<MetricReport> rows = metric_reports(join, course, options);
  std::vector<MetricReport> ablation = ablation_report(join, course, options);
  rows.insert(rows.end(), ablation.begin(), ablation.end());
  std::vector<FeedbackLengthCell> feedback = feedback_length_stats(latest, gold, course);

  write_file_atomic(config.output_dir / "report.csv",
                    "# " + config.provenance() + "\n" + report_csv(rows));
  write_file_atomic(config.output_dir / "feedback_lengths.csv",
                    "# " + config.provenance() + "\n" + feedback_csv(feedback));
  write_file_atomic(config.output_dir / "report.md",
                    report_markdown(rows, feedback, join) + "\n<!-- " + config.provenance() +
                        " -->\n");
  std::cout << "evaluated " << join.outcomes.size() << " criterion outcomes over "
            << latest.size() << " answers\n";
  if (!join.missing_predicted.empty()) {
    std::cout << join.missing_predicted.size() << " gold answers have no grades\n";
  }
  std::cout << "wrote report.csv, feedback_lengths.csv, report.md under "
            << config.output_dir.string() << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// prefs
// ---------------------------------------------------------------------------

int cmd_prefs(const RunConfig& config) {
  if (!config.ratings) {
    std::cout << "prefs needs a 'ratings' file in the config\n";
    return kDataError;
  }
  std::vector<Rating> ratings = load_ratings_csv(*config.ratings);
  if (ratings.empty()) {
    std::cout << "ratings file has no rows\n";
    return kDataError;
  }
  PreferenceConfig pc;
  pc.iterations = config.mcmc.iterations;
  pc.warmup = config.mcmc.warmup;
  pc.chains = config.mcmc.chains;
  pc.leapfrog_steps = config.mcmc.leapfrog_steps;
  pc.rating_levels = config.mcmc.rating_levels;
  pc.split_by_correctness = config.mcmc.split_by_correctness;
  pc.sampler = config.mcmc.sampler;
  pc.seed = config.seeds.mcmc;

  PosteriorDraws draws = sample_posterior(ratings, pc);
  std::vector<ContrastRow> contrasts =
      contrasts_vs_reference(draws, ratings, config.mcmc.reference_grader);

  write_file_atomic(config.output_dir / "posterior.csv",
                    "# " + config.provenance() + "\n" + posterior_csv(draws));
  write_file_atomic(config.output_dir / "contrasts.csv",
                    "# " + config.provenance() + "\n" + contrasts_csv(contrasts));
  write_file_atomic(config.output_dir / "diagnostics.txt",
                    diagnostics_text(draws) + "\n" + config.provenance() + "\n");

  std::cout << "fitted preference model on " << ratings.size() << " ratings ("
            << draws.chains << " chains x " << draws.draws_per_chain << " draws)\n";
  for (const auto& warning : draws.warnings) {
    std::cout << "WARNING: " << warning << "\n";
  }
  std::cout << "wrote posterior.csv, contrasts.csv, diagnostics.txt under "
            << config.output_dir.string() << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

namespace {

std::vector<std::vector<std::string>> read_csv_rows(const fs::path& path) {
  std::vector<std::vector<std::string>> rows;
  std::string content = read_file(path);
  for (const auto& line : split_lines(content)) {
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::vector<std::string> fields;
    std::stringstream ss(t);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    rows.push_back(std::move(fields));
  }
  return rows;
}

}  // namespace

int cmd_report(const RunConfig& config) {
  std::ostringstream os;
  std::vector<std::string> missing;
  os << "# Study report\n\n";

  fs::path grades = grades_path(config);
  if (fs::exists(grades)) {
    auto records = RecordStore::read_file(grades);
    auto latest = RecordStore::latest_by_answer(records);
    os << "## Grading\n\n";
    os << "- answers: " << latest.size() << "\n";
    os << "- auto-graded: " << count_status(latest, GradeStatus::AutoGraded) << "\n";
    os << "- human-graded: "
       << count_status(latest, GradeStatus::HumanGraded) + count_status(latest, GradeStatus::Regraded)
       << "\n";
    os << "- pending human: " << count_status(latest, GradeStatus::PendingHuman) << "\n";
    int mismatches = 0;
    for (const auto& [id, record] : latest) {
      (void)id;
      if (record.grade && record.grade->tally_mismatch) ++mismatches;
    }
    os << "- tally mismatches corrected: " << mismatches << "\n\n";
  } else {
    missing.push_back("grades.jsonl (run 'grade')");
  }

  fs::path report_csv_path = config.output_dir / "report.csv";
  if (fs::exists(report_csv_path)) {
    auto rows = read_csv_rows(report_csv_path);
    os << "## Classification accuracy (per grader)\n\n";
    os << "| grader | difficulty | variant | CA | 95% CI | mean diff | 95% CI |\n";
    os << "|---|---|---|---|---|---|---|\n";
    for (size_t i = 1; i < rows.size(); ++i) {
      const auto& r = rows[i];
      if (r.size() < 15) continue;
      os << "| " << r[0] << " | " << r[1] << " | " << r[2] << " | " << r[5] << " | [" << r[6]
         << ", " << r[7] << "] | " << r[8] << " | [" << r[9] << ", " << r[10] << "] |\n";
    }
    os << "\n";
  } else {
    missing.push_back("report.csv (run 'eval')");
  }

  fs::path contrasts_path = config.output_dir / "contrasts.csv";
  if (fs::exists(contrasts_path)) {
    auto rows = read_csv_rows(contrasts_path);
    os << "## Satisfaction contrasts vs " << config.mcmc.reference_grader << "\n\n";
    os << "| grader | panel | gamma diff | 95% CI | P(higher) | P(lower) |\n";
    os << "|---|---|---|---|---|---|\n";
    for (size_t i = 1; i < rows.size(); ++i) {
      const auto& r = rows[i];
      if (r.size() < 11) continue;
      os << "| " << r[0] << " | " << r[1] << " | " << r[2] << " | [" << r[3] << ", " << r[4]
         << "] | " << r[5] << " | " << r[8] << " |\n";
    }
    os << "\n";
  } else {
    missing.push_back("contrasts.csv (run 'prefs')");
  }

  if (!missing.empty()) {
    os << "## Missing sections\n\n";
    for (const auto& m : missing) os << "- " << m << "\n";
    os << "\n";
  }
  os << "<!-- " << config.provenance() << " -->\n";

  fs::path summary = config.output_dir / "summary.md";
  write_file_atomic(summary, os.str());
  std::cout << "wrote " << summary.string();
  if (!missing.empty()) {
    std::cout << " (" << missing.size() << " sections missing)";
  }
  std::cout << "\n";
  return kOk;
}

}  // namespace gradekit::cli
