#include "gradekit/orchestrator.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include "gradekit/rng.hpp"
#include "gradekit/sampler.hpp"
#include "gradekit/util.hpp"

namespace gradekit {

using json = nlohmann::json;
namespace fs = std::filesystem;

std::string grader_kind_name(GraderKind kind) {
  switch (kind) {
    case GraderKind::Llm:
      return "llm";
    case GraderKind::Human:
      return "human";
    case GraderKind::HumanLlmRevised:
      return "human-llm-revised";
  }
  throw std::logic_error("unreachable grader kind");
}

GraderKind grader_kind_from_name(std::string_view name) {
  std::string n = to_lower(trim(name));
  if (n == "llm") return GraderKind::Llm;
  if (n == "human") return GraderKind::Human;
  if (n == "human-llm-revised") return GraderKind::HumanLlmRevised;
  throw DataError("unknown grader kind '" + std::string(name) + "'");
}

std::vector<GraderSpec> load_graders(const fs::path& path) {
  json doc = json::parse(read_file(path), nullptr, false);
  if (doc.is_discarded() || !doc.is_array()) {
    throw DataError(path.string() + ": expected a JSON array of grader specs");
  }
  std::vector<GraderSpec> graders;
  for (const auto& item : doc) {
    GraderSpec spec;
    spec.grader_id = item.at("grader_id").get<std::string>();
    spec.kind = grader_kind_from_name(item.at("kind").get<std::string>());
    spec.assignment_weight = item.at("assignment_weight").get<double>();
    if (item.contains("backend") && !item["backend"].is_null()) {
      const json& b = item["backend"];
      BackendConfig config;
      config.endpoint_url = b.at("endpoint_url").get<std::string>();
      config.model_name = b.at("model_name").get<std::string>();
      config.temperature = b.value("temperature", 0.0);
      config.max_output_tokens = b.value("max_output_tokens", 1024);
      config.credential_source = b.value("credential_source", std::string());
      config.timeout_seconds = b.value("timeout_seconds", 60.0);
      config.max_retries = b.value("max_retries", 3);
      spec.backend = std::move(config);
    }
    bool needs_backend = spec.kind != GraderKind::Human;
    if (needs_backend && !spec.backend) {
      throw DataError("grader '" + spec.grader_id + "' of kind " + grader_kind_name(spec.kind) +
                      " needs a backend");
    }
    for (const auto& existing : graders) {
      if (existing.grader_id == spec.grader_id) {
        throw DataError("duplicate grader_id '" + spec.grader_id + "'");
      }
    }
    graders.push_back(std::move(spec));
  }
  if (graders.empty()) {
    throw DataError(path.string() + ": no graders configured");
  }
  return graders;
}

const GraderSpec* find_grader(const std::vector<GraderSpec>& graders, const std::string& id) {
  for (const auto& g : graders) {
    if (g.grader_id == id) return &g;
  }
  return nullptr;
}

// ---------------------------------------------------------------------------
// Assignment
// ---------------------------------------------------------------------------

AssignmentPlan assign(const std::vector<std::string>& answer_ids,
                      const std::vector<GraderSpec>& graders, std::uint64_t seed) {
  double total = 0.0;
  for (const auto& g : graders) {
    if (g.assignment_weight < 0.0) {
      throw OrchestratorError("negative assignment weight for grader '" + g.grader_id + "'");
    }
    total += g.assignment_weight;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw OrchestratorError("assignment weights sum to " + std::to_string(total) +
                            ", expected 1");
  }

  AssignmentPlan plan;
  plan.seed = seed;
  for (const auto& g : graders) {
    plan.weights.emplace_back(g.grader_id, g.assignment_weight);
  }

  std::mt19937_64 rng(seed);
  for (const auto& answer_id : answer_ids) {
    double u = unit_double(rng);
    double cumulative = 0.0;
    std::string chosen = graders.back().grader_id;
    for (const auto& g : graders) {
      cumulative += g.assignment_weight;
      if (u < cumulative) {
        chosen = g.grader_id;
        break;
      }
    }
    plan.assigned[answer_id] = chosen;
  }
  return plan;
}

AssignmentPlan assign_with_consent(const std::vector<Submission>& submissions,
                                   const std::vector<GraderSpec>& graders, std::uint64_t seed) {
  std::vector<std::string> answer_ids;
  answer_ids.reserve(submissions.size());
  for (const auto& s : submissions) answer_ids.push_back(s.answer_id);
  AssignmentPlan plan = assign(answer_ids, graders, seed);

  const GraderSpec* human = nullptr;
  for (const auto& g : graders) {
    if (g.kind == GraderKind::Human) {
      human = &g;
      break;
    }
  }
  for (const auto& s : submissions) {
    if (s.consent) continue;
    if (human == nullptr) {
      throw OrchestratorError("submission '" + s.answer_id +
                              "' withholds consent but no human grader is configured");
    }
    plan.assigned[s.answer_id] = human->grader_id;
  }
  return plan;
}

// ---------------------------------------------------------------------------
// Records
// ---------------------------------------------------------------------------

std::string status_name(GradeStatus status) {
  switch (status) {
    case GradeStatus::AutoGraded:
      return "auto-graded";
    case GradeStatus::PendingHuman:
      return "pending-human";
    case GradeStatus::HumanGraded:
      return "human-graded";
    case GradeStatus::RegradeRequested:
      return "regrade-requested";
    case GradeStatus::Regraded:
      return "regraded";
  }
  throw std::logic_error("unreachable status");
}

GradeStatus status_from_name(std::string_view name) {
  std::string n = trim(name);
  if (n == "auto-graded") return GradeStatus::AutoGraded;
  if (n == "pending-human") return GradeStatus::PendingHuman;
  if (n == "human-graded") return GradeStatus::HumanGraded;
  if (n == "regrade-requested") return GradeStatus::RegradeRequested;
  if (n == "regraded") return GradeStatus::Regraded;
  throw DataError("unknown grade status '" + std::string(name) + "'");
}

std::string GradeRecord::to_jsonl() const {
  json doc;
  doc["answer_id"] = answer_id;
  doc["grader_id"] = grader_id;
  doc["exercise_id"] = exercise_id;
  doc["student_id"] = student_id;
  doc["status"] = status_name(status);
  if (grade) {
    json g;
    g["reported_score"] = grade->response.score.to_double();
    g["feedback"] = grade->response.feedback;
    json satisfied = json::array();
    for (char c : grade->response.satisfied) satisfied.push_back(std::string(1, c));
    g["satisfied"] = std::move(satisfied);
    g["recomputed_score"] = grade->recomputed_score.to_double();
    g["tally_mismatch"] = grade->tally_mismatch;
    g["final_score"] = grade->final_score.to_double();
    doc["grade"] = std::move(g);
  } else {
    doc["grade"] = nullptr;
  }
  doc["variant"] = variant;
  doc["flags"] = flags;
  doc["ts"] = ts;
  return doc.dump();
}

GradeRecord GradeRecord::from_jsonl(const std::string& line) {
  json doc = json::parse(line);
  GradeRecord record;
  record.answer_id = doc.at("answer_id").get<std::string>();
  record.grader_id = doc.at("grader_id").get<std::string>();
  record.exercise_id = doc.value("exercise_id", std::string());
  record.student_id = doc.value("student_id", std::string());
  record.status = status_from_name(doc.at("status").get<std::string>());
  if (doc.contains("grade") && !doc["grade"].is_null()) {
    const json& g = doc["grade"];
    ReconciledGrade grade;
    grade.response.score = Rational::from_double(g.at("reported_score").get<double>());
    grade.response.feedback = g.at("feedback").get<std::string>();
    grade.response.satisfied =
        criteria_from_json_array(g.at("satisfied").get<std::vector<std::string>>());
    grade.recomputed_score = Rational::from_double(g.at("recomputed_score").get<double>());
    grade.tally_mismatch = g.at("tally_mismatch").get<bool>();
    grade.final_score = Rational::from_double(g.at("final_score").get<double>());
    record.grade = std::move(grade);
  }
  record.variant = doc.value("variant", std::string());
  record.flags = doc.value("flags", std::vector<std::string>());
  record.ts = doc.value("ts", std::string());
  return record;
}

RecordStore::RecordStore(fs::path file) : file_(std::move(file)) {
  if (!file_.parent_path().empty()) {
    fs::create_directories(file_.parent_path());
  }
}

void RecordStore::append(const GradeRecord& record) {
  std::lock_guard lock(mutex_);
  std::ofstream out(file_, std::ios::app | std::ios::binary);
  if (!out) {
    throw OrchestratorError("cannot append to " + file_.string());
  }
  out << record.to_jsonl() << "\n";
}

std::vector<GradeRecord> RecordStore::read_all() const {
  std::lock_guard lock(mutex_);
  return read_file(file_);
}

std::vector<GradeRecord> RecordStore::read_file(const fs::path& file) {
  std::vector<GradeRecord> records;
  if (!fs::exists(file)) return records;
  std::string content = gradekit::read_file(file);
  std::vector<std::string> lines = split_lines(content);
  for (size_t i = 0; i < lines.size(); ++i) {
    std::string line = trim(lines[i]);
    if (line.empty()) continue;
    json probe = json::parse(line, nullptr, false);
    if (probe.is_object() && probe.contains("_meta")) continue;
    try {
      records.push_back(GradeRecord::from_jsonl(line));
    } catch (const std::exception& e) {
      throw OrchestratorError(file.string() + ":" + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return records;
}

std::map<std::string, GradeRecord> RecordStore::latest_by_answer(
    const std::vector<GradeRecord>& records) {
  std::map<std::string, GradeRecord> latest;
  for (const auto& record : records) {
    latest[record.answer_id] = record;  // later snapshots win
  }
  return latest;
}

// ---------------------------------------------------------------------------
// Grading
// ---------------------------------------------------------------------------

bool injection_suspect(std::string_view submission_text) {
  static const std::vector<std::string> patterns = {
      "ignore previous instructions", "ignore all previous instructions",
      "ignore the instructions",      "disregard the rubric",
      "disregard previous",           "system prompt",
      "assign the maximum",           "give me full points",
      "award full marks",             "you are now",
  };
  std::string lowered = to_lower(submission_text);
  for (const auto& p : patterns) {
    if (lowered.find(p) != std::string::npos) return true;
  }
  return false;
}

namespace {

std::vector<GradedExample> examples_for(const GradingContext& context,
                                        const std::string& exercise_id,
                                        const std::string& answer_id) {
  auto it = context.examples.find(exercise_id);
  if (it == context.examples.end()) return {};
  std::string tag = context.resample_per_submission ? exercise_id + "/" + answer_id : exercise_id;
  std::uint64_t seed = derive_seed(context.sampling_seed, tag);
  return sample_examples(it->second, std::min(context.examples_per_prompt, kMaxPromptExamples),
                         seed);
}

GradeRecord grade_one(const Submission& submission, const GraderSpec& grader,
                      const GradingContext& context, Gateway& gateway) {
  GradeRecord record;
  record.answer_id = submission.answer_id;
  record.grader_id = grader.grader_id;
  record.exercise_id = submission.exercise_id;
  record.student_id = submission.student_id;
  record.variant = variant_name(context.variant);
  record.ts = iso8601_now();

  const Exercise* exercise = context.course->find(submission.exercise_id);
  if (exercise == nullptr) {
    record.status = GradeStatus::PendingHuman;
    record.flags.push_back("unknown-exercise: " + submission.exercise_id);
    return record;
  }

  if (grader.kind != GraderKind::Llm) {
    record.status = GradeStatus::PendingHuman;
    return record;
  }

  if (injection_suspect(submission.text)) {
    record.status = GradeStatus::PendingHuman;
    record.flags.push_back("injection-heuristic");
    return record;
  }

  try {
    ExercisePacket packet;
    packet.question = exercise->question;
    packet.reference_answer = exercise->reference_answer;
    packet.rubric = exercise->rubric;
    packet.examples = examples_for(context, submission.exercise_id, submission.answer_id);
    packet.submission = submission.text;
    packet.submission_id = submission.answer_id;

    PromptBundle bundle = render(packet, context.variant, context.templates);
    std::string raw = gateway.complete(bundle, *grader.backend);
    GradeResponse response = parse_response(raw, exercise->rubric);
    record.grade = crosscheck_tally(response, exercise->rubric);
    record.status = GradeStatus::AutoGraded;
    if (record.grade->tally_mismatch) {
      record.flags.push_back("tally-mismatch");
    }
  } catch (const GatewayError& e) {
    record.status = GradeStatus::PendingHuman;
    record.flags.push_back(std::string("backend-error: ") + e.what());
  } catch (const ResponseParseError& e) {
    record.status = GradeStatus::PendingHuman;
    record.flags.push_back(std::string("parse-error: ") + e.what());
  } catch (const std::exception& e) {
    record.status = GradeStatus::PendingHuman;
    record.flags.push_back(std::string("error: ") + e.what());
  }
  return record;
}

}  // namespace

std::vector<GradeRecord> run_grading(const AssignmentPlan& plan,
                                     const std::vector<Submission>& submissions,
                                     const std::vector<GraderSpec>& graders,
                                     const GradingContext& context, Gateway& gateway) {
  if (context.course == nullptr) {
    throw OrchestratorError("grading context has no course data");
  }
  for (const auto& exercise : context.course->exercises) {
    std::vector<Diagnostic> diagnostics = validate(exercise.rubric);
    if (!diagnostics.empty()) {
      throw OrchestratorError("rubric for exercise '" + exercise.id +
                              "' fails validation: " + diagnostics.front().message);
    }
  }
  for (const auto& submission : submissions) {
    if (plan.assigned.find(submission.answer_id) == plan.assigned.end()) {
      throw OrchestratorError("no assignment for answer '" + submission.answer_id + "'");
    }
  }

  std::vector<GradeRecord> records(submissions.size());
  std::atomic<size_t> next{0};
  int thread_count = std::max(1, context.worker_threads);
  auto worker = [&] {
    while (true) {
      size_t index = next.fetch_add(1);
      if (index >= submissions.size()) break;
      const Submission& submission = submissions[index];
      const std::string& grader_id = plan.assigned.at(submission.answer_id);
      const GraderSpec* grader = find_grader(graders, grader_id);
      if (grader == nullptr) {
        GradeRecord record;
        record.answer_id = submission.answer_id;
        record.grader_id = grader_id;
        record.exercise_id = submission.exercise_id;
        record.student_id = submission.student_id;
        record.status = GradeStatus::PendingHuman;
        record.flags.push_back("unknown-grader: " + grader_id);
        record.ts = iso8601_now();
        records[index] = std::move(record);
        continue;
      }
      records[index] = grade_one(submission, *grader, context, gateway);
    }
  };
  std::vector<std::thread> threads;
  threads.reserve(static_cast<size_t>(thread_count));
  for (int i = 0; i < thread_count; ++i) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  return records;
}

std::vector<GradeRecord> apply_human_grades(const std::map<std::string, GradeRecord>& latest,
                                            const std::vector<TaGrade>& ta_grades,
                                            const std::vector<GraderSpec>& graders,
                                            const GradingContext& context, Gateway& gateway) {
  std::vector<GradeRecord> updates;
  for (const auto& ta : ta_grades) {
    auto it = latest.find(ta.answer_id);
    if (it == latest.end()) {
      throw OrchestratorError("TA grade for unknown answer '" + ta.answer_id + "'");
    }
    const GradeRecord& current = it->second;
    if (current.status != GradeStatus::PendingHuman &&
        current.status != GradeStatus::RegradeRequested) {
      continue;  // already settled
    }
    const Exercise* exercise = context.course->find(current.exercise_id);
    if (exercise == nullptr) {
      throw OrchestratorError("TA grade for answer '" + ta.answer_id +
                              "' with unknown exercise '" + current.exercise_id + "'");
    }
    GradeRecord update = current;
    update.flags.clear();
    update.ts = iso8601_now();

    ReconciledGrade grade;
    grade.response.satisfied = ta.satisfied;
    grade.response.feedback = ta.feedback;
    grade.response.score = evaluate(exercise->rubric, ta.satisfied);
    grade.recomputed_score = grade.response.score;
    grade.tally_mismatch = false;
    grade.final_score = grade.recomputed_score;

    const GraderSpec* grader = find_grader(graders, current.grader_id);
    if (grader != nullptr && grader->kind == GraderKind::Llm) {
      // an LLM answer that fell back to manual grading: the work is the
      // human grader's, so attribute it there and keep the audit trail
      for (const auto& candidate : graders) {
        if (candidate.kind == GraderKind::Human) {
          update.flags.push_back("fallback-from: " + current.grader_id);
          update.grader_id = candidate.grader_id;
          grader = &candidate;
          break;
        }
      }
    }
    if (grader != nullptr && grader->kind == GraderKind::HumanLlmRevised) {
      try {
        PromptBundle bundle = render_tone_revision(ta.feedback, context.templates);
        std::string revised = gateway.complete(bundle, *grader->backend);
        revised = trim(revised);
        if (!revised.empty()) {
          grade.response.feedback = revised;
          update.flags.push_back("tone-revised");  // audit marker for review
        }
      } catch (const std::exception& e) {
        // Revision is cosmetic; keep the TA wording rather than blocking.
        update.flags.push_back(std::string("revision-failed: ") + e.what());
      }
    }

    update.grade = std::move(grade);
    update.status = current.status == GradeStatus::RegradeRequested ? GradeStatus::Regraded
                                                                    : GradeStatus::HumanGraded;
    updates.push_back(std::move(update));
  }
  return updates;
}

GradeRecord request_regrade(RecordStore& store, const std::string& answer_id) {
  auto latest = RecordStore::latest_by_answer(store.read_all());
  auto it = latest.find(answer_id);
  if (it == latest.end()) {
    throw OrchestratorError("unknown answer '" + answer_id + "'");
  }
  const GradeRecord& current = it->second;
  switch (current.status) {
    case GradeStatus::RegradeRequested:
      return current;  // idempotent
    case GradeStatus::AutoGraded: {
      GradeRecord update = current;  // original auto grade rides along immutably
      update.status = GradeStatus::RegradeRequested;
      update.ts = iso8601_now();
      store.append(update);
      return update;
    }
    case GradeStatus::PendingHuman:
      throw OrchestratorError("answer '" + answer_id + "' is already awaiting human grading");
    case GradeStatus::HumanGraded:
    case GradeStatus::Regraded:
      throw OrchestratorError("answer '" + answer_id + "' was already graded by a human");
  }
  throw std::logic_error("unreachable status");
}

std::map<std::string, std::string> export_student_view(
    const std::map<std::string, GradeRecord>& latest, const Course& course) {
  std::vector<std::string> incomplete;
  for (const auto& [answer_id, record] : latest) {
    if (record.status == GradeStatus::PendingHuman ||
        record.status == GradeStatus::RegradeRequested || !record.grade) {
      incomplete.push_back(answer_id);
    }
  }
  if (!incomplete.empty()) {
    std::string listing;
    for (const auto& id : incomplete) {
      if (!listing.empty()) listing += ", ";
      listing += id;
    }
    throw OrchestratorError("cannot export: answers awaiting grading: " + listing);
  }

  std::map<std::string, std::vector<const GradeRecord*>> by_student;
  for (const auto& [answer_id, record] : latest) {
    (void)answer_id;
    by_student[record.student_id].push_back(&record);
  }

  std::map<std::string, std::string> documents;
  for (auto& [student_id, records] : by_student) {
    std::sort(records.begin(), records.end(), [](const GradeRecord* a, const GradeRecord* b) {
      return a->answer_id < b->answer_id;
    });
    std::ostringstream os;
    os << "# Feedback for " << student_id << "\n";
    for (const GradeRecord* record : records) {
      const Exercise* exercise = course.find(record->exercise_id);
      os << "\n## " << record->exercise_id;
      os << " (answer " << record->answer_id << ")\n";
      if (exercise != nullptr) {
        os << "Question: " << exercise->question << "\n";
      }
      os << "Score: " << record->grade->final_score.to_decimal(4) << " / 1\n";
      os << "Feedback: " << record->grade->response.feedback << "\n";
    }
    documents[student_id] = os.str();
  }
  return documents;
}

}  // namespace gradekit
