#pragma once

// Shared fixtures for the test and acceptance suites: a small synthetic
// course, a deterministic scripted model backend, and an ordered-probit
// ratings generator.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "gradekit/course.hpp"
#include "gradekit/gateway.hpp"
#include "gradekit/preference.hpp"
#include "gradekit/prompt.hpp"

namespace gradekit::testsupport {

namespace fs = std::filesystem;

/// Fresh empty directory under the system temp dir; wiped if it already
/// exists so reruns start clean.
fs::path fresh_dir(const std::string& name);

/// Repo templates directory (compile-time constant from CMake).
fs::path templates_dir();

struct FixtureOptions {
  int students = 20;
  // Submissions listed here carry a marker that makes the scripted model
  // flip criterion B, so they disagree with gold.
  std::vector<std::string> misgrade_answers;
  // Submissions listed here make the scripted model report a wrong tally.
  std::vector<std::string> mistally_answers;
  // Submissions listed here produce non-JSON output from the scripted model.
  std::vector<std::string> gibberish_answers;
  // student ids refusing consent
  std::vector<std::string> non_consenting;
  int ratings_rows = 400;
  int mcmc_iterations = 300;
  int mcmc_warmup = 150;
  int mcmc_chains = 2;
  int mcmc_leapfrog = 16;
};

struct Fixture {
  fs::path root;
  fs::path course_file;
  fs::path submissions_file;
  fs::path examples_file;
  fs::path graders_file;
  fs::path gold_file;
  fs::path ta_grades_file;
  fs::path ratings_file;
  fs::path fixtures_dir;  // replay fixture / recording cache directory
  fs::path output_dir;
  fs::path config_file;
  std::vector<std::string> grader_ids;
  std::vector<std::string> model_names;
};

/// Writes the full fixture study (3 exercises x N students, 8 graders wired
/// to replay://fixtures) under root. Gold labels match the KEY: markers
/// embedded in each submission.
Fixture write_fixture(const fs::path& root, const FixtureOptions& options = {});

/// Deterministic stand-in for a chat model: reads the exercise and submission
/// out of the prompt, satisfies exactly the criteria named by KEY: markers,
/// and answers with a fenced JSON grade. Tone-revision prompts are answered
/// with "Revised: <original>". Honors the fixture's MISGRADE/MISTALLY/NOJSON
/// markers.
class ScriptedBackend : public Backend {
 public:
  explicit ScriptedBackend(Course course);
  BackendReply complete(const CompletionRequest& request) override;

 private:
  Course course_;
};

/// Renders and completes every (LLM grader x submission) prompt plus every
/// tone-revision prompt through a ScriptedBackend, persisting the records
/// into fixture.fixtures_dir so replay:// endpoints can serve them.
void record_fixtures(const Fixture& fixture, PromptVariant variant, std::uint64_t sampling_seed,
                     std::size_t examples_per_prompt);

struct RatingsSpec {
  std::vector<std::pair<std::string, double>> gamma;  // grader -> latent factor
  int exercises = 5;
  int students = 20;
  int count = 2000;
  double alpha = 0.5;
  double tau = 0.3;
  std::vector<double> cutpoints = {-1.5, -0.5, 0.5, 1.5};
  std::uint64_t seed = 99;
};

/// Forward-simulates ratings from the ordered-probit model with exercise and
/// student effects drawn from N(0, 0.5).
std::vector<Rating> synthesize_ratings(const RatingsSpec& spec);

std::string ratings_to_csv(const std::vector<Rating>& ratings);

/// Strips "ts":"..." fields so reruns can be compared byte-for-byte.
std::string strip_timestamps(const std::string& jsonl);

/// Whole-token occurrence check: an occurrence counts only when it is not
/// embedded in a longer alphanumeric run ("ta" in "statements" is no leak).
bool contains_token(const std::string& text, const std::string& token);

/// Runs a command, captures stdout+stderr, returns the exit code.
int run_command(const std::string& command, std::string* output = nullptr);

}  // namespace gradekit::testsupport
