#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace gradekit::cli {

inline constexpr const char* kToolVersion = "gradekit 0.1.0";

// exit codes
inline constexpr int kOk = 0;
inline constexpr int kDataError = 1;       // validation / data problems
inline constexpr int kBackendError = 2;    // backend / infrastructure problems

struct Seeds {
  std::uint64_t assignment = 1;
  std::uint64_t sampling = 2;
  std::uint64_t bootstrap = 3;
  std::uint64_t mcmc = 4;
};

struct McmcSettings {
  int iterations = 1100;  // total per chain, warmup included
  int warmup = 500;
  int chains = 4;
  int leapfrog_steps = 64;
  int rating_levels = 5;
  bool split_by_correctness = false;
  std::string sampler = "hmc";
  std::string reference_grader = "ta";
};

/// Everything a subcommand needs, loaded from one JSON config file. Relative
/// paths resolve against the config file's directory; every referenced input
/// must exist at load time.
struct RunConfig {
  std::filesystem::path config_path;
  std::string config_hash;  // sha256 of the config file bytes

  std::filesystem::path course;
  std::filesystem::path submissions;
  std::filesystem::path examples;
  std::filesystem::path graders;
  std::filesystem::path templates_dir;
  std::filesystem::path output_dir;
  std::optional<std::filesystem::path> gold;
  std::optional<std::filesystem::path> ta_grades;
  std::optional<std::filesystem::path> ratings;
  std::filesystem::path cache_dir;  // defaults to output_dir/cache

  std::string variant = "both";
  Seeds seeds;
  std::size_t examples_per_prompt = 10;
  bool resample_per_submission = false;
  int bootstrap_resamples = 2000;
  int max_in_flight = 4;
  int worker_threads = 4;
  McmcSettings mcmc;
  std::string endpoint_override;  // replaces every LLM backend endpoint when set
  std::string dry_run_grader;     // grader_id; defaults to the first llm grader

  static RunConfig load(const std::filesystem::path& path);

  /// Provenance line embedded in every artifact (after the format-specific
  /// comment marker).
  std::string provenance() const;
};

int cmd_validate(const RunConfig& config);
int cmd_dry_run(const RunConfig& config);
int cmd_grade(const RunConfig& config);
int cmd_eval(const RunConfig& config);
int cmd_prefs(const RunConfig& config);
int cmd_report(const RunConfig& config);

}  // namespace gradekit::cli
