#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "cli.hpp"
#include "gradekit/gateway.hpp"

namespace cli = gradekit::cli;

namespace {

struct CommonArgs {
  std::string config_path;
  std::optional<std::string> variant;
  std::optional<std::uint64_t> seed_assignment, seed_sampling, seed_bootstrap, seed_mcmc;
  std::optional<std::string> output_dir;
  std::optional<std::string> endpoint;
  std::optional<std::string> grader;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "run configuration JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--variant", args.variant, "prompt variant: rubric|examples|both");
  cmd->add_option("--seed-assignment", args.seed_assignment, "override the assignment seed");
  cmd->add_option("--seed-sampling", args.seed_sampling, "override the example-sampling seed");
  cmd->add_option("--seed-bootstrap", args.seed_bootstrap, "override the bootstrap seed");
  cmd->add_option("--seed-mcmc", args.seed_mcmc, "override the MCMC seed");
  cmd->add_option("--output-dir", args.output_dir, "override the output directory");
  cmd->add_option("--endpoint", args.endpoint, "override every LLM backend endpoint URL");
  cmd->add_option("--grader", args.grader, "grader id for dry-run");
}

cli::RunConfig load_config(const CommonArgs& args) {
  cli::RunConfig config = cli::RunConfig::load(args.config_path);
  if (args.variant) config.variant = *args.variant;
  if (args.seed_assignment) config.seeds.assignment = *args.seed_assignment;
  if (args.seed_sampling) config.seeds.sampling = *args.seed_sampling;
  if (args.seed_bootstrap) config.seeds.bootstrap = *args.seed_bootstrap;
  if (args.seed_mcmc) config.seeds.mcmc = *args.seed_mcmc;
  if (args.output_dir) config.output_dir = *args.output_dir;
  if (args.endpoint) config.endpoint_override = *args.endpoint;
  if (args.grader) config.dry_run_grader = *args.grader;
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rubric-driven LLM grading pipeline"};
  app.require_subcommand(1);

  CommonArgs args;
  int (*handler)(const cli::RunConfig&) = nullptr;

  auto* validate = app.add_subcommand("validate", "check rubrics, templates and data files");
  add_common(validate, args);
  validate->callback([&] { handler = cli::cmd_validate; });

  auto* dry_run = app.add_subcommand(
      "dry-run", "grade the TA-labelled sample with one LLM and report criterion mismatches");
  add_common(dry_run, args);
  dry_run->callback([&] { handler = cli::cmd_dry_run; });

  auto* grade = app.add_subcommand("grade", "assign graders and run the grading batch");
  add_common(grade, args);
  grade->callback([&] { handler = cli::cmd_grade; });

  auto* eval = app.add_subcommand("eval", "compare grades against TA gold labels");
  add_common(eval, args);
  eval->callback([&] { handler = cli::cmd_eval; });

  auto* prefs = app.add_subcommand("prefs", "fit the satisfaction preference model");
  add_common(prefs, args);
  prefs->callback([&] { handler = cli::cmd_prefs; });

  auto* report = app.add_subcommand("report", "merge available outputs into summary.md");
  add_common(report, args);
  report->callback([&] { handler = cli::cmd_report; });

  CLI11_PARSE(app, argc, argv);

  try {
    cli::RunConfig config = load_config(args);
    return handler(config);
  } catch (const gradekit::GatewayError& e) {
    std::cerr << "backend error: " << e.what() << "\n";
    return cli::kBackendError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kDataError;
  }
}
