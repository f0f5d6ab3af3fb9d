#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "gradekit/mcmc.hpp"

namespace gradekit {

/// One student satisfaction rating of the feedback on one answer.
struct Rating {
  std::string answer_id;
  std::string student_id;
  std::string exercise_id;
  std::string grader_id;
  int y = 0;             // ordinal satisfaction, 1..K
  double score = 0.0;    // exercise score in [0, 1]
  double total = 0.0;    // assignment total in [0, 1]
  bool correct = false;  // gold score == 1
};

class PreferenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ratings.csv, header: answer_id,student_id,exercise_id,grader_id,y,score,total,correct
std::vector<Rating> load_ratings_csv(const std::filesystem::path& path);

// Ordered-probit primitives (standard normal link).
double norm_logpdf(double x);
double norm_logcdf(double x);
/// log(Phi(b) - Phi(a)) for a < b, stable in both tails.
double log_cell_prob(double a, double b);
/// P(y = k) for k = 1..K given latent mean mu and K-1 increasing cutpoints.
std::vector<double> ordered_probit_pmf(double mu, std::span<const double> cutpoints);

/// Latent-mean regression y_i ~ OrderedProbit(mu_i, cutpoints) with
/// mu_i = gamma[grader] + eta[exercise] + psi[student] + alpha*score + tau*total.
///
/// The unconstrained parameter vector is
///   [gamma...] [eta...] [psi...] alpha tau  c1 u2.. u_{K-1}
/// where cutpoints are c1 plus positive log-increments (c_k = c_{k-1} +
/// exp(u_k)), which keeps every draw ordered by construction. The prior is
/// independent Normal(0, sd 2) on each unconstrained coordinate. With
/// split-by-correctness enabled each grader carries separate correct/incorrect
/// factors tied by a Gaussian hyperprior: gamma_* ~ N(hypermean_g, 1),
/// hypermean_g ~ N(0, 2).
class PreferenceModel {
 public:
  PreferenceModel(std::vector<Rating> ratings, int rating_levels, bool split_by_correctness,
                  double likelihood_weight = 1.0);

  std::size_t dim() const { return names_.size(); }
  const std::vector<std::string>& param_names() const { return names_; }
  const std::vector<std::string>& graders() const { return graders_; }
  const std::vector<std::string>& exercises() const { return exercises_; }
  const std::vector<std::string>& students() const { return students_; }
  int rating_levels() const { return levels_; }
  bool split() const { return split_; }
  const std::vector<Rating>& ratings() const { return ratings_; }

  double log_likelihood(std::span<const double> theta) const;
  double log_prior(std::span<const double> theta) const;
  double log_posterior(std::span<const double> theta) const;
  void grad_log_posterior(std::span<const double> theta, std::span<double> grad) const;

  TargetDensity target() const;

  /// Constrained cutpoints recovered from the unconstrained vector.
  std::vector<double> cutpoints_from(std::span<const double> theta) const;
  /// Copy of theta with the cutpoint block replaced by constrained values
  /// (the layout stored in PosteriorDraws).
  std::vector<double> constrained(std::span<const double> theta) const;

  std::size_t gamma_index(const std::string& grader_id, bool correct = true) const;
  std::size_t eta_index(const std::string& exercise_id) const;
  std::size_t psi_index(const std::string& student_id) const;
  std::size_t alpha_index() const { return alpha_; }
  std::size_t tau_index() const { return tau_; }
  std::size_t cutpoint_index(int k) const;  // k in [0, K-2], constrained layout

  std::vector<double> initial_point(std::uint64_t seed) const;

 private:
  struct Indexed {
    std::size_t gamma;  // resolved grader factor index for this rating
    std::size_t eta;
    std::size_t psi;
  };

  std::vector<Rating> ratings_;
  std::vector<Indexed> index_;
  int levels_;
  bool split_;
  double likelihood_weight_;
  std::vector<std::string> graders_, exercises_, students_;
  std::map<std::string, std::size_t> grader_pos_, exercise_pos_, student_pos_;
  std::vector<std::string> names_;
  std::size_t gamma_base_ = 0, hyper_base_ = 0, eta_base_ = 0, psi_base_ = 0;
  std::size_t alpha_ = 0, tau_ = 0, cut_base_ = 0;
};

struct PreferenceConfig {
  int iterations = 1100;  // total transitions per chain, warmup included
  int warmup = 500;
  int chains = 4;
  int leapfrog_steps = 64;
  int rating_levels = 5;
  bool split_by_correctness = false;
  std::string sampler = "hmc";  // "hmc" | "rwm"
  std::uint64_t seed = 0;
  double likelihood_weight = 1.0;
  double target_accept = 0.8;
};

struct PosteriorDraws {
  std::vector<std::string> names;          // columns; cutpoints stored constrained as c[k]
  std::vector<std::vector<double>> draws;  // chains concatenated, chain-major
  int chains = 0;
  int draws_per_chain = 0;
  std::vector<double> rhat;    // split R-hat per column
  double accept_rate = 0.0;
  int divergences = 0;
  int post_warmup_transitions = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> warnings;  // e.g. high R-hat, divergence rate > 10%

  std::size_t column_index(const std::string& name) const;
  std::vector<double> column(const std::string& name) const;
};

PosteriorDraws sample_posterior(const std::vector<Rating>& ratings,
                                const PreferenceConfig& config);

/// Per-grader satisfaction contrast against the reference grader: posterior
/// of gamma_g - gamma_ref, plus the model-implied shifts in the probability of
/// a higher/lower rating, averaged over the observed covariate contexts.
struct ContrastRow {
  std::string grader;
  std::string panel = "all";  // "all" | "correct" | "incorrect"
  double mean = 0.0, lo = 0.0, hi = 0.0;
  double prob_higher = 0.0, prob_higher_lo = 0.0, prob_higher_hi = 0.0;
  double prob_lower = 0.0, prob_lower_lo = 0.0, prob_lower_hi = 0.0;
};

std::vector<ContrastRow> contrasts_vs_reference(const PosteriorDraws& draws,
                                                const std::vector<Rating>& ratings,
                                                const std::string& reference_grader);

std::string posterior_csv(const PosteriorDraws& draws);
std::string contrasts_csv(const std::vector<ContrastRow>& rows);
std::string diagnostics_text(const PosteriorDraws& draws);

}  // namespace gradekit
