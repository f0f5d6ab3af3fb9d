#include "gradekit/preference.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <thread>

#include "gradekit/rng.hpp"
#include "gradekit/util.hpp"

namespace gradekit {

namespace {

constexpr double kHalfLog2Pi = 0.9189385332046727;  // 0.5 * log(2*pi)

double normal_logpdf(double x, double mean, double sd) {
  double z = (x - mean) / sd;
  return -0.5 * z * z - std::log(sd) - kHalfLog2Pi;
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  double pos = q * static_cast<double>(sorted.size() - 1);
  size_t idx = static_cast<size_t>(std::llround(pos));
  return sorted[std::min(idx, sorted.size() - 1)];
}

std::string fmt6(double v) {
  std::ostringstream os;
  os.precision(6);
  os << std::fixed << v;
  return os.str();
}

}  // namespace

double norm_logpdf(double x) { return -0.5 * x * x - kHalfLog2Pi; }

double norm_logcdf(double x) {
  if (x > 8.0) {
    return std::log1p(-std::exp(norm_logcdf(-x)));
  }
  if (x > -36.0) {
    return std::log(0.5 * std::erfc(-x / std::numbers::sqrt2));
  }
  // asymptotic left tail: Phi(x) ~ phi(x)/(-x) * (1 - 1/x^2 + 3/x^4)
  double x2 = x * x;
  return -0.5 * x2 - std::log(-x) - kHalfLog2Pi + std::log1p(-1.0 / x2 + 3.0 / (x2 * x2));
}

double log_cell_prob(double a, double b) {
  if (std::isinf(a) && a < 0.0) {
    return std::isinf(b) ? 0.0 : norm_logcdf(b);
  }
  if (std::isinf(b)) {
    return norm_logcdf(-a);
  }
  if (a + b > 0.0) {
    // Phi(b) - Phi(a) == Phi(-a) - Phi(-b); evaluate in the left tail.
    return log_cell_prob(-b, -a);
  }
  double la = norm_logcdf(a);
  double lb = norm_logcdf(b);
  double d = la - lb;  // <= 0
  // log(1 - exp(d)) with the usual switchover for accuracy
  double log1m = d > -0.6931471805599453 ? std::log(-std::expm1(d)) : std::log1p(-std::exp(d));
  return lb + log1m;
}

std::vector<double> ordered_probit_pmf(double mu, std::span<const double> cutpoints) {
  const size_t K = cutpoints.size() + 1;
  std::vector<double> pmf(K);
  double prev_cdf = 0.0;
  for (size_t k = 0; k + 1 < K; ++k) {
    double cdf = 0.5 * std::erfc(-(cutpoints[k] - mu) / std::numbers::sqrt2);
    pmf[k] = cdf - prev_cdf;
    prev_cdf = cdf;
  }
  pmf[K - 1] = 1.0 - prev_cdf;
  return pmf;
}

// ---------------------------------------------------------------------------
// Ratings file
// ---------------------------------------------------------------------------

std::vector<Rating> load_ratings_csv(const std::filesystem::path& path) {
  static const std::string kHeader =
      "answer_id,student_id,exercise_id,grader_id,y,score,total,correct";
  std::string content = read_file(path);
  std::vector<std::string> lines = split_lines(content);
  if (lines.empty() || trim(lines.front()) != kHeader) {
    throw PreferenceError(path.string() + ": expected header '" + kHeader + "'");
  }
  std::vector<Rating> ratings;
  for (size_t i = 1; i < lines.size(); ++i) {
    std::string line = trim(lines[i]);
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 8) {
      throw PreferenceError(path.string() + ":" + std::to_string(i + 1) +
                            ": expected 8 comma-separated fields");
    }
    Rating r;
    r.answer_id = fields[0];
    r.student_id = fields[1];
    r.exercise_id = fields[2];
    r.grader_id = fields[3];
    try {
      r.y = std::stoi(fields[4]);
      r.score = std::stod(fields[5]);
      r.total = std::stod(fields[6]);
    } catch (const std::exception&) {
      throw PreferenceError(path.string() + ":" + std::to_string(i + 1) + ": malformed number");
    }
    std::string correct = to_lower(trim(fields[7]));
    if (correct == "1" || correct == "true") {
      r.correct = true;
    } else if (correct == "0" || correct == "false") {
      r.correct = false;
    } else {
      throw PreferenceError(path.string() + ":" + std::to_string(i + 1) +
                            ": 'correct' must be 0/1/true/false");
    }
    if (r.y < 1) {
      throw PreferenceError(path.string() + ":" + std::to_string(i + 1) + ": rating y below 1");
    }
    ratings.push_back(std::move(r));
  }
  return ratings;
}

// ---------------------------------------------------------------------------
// Model
// ---------------------------------------------------------------------------

PreferenceModel::PreferenceModel(std::vector<Rating> ratings, int rating_levels,
                                 bool split_by_correctness, double likelihood_weight)
    : ratings_(std::move(ratings)),
      levels_(rating_levels),
      split_(split_by_correctness),
      likelihood_weight_(likelihood_weight) {
  if (levels_ < 2) {
    throw PreferenceError("rating scale needs at least 2 levels");
  }
  if (ratings_.empty()) {
    throw PreferenceError("no ratings");
  }
  auto intern = [](const std::string& id, std::vector<std::string>& order,
                   std::map<std::string, std::size_t>& pos) {
    auto it = pos.find(id);
    if (it != pos.end()) return it->second;
    std::size_t index = order.size();
    order.push_back(id);
    pos.emplace(id, index);
    return index;
  };
  for (const auto& r : ratings_) {
    if (r.y < 1 || r.y > levels_) {
      throw PreferenceError("rating y=" + std::to_string(r.y) + " outside 1.." +
                            std::to_string(levels_));
    }
    intern(r.grader_id, graders_, grader_pos_);
    intern(r.exercise_id, exercises_, exercise_pos_);
    intern(r.student_id, students_, student_pos_);
  }

  const std::size_t M = graders_.size();
  gamma_base_ = 0;
  std::size_t cursor;
  if (split_) {
    hyper_base_ = 2 * M;
    cursor = 3 * M;
    for (const auto& g : graders_) names_.push_back("gamma_correct[" + g + "]");
    for (const auto& g : graders_) names_.push_back("gamma_incorrect[" + g + "]");
    for (const auto& g : graders_) names_.push_back("gamma_mean[" + g + "]");
  } else {
    cursor = M;
    for (const auto& g : graders_) names_.push_back("gamma[" + g + "]");
  }
  eta_base_ = cursor;
  for (const auto& e : exercises_) names_.push_back("eta[" + e + "]");
  cursor += exercises_.size();
  psi_base_ = cursor;
  for (const auto& s : students_) names_.push_back("psi[" + s + "]");
  cursor += students_.size();
  alpha_ = cursor++;
  names_.push_back("alpha");
  tau_ = cursor++;
  names_.push_back("tau");
  cut_base_ = cursor;
  for (int k = 1; k < levels_; ++k) names_.push_back("c[" + std::to_string(k) + "]");

  index_.reserve(ratings_.size());
  for (const auto& r : ratings_) {
    Indexed idx;
    std::size_t g = grader_pos_.at(r.grader_id);
    if (split_) {
      idx.gamma = (r.correct ? gamma_base_ : gamma_base_ + M) + g;
    } else {
      idx.gamma = gamma_base_ + g;
    }
    idx.eta = eta_base_ + exercise_pos_.at(r.exercise_id);
    idx.psi = psi_base_ + student_pos_.at(r.student_id);
    index_.push_back(idx);
  }
}

std::size_t PreferenceModel::gamma_index(const std::string& grader_id, bool correct) const {
  auto it = grader_pos_.find(grader_id);
  if (it == grader_pos_.end()) {
    throw PreferenceError("unknown grader '" + grader_id + "'");
  }
  if (!split_) return gamma_base_ + it->second;
  return (correct ? gamma_base_ : gamma_base_ + graders_.size()) + it->second;
}

std::size_t PreferenceModel::eta_index(const std::string& exercise_id) const {
  auto it = exercise_pos_.find(exercise_id);
  if (it == exercise_pos_.end()) {
    throw PreferenceError("unknown exercise '" + exercise_id + "'");
  }
  return eta_base_ + it->second;
}

std::size_t PreferenceModel::psi_index(const std::string& student_id) const {
  auto it = student_pos_.find(student_id);
  if (it == student_pos_.end()) {
    throw PreferenceError("unknown student '" + student_id + "'");
  }
  return psi_base_ + it->second;
}

std::size_t PreferenceModel::cutpoint_index(int k) const {
  if (k < 0 || k >= levels_ - 1) {
    throw PreferenceError("cutpoint index out of range");
  }
  return cut_base_ + static_cast<std::size_t>(k);
}

std::vector<double> PreferenceModel::cutpoints_from(std::span<const double> theta) const {
  std::vector<double> cut(static_cast<size_t>(levels_ - 1));
  cut[0] = theta[cut_base_];
  for (size_t k = 1; k < cut.size(); ++k) {
    cut[k] = cut[k - 1] + std::exp(theta[cut_base_ + k]);
  }
  return cut;
}

std::vector<double> PreferenceModel::constrained(std::span<const double> theta) const {
  std::vector<double> out(theta.begin(), theta.end());
  std::vector<double> cut = cutpoints_from(theta);
  for (size_t k = 0; k < cut.size(); ++k) out[cut_base_ + k] = cut[k];
  return out;
}

double PreferenceModel::log_likelihood(std::span<const double> theta) const {
  const std::vector<double> cut = cutpoints_from(theta);
  const double alpha = theta[alpha_];
  const double tau = theta[tau_];
  double total = 0.0;
  for (size_t i = 0; i < ratings_.size(); ++i) {
    const Rating& r = ratings_[i];
    const Indexed& idx = index_[i];
    double mu = theta[idx.gamma] + theta[idx.eta] + theta[idx.psi] + alpha * r.score +
                tau * r.total;
    double lower = r.y >= 2 ? cut[static_cast<size_t>(r.y - 2)] - mu
                            : -std::numeric_limits<double>::infinity();
    double upper = r.y <= levels_ - 1 ? cut[static_cast<size_t>(r.y - 1)] - mu
                                      : std::numeric_limits<double>::infinity();
    total += log_cell_prob(lower, upper);
  }
  return total;
}

double PreferenceModel::log_prior(std::span<const double> theta) const {
  double total = 0.0;
  if (split_) {
    const std::size_t M = graders_.size();
    for (std::size_t g = 0; g < M; ++g) {
      double hyper = theta[hyper_base_ + g];
      total += normal_logpdf(theta[gamma_base_ + g], hyper, 1.0);
      total += normal_logpdf(theta[gamma_base_ + M + g], hyper, 1.0);
      total += normal_logpdf(hyper, 0.0, 2.0);
    }
    for (std::size_t j = eta_base_; j < dim(); ++j) {
      total += normal_logpdf(theta[j], 0.0, 2.0);
    }
  } else {
    for (std::size_t j = 0; j < dim(); ++j) {
      total += normal_logpdf(theta[j], 0.0, 2.0);
    }
  }
  return total;
}

double PreferenceModel::log_posterior(std::span<const double> theta) const {
  double lp = log_prior(theta);
  if (likelihood_weight_ != 0.0) {
    lp += likelihood_weight_ * log_likelihood(theta);
  }
  return lp;
}

void PreferenceModel::grad_log_posterior(std::span<const double> theta,
                                         std::span<double> grad) const {
  std::fill(grad.begin(), grad.end(), 0.0);

  // prior
  if (split_) {
    const std::size_t M = graders_.size();
    for (std::size_t g = 0; g < M; ++g) {
      double hyper = theta[hyper_base_ + g];
      double dc = theta[gamma_base_ + g] - hyper;
      double di = theta[gamma_base_ + M + g] - hyper;
      grad[gamma_base_ + g] += -dc;           // sd 1
      grad[gamma_base_ + M + g] += -di;       // sd 1
      grad[hyper_base_ + g] += dc + di - hyper / 4.0;
    }
    for (std::size_t j = eta_base_; j < dim(); ++j) grad[j] += -theta[j] / 4.0;
  } else {
    for (std::size_t j = 0; j < dim(); ++j) grad[j] += -theta[j] / 4.0;
  }

  if (likelihood_weight_ == 0.0) return;

  const std::vector<double> cut = cutpoints_from(theta);
  const double alpha = theta[alpha_];
  const double tau = theta[tau_];
  const double w = likelihood_weight_;
  std::vector<double> dcut(cut.size(), 0.0);

  for (size_t i = 0; i < ratings_.size(); ++i) {
    const Rating& r = ratings_[i];
    const Indexed& idx = index_[i];
    double mu = theta[idx.gamma] + theta[idx.eta] + theta[idx.psi] + alpha * r.score +
                tau * r.total;
    bool has_lower = r.y >= 2;
    bool has_upper = r.y <= levels_ - 1;
    double lower = has_lower ? cut[static_cast<size_t>(r.y - 2)] - mu
                             : -std::numeric_limits<double>::infinity();
    double upper = has_upper ? cut[static_cast<size_t>(r.y - 1)] - mu
                             : std::numeric_limits<double>::infinity();
    double logp = log_cell_prob(lower, upper);
    double ra = has_lower ? std::exp(norm_logpdf(lower) - logp) : 0.0;
    double rb = has_upper ? std::exp(norm_logpdf(upper) - logp) : 0.0;
    double dmu = w * (ra - rb);
    grad[idx.gamma] += dmu;
    grad[idx.eta] += dmu;
    grad[idx.psi] += dmu;
    grad[alpha_] += dmu * r.score;
    grad[tau_] += dmu * r.total;
    if (has_lower) dcut[static_cast<size_t>(r.y - 2)] -= w * ra;
    if (has_upper) dcut[static_cast<size_t>(r.y - 1)] += w * rb;
  }

  // chain rule through c_k = c1 + sum_{j<=k} exp(u_j): suffix sums
  double suffix = 0.0;
  for (size_t k = dcut.size(); k-- > 0;) {
    suffix += dcut[k];
    if (k == 0) {
      grad[cut_base_] += suffix;
    } else {
      grad[cut_base_ + k] += std::exp(theta[cut_base_ + k]) * suffix;
    }
  }
}

TargetDensity PreferenceModel::target() const {
  TargetDensity density;
  density.dim = dim();
  density.log_prob = [this](std::span<const double> theta) { return log_posterior(theta); };
  density.gradient = [this](std::span<const double> theta, std::span<double> grad) {
    grad_log_posterior(theta, grad);
  };
  return density;
}

std::vector<double> PreferenceModel::initial_point(std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  std::vector<double> theta(dim());
  for (auto& v : theta) v = 0.4 * unit_double(rng) - 0.2;
  // start cutpoints spread around zero: c1 near -(K-2)/2, unit increments
  theta[cut_base_] = -0.5 * static_cast<double>(levels_ - 2) + 0.2 * unit_double(rng);
  for (std::size_t k = 1; k + 1 < static_cast<std::size_t>(levels_); ++k) {
    theta[cut_base_ + k] = 0.1 * unit_double(rng) - 0.05;  // increment ~ exp(0) = 1
  }
  return theta;
}

// ---------------------------------------------------------------------------
// Posterior sampling
// ---------------------------------------------------------------------------

std::size_t PosteriorDraws::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return i;
  }
  throw PreferenceError("no posterior column named '" + name + "'");
}

std::vector<double> PosteriorDraws::column(const std::string& name) const {
  std::size_t idx = column_index(name);
  std::vector<double> out;
  out.reserve(draws.size());
  for (const auto& row : draws) out.push_back(row[idx]);
  return out;
}

PosteriorDraws sample_posterior(const std::vector<Rating>& ratings,
                                const PreferenceConfig& config) {
  if (config.iterations <= config.warmup) {
    throw PreferenceError("iterations must exceed warmup");
  }
  if (config.chains < 1) {
    throw PreferenceError("need at least one chain");
  }
  if (config.sampler != "hmc" && config.sampler != "rwm") {
    throw PreferenceError("unknown sampler '" + config.sampler + "'");
  }
  PreferenceModel model(ratings, config.rating_levels, config.split_by_correctness,
                        config.likelihood_weight);
  TargetDensity target = model.target();

  SamplerConfig chain_config;
  chain_config.iterations = config.iterations;
  chain_config.warmup = config.warmup;
  chain_config.leapfrog_steps = config.leapfrog_steps;
  chain_config.target_accept = config.target_accept;
  chain_config.algorithm = config.sampler;

  std::vector<ChainResult> chains(static_cast<size_t>(config.chains));
  std::vector<std::exception_ptr> chain_errors(static_cast<size_t>(config.chains));
  std::vector<std::thread> threads;
  threads.reserve(chains.size());
  for (int c = 0; c < config.chains; ++c) {
    threads.emplace_back([&, c] {
      try {
        SamplerConfig cfg = chain_config;
        cfg.seed = derive_seed(config.seed, "chain-" + std::to_string(c));
        std::vector<double> init =
            model.initial_point(derive_seed(config.seed, "init-" + std::to_string(c)));
        if (config.sampler == "rwm") {
          chains[static_cast<size_t>(c)] = run_rwm_chain(target, cfg, init);
        } else {
          chains[static_cast<size_t>(c)] = run_hmc_chain(target, cfg, init);
        }
      } catch (...) {
        chain_errors[static_cast<size_t>(c)] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (const auto& error : chain_errors) {
    if (error) std::rethrow_exception(error);
  }

  // store constrained cutpoints
  for (auto& chain : chains) {
    for (auto& draw : chain.draws) {
      draw = model.constrained(draw);
    }
  }

  PosteriorDraws out;
  out.names = model.param_names();
  out.chains = config.chains;
  out.draws_per_chain = config.iterations - config.warmup;
  out.seed = config.seed;
  double accept_sum = 0.0;
  for (const auto& chain : chains) {
    accept_sum += chain.accept_rate;
    out.divergences += chain.divergences;
    for (const auto& draw : chain.draws) out.draws.push_back(draw);
  }
  out.accept_rate = accept_sum / static_cast<double>(chains.size());
  out.post_warmup_transitions = out.draws_per_chain * out.chains;
  out.rhat = split_rhat(chains);

  double max_rhat = 0.0;
  std::size_t worst = 0;
  for (std::size_t i = 0; i < out.rhat.size(); ++i) {
    if (out.rhat[i] > max_rhat) {
      max_rhat = out.rhat[i];
      worst = i;
    }
  }
  if (max_rhat > 1.05) {
    out.warnings.push_back("R-hat " + fmt6(max_rhat) + " for " + out.names[worst] +
                           " exceeds 1.05; chains may not have mixed");
  }
  double divergence_rate =
      static_cast<double>(out.divergences) / std::max(1, out.post_warmup_transitions);
  if (divergence_rate > 0.10) {
    out.warnings.push_back("divergence rate " + fmt6(divergence_rate) +
                           " exceeds 0.10; results unreliable");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Contrasts
// ---------------------------------------------------------------------------

namespace {

// P(level(mu_hi + eps) > level(mu_lo + eps)) for shared standard normal eps:
// the mass of eps inside the union of intervals (c_k - mu_hi, c_k - mu_lo].
double crossing_probability(std::span<const double> cutpoints, double mu_hi, double mu_lo) {
  if (mu_hi <= mu_lo) return 0.0;
  double total = 0.0;
  double open_lo = 0.0, open_hi = 0.0;
  bool open = false;
  auto phi = [](double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); };
  for (double c : cutpoints) {
    double lo = c - mu_hi;
    double hi = c - mu_lo;
    if (open && lo <= open_hi) {
      open_hi = hi;  // merge
    } else {
      if (open) total += phi(open_hi) - phi(open_lo);
      open_lo = lo;
      open_hi = hi;
      open = true;
    }
  }
  if (open) total += phi(open_hi) - phi(open_lo);
  return total;
}

std::vector<size_t> thin_indices(size_t n, size_t cap) {
  std::vector<size_t> out;
  if (n == 0) return out;
  size_t take = std::min(n, cap);
  out.reserve(take);
  for (size_t i = 0; i < take; ++i) {
    out.push_back(i * n / take);
  }
  return out;
}

struct Summary {
  double mean = 0.0, lo = 0.0, hi = 0.0;
};

Summary summarize(std::vector<double> values) {
  Summary s;
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  std::sort(values.begin(), values.end());
  s.lo = quantile_sorted(values, 0.025);
  s.hi = quantile_sorted(values, 0.975);
  return s;
}

}  // namespace

std::vector<ContrastRow> contrasts_vs_reference(const PosteriorDraws& draws,
                                                const std::vector<Rating>& ratings,
                                                const std::string& reference_grader) {
  // recover the model shape from the column names
  bool split = false;
  std::vector<std::string> graders;
  int levels = 1;
  for (const auto& name : draws.names) {
    if (name.rfind("gamma_correct[", 0) == 0) {
      split = true;
      graders.push_back(name.substr(14, name.size() - 15));
    } else if (name.rfind("gamma[", 0) == 0) {
      graders.push_back(name.substr(6, name.size() - 7));
    } else if (name.rfind("c[", 0) == 0) {
      ++levels;
    }
  }
  if (std::find(graders.begin(), graders.end(), reference_grader) == graders.end()) {
    throw PreferenceError("reference grader '" + reference_grader + "' not in the model");
  }

  std::vector<size_t> cut_cols;
  for (int k = 1; k < levels; ++k) cut_cols.push_back(draws.column_index("c[" + std::to_string(k) + "]"));
  size_t alpha_col = draws.column_index("alpha");
  size_t tau_col = draws.column_index("tau");

  struct Panel {
    std::string name;                 // "all" | "correct" | "incorrect"
    std::string column_prefix;       // "gamma" | "gamma_correct" | "gamma_incorrect"
    bool filter_correct = false;     // only meaningful when filtering
    bool filtered = false;
  };
  std::vector<Panel> panels;
  if (split) {
    panels.push_back({"correct", "gamma_correct", true, true});
    panels.push_back({"incorrect", "gamma_incorrect", false, true});
  } else {
    panels.push_back({"all", "gamma", false, false});
  }

  const std::vector<size_t> draw_rows = thin_indices(draws.draws.size(), 200);

  std::vector<ContrastRow> rows;
  for (const auto& panel : panels) {
    size_t ref_col = draws.column_index(panel.column_prefix + "[" + reference_grader + "]");

    // observed covariate contexts for this panel
    struct Context {
      size_t eta_col;
      size_t psi_col;
      double score;
      double total;
    };
    std::vector<Context> contexts;
    for (const auto& r : ratings) {
      if (panel.filtered && r.correct != panel.filter_correct) continue;
      contexts.push_back({draws.column_index("eta[" + r.exercise_id + "]"),
                          draws.column_index("psi[" + r.student_id + "]"), r.score, r.total});
    }
    std::vector<size_t> context_rows = thin_indices(contexts.size(), 400);

    for (const auto& grader : graders) {
      size_t g_col = draws.column_index(panel.column_prefix + "[" + grader + "]");

      std::vector<double> deltas;
      deltas.reserve(draws.draws.size());
      for (const auto& row : draws.draws) {
        deltas.push_back(row[g_col] - row[ref_col]);
      }
      Summary contrast = summarize(deltas);

      std::vector<double> higher_per_draw, lower_per_draw;
      higher_per_draw.reserve(draw_rows.size());
      lower_per_draw.reserve(draw_rows.size());
      for (size_t t : draw_rows) {
        const auto& row = draws.draws[t];
        std::vector<double> cut;
        cut.reserve(cut_cols.size());
        for (size_t col : cut_cols) cut.push_back(row[col]);
        double gamma_g = row[g_col];
        double gamma_ref = row[ref_col];
        double sum_higher = 0.0, sum_lower = 0.0;
        for (size_t ci : context_rows) {
          const Context& c = contexts[ci];
          double context = row[c.eta_col] + row[c.psi_col] + row[alpha_col] * c.score +
                           row[tau_col] * c.total;
          double mu_g = gamma_g + context;
          double mu_ref = gamma_ref + context;
          sum_higher += crossing_probability(cut, mu_g, mu_ref);
          sum_lower += crossing_probability(cut, mu_ref, mu_g);
        }
        double n = std::max<size_t>(1, context_rows.size());
        higher_per_draw.push_back(sum_higher / n);
        lower_per_draw.push_back(sum_lower / n);
      }
      Summary higher = summarize(higher_per_draw);
      Summary lower = summarize(lower_per_draw);

      ContrastRow out_row;
      out_row.grader = grader;
      out_row.panel = panel.name;
      out_row.mean = contrast.mean;
      out_row.lo = contrast.lo;
      out_row.hi = contrast.hi;
      out_row.prob_higher = higher.mean;
      out_row.prob_higher_lo = higher.lo;
      out_row.prob_higher_hi = higher.hi;
      out_row.prob_lower = lower.mean;
      out_row.prob_lower_lo = lower.lo;
      out_row.prob_lower_hi = lower.hi;
      rows.push_back(std::move(out_row));
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Artifacts
// ---------------------------------------------------------------------------

std::string posterior_csv(const PosteriorDraws& draws) {
  std::ostringstream os;
  os << "chain,draw";
  for (const auto& name : draws.names) os << ',' << name;
  os << '\n';
  for (size_t i = 0; i < draws.draws.size(); ++i) {
    int chain = draws.draws_per_chain > 0 ? static_cast<int>(i) / draws.draws_per_chain : 0;
    int index = draws.draws_per_chain > 0 ? static_cast<int>(i) % draws.draws_per_chain : 0;
    os << chain << ',' << index;
    for (double v : draws.draws[i]) os << ',' << shortest_double(v);
    os << '\n';
  }
  return os.str();
}

std::string contrasts_csv(const std::vector<ContrastRow>& rows) {
  std::ostringstream os;
  os << "grader,panel,mean,lo,hi,prob_higher,prob_higher_lo,prob_higher_hi,"
        "prob_lower,prob_lower_lo,prob_lower_hi\n";
  for (const auto& r : rows) {
    os << r.grader << ',' << r.panel << ',' << fmt6(r.mean) << ',' << fmt6(r.lo) << ','
       << fmt6(r.hi) << ',' << fmt6(r.prob_higher) << ',' << fmt6(r.prob_higher_lo) << ','
       << fmt6(r.prob_higher_hi) << ',' << fmt6(r.prob_lower) << ',' << fmt6(r.prob_lower_lo)
       << ',' << fmt6(r.prob_lower_hi) << '\n';
  }
  return os.str();
}

std::string diagnostics_text(const PosteriorDraws& draws) {
  std::ostringstream os;
  os << "chains: " << draws.chains << "\n";
  os << "draws per chain: " << draws.draws_per_chain << "\n";
  os << "seed: " << draws.seed << "\n";
  os << "acceptance rate: " << fmt6(draws.accept_rate) << "\n";
  os << "divergences: " << draws.divergences << " / " << draws.post_warmup_transitions << "\n";
  double max_rhat = 0.0;
  for (double r : draws.rhat) max_rhat = std::max(max_rhat, r);
  os << "max split R-hat: " << fmt6(max_rhat) << "\n";
  for (const auto& warning : draws.warnings) {
    os << "WARNING: " << warning << "\n";
  }
  os << "\nper-parameter split R-hat:\n";
  for (size_t i = 0; i < draws.names.size(); ++i) {
    os << "  " << draws.names[i] << ": " << fmt6(draws.rhat[i]) << "\n";
  }
  return os.str();
}

}  // namespace gradekit
