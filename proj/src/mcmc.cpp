#include "gradekit/mcmc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gradekit/rng.hpp"

namespace gradekit {

namespace {

constexpr double kDivergenceThreshold = 1000.0;  // energy error treated as divergent

struct DualAveraging {
  double mu = 0.0;
  double log_eps = 0.0;
  double log_eps_bar = 0.0;
  double h_bar = 0.0;
  int m = 0;
  double target = 0.8;

  static constexpr double kGamma = 0.05;
  static constexpr double kT0 = 10.0;
  static constexpr double kKappa = 0.75;

  void reset(double eps0, double target_accept) {
    mu = std::log(10.0 * eps0);
    log_eps = std::log(eps0);
    log_eps_bar = 0.0;
    h_bar = 0.0;
    m = 0;
    target = target_accept;
  }

  void update(double accept_prob) {
    ++m;
    double eta = 1.0 / (m + kT0);
    h_bar = (1.0 - eta) * h_bar + eta * (target - accept_prob);
    log_eps = mu - std::sqrt(static_cast<double>(m)) / kGamma * h_bar;
    double w = std::pow(static_cast<double>(m), -kKappa);
    log_eps_bar = w * log_eps + (1.0 - w) * log_eps_bar;
  }

  double current() const { return std::exp(log_eps); }
  double adapted() const { return std::exp(log_eps_bar); }
};

struct Hamiltonian {
  const TargetDensity* target;
  const std::vector<double>* inv_mass;

  double potential(std::span<const double> theta) const { return -target->log_prob(theta); }

  double kinetic(std::span<const double> momentum) const {
    double k = 0.0;
    for (size_t i = 0; i < momentum.size(); ++i) {
      k += 0.5 * (*inv_mass)[i] * momentum[i] * momentum[i];
    }
    return k;
  }

  // Returns the potential at the endpoint; theta/momentum updated in place.
  double leapfrog(std::vector<double>& theta, std::vector<double>& momentum, double eps,
                  int steps, std::vector<double>& grad) const {
    target->gradient(theta, grad);
    for (size_t i = 0; i < theta.size(); ++i) momentum[i] += 0.5 * eps * grad[i];
    for (int s = 0; s < steps; ++s) {
      for (size_t i = 0; i < theta.size(); ++i) {
        theta[i] += eps * (*inv_mass)[i] * momentum[i];
      }
      target->gradient(theta, grad);
      double scale = (s + 1 < steps) ? eps : 0.5 * eps;
      for (size_t i = 0; i < theta.size(); ++i) momentum[i] += scale * grad[i];
    }
    return potential(theta);
  }
};

void sample_momentum(std::mt19937_64& rng, const std::vector<double>& inv_mass,
                     std::vector<double>& momentum) {
  for (size_t i = 0; i < momentum.size(); ++i) {
    momentum[i] = standard_normal(rng) / std::sqrt(inv_mass[i]);
  }
}

// One HMC transition; returns the Metropolis acceptance probability.
double hmc_transition(const Hamiltonian& ham, std::vector<double>& theta, double& u_current,
                      double eps, int steps, std::mt19937_64& rng, bool& diverged,
                      bool& accepted) {
  std::vector<double> momentum(theta.size());
  sample_momentum(rng, *ham.inv_mass, momentum);
  double h0 = u_current + ham.kinetic(momentum);

  std::vector<double> proposal = theta;
  std::vector<double> grad(theta.size());
  double u_new = ham.leapfrog(proposal, momentum, eps, steps, grad);
  double h1 = u_new + ham.kinetic(momentum);

  diverged = false;
  accepted = false;
  if (!std::isfinite(h1) || (h1 - h0) > kDivergenceThreshold) {
    diverged = true;
    return 0.0;
  }
  double accept_prob = std::min(1.0, std::exp(h0 - h1));
  if (unit_double(rng) < accept_prob) {
    theta = std::move(proposal);
    u_current = u_new;
    accepted = true;
  }
  return accept_prob;
}

double find_reasonable_epsilon(const Hamiltonian& ham, const std::vector<double>& theta0,
                               double u0, int steps, std::mt19937_64& rng) {
  double eps = 0.1;
  std::vector<double> momentum(theta0.size());
  std::vector<double> grad(theta0.size());
  sample_momentum(rng, *ham.inv_mass, momentum);
  auto accept_of = [&](double candidate) {
    std::vector<double> theta = theta0;
    std::vector<double> p = momentum;
    double u_new = ham.leapfrog(theta, p, candidate, std::min(steps, 4), grad);
    double delta = (u0 + ham.kinetic(momentum)) - (u_new + ham.kinetic(p));
    return std::isfinite(delta) ? std::exp(std::min(0.0, delta)) : 0.0;
  };
  double a = accept_of(eps) > 0.5 ? 1.0 : -1.0;
  for (int i = 0; i < 40; ++i) {
    eps *= std::pow(2.0, a);
    double prob = accept_of(eps);
    if ((a > 0 && prob <= 0.5) || (a < 0 && prob >= 0.5)) break;
    if (eps > 1e3 || eps < 1e-8) break;
  }
  return std::clamp(eps, 1e-8, 1e3);
}

}  // namespace

ChainResult run_hmc_chain(const TargetDensity& target, const SamplerConfig& config,
                          std::span<const double> init) {
  if (config.iterations <= config.warmup) {
    throw std::invalid_argument("iterations must exceed warmup");
  }
  if (init.size() != target.dim) {
    throw std::invalid_argument("initial point has wrong dimension");
  }
  std::mt19937_64 rng(config.seed);
  std::vector<double> theta(init.begin(), init.end());
  std::vector<double> inv_mass(target.dim, 1.0);
  Hamiltonian ham{&target, &inv_mass};

  double u_current = ham.potential(theta);
  if (!std::isfinite(u_current)) {
    throw std::invalid_argument("log_prob is not finite at the initial point");
  }

  DualAveraging da;
  da.reset(find_reasonable_epsilon(ham, theta, u_current, config.leapfrog_steps, rng),
           config.target_accept);

  const int warmup = config.warmup;
  const int post = config.iterations - config.warmup;
  // Variance-estimation window for the diagonal metric; the tail of warmup
  // re-adapts the step size under the new metric and must be long enough for
  // the dual-averaging mean to settle.
  const int window_begin = warmup * 15 / 100;
  const int window_end = std::max(window_begin + 1, warmup * 70 / 100);

  std::vector<double> welford_mean(target.dim, 0.0);
  std::vector<double> welford_m2(target.dim, 0.0);
  long welford_n = 0;

  ChainResult result;
  result.draws.reserve(static_cast<size_t>(post));
  result.step_size = da.current();  // stands in when warmup is zero
  long post_accepts = 0;

  for (int iter = 0; iter < config.iterations; ++iter) {
    const bool in_warmup = iter < warmup;
    double eps = in_warmup ? da.current() : result.step_size;
    // mild trajectory-length jitter breaks up periodic orbits without
    // shortening the typical trajectory much
    int max_steps = std::max(1, config.leapfrog_steps);
    int low = std::max(1, (3 * max_steps) / 4);
    int steps = low + static_cast<int>(bounded(
                          rng, static_cast<std::uint64_t>(max_steps - low + 1)));
    bool diverged = false;
    bool accepted = false;
    double accept_prob =
        hmc_transition(ham, theta, u_current, eps, steps, rng, diverged, accepted);

    if (in_warmup) {
      da.update(accept_prob);
      if (iter >= window_begin && iter < window_end) {
        ++welford_n;
        for (size_t i = 0; i < target.dim; ++i) {
          double delta = theta[i] - welford_mean[i];
          welford_mean[i] += delta / static_cast<double>(welford_n);
          welford_m2[i] += delta * (theta[i] - welford_mean[i]);
        }
      }
      if (iter + 1 == window_end && welford_n > 1) {
        for (size_t i = 0; i < target.dim; ++i) {
          double var = welford_m2[i] / static_cast<double>(welford_n - 1);
          // shrink toward a small floor, as a regularized estimate
          inv_mass[i] = std::max(1e-6, (welford_n / (welford_n + 5.0)) * var +
                                           (5.0 / (welford_n + 5.0)) * 1e-3);
        }
        u_current = ham.potential(theta);
        da.reset(find_reasonable_epsilon(ham, theta, u_current, config.leapfrog_steps, rng),
                 config.target_accept);
      }
      if (iter + 1 == warmup) {
        result.step_size = da.adapted();
        if (!std::isfinite(result.step_size) || result.step_size <= 0.0) {
          result.step_size = da.current();
        }
      }
    } else {
      if (diverged) ++result.divergences;
      if (accepted) ++post_accepts;
      result.draws.push_back(theta);
    }
  }
  result.accept_rate = post > 0 ? static_cast<double>(post_accepts) / post : 0.0;
  return result;
}

ChainResult run_rwm_chain(const TargetDensity& target, const SamplerConfig& config,
                          std::span<const double> init) {
  if (config.iterations <= config.warmup) {
    throw std::invalid_argument("iterations must exceed warmup");
  }
  std::mt19937_64 rng(config.seed);
  std::vector<double> theta(init.begin(), init.end());
  double logp = target.log_prob(theta);
  double log_scale = std::log(0.1);

  ChainResult result;
  const int post = config.iterations - config.warmup;
  result.draws.reserve(static_cast<size_t>(post));
  long post_accepts = 0;

  std::vector<double> proposal(target.dim);
  for (int iter = 0; iter < config.iterations; ++iter) {
    double scale = std::exp(log_scale);
    for (size_t i = 0; i < target.dim; ++i) {
      proposal[i] = theta[i] + scale * standard_normal(rng);
    }
    double logp_new = target.log_prob(proposal);
    double accept_prob =
        std::isfinite(logp_new) ? std::min(1.0, std::exp(logp_new - logp)) : 0.0;
    bool accepted = unit_double(rng) < accept_prob;
    if (accepted) {
      theta = proposal;
      logp = logp_new;
    }
    if (iter < config.warmup) {
      // Robbins-Monro toward the RWM sweet spot
      double eta = std::pow(iter + 1.0, -0.6);
      log_scale += eta * (accept_prob - 0.234);
    } else {
      if (accepted) ++post_accepts;
      result.draws.push_back(theta);
    }
  }
  result.step_size = std::exp(log_scale);
  result.accept_rate = post > 0 ? static_cast<double>(post_accepts) / post : 0.0;
  return result;
}

std::vector<double> split_rhat(const std::vector<ChainResult>& chains) {
  if (chains.empty() || chains.front().draws.empty()) {
    throw std::invalid_argument("split_rhat needs non-empty chains");
  }
  const size_t dim = chains.front().draws.front().size();
  // split every chain in half
  std::vector<std::pair<size_t, size_t>> segments;  // (chain index, half)
  size_t half_len = chains.front().draws.size() / 2;
  if (half_len < 2) {
    throw std::invalid_argument("too few draws for split R-hat");
  }
  for (size_t c = 0; c < chains.size(); ++c) {
    if (chains[c].draws.size() != chains.front().draws.size()) {
      throw std::invalid_argument("chains have unequal draw counts");
    }
    segments.emplace_back(c, 0);
    segments.emplace_back(c, 1);
  }

  std::vector<double> rhat(dim, 1.0);
  const double n = static_cast<double>(half_len);
  const double m = static_cast<double>(segments.size());
  for (size_t d = 0; d < dim; ++d) {
    std::vector<double> means;
    std::vector<double> vars;
    means.reserve(segments.size());
    vars.reserve(segments.size());
    for (const auto& [c, half] : segments) {
      const auto& draws = chains[c].draws;
      size_t begin = half == 0 ? 0 : half_len;
      double mean = 0.0;
      for (size_t i = 0; i < half_len; ++i) mean += draws[begin + i][d];
      mean /= n;
      double var = 0.0;
      for (size_t i = 0; i < half_len; ++i) {
        double delta = draws[begin + i][d] - mean;
        var += delta * delta;
      }
      var /= (n - 1.0);
      means.push_back(mean);
      vars.push_back(var);
    }
    double grand = 0.0;
    for (double mu : means) grand += mu;
    grand /= m;
    double b = 0.0;
    for (double mu : means) b += (mu - grand) * (mu - grand);
    b *= n / (m - 1.0);
    double w = 0.0;
    for (double v : vars) w += v;
    w /= m;
    if (w <= 1e-300) {
      rhat[d] = 1.0;  // constant column
      continue;
    }
    double var_plus = (n - 1.0) / n * w + b / n;
    rhat[d] = std::sqrt(var_plus / w);
  }
  return rhat;
}

}  // namespace gradekit
