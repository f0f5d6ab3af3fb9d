#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace gradekit {

/// A differentiable unnormalized log density.
struct TargetDensity {
  std::size_t dim = 0;
  std::function<double(std::span<const double>)> log_prob;
  std::function<void(std::span<const double>, std::span<double>)> gradient;
};

struct SamplerConfig {
  int iterations = 1000;      // total transitions per chain, warmup included
  int warmup = 500;
  int leapfrog_steps = 32;
  double target_accept = 0.8;
  std::string algorithm = "hmc";  // "hmc" | "rwm"
  std::uint64_t seed = 0;
};

struct ChainResult {
  std::vector<std::vector<double>> draws;  // post-warmup, iterations-warmup x dim
  double accept_rate = 0.0;                // post-warmup transitions
  int divergences = 0;
  double step_size = 0.0;
};

/// One chain of fixed-length HMC with leapfrog integration, dual-averaging
/// step-size adaptation and a diagonal metric estimated during warmup.
/// Deterministic given the seed.
ChainResult run_hmc_chain(const TargetDensity& target, const SamplerConfig& config,
                          std::span<const double> init);

/// Random-walk Metropolis fallback with Robbins-Monro scale adaptation.
ChainResult run_rwm_chain(const TargetDensity& target, const SamplerConfig& config,
                          std::span<const double> init);

/// Split-chain potential scale reduction factor per dimension. Constant
/// columns report 1.
std::vector<double> split_rhat(const std::vector<ChainResult>& chains);

}  // namespace gradekit
