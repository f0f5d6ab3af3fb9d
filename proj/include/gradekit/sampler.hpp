#pragma once

#include <cstdint>
#include <vector>

#include "gradekit/prompt.hpp"

namespace gradekit {

/// Hard cap on graded examples shown in a prompt.
inline constexpr std::size_t kMaxPromptExamples = 10;

/// Examples sharing one exact satisfied-criteria signature.
struct SignatureGroup {
  CriteriaSet signature;
  std::vector<GradedExample> members;
};

/// Partitions examples by their satisfied-criteria signature. Groups appear in
/// first-seen order, members in input order.
std::vector<SignatureGroup> group_by_signature(const std::vector<GradedExample>& examples);

/// Draws up to k examples by repeatedly picking a uniformly random
/// non-exhausted signature group and then a uniformly random unused member of
/// it, until k examples are selected or the pool is empty. Group-first
/// sampling favours signature diversity over raw frequency. Deterministic for
/// a fixed seed. Throws std::invalid_argument when k > kMaxPromptExamples.
std::vector<GradedExample> sample_examples(const std::vector<GradedExample>& examples,
                                           std::size_t k, std::uint64_t seed);

}  // namespace gradekit
