#include "gradekit/sampler.hpp"

#include <map>
#include <stdexcept>

#include "gradekit/rng.hpp"

namespace gradekit {

std::vector<SignatureGroup> group_by_signature(const std::vector<GradedExample>& examples) {
  std::vector<SignatureGroup> groups;
  std::map<CriteriaSet, std::size_t> index;
  for (const auto& example : examples) {
    auto it = index.find(example.satisfied);
    if (it == index.end()) {
      index.emplace(example.satisfied, groups.size());
      groups.push_back({example.satisfied, {example}});
    } else {
      groups[it->second].members.push_back(example);
    }
  }
  return groups;
}

std::vector<GradedExample> sample_examples(const std::vector<GradedExample>& examples,
                                           std::size_t k, std::uint64_t seed) {
  if (k > kMaxPromptExamples) {
    throw std::invalid_argument("at most " + std::to_string(kMaxPromptExamples) +
                                " examples per prompt, requested " + std::to_string(k));
  }
  std::vector<SignatureGroup> groups = group_by_signature(examples);
  std::mt19937_64 rng(seed);
  std::vector<GradedExample> picked;
  picked.reserve(k);
  // Rounds of one draw per group, group order reshuffled each round: any
  // single draw is uniform over the non-exhausted groups, and whenever
  // k >= group count the first round already covers every group.
  while (picked.size() < k && !groups.empty()) {
    std::vector<std::size_t> round(groups.size());
    for (std::size_t i = 0; i < round.size(); ++i) round[i] = i;
    for (std::size_t i = round.size(); i > 1; --i) {
      std::swap(round[i - 1], round[bounded(rng, i)]);
    }
    for (std::size_t g : round) {
      if (picked.size() >= k) break;
      auto& members = groups[g].members;
      std::size_t m = static_cast<std::size_t>(bounded(rng, members.size()));
      picked.push_back(std::move(members[m]));
      members.erase(members.begin() + static_cast<std::ptrdiff_t>(m));
    }
    std::erase_if(groups, [](const SignatureGroup& g) { return g.members.empty(); });
  }
  return picked;
}

}  // namespace gradekit
