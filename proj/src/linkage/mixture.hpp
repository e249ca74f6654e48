#ifndef LINKMSE_LINKAGE_MIXTURE_HPP
#define LINKMSE_LINKAGE_MIXTURE_HPP

#include <cstdint>
#include <vector>

#include "linkage/sampler.hpp"

namespace linkmse {

// Baseline that models each candidate pair's match status independently:
// M_ij | p ~ Bernoulli(p) with p ~ Uniform(0,1), the same comparison model on
// top, and no transitivity constraint. Partitions come from transitive
// closure afterwards.
struct MixtureChain {
  std::size_t record_count = 0;
  std::vector<std::size_t> list_sizes;
  std::uint64_t seed = 0;
  McmcConfig config;
  std::vector<std::vector<std::uint8_t>> indicator_draws;  // per draw, per candidate pair
  std::vector<double> p_draws;
  std::vector<Labeling> closure_draws;     // canonical partitions after closure
  std::vector<long> non_transitive;        // triplet counts before closure
};

struct ClosureResult {
  Labeling labels;
  long non_transitive = 0;
};

// Union-find closure over M=1 edges plus the count of triplets {i,j,k} with
// exactly two of the three pairwise indicators set (pairs outside C count 0).
ClosureResult transitive_closure(const std::vector<std::uint8_t>& m, const CandidateSets& cs);

MixtureChain run_mixture_sampler(const CandidateSets& cs, const PriorTruncations& lambda,
                                 const McmcConfig& config, std::uint64_t seed);

}  // namespace linkmse

#endif
