#ifndef LINKMSE_LINKAGE_ENUMERATE_HPP
#define LINKMSE_LINKAGE_ENUMERATE_HPP

#include <vector>

#include "linkage/model.hpp"
#include "linkage/partition.hpp"

namespace linkmse {

struct EnumeratedPosterior {
  std::vector<Labeling> partitions;  // canonical, full record length
  std::vector<double> log_weights;   // unnormalized log prior x marginal likelihood
  std::vector<double> probs;         // normalized
};

// Exact posterior over feasible partitions with m and u integrated out
// analytically: each m_fl contributes a truncated-Beta normalizer, each u_fl a
// Beta function. Intended as a ground truth for tiny instances; throws
// TooLargeError beyond max_partitions feasible partitions.
EnumeratedPosterior exact_posterior_enumeration(const CandidateSets& cs,
                                                const PriorTruncations& lambda,
                                                std::size_t max_partitions = 10000);

}  // namespace linkmse

#endif
