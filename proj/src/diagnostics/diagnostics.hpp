#ifndef LINKMSE_DIAGNOSTICS_DIAGNOSTICS_HPP
#define LINKMSE_DIAGNOSTICS_DIAGNOSTICS_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "linkage/sampler.hpp"

namespace linkmse {

struct ScalarChain {
  std::string name;
  std::vector<double> values;
};

// Per-draw functions of the partition chain. Co-clustering chains are kept
// per requested pair (order-normalized to i < j), one 0/1 entry per draw;
// callers pass the candidate pairs, the only ones that can ever link.
struct PartitionSummaries {
  ScalarChain clusters;      // n(Z)
  ScalarChain size1;         // singleton clusters
  ScalarChain size2;
  ScalarChain size3p;        // clusters of size >= 3
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
  std::vector<std::vector<std::uint8_t>> coclustered;  // [pair][draw]
  std::vector<double> link_rate;                       // per-pair mean
};

PartitionSummaries partition_summaries(
    const LinkageChain& chain,
    const std::vector<std::pair<std::uint32_t, std::uint32_t>>& pairs = {});

// Two-window mean-comparison Z. Window spectral densities at frequency zero
// come from non-overlapping batch means with ~sqrt(window length) batches.
double geweke_z(const std::vector<double>& chain, double frac_a = 0.1, double frac_b = 0.5);

// Sample autocorrelations at lags 1..max_lag, normalized by the lag-0
// autocovariance.
std::vector<double> acf(const std::vector<double>& chain, int max_lag);

}  // namespace linkmse

#endif
