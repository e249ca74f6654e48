#ifndef LINKMSE_LINKAGE_SAMPLER_HPP
#define LINKMSE_LINKAGE_SAMPLER_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "linkage/model.hpp"
#include "linkage/partition.hpp"

namespace linkmse {

struct McmcConfig {
  long iters = 10000;
  long burnin = 1000;
  long thin = 5;

  void validate() const;
  long saved_draws() const { return (iters - burnin) / thin; }
};

struct LinkageChain {
  std::size_t record_count = 0;
  std::vector<std::size_t> list_sizes;
  std::uint64_t seed = 0;
  McmcConfig config;
  std::vector<Labeling> draws;  // canonical form
};

// Mutable sweep state: clusters as id -> member list. Kept incremental so a
// sweep is O(sum of candidate-cluster sizes), not O(r^2).
class SweepState {
 public:
  explicit SweepState(std::size_t record_count);

  const Labeling& labels() const { return labels_; }
  Labeling canonical_labels() const;
  std::size_t cluster_count() const { return nonempty_; }

  // One full Gibbs pass in record-index order. Records without candidate
  // neighbors are skipped (their only feasible move is staying a singleton)
  // and consume no randomness.
  void sweep(const CandidateGraph& graph, const CandidateSets& cs,
             const LogLikTables& tables, Rng& rng);

 private:
  Labeling labels_;  // cluster ids, not canonical
  std::vector<std::vector<std::uint32_t>> members_;
  std::vector<std::uint32_t> free_ids_;
  std::size_t nonempty_ = 0;

  void detach(std::uint32_t rec);
  void attach(std::uint32_t rec, std::uint32_t cluster);
  std::uint32_t fresh_cluster();
};

LinkageChain run_linkage_sampler(const CandidateSets& cs, const PriorTruncations& lambda,
                                 const McmcConfig& config, std::uint64_t seed);

void write_chain(const LinkageChain& chain, const std::string& path);
LinkageChain read_chain(const std::string& path);

}  // namespace linkmse

#endif
