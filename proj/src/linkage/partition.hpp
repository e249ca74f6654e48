#ifndef LINKMSE_LINKAGE_PARTITION_HPP
#define LINKMSE_LINKAGE_PARTITION_HPP

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "compare/compare.hpp"

namespace linkmse {

// Partition of records encoded by labels; canonical form labels every record
// with the smallest record index in its cluster.
using Labeling = std::vector<std::uint32_t>;

void canonicalize(Labeling& z);
Labeling canonicalized(const Labeling& z);
std::size_t n_clusters(const Labeling& z);

// Candidate-pair adjacency: per-record sorted neighbor lists plus (i,j) ->
// candidate index lookup. Records outside every candidate pair have empty
// neighbor lists and stay singletons in any feasible partition.
class CandidateGraph {
 public:
  explicit CandidateGraph(const CandidateSets& cs);

  std::size_t record_count() const { return neighbors_.size(); }
  const std::vector<std::uint32_t>& neighbors(std::uint32_t i) const { return neighbors_[i]; }

  // index into cs.candidates, or -1 when (i,j) is not a candidate pair
  long pair_index(std::uint32_t i, std::uint32_t j) const {
    if (i > j) std::swap(i, j);
    auto it = pair_index_.find((static_cast<std::uint64_t>(i) << 32) | j);
    return it == pair_index_.end() ? -1 : static_cast<long>(it->second);
  }
  bool linked(std::uint32_t i, std::uint32_t j) const { return pair_index(i, j) >= 0; }

 private:
  std::vector<std::vector<std::uint32_t>> neighbors_;
  std::unordered_map<std::uint64_t, std::uint32_t> pair_index_;
};

// True when every same-label pair is a candidate pair (the clique reading of
// the feasible set: clusters must be complete in the candidate graph).
bool feasible(const Labeling& z, const CandidateGraph& graph);

// ln[(r - n(Z))! / r!] on the feasible set, -inf off it.
double log_partition_prior(const Labeling& z, const CandidateGraph& graph);

}  // namespace linkmse

#endif
