#include "linkage/partition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace linkmse {

void canonicalize(Labeling& z) {
  // first occurrence of a label is the smallest index in its cluster
  std::unordered_map<std::uint32_t, std::uint32_t> first;
  first.reserve(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    auto [it, inserted] = first.try_emplace(z[i], static_cast<std::uint32_t>(i));
    z[i] = it->second;
  }
}

Labeling canonicalized(const Labeling& z) {
  Labeling out = z;
  canonicalize(out);
  return out;
}

std::size_t n_clusters(const Labeling& z) {
  std::vector<std::uint32_t> labels(z);
  std::sort(labels.begin(), labels.end());
  return static_cast<std::size_t>(std::unique(labels.begin(), labels.end()) - labels.begin());
}

CandidateGraph::CandidateGraph(const CandidateSets& cs) {
  neighbors_.resize(cs.record_count);
  pair_index_.reserve(cs.candidates.size() * 2);
  for (std::size_t k = 0; k < cs.candidates.size(); ++k) {
    const auto& p = cs.candidates[k];
    neighbors_[p.i].push_back(p.j);
    neighbors_[p.j].push_back(p.i);
    pair_index_[(static_cast<std::uint64_t>(p.i) << 32) | p.j] = static_cast<std::uint32_t>(k);
  }
  for (auto& nb : neighbors_) std::sort(nb.begin(), nb.end());
}

bool feasible(const Labeling& z, const CandidateGraph& graph) {
  std::unordered_map<std::uint32_t, std::vector<std::uint32_t>> clusters;
  for (std::size_t i = 0; i < z.size(); ++i)
    clusters[z[i]].push_back(static_cast<std::uint32_t>(i));
  for (const auto& [label, members] : clusters)
    for (std::size_t a = 0; a + 1 < members.size(); ++a)
      for (std::size_t b = a + 1; b < members.size(); ++b)
        if (!graph.linked(members[a], members[b])) return false;
  return true;
}

double log_partition_prior(const Labeling& z, const CandidateGraph& graph) {
  if (!feasible(z, graph)) return -std::numeric_limits<double>::infinity();
  const double r = static_cast<double>(z.size());
  const double n = static_cast<double>(n_clusters(z));
  return std::lgamma(r - n + 1.0) - std::lgamma(r + 1.0);
}

}  // namespace linkmse
