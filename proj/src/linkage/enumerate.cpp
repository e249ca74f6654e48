#include "linkage/enumerate.hpp"

#include <cmath>

#include "util/errors.hpp"
#include "util/special.hpp"

namespace linkmse {

namespace {

double log_marginal_likelihood(const Labeling& z, const CandidateSets& cs,
                               const PriorTruncations& lambda) {
  const ParamCounts counts = tally_levels(z, cs);
  double sum = 0.0;
  for (std::size_t f = 0; f < cs.fields.size(); ++f) {
    for (int l = 0; l < cs.fields[f].num_levels(); ++l) {
      const auto& cc = counts.coref[f];
      const auto& nc = counts.noncoref[f];
      sum += log_beta_mass_above(1.0 + cc.at_level[l], 1.0 + cc.beyond[l], lambda[f][l]) -
             std::log1p(-lambda[f][l]);
      sum += log_beta(1.0 + nc.at_level[l], 1.0 + nc.beyond[l]);
    }
  }
  return sum;
}

}  // namespace

EnumeratedPosterior exact_posterior_enumeration(const CandidateSets& cs,
                                                const PriorTruncations& lambda,
                                                std::size_t max_partitions) {
  const CandidateGraph graph(cs);
  std::vector<std::uint32_t> touched;
  for (std::uint32_t i = 0; i < cs.record_count; ++i)
    if (!graph.neighbors(i).empty()) touched.push_back(i);

  EnumeratedPosterior post;
  std::vector<std::vector<std::uint32_t>> blocks;

  auto emit = [&] {
    if (post.partitions.size() >= max_partitions)
      throw TooLargeError("more than " + std::to_string(max_partitions) +
                          " feasible partitions");
    Labeling z(cs.record_count);
    for (std::uint32_t i = 0; i < cs.record_count; ++i) z[i] = i;
    for (const auto& block : blocks)
      for (std::uint32_t rec : block) z[rec] = block.front();  // front = min index
    const double r = static_cast<double>(cs.record_count);
    const double n = static_cast<double>(n_clusters(z));
    const double log_prior = std::lgamma(r - n + 1.0) - std::lgamma(r + 1.0);
    post.log_weights.push_back(log_prior + log_marginal_likelihood(z, cs, lambda));
    post.partitions.push_back(std::move(z));
  };

  auto recurse = [&](auto&& self, std::size_t next) -> void {
    if (next == touched.size()) {
      emit();
      return;
    }
    const std::uint32_t rec = touched[next];
    // index access: deeper calls push to `blocks` and may reallocate it
    const std::size_t existing = blocks.size();
    for (std::size_t b = 0; b < existing; ++b) {
      bool ok = true;
      for (std::uint32_t member : blocks[b]) ok = ok && graph.linked(rec, member);
      if (!ok) continue;
      blocks[b].push_back(rec);
      self(self, next + 1);
      blocks[b].pop_back();
    }
    blocks.push_back({rec});
    self(self, next + 1);
    blocks.pop_back();
  };
  recurse(recurse, 0);

  const double log_norm = log_sum_exp(post.log_weights);
  post.probs.reserve(post.log_weights.size());
  for (double lw : post.log_weights) post.probs.push_back(std::exp(lw - log_norm));
  return post;
}

}  // namespace linkmse
