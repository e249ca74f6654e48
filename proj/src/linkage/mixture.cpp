#include "linkage/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "util/errors.hpp"

namespace linkmse {

namespace {

struct MinRootUnionFind {
  std::vector<std::uint32_t> parent;
  explicit MinRootUnionFind(std::size_t n) : parent(n) {
    for (std::size_t i = 0; i < n; ++i) parent[i] = static_cast<std::uint32_t>(i);
  }
  std::uint32_t find(std::uint32_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void merge(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a > b) std::swap(a, b);
    parent[b] = a;  // smaller index stays the root
  }
};

}  // namespace

ClosureResult transitive_closure(const std::vector<std::uint8_t>& m, const CandidateSets& cs) {
  if (m.size() != cs.candidates.size())
    throw ConstraintError("indicator vector does not match candidate pairs");

  MinRootUnionFind uf(cs.record_count);
  std::vector<std::set<std::uint32_t>> adj(cs.record_count);
  for (std::size_t k = 0; k < m.size(); ++k) {
    if (!m[k]) continue;
    const auto& p = cs.candidates[k];
    uf.merge(p.i, p.j);
    adj[p.i].insert(p.j);
    adj[p.j].insert(p.i);
  }

  ClosureResult out;
  out.labels.resize(cs.record_count);
  for (std::uint32_t i = 0; i < cs.record_count; ++i) out.labels[i] = uf.find(i);

  // triplets with exactly two edges: paths of length two minus triangle triples
  long paths = 0;
  for (const auto& nb : adj) {
    const long d = static_cast<long>(nb.size());
    paths += d * (d - 1) / 2;
  }
  long common_sum = 0;
  for (std::size_t k = 0; k < m.size(); ++k) {
    if (!m[k]) continue;
    const auto& p = cs.candidates[k];
    for (std::uint32_t x : adj[p.i]) common_sum += adj[p.j].count(x);
  }
  out.non_transitive = paths - common_sum;  // common_sum = 3 * triangles
  return out;
}

MixtureChain run_mixture_sampler(const CandidateSets& cs, const PriorTruncations& lambda,
                                 const McmcConfig& config, std::uint64_t seed) {
  config.validate();
  if (lambda.size() != cs.fields.size())
    throw ConstraintError("priors do not match comparison fields");

  MixtureChain chain;
  chain.record_count = cs.record_count;
  chain.list_sizes = cs.list_sizes;
  chain.seed = seed;
  chain.config = config;

  Rng rng(seed);
  std::vector<std::uint8_t> m(cs.candidates.size(), 0);
  std::vector<char> coref(cs.candidates.size(), 0);

  for (long t = 1; t <= config.iters; ++t) {
    for (std::size_t k = 0; k < m.size(); ++k) coref[k] = m[k];
    const LinkageParams params = draw_params(tally_levels(coref, cs), lambda, rng);
    const LogLikTables tables = build_log_tables(params);

    long ones = 0;
    for (std::uint8_t v : m) ones += v;
    const double p = rng.beta(1.0 + static_cast<double>(ones),
                              1.0 + static_cast<double>(m.size() - ones));

    const double log_p_odds = std::log(p) - std::log1p(-p);
    for (std::size_t k = 0; k < m.size(); ++k) {
      const auto& levels = cs.candidates[k].levels;
      const double log_odds = log_p_odds + log_lik_pair(levels, tables.log1) -
                              log_lik_pair(levels, tables.log0);
      const double prob = 1.0 / (1.0 + std::exp(-log_odds));
      m[k] = rng.bernoulli(prob) ? 1 : 0;
    }

    if (t > config.burnin && (t - config.burnin) % config.thin == 0) {
      ClosureResult closure = transitive_closure(m, cs);
      chain.indicator_draws.push_back(m);
      chain.p_draws.push_back(p);
      chain.closure_draws.push_back(std::move(closure.labels));
      chain.non_transitive.push_back(closure.non_transitive);
    }
  }
  return chain;
}

}  // namespace linkmse
