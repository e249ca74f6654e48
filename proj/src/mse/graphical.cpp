#include "mse/graphical.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "util/errors.hpp"
#include "util/special.hpp"

namespace linkmse {

namespace {

// Sum `cells` over the projection onto `nodes`; out[i] collects every cell
// whose pattern restricted to nodes equals i (node b -> bit b of i).
std::vector<double> marginal_sums(const std::vector<double>& cells, int k,
                                  const std::vector<int>& nodes) {
  std::vector<double> out(std::size_t{1} << nodes.size(), 0.0);
  for (std::uint32_t h = 0; h < (1u << k); ++h) {
    std::size_t idx = 0;
    for (std::size_t b = 0; b < nodes.size(); ++b)
      if (h >> nodes[b] & 1u) idx |= std::size_t{1} << b;
    out[idx] += cells[h];
  }
  return out;
}

// Structural re-derivation of everything the hard model table claims.
void validate_model(const DecomposableModel& model) {
  const int k = model.k;
  const auto fail = [&](const std::string& what) {
    throw ConstraintError("model table validation failed for " + model.name + ": " + what);
  };

  std::vector<char> covered(k, 0);
  std::vector<std::vector<char>> adj(k, std::vector<char>(k, 0));
  for (const auto& c : model.cliques) {
    for (int v : c) {
      if (v < 0 || v >= k) fail("node out of range");
      covered[v] = 1;
      for (int w : c)
        if (v != w) adj[v][w] = 1;
    }
  }
  if (std::find(covered.begin(), covered.end(), 0) != covered.end()) fail("uncovered node");

  // Connected components.
  int components = 0;
  std::vector<char> seen(k, 0);
  for (int s = 0; s < k; ++s) {
    if (seen[s]) continue;
    ++components;
    std::vector<int> stack{s};
    seen[s] = 1;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (int w = 0; w < k; ++w)
        if (adj[v][w] && !seen[w]) {
          seen[w] = 1;
          stack.push_back(w);
        }
    }
  }
  if (components != model.q) fail("component count");

  // Maximality: no outside node adjacent to a whole clique.
  for (const auto& c : model.cliques)
    for (int v = 0; v < k; ++v) {
      if (std::find(c.begin(), c.end(), v) != c.end()) continue;
      bool all = true;
      for (int w : c) all = all && adj[v][w];
      if (all && !c.empty()) fail("non-maximal clique");
    }

  // Chordality: reverse max-cardinality-search order must be a perfect
  // elimination ordering.
  std::vector<int> order;
  std::vector<int> weight(k, 0);
  std::vector<char> numbered(k, 0);
  for (int step = 0; step < k; ++step) {
    int best = -1;
    for (int v = 0; v < k; ++v)
      if (!numbered[v] && (best < 0 || weight[v] > weight[best])) best = v;
    numbered[best] = 1;
    order.push_back(best);
    for (int w = 0; w < k; ++w)
      if (adj[best][w] && !numbered[w]) ++weight[w];
  }
  std::vector<int> pos(k, 0);
  for (int i = 0; i < k; ++i) pos[order[i]] = i;
  for (int i = 0; i < k; ++i) {
    std::vector<int> earlier;
    for (int w = 0; w < k; ++w)
      if (adj[order[i]][w] && pos[w] < i) earlier.push_back(w);
    for (std::size_t a = 0; a < earlier.size(); ++a)
      for (std::size_t b = a + 1; b < earlier.size(); ++b)
        if (!adj[earlier[a]][earlier[b]]) fail("not chordal");
  }

  // Separators via running intersection over the stored clique order.
  std::vector<std::vector<int>> expected;
  std::vector<char> prev(k, 0);
  for (std::size_t l = 0; l < model.cliques.size(); ++l) {
    if (l > 0) {
      std::vector<int> sep;
      for (int v : model.cliques[l])
        if (prev[v]) sep.push_back(v);
      if (!sep.empty()) expected.push_back(sep);
    }
    for (int v : model.cliques[l]) prev[v] = 1;
  }
  auto got = model.separators;
  for (auto& s : got) std::sort(s.begin(), s.end());
  for (auto& s : expected) std::sort(s.begin(), s.end());
  std::sort(got.begin(), got.end());
  std::sort(expected.begin(), expected.end());
  if (got != expected) fail("separator list");
}

DecomposableModel make_model(int k, std::string name, std::vector<std::vector<int>> cliques,
                             std::vector<std::vector<int>> separators, int q) {
  DecomposableModel m{k, std::move(cliques), std::move(separators), q, std::move(name)};
  validate_model(m);
  return m;
}

}  // namespace

std::vector<DecomposableModel> enumerate_decomposable(int k) {
  if (k == 2) return {make_model(2, "[1][2]", {{0}, {1}}, {}, 2)};
  if (k == 3)
    return {
        make_model(3, "[1][2][3]", {{0}, {1}, {2}}, {}, 3),
        make_model(3, "[1,2][3]", {{0, 1}, {2}}, {}, 2),
        make_model(3, "[1,3][2]", {{0, 2}, {1}}, {}, 2),
        make_model(3, "[1][2,3]", {{0}, {1, 2}}, {}, 2),
        make_model(3, "[1,2][1,3]", {{0, 1}, {0, 2}}, {{0}}, 1),
        make_model(3, "[1,2][2,3]", {{0, 1}, {1, 2}}, {{1}}, 1),
        make_model(3, "[1,3][2,3]", {{0, 2}, {1, 2}}, {{2}}, 1),
    };
  throw ConstraintError("model enumeration supports 2 or 3 lists, got " + std::to_string(k));
}

PriorCounts PriorCounts::constant(int k, double value) {
  if (k < 1 || k > kMaxLists) throw ConstraintError("prior counts: bad list count");
  if (!(value > 0.0)) throw ConstraintError("prior counts must be positive");
  return PriorCounts{k, std::vector<double>(std::size_t{1} << k, value)};
}

double SizePrior::log_weight(long n) const {
  if (kind == Kind::Uniform) return 0.0;
  return -std::log(static_cast<double>(std::max<long>(n, 1)));
}

double SizePosterior::mean() const {
  double m = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) m += probs[i] * static_cast<double>(n_min + static_cast<long>(i));
  return m;
}

double SizePosterior::variance() const {
  const double m = mean();
  double v = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double d = static_cast<double>(n_min + static_cast<long>(i)) - m;
    v += probs[i] * d * d;
  }
  return v;
}

long SizePosterior::mode() const {
  const auto it = std::max_element(probs.begin(), probs.end());
  return n_min + static_cast<long>(it - probs.begin());
}

long SizePosterior::quantile(double p) const {
  double c = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    c += probs[i];
    if (c >= p - 1e-12) return n_min + static_cast<long>(i);
  }
  return n_min + static_cast<long>(probs.size()) - 1;
}

std::pair<long, long> SizePosterior::central_interval(double coverage) const {
  const double tail = (1.0 - coverage) / 2.0;
  return {quantile(tail), quantile(1.0 - tail)};
}

SizePosterior posterior_from_draws(const std::vector<long>& draws) {
  if (draws.empty()) throw ConstraintError("cannot build a posterior from zero draws");
  const auto [lo, hi] = std::minmax_element(draws.begin(), draws.end());
  SizePosterior post;
  post.n_min = *lo;
  post.probs.assign(static_cast<std::size_t>(*hi - *lo) + 1, 0.0);
  const double w = 1.0 / static_cast<double>(draws.size());
  for (long d : draws) post.probs[static_cast<std::size_t>(d - *lo)] += w;
  post.draws = draws;
  return post;
}

double log_psi(const DecomposableModel& model, const std::vector<double>& alpha) {
  if (alpha.size() != std::size_t{1} << model.k)
    throw ConstraintError("log_psi: counts table has wrong size");
  for (double a : alpha)
    if (!(a > 0.0)) throw ConstraintError("log_psi: counts must be positive");

  const double total = std::accumulate(alpha.begin(), alpha.end(), 0.0);
  double out = -model.q * std::lgamma(total);
  for (const auto& clique : model.cliques)
    for (double v : marginal_sums(alpha, model.k, clique)) out += std::lgamma(v);
  for (const auto& sep : model.separators)
    for (double v : marginal_sums(alpha, model.k, sep)) out -= std::lgamma(v);
  return out;
}

double log_prob_n_given_Nm(const ContingencyTable& table, long n_total,
                           const DecomposableModel& model, const PriorCounts& alpha) {
  if (model.k != table.k || alpha.k != table.k)
    throw ConstraintError("table, model and prior counts disagree on list count");
  const long n_obs = table.n_obs();
  if (n_total < n_obs)
    throw ConstraintError("total size " + std::to_string(n_total) + " below observed count " +
                          std::to_string(n_obs));

  const long n0 = n_total - n_obs;
  std::vector<double> cells = alpha.alpha;
  double out = std::lgamma(static_cast<double>(n_total) + 1.0) -
               std::lgamma(static_cast<double>(n0) + 1.0);
  cells[0] += static_cast<double>(n0);
  for (const auto& [mask, count] : table.counts) {
    out -= std::lgamma(static_cast<double>(count) + 1.0);
    cells[mask] += static_cast<double>(count);
  }
  return out + log_psi(model, cells) - log_psi(model, alpha.alpha);
}

namespace {

// Unnormalized log posterior mass over the grid n_obs..n_max. The only terms
// that move with N involve the unobserved cell: the all-zero-pattern marginal
// of each clique/separator, the grand total, and the n0 factorial — so each
// grid point costs a handful of lgamma calls.
std::vector<double> grid_log_posterior(const ContingencyTable& table,
                                       const DecomposableModel& model, const PriorCounts& alpha,
                                       const SizePrior& prior) {
  if (model.k != table.k || alpha.k != table.k)
    throw ConstraintError("table, model and prior counts disagree on list count");
  const long n_obs = table.n_obs();
  if (prior.n_max < n_obs)
    throw ConstraintError("size prior truncation " + std::to_string(prior.n_max) +
                          " below observed count " + std::to_string(n_obs));

  std::vector<double> cells = alpha.alpha;
  double constant = -log_psi(model, alpha.alpha);
  for (const auto& [mask, count] : table.counts) {
    constant -= std::lgamma(static_cast<double>(count) + 1.0);
    cells[mask] += static_cast<double>(count);
  }

  std::vector<double> clique_zero, sep_zero;
  for (const auto& clique : model.cliques) {
    const auto marg = marginal_sums(cells, model.k, clique);
    clique_zero.push_back(marg[0]);
    for (std::size_t i = 1; i < marg.size(); ++i) constant += std::lgamma(marg[i]);
  }
  for (const auto& sep : model.separators) {
    const auto marg = marginal_sums(cells, model.k, sep);
    sep_zero.push_back(marg[0]);
    for (std::size_t i = 1; i < marg.size(); ++i) constant -= std::lgamma(marg[i]);
  }
  const double total = std::accumulate(cells.begin(), cells.end(), 0.0);

  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(prior.n_max - n_obs) + 1);
  for (long n = n_obs; n <= prior.n_max; ++n) {
    const double n0 = static_cast<double>(n - n_obs);
    double lp = constant + std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(n0 + 1.0) -
                model.q * std::lgamma(total + n0);
    for (double z : clique_zero) lp += std::lgamma(z + n0);
    for (double z : sep_zero) lp -= std::lgamma(z + n0);
    out.push_back(lp + prior.log_weight(n));
  }
  return out;
}

SizePosterior normalize_grid(long n_obs, std::vector<double> log_mass) {
  const double lse = log_sum_exp(log_mass);
  if (!std::isfinite(lse)) throw NumericError("size posterior has zero total mass");
  SizePosterior post;
  post.n_min = n_obs;
  post.probs.resize(log_mass.size());
  for (std::size_t i = 0; i < log_mass.size(); ++i) post.probs[i] = std::exp(log_mass[i] - lse);
  return post;
}

}  // namespace

SizePosterior posterior_N_given_m(const ContingencyTable& table, const DecomposableModel& model,
                                  const PriorCounts& alpha, const SizePrior& prior) {
  return normalize_grid(table.n_obs(), grid_log_posterior(table, model, alpha, prior));
}

std::vector<double> model_posterior(const ContingencyTable& table,
                                    const std::vector<DecomposableModel>& models,
                                    const PriorCounts& alpha, const SizePrior& prior) {
  if (models.empty()) throw ConstraintError("model posterior needs at least one model");
  std::vector<double> log_evidence;
  for (const auto& m : models) log_evidence.push_back(log_sum_exp(grid_log_posterior(table, m, alpha, prior)));
  const double lse = log_sum_exp(log_evidence);
  if (!std::isfinite(lse)) throw NumericError("model posterior has zero total mass");
  std::vector<double> out(models.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::exp(log_evidence[i] - lse);
  return out;
}

SizePosterior bma_posterior(const ContingencyTable& table, const PriorCounts& alpha,
                            const SizePrior& prior, std::vector<double>* weights_out) {
  const auto models = enumerate_decomposable(table.k);
  std::vector<std::vector<double>> grids;
  std::vector<double> log_evidence;
  for (const auto& m : models) {
    grids.push_back(grid_log_posterior(table, m, alpha, prior));
    log_evidence.push_back(log_sum_exp(grids.back()));
  }
  const double lse = log_sum_exp(log_evidence);
  if (!std::isfinite(lse)) throw NumericError("size posterior has zero total mass");

  SizePosterior post;
  post.n_min = table.n_obs();
  post.probs.assign(grids.front().size(), 0.0);
  std::vector<double> weights(models.size());
  for (std::size_t m = 0; m < models.size(); ++m) {
    weights[m] = std::exp(log_evidence[m] - lse);
    if (weights[m] == 0.0) continue;
    for (std::size_t i = 0; i < post.probs.size(); ++i)
      post.probs[i] += std::exp(grids[m][i] - lse);  // = w_m * p_m(N), shared normalizer
  }
  if (weights_out) *weights_out = std::move(weights);
  return post;
}

}  // namespace linkmse
