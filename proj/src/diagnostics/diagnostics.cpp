#include "diagnostics/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "util/errors.hpp"

namespace linkmse {

PartitionSummaries partition_summaries(
    const LinkageChain& chain,
    const std::vector<std::pair<std::uint32_t, std::uint32_t>>& pairs) {
  if (chain.draws.empty()) throw ConstraintError("partition summaries need a nonempty chain");
  const std::size_t r = chain.record_count;
  for (auto [i, j] : pairs)
    if (i == j || i >= r || j >= r)
      throw ConstraintError("co-clustering pair out of range");

  PartitionSummaries out;
  out.clusters.name = "n_clusters";
  out.size1.name = "size1";
  out.size2.name = "size2";
  out.size3p.name = "size3plus";
  for (auto [i, j] : pairs) out.pairs.emplace_back(std::min(i, j), std::max(i, j));
  out.coclustered.assign(pairs.size(), {});

  std::vector<std::uint32_t> sizes(r);
  for (const Labeling& z : chain.draws) {
    std::fill(sizes.begin(), sizes.end(), 0);
    for (std::uint32_t lab : z) ++sizes[lab];
    long nc = 0, s1 = 0, s2 = 0, s3 = 0;
    for (std::uint32_t s : sizes) {
      if (s == 0) continue;
      ++nc;
      if (s == 1) ++s1;
      else if (s == 2) ++s2;
      else ++s3;
    }
    out.clusters.values.push_back(static_cast<double>(nc));
    out.size1.values.push_back(static_cast<double>(s1));
    out.size2.values.push_back(static_cast<double>(s2));
    out.size3p.values.push_back(static_cast<double>(s3));
    for (std::size_t p = 0; p < out.pairs.size(); ++p)
      out.coclustered[p].push_back(z[out.pairs[p].first] == z[out.pairs[p].second] ? 1 : 0);
  }

  const double d = static_cast<double>(chain.draws.size());
  for (const auto& c : out.coclustered) {
    long hits = 0;
    for (std::uint8_t b : c) hits += b;
    out.link_rate.push_back(static_cast<double>(hits) / d);
  }
  return out;
}

namespace {

double window_mean(const double* x, std::size_t n) {
  double s = 0.0;
  for (std::size_t t = 0; t < n; ++t) s += x[t];
  return s / static_cast<double>(n);
}

bool window_constant(const double* x, std::size_t n) {
  for (std::size_t t = 1; t < n; ++t)
    if (x[t] != x[0]) return false;
  return true;
}

// Batch-means estimate of the spectral density at frequency zero: batch size
// times the sample variance of ~sqrt(n) non-overlapping batch means.
double spectral0(const double* x, std::size_t n) {
  const std::size_t nb = std::max<std::size_t>(2, static_cast<std::size_t>(std::sqrt(n)));
  const std::size_t bs = n / nb;
  std::vector<double> bm(nb);
  for (std::size_t b = 0; b < nb; ++b) bm[b] = window_mean(x + b * bs, bs);
  const double grand = window_mean(bm.data(), nb);
  double v = 0.0;
  for (double m : bm) v += (m - grand) * (m - grand);
  v /= static_cast<double>(nb - 1);
  return static_cast<double>(bs) * v;
}

}  // namespace

double geweke_z(const std::vector<double>& chain, double frac_a, double frac_b) {
  if (chain.size() < 100) throw ConstraintError("geweke_z needs a chain of length >= 100");
  if (!(frac_a > 0.0) || !(frac_b > 0.0) || frac_a + frac_b > 1.0)
    throw ConstraintError("geweke_z window fractions must be positive with sum <= 1");
  const std::size_t n = chain.size();
  const auto na = static_cast<std::size_t>(frac_a * static_cast<double>(n));
  const auto nb = static_cast<std::size_t>(frac_b * static_cast<double>(n));
  const double* a = chain.data();
  const double* b = chain.data() + (n - nb);
  if (window_constant(a, na) || window_constant(b, nb))
    throw NumericError("degenerate chain: zero variance in a comparison window");

  const double sa = spectral0(a, na);
  const double sb = spectral0(b, nb);
  const double denom = sa / static_cast<double>(na) + sb / static_cast<double>(nb);
  if (!(denom > 0.0))
    throw NumericError("degenerate chain: zero spectral variance in both windows");
  return (window_mean(a, na) - window_mean(b, nb)) / std::sqrt(denom);
}

std::vector<double> acf(const std::vector<double>& chain, int max_lag) {
  if (max_lag < 1) throw ConstraintError("acf needs max_lag >= 1");
  if (chain.size() <= static_cast<std::size_t>(max_lag))
    throw ConstraintError("acf needs a chain longer than max_lag");
  const std::size_t n = chain.size();
  const double mean = window_mean(chain.data(), n);
  double c0 = 0.0;
  for (double x : chain) c0 += (x - mean) * (x - mean);
  c0 /= static_cast<double>(n);
  if (!(c0 > 0.0)) throw NumericError("degenerate chain: zero variance");

  std::vector<double> out;
  for (int k = 1; k <= max_lag; ++k) {
    double ck = 0.0;
    for (std::size_t t = 0; t + static_cast<std::size_t>(k) < n; ++t)
      ck += (chain[t] - mean) * (chain[t + static_cast<std::size_t>(k)] - mean);
    out.push_back(ck / static_cast<double>(n) / c0);
  }
  return out;
}

}  // namespace linkmse
