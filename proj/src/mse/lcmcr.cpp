#include "mse/lcmcr.hpp"

#include <algorithm>
#include <cmath>

#include "util/errors.hpp"
#include "util/rng.hpp"

namespace linkmse {

namespace {

constexpr double kProbEps = 1e-12;

double clamp_prob(double p) { return std::min(std::max(p, kProbEps), 1.0 - kProbEps); }

struct MissedDraw {
  long n0 = 0;
  bool capped = false;
};

// Inverse-CDF draw of the missed count. Log weights follow the recurrence
//   reciprocal prior: w(j+1)/w(j) = theta0 * (n_obs + j) / (j + 1)
//   uniform prior:    w(j+1)/w(j) = theta0 * (n_obs + j + 1) / (j + 1)
// both eventually decreasing, so once the ratio is below 1 the remaining tail
// is geometrically bounded and the grid can stop at machine tolerance.
MissedDraw draw_missed(Rng& rng, long n_obs, double theta0, SizePrior::Kind kind, long grid_cap) {
  std::vector<double> lw{0.0};
  double cur = 0.0, peak = 0.0;
  bool exhausted = false;
  for (long j = 0; j < grid_cap; ++j) {
    const double num = kind == SizePrior::Kind::Reciprocal
                           ? static_cast<double>(n_obs + j)
                           : static_cast<double>(n_obs + j + 1);
    const double ratio = theta0 * num / static_cast<double>(j + 1);
    cur += std::log(ratio);
    lw.push_back(cur);
    peak = std::max(peak, cur);
    if (ratio < 1.0 && cur - peak + std::log(ratio / (1.0 - ratio)) < -46.0) {
      exhausted = true;
      break;
    }
  }

  const double mx = *std::max_element(lw.begin(), lw.end());
  double total = 0.0;
  for (double v : lw) total += std::exp(v - mx);
  double u = rng.uniform() * total;
  long pick = static_cast<long>(lw.size()) - 1;
  for (std::size_t j = 0; j < lw.size(); ++j) {
    u -= std::exp(lw[j] - mx);
    if (u <= 0.0) {
      pick = static_cast<long>(j);
      break;
    }
  }
  return {pick, !exhausted};
}

}  // namespace

SizePosterior LcmcrResult::posterior() const { return posterior_from_draws(n_draws); }

LcmcrResult run_lcmcr(const ContingencyTable& table, const LcmcrConfig& config) {
  const int k = table.k;
  const int S = config.strata;
  if (k < 2 || k > kMaxLists) throw ConstraintError("latent-class sampler needs 2..16 lists");
  if (S < 1) throw ConstraintError("strata count must be at least 1");
  config.mcmc.validate();
  if (!config.fixed_theta.empty()) {
    if (S != 1) throw ConstraintError("fixed capture probabilities require a single stratum");
    if (config.fixed_theta.size() != static_cast<std::size_t>(k))
      throw ConstraintError("fixed capture probabilities: need one per list");
    for (double p : config.fixed_theta)
      if (!(p > 0.0) || !(p < 1.0))
        throw ConstraintError("fixed capture probabilities must lie in (0,1)");
  }
  const long n_obs = table.n_obs();
  if (config.n_max != 0 && config.n_max < n_obs)
    throw ConstraintError("size prior truncation below observed count");
  if (config.prior_kind == SizePrior::Kind::Uniform && config.n_max <= 0)
    throw ConstraintError("uniform size prior requires a truncation point");

  const bool prior_only = table.counts.empty();
  const bool theta_fixed = !config.fixed_theta.empty();

  Rng rng(config.seed);
  std::vector<std::vector<double>> theta(S, std::vector<double>(k, 0.5));
  if (theta_fixed) theta[0] = config.fixed_theta;
  std::vector<double> V(S, 0.5);
  std::vector<double> log1mV(S, std::log(0.5));  // exact ln(1-V) for the rate
  V[S - 1] = 1.0;
  double a_sb = 1.0;
  long n0 = 0;

  LcmcrResult res;
  const long save_count = config.mcmc.saved_draws();
  res.n_draws.reserve(save_count);
  res.a_sb_draws.reserve(save_count);
  res.pi_draws.reserve(save_count);
  double share_sum = 0.0;

  std::vector<double> pi(S), class_w(S), class_lw(S);
  std::vector<std::vector<long>> captures(S, std::vector<long>(k));
  std::vector<std::vector<long>> misses(S, std::vector<long>(k));
  std::vector<long> class_total(S);

  for (int iter = 1; iter <= config.mcmc.iters; ++iter) {
    double stick = 1.0;
    for (int s = 0; s < S; ++s) {
      pi[s] = V[s] * stick;
      stick *= 1.0 - V[s];
    }

    // (1) missed count given the current mixture's miss probability.
    if (!prior_only) {
      double theta0 = 0.0;
      double theta_min = 1.0;
      for (int f = 0; f < k; ++f) {
        double cap_f = 0.0;
        for (int s = 0; s < S; ++s) cap_f += pi[s] * theta[s][f];
        theta_min = std::min(theta_min, cap_f);
      }
      for (int s = 0; s < S; ++s) {
        double miss = pi[s];
        for (int f = 0; f < k; ++f) miss *= 1.0 - theta[s][f];
        theta0 += miss;
      }
      theta0 = clamp_prob(theta0);

      const double guard =
          10.0 * static_cast<double>(n_obs) * std::max(1.0, 1.0 / std::max(theta_min, 1e-6));
      long grid_cap = static_cast<long>(std::min(guard, 1e7));
      res.cap = grid_cap;
      if (config.n_max > 0) grid_cap = std::min(grid_cap, config.n_max - n_obs);
      const auto draw = draw_missed(rng, n_obs, theta0, config.prior_kind, grid_cap);
      n0 = draw.n0;
      // Truncation the caller asked for is not a cap event; the guard is.
      if (draw.capped && (config.n_max <= 0 || grid_cap < config.n_max - n_obs))
        res.cap_hit = true;
    }

    // (2) class assignments, one multinomial per distinct history. The
    // augmented all-zero cell goes first.
    for (int s = 0; s < S; ++s) {
      class_total[s] = 0;
      std::fill(captures[s].begin(), captures[s].end(), 0L);
      std::fill(misses[s].begin(), misses[s].end(), 0L);
    }
    const auto assign_pattern = [&](std::uint32_t mask, long count) {
      if (count == 0) return;
      std::vector<long> cls;
      if (S == 1) {
        cls.assign(1, count);
      } else {
        double mx = -1e300;
        for (int s = 0; s < S; ++s) {
          double lw = std::log(std::max(pi[s], 1e-300));
          for (int f = 0; f < k; ++f)
            lw += (mask >> f & 1u) ? std::log(theta[s][f]) : std::log1p(-theta[s][f]);
          class_lw[s] = lw;
          mx = std::max(mx, lw);
        }
        double tot = 0.0;
        for (int s = 0; s < S; ++s) tot += class_w[s] = std::exp(class_lw[s] - mx);
        for (int s = 0; s < S; ++s) class_w[s] /= tot;
        cls = rng.multinomial(count, class_w);
      }
      for (int s = 0; s < S; ++s) {
        if (cls[s] == 0) continue;
        class_total[s] += cls[s];
        for (int f = 0; f < k; ++f)
          ((mask >> f & 1u) ? captures : misses)[s][f] += cls[s];
      }
    };
    assign_pattern(0, n0);
    for (const auto& [mask, count] : table.counts) assign_pattern(mask, count);

    // (3) per-class capture probabilities.
    if (!theta_fixed)
      for (int s = 0; s < S; ++s)
        for (int f = 0; f < k; ++f)
          theta[s][f] = clamp_prob(rng.beta(1.0 + static_cast<double>(captures[s][f]),
                                            1.0 + static_cast<double>(misses[s][f])));

    // (4) stick weights, drawn in log space so ln(1-V) stays exact when the
    // concentration gets small and V crowds 1.
    long above = 0;
    for (int s = 0; s < S; ++s) above += class_total[s];
    for (int t = 0; t + 1 < S; ++t) {
      above -= class_total[t];
      const auto [v, l1m] = rng.beta_log1m(1.0 + static_cast<double>(class_total[t]),
                                           a_sb + static_cast<double>(above));
      V[t] = v;
      log1mV[t] = l1m;
    }

    // (5) concentration.
    double rate = 0.25;
    for (int t = 0; t + 1 < S; ++t) rate -= log1mV[t];
    a_sb = rng.gamma(0.25 + static_cast<double>(S - 1), rate);

    if (iter > config.mcmc.burnin && (iter - config.mcmc.burnin) % config.mcmc.thin == 0) {
      res.n_draws.push_back(n_obs + n0);
      res.a_sb_draws.push_back(a_sb);
      double stick2 = 1.0;
      std::vector<double> pi_now(S);
      for (int s = 0; s < S; ++s) {
        pi_now[s] = V[s] * stick2;
        stick2 *= 1.0 - V[s];
      }
      res.pi_draws.push_back(std::move(pi_now));
      const long total_now = n_obs + n0;
      share_sum += total_now > 0 ? static_cast<double>(class_total[S - 1]) / total_now : 0.0;
    }
  }
  res.last_class_share = res.n_draws.empty() ? 0.0 : share_sum / res.n_draws.size();
  return res;
}

}  // namespace linkmse
