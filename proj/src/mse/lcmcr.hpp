#ifndef LINKMSE_MSE_LCMCR_HPP
#define LINKMSE_MSE_LCMCR_HPP

#include <cstdint>
#include <vector>

#include "histories/histories.hpp"
#include "linkage/sampler.hpp"
#include "mse/graphical.hpp"

namespace linkmse {

struct LcmcrConfig {
  int strata = 10;  // S; results should be insensitive once this is large
  McmcConfig mcmc;
  std::uint64_t seed = 0;
  SizePrior::Kind prior_kind = SizePrior::Kind::Reciprocal;
  long n_max = 0;  // 0 = untruncated (a memory-guard cap still applies)

  // Test hook: hold the capture probabilities fixed; requires strata == 1.
  // The missed count is then drawn iid from its exact conditional, which has
  // a closed form to check against.
  std::vector<double> fixed_theta;
};

struct LcmcrResult {
  std::vector<long> n_draws;
  std::vector<double> a_sb_draws;            // stick-breaking concentration chain
  std::vector<std::vector<double>> pi_draws;  // class weights at each saved draw
  double last_class_share = 0.0;  // mean share of individuals in class S; large
                                  // values mean strata should be raised
  bool cap_hit = false;  // memory-guard grid cap truncated the missed-count draw
  long cap = 0;          // the cap in effect on the missed count

  SizePosterior posterior() const;
};

// Stick-breaking latent-class capture-recapture sampler. Data augmentation
// over the missed individuals: per iteration the missed count, the class
// assignments, the per-class capture probabilities, the stick weights and the
// concentration are each drawn from their full conditionals.
//
// An empty table switches the likelihood off entirely (missed count pinned at
// zero), leaving a prior-only Gibbs chain over (theta, V, concentration) —
// a joint-distribution sanity hook: the concentration chain must then
// reproduce its Gamma(0.25, 0.25) prior.
LcmcrResult run_lcmcr(const ContingencyTable& table, const LcmcrConfig& config);

}  // namespace linkmse

#endif
