#ifndef LINKMSE_AVERAGING_AVERAGING_HPP
#define LINKMSE_AVERAGING_AVERAGING_HPP

#include <array>
#include <vector>

#include "compare/compare.hpp"
#include "linkage/enumerate.hpp"
#include "mse/graphical.hpp"

namespace linkmse {

struct DrawMoments {
  double mean = 0.0;
  double variance = 0.0;
};

// Law-of-total-variance split of the pooled posterior variance. Terms are
// absolute; between-draw terms use divisor d so the identity is exact on the
// sample. A pooled variance of zero reports as all residual.
struct VarianceDecomposition {
  double linkage = 0.0;
  double model = 0.0;
  double residual = 0.0;

  double total() const { return linkage + model + residual; }
  std::array<double, 3> shares() const;  // {linkage, model, residual}, sum 1
};

struct AveragedPosterior {
  SizePosterior pooled;  // union grid over the per-draw supports
  std::vector<DrawMoments> per_draw;
  VarianceDecomposition decomposition;  // two-term: model component is 0
};

// Pool closed-form per-draw posteriors with equal weight 1/d.
AveragedPosterior average_closed_form(const std::vector<SizePosterior>& posteriors);

// Pool per-draw sampled posteriors; sets may be ragged — each draw still
// carries total weight 1/d, spread over its own draws.
AveragedPosterior average_draws(const std::vector<std::vector<long>>& draw_sets);

VarianceDecomposition variance_decomposition(const std::vector<DrawMoments>& per_draw);

// Per-draw model layer: conditional moments per capture-recapture model plus
// that draw's model weights.
struct ModelLayer {
  std::vector<DrawMoments> models;
  std::vector<double> weights;
};

// Three-term split: linkage (between draws), model (between models within a
// draw), residual (within model).
VarianceDecomposition variance_decomposition_model(const std::vector<ModelLayer>& per_draw);

// Exact small-instance check that averaging the conditional size posteriors
// over the linkage posterior agrees with the marginal of the joint
// (partition, size) model. The two routes are algebraically identical, so any
// sup-distance beyond rounding is implementation drift.
struct JointCheckResult {
  SizePosterior averaged;
  SizePosterior joint;
  double sup_diff = 0.0;
};

JointCheckResult joint_exact_check(const CandidateSets& cs, const PriorTruncations& lambda,
                                   const DecomposableModel& model, const PriorCounts& alpha,
                                   const SizePrior& prior);

}  // namespace linkmse

#endif
