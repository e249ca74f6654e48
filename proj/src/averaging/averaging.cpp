#include "averaging/averaging.hpp"

#include <algorithm>
#include <cmath>

#include "histories/histories.hpp"
#include "util/errors.hpp"
#include "util/special.hpp"

namespace linkmse {

std::array<double, 3> VarianceDecomposition::shares() const {
  const double t = total();
  if (!(t > 0.0)) return {0.0, 0.0, 1.0};
  return {linkage / t, model / t, residual / t};
}

VarianceDecomposition variance_decomposition(const std::vector<DrawMoments>& per_draw) {
  if (per_draw.empty()) throw ConstraintError("variance decomposition needs at least one draw");
  const double d = static_cast<double>(per_draw.size());
  double mm = 0.0;
  for (const auto& m : per_draw) mm += m.mean;
  mm /= d;
  VarianceDecomposition out;
  for (const auto& m : per_draw) {
    out.linkage += (m.mean - mm) * (m.mean - mm);
    out.residual += m.variance;
  }
  out.linkage /= d;
  out.residual /= d;
  return out;
}

VarianceDecomposition variance_decomposition_model(const std::vector<ModelLayer>& per_draw) {
  if (per_draw.empty()) throw ConstraintError("variance decomposition needs at least one draw");
  const double d = static_cast<double>(per_draw.size());
  std::vector<double> draw_means;
  VarianceDecomposition out;
  for (const auto& layer : per_draw) {
    if (layer.models.size() != layer.weights.size() || layer.models.empty())
      throw ConstraintError("model layer needs matching nonempty moments and weights");
    double wsum = 0.0;
    for (double w : layer.weights) wsum += w;
    if (std::abs(wsum - 1.0) > 1e-9)
      throw ConstraintError("model weights must sum to 1 within each draw");

    double e = 0.0;
    for (std::size_t m = 0; m < layer.models.size(); ++m)
      e += layer.weights[m] * layer.models[m].mean;
    double between = 0.0, within = 0.0;
    for (std::size_t m = 0; m < layer.models.size(); ++m) {
      const double dm = layer.models[m].mean - e;
      between += layer.weights[m] * dm * dm;
      within += layer.weights[m] * layer.models[m].variance;
    }
    draw_means.push_back(e);
    out.model += between / d;
    out.residual += within / d;
  }
  double mm = 0.0;
  for (double e : draw_means) mm += e;
  mm /= d;
  for (double e : draw_means) out.linkage += (e - mm) * (e - mm) / d;
  return out;
}

namespace {

template <typename Fill>
AveragedPosterior pool_on_union_grid(long lo, long hi, Fill&& fill) {
  AveragedPosterior out;
  out.pooled.n_min = lo;
  out.pooled.probs.assign(static_cast<std::size_t>(hi - lo) + 1, 0.0);
  fill(out);
  out.decomposition = variance_decomposition(out.per_draw);
  return out;
}

}  // namespace

AveragedPosterior average_closed_form(const std::vector<SizePosterior>& posteriors) {
  if (posteriors.empty()) throw ConstraintError("averaging needs at least one posterior");
  long lo = posteriors.front().n_min, hi = posteriors.front().n_min;
  for (const auto& p : posteriors) {
    if (p.probs.empty()) throw ConstraintError("averaging: empty posterior grid");
    lo = std::min(lo, p.n_min);
    hi = std::max(hi, p.n_min + static_cast<long>(p.probs.size()) - 1);
  }
  const double d = static_cast<double>(posteriors.size());
  return pool_on_union_grid(lo, hi, [&](AveragedPosterior& out) {
    for (const auto& p : posteriors) {
      for (std::size_t i = 0; i < p.probs.size(); ++i)
        out.pooled.probs[static_cast<std::size_t>(p.n_min - lo) + i] += p.probs[i] / d;
      out.per_draw.push_back({p.mean(), p.variance()});
    }
  });
}

AveragedPosterior average_draws(const std::vector<std::vector<long>>& draw_sets) {
  if (draw_sets.empty()) throw ConstraintError("averaging needs at least one draw set");
  long lo = 0, hi = 0;
  bool first = true;
  for (const auto& s : draw_sets) {
    if (s.empty()) throw ConstraintError("averaging: empty draw set");
    for (long v : s) {
      lo = first ? v : std::min(lo, v);
      hi = first ? v : std::max(hi, v);
      first = false;
    }
  }
  const double d = static_cast<double>(draw_sets.size());
  return pool_on_union_grid(lo, hi, [&](AveragedPosterior& out) {
    for (const auto& s : draw_sets) {
      const double w = 1.0 / (d * static_cast<double>(s.size()));
      double m1 = 0.0, m2 = 0.0;
      for (long v : s) {
        out.pooled.probs[static_cast<std::size_t>(v - lo)] += w;
        m1 += static_cast<double>(v);
        m2 += static_cast<double>(v) * static_cast<double>(v);
      }
      m1 /= static_cast<double>(s.size());
      m2 /= static_cast<double>(s.size());
      out.per_draw.push_back({m1, m2 - m1 * m1});
    }
  });
}

JointCheckResult joint_exact_check(const CandidateSets& cs, const PriorTruncations& lambda,
                                   const DecomposableModel& model, const PriorCounts& alpha,
                                   const SizePrior& prior) {
  const auto enumerated = exact_posterior_enumeration(cs, lambda);

  std::vector<SizePosterior> conditionals;
  long lo = prior.n_max;
  for (const auto& z : enumerated.partitions) {
    const auto table = capture_histories(z, cs.list_sizes);
    conditionals.push_back(posterior_N_given_m(table, model, alpha, prior));
    lo = std::min(lo, conditionals.back().n_min);
  }
  const std::size_t width = static_cast<std::size_t>(prior.n_max - lo) + 1;

  // Route one: mix the normalized conditionals by the normalized linkage
  // posterior.
  JointCheckResult res;
  res.averaged.n_min = lo;
  res.averaged.probs.assign(width, 0.0);
  for (std::size_t t = 0; t < conditionals.size(); ++t) {
    const auto& c = conditionals[t];
    for (std::size_t i = 0; i < c.probs.size(); ++i)
      res.averaged.probs[static_cast<std::size_t>(c.n_min - lo) + i] +=
          enumerated.probs[t] * c.probs[i];
  }

  // Route two: assemble the joint (partition, size) mass from the raw
  // linkage weights and normalize once, then marginalize.
  std::vector<double> joint_lw;
  std::vector<std::pair<std::size_t, std::size_t>> joint_idx;  // (partition, offset)
  for (std::size_t t = 0; t < conditionals.size(); ++t) {
    const auto& c = conditionals[t];
    for (std::size_t i = 0; i < c.probs.size(); ++i) {
      if (c.probs[i] <= 0.0) continue;
      joint_lw.push_back(enumerated.log_weights[t] + std::log(c.probs[i]));
      joint_idx.push_back({t, i});
    }
  }
  const double lse = log_sum_exp(joint_lw);
  res.joint.n_min = lo;
  res.joint.probs.assign(width, 0.0);
  for (std::size_t j = 0; j < joint_lw.size(); ++j) {
    const auto [t, i] = joint_idx[j];
    res.joint.probs[static_cast<std::size_t>(conditionals[t].n_min - lo) + i] +=
        std::exp(joint_lw[j] - lse);
  }

  for (std::size_t i = 0; i < width; ++i)
    res.sup_diff = std::max(res.sup_diff, std::abs(res.averaged.probs[i] - res.joint.probs[i]));
  return res;
}

}  // namespace linkmse
