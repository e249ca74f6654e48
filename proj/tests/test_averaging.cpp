#include <doctest.h>

#include <cmath>
#include <map>
#include <vector>

#include "averaging/averaging.hpp"
#include "histories/histories.hpp"
#include "fixtures.hpp"
#include "util/errors.hpp"
#include "util/rng.hpp"

using namespace linkmse;

namespace {

SizePosterior grid_posterior(long n_min, std::vector<double> probs) {
  SizePosterior p;
  p.n_min = n_min;
  p.probs = std::move(probs);
  return p;
}

SizePosterior random_posterior(Rng& rng) {
  const long n_min = 10 + static_cast<long>(rng.uniform() * 50);
  const std::size_t len = 1 + static_cast<std::size_t>(rng.uniform() * 12);
  std::vector<double> w(len);
  double sum = 0.0;
  for (double& x : w) sum += x = 0.05 + rng.uniform();
  for (double& x : w) x /= sum;
  return grid_posterior(n_min, std::move(w));
}

double pmf_sum(const SizePosterior& p) {
  double s = 0.0;
  for (double x : p.probs) s += x;
  return s;
}

}  // namespace

TEST_CASE("closed-form averaging: identity, point masses, pooled moments") {
  const auto one = average_closed_form({grid_posterior(5, {0.2, 0.3, 0.5})});
  CHECK(one.pooled.n_min == 5);
  REQUIRE(one.pooled.probs.size() == 3);
  CHECK(one.pooled.probs[0] == doctest::Approx(0.2));
  CHECK(one.pooled.probs[2] == doctest::Approx(0.5));
  CHECK(one.decomposition.linkage == doctest::Approx(0.0));
  CHECK(one.decomposition.shares()[0] == doctest::Approx(0.0));

  // Two point masses at 10 and 20: mean 15, variance 25, all of it linkage.
  const auto two = average_closed_form({grid_posterior(10, {1.0}), grid_posterior(20, {1.0})});
  CHECK(two.pooled.mean() == doctest::Approx(15.0));
  CHECK(two.pooled.variance() == doctest::Approx(25.0));
  CHECK(two.decomposition.linkage == doctest::Approx(25.0));
  CHECK(two.decomposition.residual == doctest::Approx(0.0));
  CHECK(two.decomposition.shares()[0] == doctest::Approx(1.0));

  CHECK_THROWS_AS(average_closed_form({}), ConstraintError);
  CHECK_THROWS_AS(average_closed_form({grid_posterior(3, {})}), ConstraintError);
}

TEST_CASE("closed-form averaging matches a double-loop oracle on random input") {
  Rng rng(808);
  std::vector<SizePosterior> posteriors;
  for (int t = 0; t < 100; ++t) posteriors.push_back(random_posterior(rng));

  const auto avg = average_closed_form(posteriors);

  std::map<long, double> oracle;
  for (const auto& p : posteriors)
    for (std::size_t i = 0; i < p.probs.size(); ++i)
      oracle[p.n_min + static_cast<long>(i)] += p.probs[i] / 100.0;

  CHECK(avg.pooled.n_min == oracle.begin()->first);
  for (const auto& [n, mass] : oracle) {
    const auto idx = static_cast<std::size_t>(n - avg.pooled.n_min);
    REQUIRE(idx < avg.pooled.probs.size());
    CHECK(std::abs(avg.pooled.probs[idx] - mass) < 1e-12);
  }
  CHECK(std::abs(pmf_sum(avg.pooled) - 1.0) < 1e-10);

  // Pooled mean equals the mean of conditional means; pooled variance equals
  // the two-term decomposition total.
  double mm = 0.0;
  for (const auto& m : avg.per_draw) mm += m.mean / 100.0;
  CHECK(std::abs(avg.pooled.mean() - mm) < 1e-9);
  CHECK(std::abs(avg.pooled.variance() - avg.decomposition.total()) < 1e-9);
}

TEST_CASE("draw-based averaging with ragged sets uses per-draw weight 1/d") {
  const auto avg = average_draws({{10, 20}, {30}});
  CHECK(avg.pooled.n_min == 10);
  CHECK(avg.pooled.probs[0] == doctest::Approx(0.25));
  CHECK(avg.pooled.probs[10] == doctest::Approx(0.25));
  CHECK(avg.pooled.probs[20] == doctest::Approx(0.5));

  // Identical draw sets: no linkage spread.
  const auto same = average_draws({{5, 7, 9}, {5, 7, 9}});
  CHECK(same.decomposition.linkage == doctest::Approx(0.0));
  CHECK(same.decomposition.shares()[0] == doctest::Approx(0.0));

  // Per-draw constants 10 vs 20: pure linkage spread.
  const auto split = average_draws({{10, 10}, {20, 20}});
  CHECK(split.decomposition.shares()[0] == doctest::Approx(1.0));
  CHECK(split.decomposition.linkage == doctest::Approx(25.0));

  CHECK_THROWS_AS(average_draws({}), ConstraintError);
  CHECK_THROWS_AS(average_draws({{1, 2}, {}}), ConstraintError);
}

TEST_CASE("draw-based averaging matches a weighted-concatenation oracle") {
  Rng rng(1234);
  std::vector<std::vector<long>> sets;
  for (int t = 0; t < 40; ++t) {
    std::vector<long> s;
    const int b = 1 + static_cast<int>(rng.uniform() * 20);
    for (int v = 0; v < b; ++v) s.push_back(50 + static_cast<long>(rng.uniform() * 30));
    sets.push_back(std::move(s));
  }
  const auto avg = average_draws(sets);

  std::map<long, double> oracle;
  for (const auto& s : sets)
    for (long v : s) oracle[v] += 1.0 / (40.0 * static_cast<double>(s.size()));
  for (const auto& [n, mass] : oracle)
    CHECK(std::abs(avg.pooled.probs[static_cast<std::size_t>(n - avg.pooled.n_min)] - mass) <
          1e-12);
  CHECK(std::abs(pmf_sum(avg.pooled) - 1.0) < 1e-10);
  CHECK(std::abs(avg.pooled.variance() - avg.decomposition.total()) < 1e-9);
}

TEST_CASE("two-term decomposition is the law of total variance, always") {
  Rng rng(99);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<SizePosterior> posteriors;
    const int d = 1 + static_cast<int>(rng.uniform() * 12);
    for (int t = 0; t < d; ++t) posteriors.push_back(random_posterior(rng));
    const auto avg = average_closed_form(posteriors);
    const auto dec = avg.decomposition;
    CHECK(std::abs(dec.total() - avg.pooled.variance()) < 1e-9);
    const auto sh = dec.shares();
    CHECK(std::abs(sh[0] + sh[1] + sh[2] - 1.0) < 1e-9);
    CHECK(sh[1] == 0.0);
  }

  // Zero-variance convention: all residual.
  const auto degenerate = average_closed_form({grid_posterior(7, {1.0}), grid_posterior(7, {1.0})});
  const auto sh = degenerate.decomposition.shares();
  CHECK(sh[0] == 0.0);
  CHECK(sh[1] == 0.0);
  CHECK(sh[2] == 1.0);
}

TEST_CASE("three-term decomposition: reduction, pure model spread, identity") {
  // Single model per draw reduces to the two-term split.
  std::vector<ModelLayer> single{{{{10.0, 2.0}}, {1.0}}, {{{14.0, 4.0}}, {1.0}}};
  const auto three = variance_decomposition_model(single);
  const auto two = variance_decomposition({{10.0, 2.0}, {14.0, 4.0}});
  CHECK(three.linkage == doctest::Approx(two.linkage));
  CHECK(three.model == doctest::Approx(0.0));
  CHECK(three.residual == doctest::Approx(two.residual));

  // Same two-point model layer in every draw: all model spread.
  std::vector<ModelLayer> spread{{{{10.0, 0.0}, {20.0, 0.0}}, {0.5, 0.5}},
                                 {{{10.0, 0.0}, {20.0, 0.0}}, {0.5, 0.5}}};
  const auto pure = variance_decomposition_model(spread);
  CHECK(pure.linkage == doctest::Approx(0.0));
  CHECK(pure.model == doctest::Approx(25.0));
  CHECK(pure.residual == doctest::Approx(0.0));
  CHECK(pure.shares()[1] == doctest::Approx(1.0));

  // Random layers: the three terms sum to the pooled mixture variance.
  Rng rng(31);
  for (int rep = 0; rep < 200; ++rep) {
    const int d = 1 + static_cast<int>(rng.uniform() * 8);
    std::vector<ModelLayer> layers;
    double g1 = 0.0, g2 = 0.0;  // pooled first/second moments
    for (int t = 0; t < d; ++t) {
      const int nm = 1 + static_cast<int>(rng.uniform() * 5);
      ModelLayer layer;
      double wsum = 0.0;
      for (int m = 0; m < nm; ++m) {
        layer.models.push_back({rng.uniform(0.0, 100.0), rng.uniform(0.0, 30.0)});
        wsum += layer.weights.emplace_back(0.1 + rng.uniform());
      }
      for (double& w : layer.weights) w /= wsum;
      for (int m = 0; m < nm; ++m) {
        const double w = layer.weights[m] / d;
        g1 += w * layer.models[m].mean;
        g2 += w * (layer.models[m].variance +
                   layer.models[m].mean * layer.models[m].mean);
      }
      layers.push_back(std::move(layer));
    }
    const auto dec = variance_decomposition_model(layers);
    const double pooled_var = g2 - g1 * g1;
    CHECK(std::abs(dec.total() - pooled_var) < 1e-9);
    const auto sh = dec.shares();
    CHECK(std::abs(sh[0] + sh[1] + sh[2] - 1.0) < 1e-9);
  }

  CHECK_THROWS_AS(variance_decomposition_model({{{{1.0, 1.0}}, {0.5}}}), ConstraintError);
  CHECK_THROWS_AS(variance_decomposition_model({}), ConstraintError);
  CHECK_THROWS_AS(variance_decomposition({}), ConstraintError);
}

TEST_CASE("joint-model marginal agrees with linkage averaging on tiny instances") {
  using testutil::make_candidates;
  using testutil::test_field;

  // Three records, two lists (2+1); all pairs are candidates with mixed
  // agreement, so all 5 partitions are feasible.
  const auto cs = make_candidates(
      3, {2, 1}, {test_field("a", 2), test_field("b", 1)},
      {{0, 1, {0, 1}}, {0, 2, {1, 0}}, {1, 2, {2, 1}}});
  const PriorTruncations lambda{{0.7, 0.6}, {0.8}};
  const auto model = enumerate_decomposable(2)[0];
  const auto alpha = PriorCounts::constant(2);
  const SizePrior prior{SizePrior::Kind::Reciprocal, 60};

  const auto res = joint_exact_check(cs, lambda, model, alpha, prior);
  CHECK(res.sup_diff < 1e-12);
  CHECK(std::abs(pmf_sum(res.averaged) - 1.0) < 1e-10);
  CHECK(std::abs(pmf_sum(res.joint) - 1.0) < 1e-10);

  // Independent recombination oracle: mix the trusted per-partition pieces.
  const auto enumerated = exact_posterior_enumeration(cs, lambda);
  REQUIRE(enumerated.partitions.size() == 5);
  std::map<long, double> oracle;
  for (std::size_t t = 0; t < enumerated.partitions.size(); ++t) {
    const auto table = capture_histories(enumerated.partitions[t], cs.list_sizes);
    const auto cond = posterior_N_given_m(table, model, alpha, prior);
    for (std::size_t i = 0; i < cond.probs.size(); ++i)
      oracle[cond.n_min + static_cast<long>(i)] += enumerated.probs[t] * cond.probs[i];
  }
  for (const auto& [n, mass] : oracle)
    CHECK(std::abs(res.averaged.probs[static_cast<std::size_t>(n - res.averaged.n_min)] - mass) <
          1e-12);

  // Forced single partition: averaging returns that conditional unchanged.
  const auto forced = make_candidates(2, {1, 1}, {test_field("a", 2)}, {{0, 1, {0}}});
  PriorTruncations lam2{{0.999999, 0.999999}};
  const auto one = joint_exact_check(forced, lam2, model, alpha, prior);
  CHECK(one.sup_diff < 1e-12);
}
