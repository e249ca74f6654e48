#ifndef LINKMSE_MSE_GRAPHICAL_HPP
#define LINKMSE_MSE_GRAPHICAL_HPP

#include <string>
#include <utility>
#include <vector>

#include "histories/histories.hpp"

namespace linkmse {

// Decomposable independence model over k lists: maximal cliques plus the
// junction-forest separators (nonempty ones only; q connected components
// absorb the empty ones). Nodes are 0-based list positions.
struct DecomposableModel {
  int k = 0;
  std::vector<std::vector<int>> cliques;
  std::vector<std::vector<int>> separators;
  int q = 0;
  std::string name;  // e.g. "[1,2][3]"
};

// k=3: the seven non-saturated decomposable models; k=2: independence only.
// The hard-coded table is re-validated structurally (chordality, maximality,
// components, running-intersection separators) on every call.
std::vector<DecomposableModel> enumerate_decomposable(int k);

// Prior counts over the full 2^k table, dense, index = pattern mask.
struct PriorCounts {
  int k = 0;
  std::vector<double> alpha;

  static PriorCounts constant(int k, double value = 1.0);
};

struct SizePrior {
  enum class Kind { Reciprocal, Uniform };
  Kind kind = Kind::Reciprocal;
  long n_max = 30000;

  double log_weight(long n) const;  // unnormalized
};

// Posterior over N on the grid n_min..n_min+probs.size()-1. Draw-based
// posteriors keep the raw draws alongside the binned pmf.
struct SizePosterior {
  long n_min = 0;
  std::vector<double> probs;
  std::vector<long> draws;

  double mean() const;
  double variance() const;
  long mode() const;                 // smallest argmax
  long quantile(double p) const;     // smallest N with CDF >= p
  std::pair<long, long> central_interval(double coverage) const;
};

SizePosterior posterior_from_draws(const std::vector<long>& draws);

// Log hyper-Dirichlet normalizer: sum of clique-marginal lnGamma terms minus
// separator terms minus q copies of lnGamma(grand total).
double log_psi(const DecomposableModel& model, const std::vector<double>& alpha);

// Log marginal probability of the observed table given total size n_total,
// cell counts integrated out under the hyper-Dirichlet prior.
double log_prob_n_given_Nm(const ContingencyTable& table, long n_total,
                           const DecomposableModel& model, const PriorCounts& alpha);

SizePosterior posterior_N_given_m(const ContingencyTable& table, const DecomposableModel& model,
                                  const PriorCounts& alpha, const SizePrior& prior);

// Posterior over models, uniform model prior.
std::vector<double> model_posterior(const ContingencyTable& table,
                                    const std::vector<DecomposableModel>& models,
                                    const PriorCounts& alpha, const SizePrior& prior);

// Model-averaged posterior; optionally exposes the model weights used.
SizePosterior bma_posterior(const ContingencyTable& table, const PriorCounts& alpha,
                            const SizePrior& prior, std::vector<double>* weights_out = nullptr);

}  // namespace linkmse

#endif
