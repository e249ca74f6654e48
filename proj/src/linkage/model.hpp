#ifndef LINKMSE_LINKAGE_MODEL_HPP
#define LINKMSE_LINKAGE_MODEL_HPP

#include <string>
#include <vector>

#include "compare/compare.hpp"
#include "linkage/partition.hpp"
#include "util/rng.hpp"

namespace linkmse {

// Sequential ("continuation-ratio") parameters of the comparison model: per
// field f and level l in 0..L_f-1, m_fl is the probability of landing at level
// l given the pair is coreferent and no earlier level fired; u_fl the same for
// non-coreferent pairs. Level L_f has no free parameter.
struct LinkageParams {
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> u;
};

// Truncation points of the m-priors, m_fl ~ Uniform[lambda_fl, 1]; shape
// mirrors LinkageParams::m.
using PriorTruncations = std::vector<std::vector<double>>;

// "[priors]" section per field: field = <name>, lambda = <L_f values>.
PriorTruncations read_priors(const std::string& path,
                             const std::vector<FieldCompareSpec>& fields);

// Per-field log level probabilities: entry [f][l] for l in 0..L_f, under the
// coreferent (log1) and non-coreferent (log0) parameter sets.
struct LogLikTables {
  std::vector<std::vector<double>> log1;
  std::vector<std::vector<double>> log0;
};

std::vector<double> log_level_probs(const std::vector<double>& seq_params);
LogLikTables build_log_tables(const LinkageParams& params);

// Sum over observed fields of the level log-probability; missing fields
// contribute zero.
double log_lik_pair(const std::vector<std::int8_t>& levels,
                    const std::vector<std::vector<double>>& table);

// Sufficient statistics of one parameter block: at_level[l] pairs stopped at
// l, beyond[l] survived past l.
struct LevelCounts {
  std::vector<long> at_level;  // length L_f + 1
  std::vector<long> beyond;    // length L_f (computed from at_level)
};

// Tally observed comparison levels of candidate pairs split by coreference
// status, folding the fixed non-coreferent tallies into the u side.
struct ParamCounts {
  std::vector<LevelCounts> coref;
  std::vector<LevelCounts> noncoref;
};
ParamCounts tally_levels(const std::vector<char>& pair_coref, const CandidateSets& cs);
ParamCounts tally_levels(const Labeling& z, const CandidateSets& cs);

LinkageParams draw_params(const ParamCounts& counts, const PriorTruncations& lambda,
                          Rng& rng);
LinkageParams gibbs_update_params(const Labeling& z, const CandidateSets& cs,
                                  const PriorTruncations& lambda, Rng& rng);

}  // namespace linkmse

#endif
