#include "linkage/model.hpp"

#include <cmath>

#include "util/errors.hpp"
#include "util/kvfile.hpp"
#include "util/special.hpp"

namespace linkmse {

PriorTruncations read_priors(const std::string& path,
                             const std::vector<FieldCompareSpec>& fields) {
  KvFile file = read_kvfile(path);
  PriorTruncations lambda(fields.size());
  std::vector<char> seen(fields.size(), 0);
  for (const KvSection* sec : file.find_all("priors")) {
    const std::string fname = sec->require("field");
    int f = -1;
    for (std::size_t k = 0; k < fields.size(); ++k)
      if (fields[k].field_name == fname) f = static_cast<int>(k);
    if (f < 0) throw ParseError(path + ": priors for unknown field '" + fname + "'");
    if (seen[f]) throw ParseError(path + ": duplicate priors for field '" + fname + "'");
    seen[f] = 1;
    for (const std::string& s : split_list(sec->require("lambda")))
      lambda[f].push_back(std::stod(s));
    if (static_cast<int>(lambda[f].size()) != fields[f].num_levels())
      throw ParseError(path + ": field '" + fname + "' needs " +
                       std::to_string(fields[f].num_levels()) + " lambda values");
    for (double v : lambda[f])
      if (v < 0.0 || v >= 1.0)
        throw ParseError(path + ": lambda must lie in [0,1) for field '" + fname + "'");
  }
  for (std::size_t f = 0; f < fields.size(); ++f)
    if (!seen[f])
      throw ParseError(path + ": missing priors for field '" + fields[f].field_name + "'");
  return lambda;
}

std::vector<double> log_level_probs(const std::vector<double>& seq_params) {
  std::vector<double> out(seq_params.size() + 1);
  double log_survive = 0.0;  // ln prod_{l' < l} (1 - p_l')
  for (std::size_t l = 0; l < seq_params.size(); ++l) {
    out[l] = log_survive + std::log(seq_params[l]);
    log_survive += std::log1p(-seq_params[l]);
  }
  out[seq_params.size()] = log_survive;
  return out;
}

LogLikTables build_log_tables(const LinkageParams& params) {
  LogLikTables t;
  t.log1.reserve(params.m.size());
  t.log0.reserve(params.u.size());
  for (const auto& mf : params.m) t.log1.push_back(log_level_probs(mf));
  for (const auto& uf : params.u) t.log0.push_back(log_level_probs(uf));
  return t;
}

double log_lik_pair(const std::vector<std::int8_t>& levels,
                    const std::vector<std::vector<double>>& table) {
  double sum = 0.0;
  for (std::size_t f = 0; f < levels.size(); ++f)
    if (levels[f] != kLevelMissing) sum += table[f][levels[f]];
  return sum;
}

namespace {

LevelCounts make_counts(int num_levels) {
  LevelCounts c;
  c.at_level.assign(num_levels + 1, 0);
  c.beyond.assign(num_levels, 0);
  return c;
}

void finish_beyond(LevelCounts& c) {
  long above = 0;
  for (int l = static_cast<int>(c.beyond.size()); l >= 1; --l) {
    above += c.at_level[l];
    c.beyond[l - 1] = above;
  }
}

}  // namespace

ParamCounts tally_levels(const std::vector<char>& pair_coref, const CandidateSets& cs) {
  ParamCounts counts;
  for (const auto& spec : cs.fields) {
    counts.coref.push_back(make_counts(spec.num_levels()));
    counts.noncoref.push_back(make_counts(spec.num_levels()));
  }
  for (std::size_t k = 0; k < cs.candidates.size(); ++k) {
    const auto& p = cs.candidates[k];
    for (std::size_t f = 0; f < p.levels.size(); ++f) {
      if (p.levels[f] == kLevelMissing) continue;
      (pair_coref[k] ? counts.coref : counts.noncoref)[f].at_level[p.levels[f]]++;
    }
  }
  // pairs outside C are fixed non-coreferent
  for (std::size_t f = 0; f < cs.fixed_tallies.size(); ++f)
    for (std::size_t l = 0; l < cs.fixed_tallies[f].size(); ++l)
      counts.noncoref[f].at_level[l] += cs.fixed_tallies[f][l];
  for (auto& c : counts.coref) finish_beyond(c);
  for (auto& c : counts.noncoref) finish_beyond(c);
  return counts;
}

ParamCounts tally_levels(const Labeling& z, const CandidateSets& cs) {
  std::vector<char> coref(cs.candidates.size());
  for (std::size_t k = 0; k < cs.candidates.size(); ++k)
    coref[k] = z[cs.candidates[k].i] == z[cs.candidates[k].j];
  return tally_levels(coref, cs);
}

LinkageParams draw_params(const ParamCounts& counts, const PriorTruncations& lambda,
                          Rng& rng) {
  LinkageParams params;
  const std::size_t num_fields = counts.coref.size();
  params.m.resize(num_fields);
  params.u.resize(num_fields);
  for (std::size_t f = 0; f < num_fields; ++f) {
    const int levels = static_cast<int>(counts.coref[f].beyond.size());
    for (int l = 0; l < levels; ++l) {
      const auto& cc = counts.coref[f];
      const auto& nc = counts.noncoref[f];
      double m = sample_beta_truncated(rng, 1.0 + cc.at_level[l], 1.0 + cc.beyond[l],
                                       lambda[f][l]);
      double u = sample_beta_truncated(rng, 1.0 + nc.at_level[l], 1.0 + nc.beyond[l], 0.0);
      // keep log(1-p) finite for the level tables
      params.m[f].push_back(std::min(m, 1.0 - 1e-12));
      params.u[f].push_back(std::min(std::max(u, 1e-12), 1.0 - 1e-12));
    }
  }
  return params;
}

LinkageParams gibbs_update_params(const Labeling& z, const CandidateSets& cs,
                                  const PriorTruncations& lambda, Rng& rng) {
  return draw_params(tally_levels(z, cs), lambda, rng);
}

}  // namespace linkmse
