#include "linkage/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "util/errors.hpp"
#include "util/kvfile.hpp"

namespace linkmse {

void McmcConfig::validate() const {
  if (iters <= 0) throw ConstraintError("iters must be positive");
  if (burnin < 0 || burnin >= iters) throw ConstraintError("burn-in must lie in [0, iters)");
  if (thin < 1) throw ConstraintError("thin must be >= 1");
  if (saved_draws() < 1) throw ConstraintError("no draws survive burn-in and thinning");
}

SweepState::SweepState(std::size_t record_count)
    : labels_(record_count), members_(record_count), nonempty_(record_count) {
  for (std::uint32_t i = 0; i < record_count; ++i) {
    labels_[i] = i;
    members_[i] = {i};
  }
}

Labeling SweepState::canonical_labels() const {
  Labeling out(labels_.size());
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    const auto& mem = members_[labels_[i]];
    out[i] = *std::min_element(mem.begin(), mem.end());
  }
  return out;
}

void SweepState::detach(std::uint32_t rec) {
  auto& mem = members_[labels_[rec]];
  mem.erase(std::find(mem.begin(), mem.end(), rec));
  if (mem.empty()) {
    free_ids_.push_back(labels_[rec]);
    --nonempty_;
  }
}

void SweepState::attach(std::uint32_t rec, std::uint32_t cluster) {
  if (members_[cluster].empty()) ++nonempty_;
  members_[cluster].push_back(rec);
  labels_[rec] = cluster;
}

std::uint32_t SweepState::fresh_cluster() {
  const std::uint32_t id = free_ids_.back();
  free_ids_.pop_back();
  return id;
}

void SweepState::sweep(const CandidateGraph& graph, const CandidateSets& cs,
                       const LogLikTables& tables, Rng& rng) {
  const double r = static_cast<double>(labels_.size());
  std::vector<double> log_w;
  std::vector<std::uint32_t> move_cluster;
  std::vector<std::uint32_t> candidate_clusters;

  for (std::uint32_t j = 0; j < labels_.size(); ++j) {
    const auto& nbrs = graph.neighbors(j);
    if (nbrs.empty()) continue;

    detach(j);
    const double q = static_cast<double>(nonempty_);  // clusters among the others

    log_w.assign(1, 0.0);  // stay a singleton
    move_cluster.assign(1, 0);
    candidate_clusters.clear();
    for (std::uint32_t k : nbrs) {
      const std::uint32_t c = labels_[k];
      bool new_cluster = true;
      for (std::uint32_t seen : candidate_clusters) new_cluster = new_cluster && seen != c;
      if (new_cluster) candidate_clusters.push_back(c);
    }
    for (std::uint32_t c : candidate_clusters) {
      double delta = 0.0;
      bool ok = true;
      for (std::uint32_t k : members_[c]) {
        const long pi = graph.pair_index(j, k);
        if (pi < 0) {  // joining would put a non-candidate pair in one cluster
          ok = false;
          break;
        }
        const auto& levels = cs.candidates[pi].levels;
        delta += log_lik_pair(levels, tables.log1) - log_lik_pair(levels, tables.log0);
      }
      if (!ok) continue;
      log_w.push_back(std::log(r - q) + delta);
      move_cluster.push_back(c);
    }

    const std::size_t pick = rng.categorical_log(log_w);
    // After detach at most r-1 records occupy clusters, so the id pool is
    // never empty here.
    attach(j, pick == 0 ? fresh_cluster() : move_cluster[pick]);
  }
}

LinkageChain run_linkage_sampler(const CandidateSets& cs, const PriorTruncations& lambda,
                                 const McmcConfig& config, std::uint64_t seed) {
  config.validate();
  if (lambda.size() != cs.fields.size())
    throw ConstraintError("priors do not match comparison fields");

  LinkageChain chain;
  chain.record_count = cs.record_count;
  chain.list_sizes = cs.list_sizes;
  chain.seed = seed;
  chain.config = config;
  chain.draws.reserve(static_cast<std::size_t>(config.saved_draws()));

  Rng rng(seed);
  const CandidateGraph graph(cs);
  SweepState state(cs.record_count);
  for (long t = 1; t <= config.iters; ++t) {
    const LinkageParams params = gibbs_update_params(state.labels(), cs, lambda, rng);
    const LogLikTables tables = build_log_tables(params);
    state.sweep(graph, cs, tables, rng);
    if (t > config.burnin && (t - config.burnin) % config.thin == 0)
      chain.draws.push_back(state.canonical_labels());
  }
  return chain;
}

void write_chain(const LinkageChain& chain, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << "# seed=" << chain.seed << " iters=" << chain.config.iters
      << " burnin=" << chain.config.burnin << " thin=" << chain.config.thin
      << " records=" << chain.record_count << " list_sizes=";
  for (std::size_t k = 0; k < chain.list_sizes.size(); ++k)
    out << (k ? "," : "") << chain.list_sizes[k];
  out << "\n";
  for (const Labeling& z : chain.draws) {
    for (std::size_t i = 0; i < z.size(); ++i) out << (i ? " " : "") << z[i];
    out << "\n";
  }
  if (!out) throw IoError("write failed: " + path);
}

LinkageChain read_chain(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::string header;
  if (!std::getline(in, header) || header.rfind("# ", 0) != 0)
    throw ParseError(path + ": missing draw-file header");

  LinkageChain chain;
  std::istringstream hs(header.substr(2));
  std::string kv;
  while (hs >> kv) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ParseError(path + ": bad header token '" + kv + "'");
    const std::string key = kv.substr(0, eq), value = kv.substr(eq + 1);
    try {
      if (key == "seed") chain.seed = std::stoull(value);
      else if (key == "iters") chain.config.iters = std::stol(value);
      else if (key == "burnin") chain.config.burnin = std::stol(value);
      else if (key == "thin") chain.config.thin = std::stol(value);
      else if (key == "records") chain.record_count = std::stoul(value);
      else if (key == "list_sizes")
        for (const std::string& s : split_list(value))
          chain.list_sizes.push_back(std::stoul(s));
      else throw ParseError(path + ": unknown header key '" + key + "'");
    } catch (const ParseError&) {
      throw;
    } catch (...) {
      throw ParseError(path + ": bad header value '" + kv + "'");
    }
  }
  if (chain.record_count == 0) throw ParseError(path + ": header lacks record count");
  if (chain.list_sizes.empty()) throw ParseError(path + ": header lacks list sizes");

  std::size_t total = 0;
  for (std::size_t s : chain.list_sizes) total += s;
  if (total != chain.record_count)
    throw ParseError(path + ": list sizes do not sum to record count");

  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    std::istringstream ls(line);
    Labeling z;
    z.reserve(chain.record_count);
    std::uint32_t label;
    while (ls >> label) z.push_back(label);
    if (z.size() != chain.record_count)
      throw ParseError(path + ": draw " + std::to_string(chain.draws.size() + 1) +
                       " has wrong length");
    chain.draws.push_back(std::move(z));
  }
  if (chain.draws.empty()) throw ParseError(path + ": no draws");
  return chain;
}

}  // namespace linkmse
