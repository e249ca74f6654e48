#include "linkmse.h"

#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "compare/compare.hpp"
#include "diagnostics/diagnostics.hpp"
#include "histories/histories.hpp"
#include "ingest/records.hpp"
#include "linkage/mixture.hpp"
#include "linkage/sampler.hpp"
#include "mse/graphical.hpp"
#include "mse/lcmcr.hpp"
#include "pipeline/pipeline.hpp"
#include "simulate/simulate.hpp"
#include "util/errors.hpp"

using namespace linkmse;

struct lm_store {
  RecordStore store;
};
struct lm_candidates {
  CandidateSets cs;
};
struct lm_chain {
  LinkageChain chain;
};
struct lm_posterior {
  SizePosterior p;
  std::vector<std::string> model_names;  // bma only
  std::vector<double> model_weights;
  std::vector<long> draws;  // draw-based samplers only
  bool has_draws = false;
};

namespace {

thread_local std::string g_error;

lm_status fail(lm_status s, const std::string& what) {
  g_error = what;
  return s;
}

template <typename F>
lm_status guard(F&& f) noexcept {
  try {
    f();
    g_error.clear();
    return LM_OK;
  } catch (const IoError& e) {
    return fail(LM_ERR_IO, e.what());
  } catch (const ParseError& e) {
    return fail(LM_ERR_PARSE, e.what());
  } catch (const ConstraintError& e) {
    return fail(LM_ERR_CONSTRAINT, e.what());
  } catch (const TooLargeError& e) {
    return fail(LM_ERR_TOO_LARGE, e.what());
  } catch (const NumericError& e) {
    return fail(LM_ERR_NUMERIC, e.what());
  } catch (const std::exception& e) {
    return fail(LM_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(LM_ERR_INTERNAL, "unknown error");
  }
}

bool require(bool ok, const char* what, lm_status* out) {
  if (!ok) *out = fail(LM_ERR_INVALID_ARGUMENT, what);
  return ok;
}

SizePrior::Kind parse_prior(const char* name) {
  const std::string s = name ? name : "reciprocal";
  if (s == "reciprocal") return SizePrior::Kind::Reciprocal;
  if (s == "uniform") return SizePrior::Kind::Uniform;
  throw ConstraintError("unknown size prior '" + s + "' (expected reciprocal or uniform)");
}

McmcConfig mcmc_of(long iters, long burnin, long thin) {
  McmcConfig c;
  c.iters = iters;
  c.burnin = burnin;
  c.thin = thin;
  c.validate();
  return c;
}

}  // namespace

extern "C" {

const char* lm_version(void) { return kLinkmseVersion; }

const char* lm_last_error(void) { return g_error.c_str(); }

/* ---- record stores ------------------------------------------------------ */

lm_status lm_store_load(const char* schema_path, const char* const* list_paths,
                        size_t n_lists, lm_store** out) {
  lm_status bad;
  if (!require(schema_path && list_paths && out, "null argument to lm_store_load", &bad))
    return bad;
  return guard([&] {
    const Schema schema = read_schema(schema_path);
    std::vector<std::string> paths(list_paths, list_paths + n_lists);
    auto* h = new lm_store{load_lists(paths, schema)};
    *out = h;
  });
}

lm_status lm_store_open(const char* schema_path, const char* store_path, lm_store** out) {
  lm_status bad;
  if (!require(schema_path && store_path && out, "null argument to lm_store_open", &bad))
    return bad;
  return guard([&] {
    const Schema schema = read_schema(schema_path);
    *out = new lm_store{read_store(store_path, schema)};
  });
}

lm_status lm_store_save(const lm_store* store, const char* path) {
  lm_status bad;
  if (!require(store && path, "null argument to lm_store_save", &bad)) return bad;
  return guard([&] { write_store(store->store, path); });
}

size_t lm_store_records(const lm_store* store) {
  return store ? store->store.record_count() : 0;
}

size_t lm_store_lists(const lm_store* store) {
  return store ? store->store.list_count() : 0;
}

void lm_store_free(lm_store* store) { delete store; }

/* ---- candidate pairs ---------------------------------------------------- */

lm_status lm_candidates_build(const lm_store* store, const char* compare_path,
                              lm_candidates** out) {
  lm_status bad;
  if (!require(store && compare_path && out, "null argument to lm_candidates_build", &bad))
    return bad;
  return guard([&] {
    const ComparisonConfig cc = read_compare_config(compare_path, store->store.schema);
    *out = new lm_candidates{build_candidates(store->store, cc)};
  });
}

lm_status lm_candidates_open(const char* dir, lm_candidates** out) {
  lm_status bad;
  if (!require(dir && out, "null argument to lm_candidates_open", &bad)) return bad;
  return guard([&] { *out = new lm_candidates{read_candidates(dir)}; });
}

lm_status lm_candidates_save(const lm_candidates* cands, const char* dir) {
  lm_status bad;
  if (!require(cands && dir, "null argument to lm_candidates_save", &bad)) return bad;
  return guard([&] { write_candidates(cands->cs, dir); });
}

size_t lm_candidates_pairs(const lm_candidates* cands) {
  return cands ? cands->cs.candidate_count() : 0;
}

uint64_t lm_candidates_total_pairs(const lm_candidates* cands) {
  return cands ? cands->cs.total_pairs : 0;
}

void lm_candidates_free(lm_candidates* cands) { delete cands; }

/* ---- linkage sampling --------------------------------------------------- */

lm_status lm_link_run(const lm_candidates* cands, const char* priors_path, long iters,
                      long burnin, long thin, uint64_t seed, lm_chain** out) {
  lm_status bad;
  if (!require(cands && priors_path && out, "null argument to lm_link_run", &bad)) return bad;
  return guard([&] {
    const PriorTruncations lambda = read_priors(priors_path, cands->cs.fields);
    *out = new lm_chain{run_linkage_sampler(cands->cs, lambda, mcmc_of(iters, burnin, thin),
                                            seed)};
  });
}

lm_status lm_link_run_mixture(const lm_candidates* cands, const char* priors_path,
                              long iters, long burnin, long thin, uint64_t seed,
                              double* mean_non_transitive, lm_chain** out) {
  lm_status bad;
  if (!require(cands && priors_path && out, "null argument to lm_link_run_mixture", &bad))
    return bad;
  return guard([&] {
    const PriorTruncations lambda = read_priors(priors_path, cands->cs.fields);
    MixtureChain mix =
        run_mixture_sampler(cands->cs, lambda, mcmc_of(iters, burnin, thin), seed);
    double bad_triplets = 0.0;
    for (long c : mix.non_transitive) bad_triplets += static_cast<double>(c);
    if (!mix.non_transitive.empty())
      bad_triplets /= static_cast<double>(mix.non_transitive.size());
    if (mean_non_transitive) *mean_non_transitive = bad_triplets;

    auto* h = new lm_chain{};
    h->chain.record_count = mix.record_count;
    h->chain.list_sizes = mix.list_sizes;
    h->chain.seed = mix.seed;
    h->chain.config = mix.config;
    h->chain.draws = std::move(mix.closure_draws);
    *out = h;
  });
}

lm_status lm_chain_open(const char* path, lm_chain** out) {
  lm_status bad;
  if (!require(path && out, "null argument to lm_chain_open", &bad)) return bad;
  return guard([&] { *out = new lm_chain{read_chain(path)}; });
}

lm_status lm_chain_save(const lm_chain* chain, const char* path) {
  lm_status bad;
  if (!require(chain && path, "null argument to lm_chain_save", &bad)) return bad;
  return guard([&] { write_chain(chain->chain, path); });
}

size_t lm_chain_draws(const lm_chain* chain) { return chain ? chain->chain.draws.size() : 0; }

size_t lm_chain_records(const lm_chain* chain) {
  return chain ? chain->chain.record_count : 0;
}

void lm_chain_free(lm_chain* chain) { delete chain; }

lm_status lm_diag_write(const lm_chain* chain, const lm_candidates* cands,
                        const char* out_dir) {
  lm_status bad;
  if (!require(chain && out_dir, "null argument to lm_diag_write", &bad)) return bad;
  return guard([&] {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
    if (cands)
      for (const auto& c : cands->cs.candidates) pairs.emplace_back(c.i, c.j);
    write_diagnostics(partition_summaries(chain->chain, pairs), out_dir);
  });
}

/* ---- population-size posteriors ----------------------------------------- */

lm_status lm_mse_graph(const char* table_path, const char* model, const char* prior,
                       long n_max, double alpha, lm_posterior** out) {
  lm_status bad;
  if (!require(table_path && out, "null argument to lm_mse_graph", &bad)) return bad;
  return guard([&] {
    const ContingencyTable table = read_table(table_path);
    SizePrior size_prior;
    size_prior.kind = parse_prior(prior);
    if (n_max > 0) size_prior.n_max = n_max;
    const PriorCounts counts = PriorCounts::constant(table.k, alpha);

    auto* h = new lm_posterior{};
    const std::string name = model ? model : "bma";
    if (name == "bma") {
      const auto models = enumerate_decomposable(table.k);
      for (const auto& m : models) h->model_names.push_back(m.name);
      h->p = bma_posterior(table, counts, size_prior, &h->model_weights);
    } else {
      bool found = false;
      for (const auto& m : enumerate_decomposable(table.k))
        if (m.name == name) {
          h->p = posterior_N_given_m(table, m, counts, size_prior);
          found = true;
          break;
        }
      if (!found) {
        delete h;
        throw ConstraintError("unknown size model '" + name + "'");
      }
    }
    *out = h;
  });
}

lm_status lm_mse_lcmcr(const char* table_path, int strata, long iters, long burnin,
                       long thin, uint64_t seed, const char* prior, long n_max,
                       lm_posterior** out) {
  lm_status bad;
  if (!require(table_path && out, "null argument to lm_mse_lcmcr", &bad)) return bad;
  return guard([&] {
    const ContingencyTable table = read_table(table_path);
    LcmcrConfig cfg;
    cfg.strata = strata;
    cfg.mcmc = mcmc_of(iters, burnin, thin);
    cfg.seed = seed;
    cfg.prior_kind = parse_prior(prior);
    if (n_max > 0) cfg.n_max = n_max;
    const LcmcrResult res = run_lcmcr(table, cfg);

    auto* h = new lm_posterior{};
    h->p = res.posterior();
    h->draws = res.n_draws;
    h->has_draws = true;
    *out = h;
  });
}

double lm_posterior_mean(const lm_posterior* p) {
  return p ? p->p.mean() : std::nan("");
}

double lm_posterior_variance(const lm_posterior* p) {
  return p ? p->p.variance() : std::nan("");
}

long lm_posterior_mode(const lm_posterior* p) { return p ? p->p.mode() : 0; }

double lm_posterior_quantile(const lm_posterior* p, double q) {
  if (!p || q < 0.0 || q > 1.0) return std::nan("");
  return static_cast<double>(p->p.quantile(q));
}

lm_status lm_posterior_interval(const lm_posterior* p, double coverage, long* lo, long* hi) {
  lm_status bad;
  if (!require(p && lo && hi, "null argument to lm_posterior_interval", &bad)) return bad;
  return guard([&] {
    const auto [a, b] = p->p.central_interval(coverage);
    *lo = a;
    *hi = b;
  });
}

lm_status lm_posterior_write(const lm_posterior* p, const char* csv_path,
                             const char* summary_json_path) {
  lm_status bad;
  if (!require(p && (csv_path || summary_json_path), "null argument to lm_posterior_write",
               &bad))
    return bad;
  return guard([&] {
    if (csv_path) write_size_posterior_csv(p->p, csv_path);
    if (summary_json_path)
      write_size_summary_json(p->p, p->model_names, p->model_weights, summary_json_path);
  });
}

lm_status lm_posterior_write_draws(const lm_posterior* p, const char* path) {
  lm_status bad;
  if (!require(p && path, "null argument to lm_posterior_write_draws", &bad)) return bad;
  if (!require(p->has_draws, "posterior has no raw draws", &bad)) return bad;
  return guard([&] {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + std::string(path));
    out << "N\n";
    for (long n : p->draws) out << n << "\n";
    if (!out) throw IoError("write failed: " + std::string(path));
  });
}

void lm_posterior_free(lm_posterior* p) { delete p; }

/* ---- linkage-averaged estimation ---------------------------------------- */

void lm_average_opts_init(lm_average_opts* opts) {
  if (!opts) return;
  opts->model = "bma";
  opts->alpha = 1.0;
  opts->prior = "reciprocal";
  opts->n_max = 0;
  opts->draws = 0;
  opts->lists = nullptr;
  opts->n_lists = 0;
  opts->lcmcr_strata = 10;
  opts->lcmcr_iters = 2000;
  opts->lcmcr_burnin = 500;
  opts->lcmcr_thin = 3;
  opts->seed = 1;
}

lm_status lm_average_run(const lm_chain* chain, const lm_average_opts* opts,
                         const char* out_dir) {
  lm_status bad;
  if (!require(chain && opts && out_dir, "null argument to lm_average_run", &bad)) return bad;
  return guard([&] {
    MseSettings settings;
    if (opts->model) settings.model = opts->model;
    settings.alpha = opts->alpha;
    settings.prior.kind = parse_prior(opts->prior);
    if (opts->n_max > 0) settings.prior.n_max = opts->n_max;
    settings.draws_used = opts->draws;
    if (opts->lists)
      settings.keep_lists.assign(opts->lists, opts->lists + opts->n_lists);
    settings.lcmcr_strata = opts->lcmcr_strata;
    settings.lcmcr_mcmc = mcmc_of(opts->lcmcr_iters, opts->lcmcr_burnin, opts->lcmcr_thin);
    write_outcome(average_over_chain(chain->chain, settings, opts->seed), out_dir);
  });
}

/* ---- batch entry points ------------------------------------------------- */

lm_status lm_simulate(const char* spec_path, const char* out_dir) {
  lm_status bad;
  if (!require(spec_path && out_dir, "null argument to lm_simulate", &bad)) return bad;
  return guard([&] { write_sim_output(generate(read_sim_spec(spec_path)), out_dir); });
}

lm_status lm_pipeline(const char* config_path, const char* out_dir) {
  lm_status bad;
  if (!require(config_path && out_dir, "null argument to lm_pipeline", &bad)) return bad;
  return guard([&] { run_pipeline(read_pipeline_config(config_path), out_dir); });
}

lm_status lm_emit_plots(const char* run_dir, const char* out_path) {
  lm_status bad;
  if (!require(run_dir && out_path, "null argument to lm_emit_plots", &bad)) return bad;
  return guard([&] { emit_plots_from_run(run_dir, out_path); });
}

}  // extern "C"
