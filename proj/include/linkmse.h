#ifndef LINKMSE_H
#define LINKMSE_H

/* C interface to the linkmse library. All functions returning lm_status set
 * the thread-local message readable via lm_last_error() on failure. Handles
 * are opaque; every *_free accepts NULL. Paths are UTF-8, NUL-terminated. */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lm_status {
  LM_OK = 0,
  LM_ERR_INVALID_ARGUMENT = 1,
  LM_ERR_IO = 2,
  LM_ERR_PARSE = 3,
  LM_ERR_CONSTRAINT = 4,
  LM_ERR_TOO_LARGE = 5,
  LM_ERR_NUMERIC = 6,
  LM_ERR_INTERNAL = 7
} lm_status;

const char* lm_version(void);
/* Message from the most recent failing call on this thread; "" if none. */
const char* lm_last_error(void);

/* ---- record stores ------------------------------------------------------ */

typedef struct lm_store lm_store;

/* Read a schema file plus two or more list CSVs into a normalized store. */
lm_status lm_store_load(const char* schema_path, const char* const* list_paths,
                        size_t n_lists, lm_store** out);
/* Reopen a store previously written by lm_store_save. */
lm_status lm_store_open(const char* schema_path, const char* store_path, lm_store** out);
lm_status lm_store_save(const lm_store* store, const char* path);
size_t lm_store_records(const lm_store* store);
size_t lm_store_lists(const lm_store* store);
void lm_store_free(lm_store* store);

/* ---- candidate pairs ---------------------------------------------------- */

typedef struct lm_candidates lm_candidates;

lm_status lm_candidates_build(const lm_store* store, const char* compare_path,
                              lm_candidates** out);
lm_status lm_candidates_open(const char* dir, lm_candidates** out);
lm_status lm_candidates_save(const lm_candidates* cands, const char* dir);
size_t lm_candidates_pairs(const lm_candidates* cands);
/* All cross-record pairs before blocking/fixing, as reported by the builder. */
uint64_t lm_candidates_total_pairs(const lm_candidates* cands);
void lm_candidates_free(lm_candidates* cands);

/* ---- linkage sampling --------------------------------------------------- */

typedef struct lm_chain lm_chain;

lm_status lm_link_run(const lm_candidates* cands, const char* priors_path, long iters,
                      long burnin, long thin, uint64_t seed, lm_chain** out);
/* Baseline sampler over pairwise match indicators; saved draws are the
 * transitive closures. mean_non_transitive (optional) receives the average
 * count of non-transitive triplets per saved draw. */
lm_status lm_link_run_mixture(const lm_candidates* cands, const char* priors_path,
                              long iters, long burnin, long thin, uint64_t seed,
                              double* mean_non_transitive, lm_chain** out);
lm_status lm_chain_open(const char* path, lm_chain** out);
lm_status lm_chain_save(const lm_chain* chain, const char* path);
size_t lm_chain_draws(const lm_chain* chain);
size_t lm_chain_records(const lm_chain* chain);
void lm_chain_free(lm_chain* chain);

/* Convergence summaries: scalars.csv, geweke.csv, acf.csv, link_rates.csv.
 * cands may be NULL; then no per-pair co-clustering rates are monitored. */
lm_status lm_diag_write(const lm_chain* chain, const lm_candidates* cands,
                        const char* out_dir);

/* ---- population-size posteriors ----------------------------------------- */

typedef struct lm_posterior lm_posterior;

/* model: a decomposable-model name, or NULL/"bma" for model averaging.
 * prior: "reciprocal" or "uniform". */
lm_status lm_mse_graph(const char* table_path, const char* model, const char* prior,
                       long n_max, double alpha, lm_posterior** out);
/* Latent-class estimator; the handle keeps the raw draws of N. */
lm_status lm_mse_lcmcr(const char* table_path, int strata, long iters, long burnin,
                       long thin, uint64_t seed, const char* prior, long n_max,
                       lm_posterior** out);

double lm_posterior_mean(const lm_posterior* p);
double lm_posterior_variance(const lm_posterior* p);
long lm_posterior_mode(const lm_posterior* p);
double lm_posterior_quantile(const lm_posterior* p, double q);
lm_status lm_posterior_interval(const lm_posterior* p, double coverage, long* lo, long* hi);
/* N,prob grid and/or a JSON summary with mean, 99% central interval and, for
 * model averaging, the model weights. Either path may be NULL (not both). */
lm_status lm_posterior_write(const lm_posterior* p, const char* csv_path,
                             const char* summary_json_path);
/* Raw N draws, one per line; fails unless the posterior came from a
 * draw-based sampler. */
lm_status lm_posterior_write_draws(const lm_posterior* p, const char* path);
void lm_posterior_free(lm_posterior* p);

/* ---- linkage-averaged estimation ---------------------------------------- */

typedef struct lm_average_opts {
  const char* model;  /* "bma", "lcmcr", or a decomposable-model name */
  double alpha;
  const char* prior;  /* "reciprocal" or "uniform" */
  long n_max;
  long draws;         /* linkage draws fed to the size stage; <= 0 means all */
  const int* lists;   /* 1-based list subset, may be NULL */
  size_t n_lists;
  int lcmcr_strata;
  long lcmcr_iters;
  long lcmcr_burnin;
  long lcmcr_thin;
  uint64_t seed;
} lm_average_opts;

void lm_average_opts_init(lm_average_opts* opts);

/* Writes averaged.csv, per_draw_moments.csv, per_draw_posteriors.csv,
 * decomposition.csv/.json, plot_data.csv, summary.json (and model_weights.csv
 * under model averaging) into out_dir. */
lm_status lm_average_run(const lm_chain* chain, const lm_average_opts* opts,
                         const char* out_dir);

/* ---- batch entry points ------------------------------------------------- */

lm_status lm_simulate(const char* spec_path, const char* out_dir);
lm_status lm_pipeline(const char* config_path, const char* out_dir);
/* Rebuild the long-format plot CSV from a finished run directory. */
lm_status lm_emit_plots(const char* run_dir, const char* out_path);

#ifdef __cplusplus
}
#endif

#endif
