#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "linkmse.h"

namespace {

template <typename T, void (*F)(T*)>
struct Freer {
  void operator()(T* p) const { F(p); }
};
using StorePtr = std::unique_ptr<lm_store, Freer<lm_store, lm_store_free>>;
using CandPtr = std::unique_ptr<lm_candidates, Freer<lm_candidates, lm_candidates_free>>;
using ChainPtr = std::unique_ptr<lm_chain, Freer<lm_chain, lm_chain_free>>;
using PostPtr = std::unique_ptr<lm_posterior, Freer<lm_posterior, lm_posterior_free>>;

// Nonzero exit mirrors the lm_status value; message carries the stage tag.
int finish(const std::string& stage, lm_status s) {
  if (s == LM_OK) return 0;
  std::cerr << "linkmse " << stage << ": " << lm_last_error() << "\n";
  return static_cast<int>(s);
}

std::string summary_path_for(const std::string& out) {
  return std::filesystem::path(out).replace_extension(".summary.json").string();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian record linkage with linkage-averaged population size estimation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", lm_version());
  int rc = 0;

  // ingest: normalize raw list CSVs into one record store
  std::string in_schema, in_out;
  std::vector<std::string> in_lists;
  auto* ingest = app.add_subcommand("ingest", "Read list CSVs into a record store");
  ingest->add_option("--schema", in_schema, "field schema file")->required();
  ingest->add_option("--list", in_lists, "list CSV (repeat per list)")->required();
  ingest->add_option("--out", in_out, "store file to write")->required();
  ingest->callback([&] {
    std::vector<const char*> ptrs;
    for (const auto& l : in_lists) ptrs.push_back(l.c_str());
    lm_store* store = nullptr;
    lm_status s = lm_store_load(in_schema.c_str(), ptrs.data(), ptrs.size(), &store);
    StorePtr holder(store);
    if (s == LM_OK) s = lm_store_save(store, in_out.c_str());
    if (s == LM_OK)
      std::cout << lm_store_records(store) << " records in " << lm_store_lists(store)
                << " lists\n";
    rc = finish("ingest", s);
  });

  // compare: comparison vectors + feasible pair set
  std::string cm_records, cm_schema, cm_config, cm_out;
  auto* compare = app.add_subcommand("compare", "Build comparison vectors and candidate pairs");
  compare->add_option("--records", cm_records, "record store file")->required();
  compare->add_option("--schema", cm_schema, "field schema file")->required();
  compare->add_option("--config", cm_config, "comparison config")->required();
  compare->add_option("--out", cm_out, "output directory")->required();
  compare->callback([&] {
    lm_store* store = nullptr;
    lm_status s = lm_store_open(cm_schema.c_str(), cm_records.c_str(), &store);
    StorePtr sh(store);
    lm_candidates* cands = nullptr;
    if (s == LM_OK) s = lm_candidates_build(store, cm_config.c_str(), &cands);
    CandPtr ch(cands);
    if (s == LM_OK) s = lm_candidates_save(cands, cm_out.c_str());
    if (s == LM_OK)
      std::cout << lm_candidates_pairs(cands) << " candidate pairs of "
                << lm_candidates_total_pairs(cands) << " total\n";
    rc = finish("compare", s);
  });

  // link: partition Gibbs sampler (or the pairwise-mixture baseline)
  std::string lk_cand, lk_priors, lk_out, lk_baseline;
  long lk_iters = 10000, lk_burnin = 1000, lk_thin = 5;
  std::uint64_t lk_seed = 1;
  auto* link = app.add_subcommand("link", "Sample coreference partitions");
  link->add_option("--candidates", lk_cand, "candidate directory")->required();
  link->add_option("--priors", lk_priors, "match-probability prior file")->required();
  link->add_option("--iters", lk_iters, "total sweeps");
  link->add_option("--burnin", lk_burnin, "discarded sweeps");
  link->add_option("--thin", lk_thin, "keep every thin-th sweep");
  link->add_option("--seed", lk_seed, "RNG seed");
  link->add_option("--baseline", lk_baseline, "alternative sampler")
      ->check(CLI::IsMember({"mixture"}));
  link->add_option("--out", lk_out, "draw file to write")->required();
  link->callback([&] {
    lm_candidates* cands = nullptr;
    lm_status s = lm_candidates_open(lk_cand.c_str(), &cands);
    CandPtr ch(cands);
    lm_chain* chain = nullptr;
    double bad_triplets = 0.0;
    if (s == LM_OK) {
      if (lk_baseline == "mixture")
        s = lm_link_run_mixture(cands, lk_priors.c_str(), lk_iters, lk_burnin, lk_thin,
                                lk_seed, &bad_triplets, &chain);
      else
        s = lm_link_run(cands, lk_priors.c_str(), lk_iters, lk_burnin, lk_thin, lk_seed,
                        &chain);
    }
    ChainPtr holder(chain);
    if (s == LM_OK) s = lm_chain_save(chain, lk_out.c_str());
    if (s == LM_OK) {
      std::cout << lm_chain_draws(chain) << " draws saved\n";
      if (lk_baseline == "mixture")
        std::cout << "mean non-transitive triplets per draw: " << bad_triplets << "\n";
    }
    rc = finish("link", s);
  });

  // diag: convergence summaries for a draw file
  std::string dg_draws, dg_cand, dg_out;
  auto* diag = app.add_subcommand("diag", "Convergence diagnostics for a draw file");
  diag->add_option("--draws", dg_draws, "linkage draw file")->required();
  diag->add_option("--candidates", dg_cand, "candidate directory (adds pair link rates)");
  diag->add_option("--out", dg_out, "output directory")->required();
  diag->callback([&] {
    lm_chain* chain = nullptr;
    lm_status s = lm_chain_open(dg_draws.c_str(), &chain);
    ChainPtr holder(chain);
    lm_candidates* cands = nullptr;
    if (s == LM_OK && !dg_cand.empty()) s = lm_candidates_open(dg_cand.c_str(), &cands);
    CandPtr ch(cands);
    if (s == LM_OK) s = lm_diag_write(chain, cands, dg_out.c_str());
    rc = finish("diag", s);
  });

  // simulate: synthetic lists with known truth
  std::string sm_spec, sm_out;
  auto* simulate = app.add_subcommand("simulate", "Generate synthetic lists with known truth");
  simulate->add_option("--spec", sm_spec, "simulation spec file")->required();
  simulate->add_option("--out", sm_out, "output directory")->required();
  simulate->callback([&] { rc = finish("simulate", lm_simulate(sm_spec.c_str(), sm_out.c_str())); });

  // mse-graph: decomposable-model posterior for one table
  std::string mg_table, mg_model, mg_prior = "reciprocal", mg_out;
  bool mg_bma = false;
  long mg_nmax = 0;
  double mg_alpha = 1.0;
  auto* mse_graph = app.add_subcommand("mse-graph", "Size posterior under graphical models");
  mse_graph->add_option("--table", mg_table, "capture-history table file")->required();
  auto* mg_model_opt = mse_graph->add_option("--model", mg_model, "decomposable model name");
  mse_graph->add_flag("--bma", mg_bma, "average over all models (default)")
      ->excludes(mg_model_opt);
  mse_graph->add_option("--prior", mg_prior, "size prior: reciprocal or uniform");
  mse_graph->add_option("--nmax", mg_nmax, "size grid upper bound");
  mse_graph->add_option("--alpha", mg_alpha, "hyper-Dirichlet pseudocount");
  mse_graph->add_option("--out", mg_out, "posterior CSV (summary JSON written alongside)")
      ->required();
  mse_graph->callback([&] {
    lm_posterior* p = nullptr;
    lm_status s = lm_mse_graph(mg_table.c_str(), mg_model.empty() ? nullptr : mg_model.c_str(),
                               mg_prior.c_str(), mg_nmax, mg_alpha, &p);
    PostPtr holder(p);
    if (s == LM_OK)
      s = lm_posterior_write(p, mg_out.c_str(), summary_path_for(mg_out).c_str());
    if (s == LM_OK)
      std::cout << "mean " << lm_posterior_mean(p) << ", mode " << lm_posterior_mode(p)
                << "\n";
    rc = finish("mse-graph", s);
  });

  // mse-lcmcr: latent-class posterior draws for one table
  std::string ml_table, ml_prior = "reciprocal", ml_out;
  int ml_strata = 10;
  long ml_iters = 2000, ml_burnin = 500, ml_thin = 3, ml_nmax = 0;
  std::uint64_t ml_seed = 1;
  auto* mse_lcmcr = app.add_subcommand("mse-lcmcr", "Size posterior under the latent-class model");
  mse_lcmcr->add_option("--table", ml_table, "capture-history table file")->required();
  mse_lcmcr->add_option("--strata", ml_strata, "latent classes");
  mse_lcmcr->add_option("--iters", ml_iters, "total iterations");
  mse_lcmcr->add_option("--burnin", ml_burnin, "discarded iterations");
  mse_lcmcr->add_option("--thin", ml_thin, "keep every thin-th iteration");
  mse_lcmcr->add_option("--seed", ml_seed, "RNG seed");
  mse_lcmcr->add_option("--prior", ml_prior, "size prior: reciprocal or uniform");
  mse_lcmcr->add_option("--nmax", ml_nmax, "truncation for the missed-count draw");
  mse_lcmcr->add_option("--out", ml_out, "draws CSV (summary JSON written alongside)")
      ->required();
  mse_lcmcr->callback([&] {
    lm_posterior* p = nullptr;
    lm_status s = lm_mse_lcmcr(ml_table.c_str(), ml_strata, ml_iters, ml_burnin, ml_thin,
                               ml_seed, ml_prior.c_str(), ml_nmax, &p);
    PostPtr holder(p);
    if (s == LM_OK) s = lm_posterior_write_draws(p, ml_out.c_str());
    if (s == LM_OK) s = lm_posterior_write(p, nullptr, summary_path_for(ml_out).c_str());
    if (s == LM_OK) std::cout << "mean " << lm_posterior_mean(p) << "\n";
    rc = finish("mse-lcmcr", s);
  });

  // average: pool per-draw size posteriors over a linkage chain
  std::string av_draws, av_model = "bma", av_prior = "reciprocal", av_out;
  std::vector<int> av_lists;
  long av_nmax = 0, av_use = 0;
  double av_alpha = 1.0;
  int av_strata = 10;
  long av_iters = 2000, av_burnin = 500, av_thin = 3;
  std::uint64_t av_seed = 1;
  auto* average = app.add_subcommand("average", "Linkage-averaged size estimation");
  average->add_option("--draws", av_draws, "linkage draw file")->required();
  average->add_option("--lists", av_lists, "1-based list subset, e.g. 1,2")->delimiter(',');
  average->add_option("--model", av_model, "bma, lcmcr, or a decomposable model name");
  average->add_option("--prior", av_prior, "size prior: reciprocal or uniform");
  average->add_option("--nmax", av_nmax, "size grid upper bound");
  average->add_option("--alpha", av_alpha, "hyper-Dirichlet pseudocount");
  average->add_option("--use-draws", av_use, "linkage draws fed to the size stage (0 = all)");
  average->add_option("--strata", av_strata, "latent classes (lcmcr)");
  average->add_option("--iters", av_iters, "lcmcr iterations");
  average->add_option("--burnin", av_burnin, "lcmcr burn-in");
  average->add_option("--thin", av_thin, "lcmcr thinning");
  average->add_option("--seed", av_seed, "RNG seed for the size stage");
  average->add_option("--out", av_out, "output directory")->required();
  average->callback([&] {
    lm_chain* chain = nullptr;
    lm_status s = lm_chain_open(av_draws.c_str(), &chain);
    ChainPtr holder(chain);
    if (s == LM_OK) {
      lm_average_opts opts;
      lm_average_opts_init(&opts);
      opts.model = av_model.c_str();
      opts.prior = av_prior.c_str();
      opts.n_max = av_nmax;
      opts.alpha = av_alpha;
      opts.draws = av_use;
      if (!av_lists.empty()) {
        opts.lists = av_lists.data();
        opts.n_lists = av_lists.size();
      }
      opts.lcmcr_strata = av_strata;
      opts.lcmcr_iters = av_iters;
      opts.lcmcr_burnin = av_burnin;
      opts.lcmcr_thin = av_thin;
      opts.seed = av_seed;
      s = lm_average_run(chain, &opts, av_out.c_str());
    }
    rc = finish("average", s);
  });

  // pipeline: every stage from one config
  std::string pl_config, pl_out;
  auto* pipeline = app.add_subcommand("pipeline", "Run all stages from a config file");
  pipeline->add_option("--config", pl_config, "pipeline config file")->required();
  pipeline->add_option("--out", pl_out, "run directory")->required();
  pipeline->callback(
      [&] { rc = finish("pipeline", lm_pipeline(pl_config.c_str(), pl_out.c_str())); });

  // emit-plots: rebuild the plot CSV from a run directory
  std::string ep_run, ep_out;
  auto* emit = app.add_subcommand("emit-plots", "Rebuild plot data from a run directory");
  emit->add_option("--run", ep_run, "run directory")->required();
  emit->add_option("--out", ep_out, "plot CSV to write")->required();
  emit->callback(
      [&] { rc = finish("emit-plots", lm_emit_plots(ep_run.c_str(), ep_out.c_str())); });

  CLI11_PARSE(app, argc, argv);
  return rc;
}
