#include "pipeline/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "compare/compare.hpp"
#include "histories/histories.hpp"
#include "ingest/records.hpp"
#include "util/csv.hpp"
#include "util/errors.hpp"
#include "util/hash.hpp"
#include "util/kvfile.hpp"

namespace fs = std::filesystem;

namespace linkmse {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string json_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') {
      out.push_back('\\');
      out.push_back(c);
    } else if (static_cast<unsigned char>(c) < 0x20) {
      char buf[8];
      std::snprintf(buf, sizeof buf, "\\u%04x", c);
      out += buf;
    } else {
      out.push_back(c);
    }
  }
  return out;
}

// Rethrow the in-flight error with the pipeline stage prepended.
template <typename F>
void stage(const char* name, F&& f) {
  auto tag = [name](const char* what) { return std::string(name) + ": " + what; };
  try {
    f();
  } catch (const IoError& e) {
    throw IoError(tag(e.what()));
  } catch (const ParseError& e) {
    throw ParseError(tag(e.what()));
  } catch (const TooLargeError& e) {
    throw TooLargeError(tag(e.what()));
  } catch (const NumericError& e) {
    throw NumericError(tag(e.what()));
  } catch (const ConstraintError& e) {
    throw ConstraintError(tag(e.what()));
  } catch (const std::exception& e) {
    throw ConstraintError(tag(e.what()));
  }
}

std::uint64_t table_hash(const ContingencyTable& t) {
  std::string s = std::to_string(t.k);
  for (const auto& [mask, count] : t.counts) {
    s += '|';
    s += std::to_string(mask);
    s += ':';
    s += std::to_string(count);
  }
  return fnv1a64(s);
}

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t h) {
  std::uint64_t m = fnv1a64(&base, sizeof base);
  return fnv1a64(&h, sizeof h, m);
}

SizePosterior mix_posteriors(const std::vector<SizePosterior>& ps,
                             const std::vector<double>& w) {
  long lo = ps.front().n_min, hi = ps.front().n_min;
  for (const auto& p : ps) {
    lo = std::min(lo, p.n_min);
    hi = std::max(hi, p.n_min + static_cast<long>(p.probs.size()) - 1);
  }
  SizePosterior out;
  out.n_min = lo;
  out.probs.assign(static_cast<std::size_t>(hi - lo) + 1, 0.0);
  for (std::size_t m = 0; m < ps.size(); ++m)
    for (std::size_t i = 0; i < ps[m].probs.size(); ++i)
      out.probs[static_cast<std::size_t>(ps[m].n_min - lo) + i] += w[m] * ps[m].probs[i];
  return out;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  return out;
}

}  // namespace

AverageOutcome average_over_chain(const LinkageChain& chain, const MseSettings& settings,
                                  std::uint64_t seed) {
  if (chain.draws.empty())
    throw ConstraintError("size averaging needs a nonempty linkage chain");
  const int k_full = static_cast<int>(chain.list_sizes.size());
  std::vector<int> keep;
  for (int l : settings.keep_lists) {
    if (l < 1 || l > k_full)
      throw ConstraintError("list subset entry " + std::to_string(l) + " out of range");
    keep.push_back(l - 1);
  }
  for (std::size_t i = 1; i < keep.size(); ++i)
    if (keep[i] <= keep[i - 1])
      throw ConstraintError("list subset must be strictly increasing");
  const int k_eff = keep.empty() ? k_full : static_cast<int>(keep.size());

  const std::size_t total = chain.draws.size();
  const std::size_t d =
      settings.draws_used <= 0
          ? total
          : std::min(static_cast<std::size_t>(settings.draws_used), total);

  std::vector<ContingencyTable> tables;
  std::vector<std::uint64_t> hashes;
  for (std::size_t i = 0; i < d; ++i) {
    ContingencyTable t = capture_histories(chain.draws[i * total / d], chain.list_sizes);
    if (!keep.empty()) t = marginalize(t, keep);
    hashes.push_back(table_hash(t));
    tables.push_back(std::move(t));
  }

  AverageOutcome out;
  if (settings.model == "lcmcr") {
    out.lcmcr = true;
    std::map<std::uint64_t, std::size_t> cache;  // hash -> index into results
    std::vector<LcmcrResult> results;
    std::vector<std::vector<long>> draw_sets;
    for (std::size_t t = 0; t < d; ++t) {
      auto [it, fresh] = cache.try_emplace(hashes[t], results.size());
      if (fresh) {
        LcmcrConfig cfg;
        cfg.strata = settings.lcmcr_strata;
        cfg.mcmc = settings.lcmcr_mcmc;
        cfg.seed = mix_seed(seed, hashes[t]);
        cfg.prior_kind = settings.prior.kind;
        cfg.n_max = settings.prior.n_max;
        results.push_back(run_lcmcr(tables[t], cfg));
      }
      const LcmcrResult& res = results[it->second];
      if (res.cap_hit) out.lcmcr_cap_hit = true;
      draw_sets.push_back(res.n_draws);
      out.per_draw.push_back(posterior_from_draws(res.n_draws));
    }
    out.averaged = average_draws(draw_sets);
    out.unique_tables = cache.size();
    return out;
  }

  const auto models = enumerate_decomposable(k_eff);
  const auto alpha = PriorCounts::constant(k_eff, settings.alpha);
  if (settings.model == "bma") {
    for (const auto& m : models) out.model_names.push_back(m.name);
    struct Entry {
      SizePosterior mixture;
      ModelLayer layer;
      std::vector<double> weights;
    };
    std::map<std::uint64_t, std::size_t> cache;
    std::vector<Entry> entries;
    std::vector<ModelLayer> layers;
    out.model_weight_mean.assign(models.size(), 0.0);
    for (std::size_t t = 0; t < d; ++t) {
      auto [it, fresh] = cache.try_emplace(hashes[t], entries.size());
      if (fresh) {
        Entry e;
        std::vector<SizePosterior> per_model;
        for (const auto& m : models) {
          per_model.push_back(posterior_N_given_m(tables[t], m, alpha, settings.prior));
          e.layer.models.push_back({per_model.back().mean(), per_model.back().variance()});
        }
        e.weights = model_posterior(tables[t], models, alpha, settings.prior);
        e.layer.weights = e.weights;
        e.mixture = mix_posteriors(per_model, e.weights);
        entries.push_back(std::move(e));
      }
      const Entry& e = entries[it->second];
      out.per_draw.push_back(e.mixture);
      layers.push_back(e.layer);
      for (std::size_t m = 0; m < models.size(); ++m)
        out.model_weight_mean[m] += e.weights[m] / static_cast<double>(d);
    }
    out.averaged = average_closed_form(out.per_draw);
    out.averaged.decomposition = variance_decomposition_model(layers);
    out.unique_tables = cache.size();
    return out;
  }

  const DecomposableModel* chosen = nullptr;
  for (const auto& m : models)
    if (m.name == settings.model) chosen = &m;
  if (!chosen) {
    std::string names;
    for (const auto& m : models) names += (names.empty() ? "" : ", ") + m.name;
    throw ConstraintError("unknown size model '" + settings.model +
                          "' (expected bma, lcmcr, or one of: " + names + ")");
  }
  std::map<std::uint64_t, std::size_t> cache;
  std::vector<SizePosterior> conditionals;
  for (std::size_t t = 0; t < d; ++t) {
    auto [it, fresh] = cache.try_emplace(hashes[t], conditionals.size());
    if (fresh)
      conditionals.push_back(posterior_N_given_m(tables[t], *chosen, alpha, settings.prior));
    out.per_draw.push_back(conditionals[it->second]);
  }
  out.averaged = average_closed_form(out.per_draw);
  out.unique_tables = cache.size();
  return out;
}

void emit_plot_data(const SizePosterior& pooled, const std::vector<SizePosterior>& per_draw,
                    const std::string& path) {
  auto out = open_out(path);
  write_csv_row(out, {"series", "N", "density"});
  auto series = [&](const std::string& name, const SizePosterior& p) {
    for (std::size_t i = 0; i < p.probs.size(); ++i)
      write_csv_row(out, {name, std::to_string(p.n_min + static_cast<long>(i)),
                          fmt(p.probs[i])});
  };
  series("pooled", pooled);
  for (std::size_t t = 0; t < per_draw.size(); ++t)
    series("draw_" + std::to_string(t + 1), per_draw[t]);
  if (!out) throw IoError("write failed: " + path);
}

void write_size_posterior_csv(const SizePosterior& p, const std::string& path) {
  auto out = open_out(path);
  write_csv_row(out, {"N", "prob"});
  for (std::size_t i = 0; i < p.probs.size(); ++i)
    write_csv_row(out, {std::to_string(p.n_min + static_cast<long>(i)), fmt(p.probs[i])});
  if (!out) throw IoError("write failed: " + path);
}

void write_size_summary_json(const SizePosterior& p, const std::vector<std::string>& model_names,
                             const std::vector<double>& model_weights, const std::string& path,
                             int cap_hit) {
  auto out = open_out(path);
  const auto [lo, hi] = p.central_interval(0.99);
  out << "{\n";
  out << "  \"mean\": " << fmt(p.mean()) << ",\n";
  out << "  \"variance\": " << fmt(p.variance()) << ",\n";
  out << "  \"mode\": " << p.mode() << ",\n";
  out << "  \"median\": " << p.quantile(0.5) << ",\n";
  out << "  \"interval_99\": [" << lo << ", " << hi << "]";
  if (cap_hit >= 0) out << ",\n  \"cap_hit\": " << (cap_hit ? "true" : "false");
  if (!model_names.empty()) {
    out << ",\n  \"model_weights\": {";
    for (std::size_t m = 0; m < model_names.size(); ++m) {
      if (m) out << ", ";
      out << "\"" << json_escape(model_names[m]) << "\": " << fmt(model_weights[m]);
    }
    out << "}";
  }
  out << "\n}\n";
  if (!out) throw IoError("write failed: " + path);
}

void write_outcome(const AverageOutcome& outcome, const std::string& dir) {
  fs::create_directories(dir);
  write_size_posterior_csv(outcome.averaged.pooled, dir + "/averaged.csv");
  emit_plot_data(outcome.averaged.pooled, outcome.per_draw, dir + "/plot_data.csv");

  {
    auto out = open_out(dir + "/per_draw_moments.csv");
    write_csv_row(out, {"draw", "mean", "variance"});
    for (std::size_t t = 0; t < outcome.averaged.per_draw.size(); ++t)
      write_csv_row(out, {std::to_string(t + 1), fmt(outcome.averaged.per_draw[t].mean),
                          fmt(outcome.averaged.per_draw[t].variance)});
  }
  {
    auto out = open_out(dir + "/per_draw_posteriors.csv");
    write_csv_row(out, {"draw", "N", "prob"});
    for (std::size_t t = 0; t < outcome.per_draw.size(); ++t)
      for (std::size_t i = 0; i < outcome.per_draw[t].probs.size(); ++i)
        write_csv_row(out,
                      {std::to_string(t + 1),
                       std::to_string(outcome.per_draw[t].n_min + static_cast<long>(i)),
                       fmt(outcome.per_draw[t].probs[i])});
  }
  {
    const auto& dec = outcome.averaged.decomposition;
    const auto sh = dec.shares();
    auto out = open_out(dir + "/decomposition.csv");
    write_csv_row(out, {"component", "value", "share"});
    write_csv_row(out, {"linkage", fmt(dec.linkage), fmt(sh[0])});
    write_csv_row(out, {"model", fmt(dec.model), fmt(sh[1])});
    write_csv_row(out, {"residual", fmt(dec.residual), fmt(sh[2])});
    write_csv_row(out, {"total", fmt(dec.total()), fmt(1.0)});

    auto js = open_out(dir + "/decomposition.json");
    js << "{\n";
    js << "  \"linkage\": {\"value\": " << fmt(dec.linkage) << ", \"percent\": "
       << fmt(100.0 * sh[0]) << "},\n";
    js << "  \"model\": {\"value\": " << fmt(dec.model) << ", \"percent\": "
       << fmt(100.0 * sh[1]) << "},\n";
    js << "  \"residual\": {\"value\": " << fmt(dec.residual) << ", \"percent\": "
       << fmt(100.0 * sh[2]) << "},\n";
    js << "  \"total\": " << fmt(dec.total()) << "\n}\n";
    if (!js) throw IoError("write failed: " + dir + "/decomposition.json");
  }
  if (!outcome.model_names.empty()) {
    auto out = open_out(dir + "/model_weights.csv");
    write_csv_row(out, {"model", "mean_weight"});
    for (std::size_t m = 0; m < outcome.model_names.size(); ++m)
      write_csv_row(out, {outcome.model_names[m], fmt(outcome.model_weight_mean[m])});
  }
  write_size_summary_json(outcome.averaged.pooled, outcome.model_names,
                          outcome.model_weight_mean, dir + "/summary.json",
                          outcome.lcmcr ? (outcome.lcmcr_cap_hit ? 1 : 0) : -1);
}

SizePosterior read_size_posterior_csv(const std::string& path) {
  const CsvTable csv = read_csv(path);
  if (csv.column("N") != 0 || csv.column("prob") != 1)
    throw ParseError(path + ": expected N,prob columns");
  SizePosterior p;
  for (std::size_t i = 0; i < csv.rows.size(); ++i) {
    const long n = std::stol(csv.rows[i][0]);
    if (i == 0) p.n_min = n;
    else if (n != p.n_min + static_cast<long>(i))
      throw ParseError(path + ": non-contiguous size grid");
    p.probs.push_back(std::stod(csv.rows[i][1]));
  }
  if (p.probs.empty()) throw ParseError(path + ": empty posterior");
  return p;
}

void emit_plots_from_run(const std::string& run_dir, const std::string& out_path) {
  const SizePosterior pooled = read_size_posterior_csv(run_dir + "/averaged.csv");
  std::vector<SizePosterior> per_draw;
  const std::string pd_path = run_dir + "/per_draw_posteriors.csv";
  if (fs::exists(pd_path)) {
    const CsvTable csv = read_csv(pd_path);
    if (csv.column("draw") != 0 || csv.column("N") != 1 || csv.column("prob") != 2)
      throw ParseError(pd_path + ": expected draw,N,prob columns");
    long current = 0;
    for (const auto& row : csv.rows) {
      const long draw = std::stol(row[0]);
      if (draw != current) {
        if (draw != current + 1)
          throw ParseError(pd_path + ": draw ids must be consecutive from 1");
        per_draw.emplace_back();
        per_draw.back().n_min = std::stol(row[1]);
        current = draw;
      }
      per_draw.back().probs.push_back(std::stod(row[2]));
    }
  }
  emit_plot_data(pooled, per_draw, out_path);
}

void write_diagnostics(const PartitionSummaries& s, const std::string& dir) {
  fs::create_directories(dir);
  const std::vector<const ScalarChain*> chains = {&s.clusters, &s.size1, &s.size2, &s.size3p};
  {
    auto out = open_out(dir + "/scalars.csv");
    write_csv_row(out, {"draw", "n_clusters", "size1", "size2", "size3plus"});
    for (std::size_t t = 0; t < s.clusters.values.size(); ++t)
      write_csv_row(out, {std::to_string(t + 1), fmt(s.clusters.values[t]),
                          fmt(s.size1.values[t]), fmt(s.size2.values[t]),
                          fmt(s.size3p.values[t])});
  }
  {
    auto out = open_out(dir + "/geweke.csv");
    write_csv_row(out, {"chain", "z", "status"});
    for (const ScalarChain* c : chains) {
      std::string z, status = "ok";
      try {
        z = fmt(geweke_z(c->values));
      } catch (const ConstraintError&) {
        status = "short";
      } catch (const NumericError&) {
        status = "degenerate";
      }
      write_csv_row(out, {c->name, z, status});
    }
  }
  {
    auto out = open_out(dir + "/acf.csv");
    write_csv_row(out, {"chain", "lag", "value"});
    const std::size_t len = s.clusters.values.size();
    const int max_lag = static_cast<int>(std::min<std::size_t>(40, len - 1));
    if (max_lag >= 1)
      for (const ScalarChain* c : chains) {
        try {
          const auto a = acf(c->values, max_lag);
          for (int k = 1; k <= max_lag; ++k)
            write_csv_row(out, {c->name, std::to_string(k),
                                fmt(a[static_cast<std::size_t>(k - 1)])});
        } catch (const NumericError&) {
          // flat chain: nothing to report
        }
      }
  }
  {
    auto out = open_out(dir + "/link_rates.csv");
    write_csv_row(out, {"i", "j", "rate"});
    for (std::size_t p = 0; p < s.pairs.size(); ++p)
      write_csv_row(out, {std::to_string(s.pairs[p].first),
                          std::to_string(s.pairs[p].second), fmt(s.link_rate[p])});
  }
}

PipelineConfig read_pipeline_config(const std::string& path) {
  const KvFile file = read_kvfile(path);
  PipelineConfig c;
  c.config_path = path;
  const fs::path base = fs::path(path).parent_path();
  auto resolve = [&](const std::string& p) {
    return fs::path(p).is_absolute() ? p : (base / p).string();
  };

  const KvSection* in = file.find("inputs");
  if (!in) throw ParseError(path + ": missing [inputs] section");
  for (const std::string& l : in->values("list")) c.lists.push_back(resolve(l));
  if (c.lists.size() < 2) throw ParseError(path + ": need at least two list entries");
  c.schema_path = resolve(in->require("schema"));
  c.compare_path = resolve(in->require("compare"));
  const auto priors = in->get("priors");
  if (!priors) throw ParseError(path + ": missing priors");
  c.priors_path = resolve(*priors);

  if (const KvSection* sec = file.find("linkage")) {
    c.link_mcmc.iters = sec->get_long("iters", c.link_mcmc.iters);
    c.link_mcmc.burnin = sec->get_long("burnin", c.link_mcmc.burnin);
    c.link_mcmc.thin = sec->get_long("thin", c.link_mcmc.thin);
  }
  if (const KvSection* sec = file.find("mse")) {
    if (auto v = sec->get("model")) c.mse.model = *v;
    c.mse.alpha = sec->get_double("alpha", c.mse.alpha);
    if (auto v = sec->get("prior")) {
      if (*v == "reciprocal") c.mse.prior.kind = SizePrior::Kind::Reciprocal;
      else if (*v == "uniform") c.mse.prior.kind = SizePrior::Kind::Uniform;
      else throw ParseError(path + ": unknown size prior '" + *v + "'");
    }
    c.mse.prior.n_max = sec->get_long("nmax", c.mse.prior.n_max);
    if (auto v = sec->get("lists"))
      for (const std::string& s : split_list(*v)) c.mse.keep_lists.push_back(std::stoi(s));
    c.mse.lcmcr_strata = static_cast<int>(sec->get_long("strata", c.mse.lcmcr_strata));
    c.mse.lcmcr_mcmc.iters = sec->get_long("iters", c.mse.lcmcr_mcmc.iters);
    c.mse.lcmcr_mcmc.burnin = sec->get_long("burnin", c.mse.lcmcr_mcmc.burnin);
    c.mse.lcmcr_mcmc.thin = sec->get_long("thin", c.mse.lcmcr_mcmc.thin);
  }
  if (const KvSection* sec = file.find("averaging"))
    c.mse.draws_used = sec->get_long("draws", c.mse.draws_used);
  if (const KvSection* sec = file.find("run"))
    c.seed = static_cast<std::uint64_t>(sec->get_long("seed", 1));
  return c;
}

namespace {

void write_manifest(const PipelineConfig& config, const std::string& out_dir) {
  std::vector<std::string> inputs{config.config_path, config.schema_path, config.compare_path,
                                  config.priors_path};
  inputs.insert(inputs.end(), config.lists.begin(), config.lists.end());

  std::uint64_t combined = fnv1a64("linkmse-manifest");
  std::ostringstream in_json;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const std::uint64_t h = hash_file(inputs[i]);
    combined = fnv1a64(hex64(h), combined);
    if (i) in_json << ",\n";
    in_json << "    {\"path\": \"" << json_escape(inputs[i]) << "\", \"hash\": \"" << hex64(h)
            << "\"}";
  }
  combined = fnv1a64(std::to_string(config.seed), combined);

  std::vector<std::string> out_files;
  for (const auto& entry : fs::recursive_directory_iterator(out_dir))
    if (entry.is_regular_file() && entry.path().filename() != "manifest.json")
      out_files.push_back(fs::relative(entry.path(), out_dir).generic_string());
  std::sort(out_files.begin(), out_files.end());

  auto out = open_out(out_dir + "/manifest.json");
  out << "{\n";
  out << "  \"tool\": \"linkmse " << kLinkmseVersion << "\",\n";
  out << "  \"seed\": " << config.seed << ",\n";
  out << "  \"combined_input_hash\": \"" << hex64(combined) << "\",\n";
  out << "  \"inputs\": [\n" << in_json.str() << "\n  ],\n";
  out << "  \"outputs\": [\n";
  for (std::size_t i = 0; i < out_files.size(); ++i) {
    if (i) out << ",\n";
    out << "    {\"path\": \"" << json_escape(out_files[i]) << "\", \"hash\": \""
        << hex64(hash_file(out_dir + "/" + out_files[i])) << "\"}";
  }
  out << "\n  ]\n}\n";
  if (!out) throw IoError("write failed: " + out_dir + "/manifest.json");
}

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& config, const std::string& out_dir) {
  fs::create_directories(out_dir);

  Schema schema;
  RecordStore store;
  stage("ingest", [&] {
    schema = read_schema(config.schema_path);
    store = load_lists(config.lists, schema);
  });

  CandidateSets cs;
  stage("compare", [&] {
    const ComparisonConfig cc = read_compare_config(config.compare_path, schema);
    cs = build_candidates(store, cc);
    write_candidates(cs, out_dir + "/candidates");
  });

  LinkageChain chain;
  stage("link", [&] {
    const PriorTruncations lambda = read_priors(config.priors_path, cs.fields);
    config.link_mcmc.validate();
    chain = run_linkage_sampler(cs, lambda, config.link_mcmc, config.seed);
    write_chain(chain, out_dir + "/chain.csv");
  });

  stage("diag", [&] {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
    for (const auto& c : cs.candidates) pairs.emplace_back(c.i, c.j);
    write_diagnostics(partition_summaries(chain, pairs), out_dir + "/diag");
  });

  PipelineResult res;
  res.dir = out_dir;
  res.record_count = store.record_count();
  res.candidate_count = cs.candidate_count();
  stage("mse", [&] { res.outcome = average_over_chain(chain, config.mse, config.seed); });
  stage("average", [&] { write_outcome(res.outcome, out_dir); });
  stage("manifest", [&] { write_manifest(config, out_dir); });
  return res;
}

}  // namespace linkmse
