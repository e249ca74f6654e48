#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "pipeline/pipeline.hpp"
#include "simulate/simulate.hpp"
#include "tmpdir.hpp"
#include "util/errors.hpp"

using namespace linkmse;
namespace fs = std::filesystem;

namespace {

constexpr const char* kSchemaIni =
    "[field]\nname = given\nkind = name-string\n"
    "[field]\nname = family\nkind = name-string\n"
    "[field]\nname = year\nkind = date-year\n"
    "[field]\nname = month\nkind = date-month\n"
    "[field]\nname = day\nkind = date-day\n"
    "[field]\nname = municipality\nkind = categorical\n";

constexpr const char* kCompareIni =
    "[compare]\nfield = given\nmeasure = normalized-edit-distance\nlevels = 0, 0.25, 0.5\n"
    "[compare]\nfield = family\nmeasure = normalized-edit-distance\nlevels = 0, 0.25, 0.5\n"
    "[compare]\nfield = year\nmeasure = absolute-difference\nlevels = 0, 1, 3\n"
    "[compare]\nfield = month\nmeasure = absolute-difference\nlevels = 0, 1\n"
    "[compare]\nfield = day\nmeasure = absolute-difference\nlevels = 0, 3\n"
    "[compare]\nfield = municipality\nmeasure = binary\n"
    "[fix]\nfield = given\nmin_level = 3\n"
    "[fix]\nfield = family\nmin_level = 3\n";

constexpr const char* kPriorsIni =
    "[priors]\nfield = given\nlambda = 0.95, 0.9, 0.8\n"
    "[priors]\nfield = family\nlambda = 0.95, 0.9, 0.8\n"
    "[priors]\nfield = year\nlambda = 0.9, 0.8, 0.7\n"
    "[priors]\nfield = month\nlambda = 0.8, 0.7\n"
    "[priors]\nfield = day\nlambda = 0.7, 0.6\n"
    "[priors]\nfield = municipality\nlambda = 0.8\n";

struct PipelineFixture {
  testutil::TmpDir tmp;
  std::string config_path;

  explicit PipelineFixture(const std::string& mse_lines, long n_true = 150,
                           std::uint64_t sim_seed = 3) {
    SimSpec spec;
    spec.n_true = n_true;
    spec.k = 3;
    spec.capture.theta = {0.55, 0.5, 0.45};
    spec.seed = sim_seed;
    spec.given_names = {"JOSE",  "MARIA",  "JUAN",  "ANA",   "CARLOS", "ROSA",
                        "PEDRO", "IRMA",   "OSCAR", "ELENA", "HECTOR", "MARTA",
                        "FELIX", "GLORIA", "RAUL",  "SONIA"};
    spec.family_names = {"GARCIA", "LOPEZ",  "CRUZ",   "REYES",  "FLORES", "MEJIA",
                         "PINEDA", "DIAZ",   "CAMPOS", "ROMERO", "ORTIZ",  "VEGA",
                         "SOSA",   "FUENTES", "NAVAS",  "LARA"};
    spec.municipalities = {"NORTE", "SUR", "ESTE", "OESTE", "CENTRO"};
    spec.distortion.assign(sim_schema().size(), FieldDistortion{});
    spec.distortion[0].typo = 0.05;
    spec.distortion[1].typo = 0.05;
    spec.distortion[2].shift = 0.05;
    spec.distortion[4].shift = 0.1;
    write_sim_output(generate(spec), tmp.sub("data"));

    tmp.file("schema.ini", kSchemaIni);
    tmp.file("compare.ini", kCompareIni);
    tmp.file("priors.ini", kPriorsIni);
    config_path = tmp.file("pipeline.ini",
                           "[inputs]\n"
                           "list = data/list1.csv\n"
                           "list = data/list2.csv\n"
                           "list = data/list3.csv\n"
                           "schema = schema.ini\n"
                           "compare = compare.ini\n"
                           "priors = priors.ini\n"
                           "[linkage]\niters = 400\nburnin = 100\nthin = 3\n" +
                               mse_lines + "[run]\nseed = 5\n");
  }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::map<std::string, double> series_sums(const std::string& csv_path) {
  std::ifstream in(csv_path);
  std::string line;
  std::getline(in, line);  // header
  std::map<std::string, double> sums;
  while (std::getline(in, line)) {
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    sums[line.substr(0, c1)] += std::stod(line.substr(c2 + 1));
  }
  return sums;
}

std::vector<std::string> files_under(const std::string& dir) {
  std::vector<std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) out.push_back(fs::relative(e.path(), dir).generic_string());
  std::sort(out.begin(), out.end());
  return out;
}

LinkageChain toy_chain() {
  LinkageChain chain;
  chain.record_count = 5;
  chain.list_sizes = {3, 2};
  chain.draws = {{0, 1, 2, 3, 4}, {0, 1, 2, 0, 3}, {0, 1, 2, 1, 2}};
  return chain;
}

}  // namespace

TEST_CASE("simulate-then-pipeline round trip emits a coherent run directory") {
  PipelineFixture fx("[mse]\nmodel = bma\nnmax = 2000\n[averaging]\ndraws = 25\n");
  const auto config = read_pipeline_config(fx.config_path);
  CHECK(config.lists.size() == 3);
  CHECK(config.link_mcmc.iters == 400);
  CHECK(config.mse.model == "bma");
  CHECK(config.seed == 5);

  const auto res = run_pipeline(config, fx.tmp.sub("run"));
  CHECK(res.record_count > 150);  // three captures per individual on average
  CHECK(res.candidate_count > 50);

  const auto& pooled = res.outcome.averaged.pooled;
  double mass = 0.0;
  for (double p : pooled.probs) mass += p;
  CHECK(std::abs(mass - 1.0) < 1e-9);
  CHECK(pooled.mean() > 100.0);
  CHECK(pooled.mean() < 2000.0);
  CHECK(res.outcome.per_draw.size() == 25);
  CHECK(res.outcome.model_names.size() == 7);
  const auto sh = res.outcome.averaged.decomposition.shares();
  CHECK(std::abs(sh[0] + sh[1] + sh[2] - 1.0) < 1e-9);

  for (const char* name :
       {"chain.csv", "candidates", "diag/scalars.csv", "diag/geweke.csv", "diag/acf.csv",
        "diag/link_rates.csv", "averaged.csv", "per_draw_moments.csv", "per_draw_posteriors.csv",
        "decomposition.csv", "decomposition.json", "model_weights.csv", "summary.json",
        "plot_data.csv", "manifest.json"})
    CHECK(fs::exists(fs::path(fx.tmp.sub("run")) / name));

  // The plot bundle can be rebuilt from the run directory alone.
  emit_plots_from_run(fx.tmp.sub("run"), fx.tmp.sub("replot.csv"));
  CHECK(slurp(fx.tmp.sub("replot.csv")) == slurp(fx.tmp.sub("run") + "/plot_data.csv"));

  // One curve per used draw plus the pooled one, each a pmf.
  const auto sums = series_sums(fx.tmp.sub("run") + "/plot_data.csv");
  CHECK(sums.size() == 26);
  for (const auto& [name, sum] : sums) CHECK(std::abs(sum - 1.0) < 1e-9);

  const std::string summary = slurp(fx.tmp.sub("run") + "/summary.json");
  CHECK(summary.find("\"mean\"") != std::string::npos);
  CHECK(summary.find("[1][2][3]") != std::string::npos);
}

TEST_CASE("pipeline reruns byte-identically and notices input changes") {
  PipelineFixture fx("[mse]\nmodel = bma\nnmax = 1500\n[averaging]\ndraws = 10\n", 100, 8);
  const auto config = read_pipeline_config(fx.config_path);
  run_pipeline(config, fx.tmp.sub("a"));
  run_pipeline(config, fx.tmp.sub("b"));

  const auto files = files_under(fx.tmp.sub("a"));
  CHECK(files == files_under(fx.tmp.sub("b")));
  for (const auto& f : files)
    CHECK(slurp(fx.tmp.sub("a") + "/" + f) == slurp(fx.tmp.sub("b") + "/" + f));

  // Touching any input artifact shows up in the manifest's combined hash.
  auto grab_hash = [](const std::string& manifest) {
    const auto pos = manifest.find("combined_input_hash");
    return manifest.substr(pos, manifest.find('\n', pos) - pos);
  };
  fx.tmp.file("priors.ini", std::string(kPriorsIni) + "# tweaked\n");
  run_pipeline(read_pipeline_config(fx.config_path), fx.tmp.sub("c"));
  CHECK(grab_hash(slurp(fx.tmp.sub("a") + "/manifest.json")) !=
        grab_hash(slurp(fx.tmp.sub("c") + "/manifest.json")));
}

TEST_CASE("pipeline failures name their stage") {
  PipelineFixture fx("[mse]\nmodel = bma\nnmax = 1500\n", 40, 12);

  const std::string no_priors = fx.tmp.file("nop.ini",
                                            "[inputs]\n"
                                            "list = data/list1.csv\nlist = data/list2.csv\n"
                                            "list = data/list3.csv\n"
                                            "schema = schema.ini\ncompare = compare.ini\n");
  CHECK_THROWS_WITH_AS(read_pipeline_config(no_priors), doctest::Contains("missing priors"),
                       ParseError);

  auto broken = read_pipeline_config(fx.config_path);
  broken.schema_path = fx.tmp.sub("absent.ini");
  CHECK_THROWS_WITH_AS(run_pipeline(broken, fx.tmp.sub("x1")), doctest::Contains("ingest:"),
                       IoError);

  auto bad_compare = read_pipeline_config(fx.config_path);
  bad_compare.compare_path = fx.tmp.file("badcmp.ini",
                                         "[compare]\nfield = zodiac\nmeasure = binary\n");
  CHECK_THROWS_WITH_AS(run_pipeline(bad_compare, fx.tmp.sub("x2")),
                       doctest::Contains("compare:"), ParseError);

  auto bad_model = read_pipeline_config(fx.config_path);
  bad_model.mse.model = "magic";
  CHECK_THROWS_WITH_AS(run_pipeline(bad_model, fx.tmp.sub("x3")),
                       doctest::Contains("mse: unknown size model"), ConstraintError);
}

TEST_CASE("averaging over a chain matches a per-draw oracle and honors subsets") {
  const auto chain = toy_chain();
  MseSettings settings;
  settings.model = "[1][2]";
  settings.prior.n_max = 400;

  const auto out = average_over_chain(chain, settings, 1);
  CHECK(out.per_draw.size() == 3);
  CHECK(out.unique_tables == 3);
  CHECK_FALSE(out.lcmcr);

  const auto model = enumerate_decomposable(2)[0];
  const auto alpha = PriorCounts::constant(2);
  std::vector<SizePosterior> conditionals;
  for (const auto& z : chain.draws)
    conditionals.push_back(posterior_N_given_m(capture_histories(z, chain.list_sizes), model,
                                               alpha, settings.prior));
  const auto oracle = average_closed_form(conditionals);
  REQUIRE(out.averaged.pooled.probs.size() == oracle.pooled.probs.size());
  for (std::size_t i = 0; i < oracle.pooled.probs.size(); ++i)
    CHECK(std::abs(out.averaged.pooled.probs[i] - oracle.pooled.probs[i]) < 1e-12);

  // Restricting to one kept pair of lists drops the third list's patterns.
  MseSettings subset = settings;
  subset.keep_lists = {1, 2};
  const auto narrowed = average_over_chain(chain, subset, 1);
  CHECK(narrowed.per_draw.size() == 3);

  MseSettings bad = settings;
  bad.keep_lists = {2, 1};
  CHECK_THROWS_AS(average_over_chain(chain, bad, 1), ConstraintError);
  bad.keep_lists = {1, 5};
  CHECK_THROWS_AS(average_over_chain(chain, bad, 1), ConstraintError);
  CHECK_THROWS_AS(average_over_chain(LinkageChain{}, settings, 1), ConstraintError);
}

TEST_CASE("lcmcr averaging caches repeated tables and stays deterministic") {
  auto chain = toy_chain();
  chain.draws.push_back(chain.draws[0]);  // a repeat: same table, cached run

  MseSettings settings;
  settings.model = "lcmcr";
  settings.lcmcr_strata = 4;
  settings.lcmcr_mcmc = {300, 100, 2};
  settings.prior.n_max = 5000;

  const auto a = average_over_chain(chain, settings, 42);
  CHECK(a.lcmcr);
  CHECK(a.per_draw.size() == 4);
  CHECK(a.unique_tables == 3);
  double mass = 0.0;
  for (double p : a.averaged.pooled.probs) mass += p;
  CHECK(std::abs(mass - 1.0) < 1e-9);

  // Identical tables reuse the same sampler output.
  CHECK(a.per_draw.front().probs == a.per_draw.back().probs);

  const auto b = average_over_chain(chain, settings, 42);
  CHECK(a.averaged.pooled.probs == b.averaged.pooled.probs);
  const auto c = average_over_chain(chain, settings, 43);
  CHECK(a.averaged.pooled.probs != c.averaged.pooled.probs);
}

TEST_CASE("plot data carries one series per posterior plus the pooled curve") {
  testutil::TmpDir tmp;
  SizePosterior pooled;
  pooled.n_min = 5;
  pooled.probs = {0.5, 0.5};
  SizePosterior d1;
  d1.n_min = 5;
  d1.probs = {1.0};
  SizePosterior d2;
  d2.n_min = 6;
  d2.probs = {1.0};

  emit_plot_data(pooled, {d1, d2}, tmp.sub("p.csv"));
  auto sums = series_sums(tmp.sub("p.csv"));
  CHECK(sums.size() == 3);
  CHECK(sums.count("pooled") == 1);
  CHECK(sums.count("draw_2") == 1);
  for (const auto& [name, sum] : sums) CHECK(std::abs(sum - 1.0) < 1e-9);

  emit_plot_data(pooled, {}, tmp.sub("q.csv"));
  CHECK(series_sums(tmp.sub("q.csv")).size() == 1);
}

TEST_CASE("pipeline configs resolve relative paths and apply defaults") {
  testutil::TmpDir tmp;
  const std::string path = tmp.file("p.ini",
                                    "[inputs]\n"
                                    "list = d/l1.csv\nlist = d/l2.csv\n"
                                    "schema = s.ini\ncompare = c.ini\npriors = pr.ini\n"
                                    "[mse]\nmodel = lcmcr\nlists = 1, 2\nstrata = 6\n");
  const auto config = read_pipeline_config(path);
  CHECK(config.lists[0] == tmp.sub("d/l1.csv"));
  CHECK(config.schema_path == tmp.sub("s.ini"));
  CHECK(config.mse.model == "lcmcr");
  CHECK(config.mse.keep_lists == std::vector<int>{1, 2});
  CHECK(config.mse.lcmcr_strata == 6);
  CHECK(config.mse.draws_used == 100);
  CHECK(config.link_mcmc.iters == 10000);
  CHECK(config.seed == 1);

  CHECK_THROWS_WITH_AS(
      read_pipeline_config(tmp.file("one.ini", "[inputs]\nlist = a.csv\nschema = s\n"
                                               "compare = c\npriors = p\n")),
      doctest::Contains("two list"), ParseError);
  CHECK_THROWS_AS(read_pipeline_config(tmp.file("empty.ini", "# nothing\n")), ParseError);
}
