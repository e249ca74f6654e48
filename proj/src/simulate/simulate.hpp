#ifndef LINKMSE_SIMULATE_SIMULATE_HPP
#define LINKMSE_SIMULATE_SIMULATE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "histories/histories.hpp"
#include "ingest/records.hpp"

namespace linkmse {

// Per-field corruption rates. Typos are single-character substitutions or
// adjacent transpositions on name fields and category flips on categorical
// ones; shifts are symmetric integer offsets on date fields (month and day
// wrap so the result stays parseable).
struct FieldDistortion {
  double typo = 0.0;
  double missing = 0.0;
  double shift = 0.0;
  int shift_max = 2;
};

struct SimCapture {
  enum class Kind { Independence, Cells, LatentClass };
  Kind kind = Kind::Independence;
  std::vector<double> theta;                      // independence: per list
  std::vector<double> cells;                      // dense 1<<k incl. all-zero, sums to 1
  std::vector<double> class_weights;              // latent class
  std::vector<std::vector<double>> class_theta;   // per class, per list
};

// given, family, year, month, day, municipality
Schema sim_schema();

struct SimSpec {
  long n_true = 1000;
  int k = 3;
  SimCapture capture;
  std::vector<FieldDistortion> distortion;  // per schema field; empty = clean
  std::vector<double> duplicate_rate;       // per list; empty = none
  std::vector<std::string> given_names, family_names, municipalities;
  int year_min = 1980, year_max = 1992;
  std::uint64_t seed = 1;

  void validate() const;
};

struct SimOutput {
  RecordStore store;                 // lists concatenated, sim schema
  std::vector<std::uint32_t> truth;  // record index -> individual id
  std::vector<long> true_cells;      // dense 1<<k; [0] = missed by every list

  ContingencyTable true_observed() const;
};

SimOutput generate(const SimSpec& spec);

SimSpec read_sim_spec(const std::string& path);

// list1.csv..listK.csv + truth.csv + true_table.csv; returns the list paths.
std::vector<std::string> write_sim_output(const SimOutput& out, const std::string& dir);

}  // namespace linkmse

#endif
