#ifndef LINKMSE_COMPARE_COMPARE_HPP
#define LINKMSE_COMPARE_COMPARE_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ingest/records.hpp"

namespace linkmse {

enum class MeasureKind { NormalizedEdit, AbsoluteDifference, Binary };

// Per-field comparison spec. `bounds` are the inclusive upper endpoints of
// levels 0..L-1; values beyond the last bound land in level L. Level 0 always
// starts at the measure's minimum, intervals are left-open right-closed.
struct FieldCompareSpec {
  std::string field_name;
  int field_index = -1;  // into the record schema
  MeasureKind measure = MeasureKind::Binary;
  std::vector<double> bounds;  // empty for binary (levels agree=0 / disagree=1)
  bool permute_tokens = true;  // token-order alignment for edit distance

  int num_levels() const {  // L_f: number of non-zero levels
    return measure == MeasureKind::Binary ? 1 : static_cast<int>(bounds.size());
  }
};

struct FixRule {
  int spec_index = -1;  // into ComparisonConfig::fields
  int min_level = 0;    // fires when observed level >= min_level
};

struct ComparisonConfig {
  std::vector<FieldCompareSpec> fields;
  std::vector<FixRule> fix_rules;
  int blocking_index = -1;  // schema field index, -1 = no blocking
  std::string blocking_field;
};

ComparisonConfig read_compare_config(const std::string& path, const Schema& schema);

constexpr std::int8_t kLevelMissing = -1;

struct PairLevels {
  std::uint32_t i = 0, j = 0;  // i < j
  std::vector<std::int8_t> levels;  // per config field, kLevelMissing when unobserved
};

// All compared pairs (the set P), materialized. Fine for small inputs and for
// oracle tests; the streaming builder below is what the CLI uses.
struct ComparisonSet {
  std::vector<FieldCompareSpec> fields;
  std::vector<PairLevels> pairs;
  std::size_t record_count = 0;
};

struct CandidateSets {
  std::vector<FieldCompareSpec> fields;
  std::size_t record_count = 0;
  std::vector<std::size_t> list_sizes;
  std::size_t total_pairs = 0;                   // |P|
  std::vector<PairLevels> candidates;            // C, full vectors, (i,j) order
  std::vector<std::vector<long>> fixed_tallies;  // per field, per level: observed counts in P \ C
  std::vector<std::vector<std::uint32_t>> components;  // over records touched by C

  std::size_t candidate_count() const { return candidates.size(); }
};

double levenshtein(const std::string& a, const std::string& b);

// Min over token-order alignments of Levenshtein on the concatenated tokens,
// divided by the longer concatenation. Sides with <= 3 tokens try every
// permutation, longer sides only adjacent swaps. Symmetric in (a, b).
double normalized_edit_distance(const std::vector<std::string>& a,
                                const std::vector<std::string>& b,
                                bool permute = true);

int discretize(double value, const FieldCompareSpec& spec);

ComparisonSet build_comparisons(const RecordStore& store, const ComparisonConfig& config);

CandidateSets filter_candidates(const ComparisonSet& all, const ComparisonConfig& config,
                                const std::vector<std::size_t>& list_sizes);

// Single pass over P: candidate vectors kept, non-candidates tallied only.
CandidateSets build_candidates(const RecordStore& store, const ComparisonConfig& config);

void write_candidates(const CandidateSets& cs, const std::string& dir);
CandidateSets read_candidates(const std::string& dir);

}  // namespace linkmse

#endif
