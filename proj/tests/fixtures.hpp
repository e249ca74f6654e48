#ifndef LINKMSE_TESTS_FIXTURES_HPP
#define LINKMSE_TESTS_FIXTURES_HPP

// Hand-built candidate sets for sampler and oracle tests.

#include <cstdint>
#include <string>
#include <vector>

#include "compare/compare.hpp"

namespace testutil {

struct PairSpec {
  std::uint32_t i, j;
  std::vector<std::int8_t> levels;
};

// A comparison field with `levels` non-zero disagreement levels.
inline linkmse::FieldCompareSpec test_field(const std::string& name, int levels) {
  linkmse::FieldCompareSpec spec;
  spec.field_name = name;
  if (levels == 1) {
    spec.measure = linkmse::MeasureKind::Binary;
  } else {
    spec.measure = linkmse::MeasureKind::AbsoluteDifference;
    for (int l = 0; l < levels; ++l) spec.bounds.push_back(static_cast<double>(l));
  }
  return spec;
}

inline linkmse::CandidateSets make_candidates(
    std::size_t record_count, std::vector<std::size_t> list_sizes,
    std::vector<linkmse::FieldCompareSpec> fields, const std::vector<PairSpec>& pairs,
    std::vector<std::vector<long>> fixed_tallies = {}) {
  linkmse::CandidateSets cs;
  cs.record_count = record_count;
  cs.list_sizes = std::move(list_sizes);
  cs.fields = std::move(fields);
  if (fixed_tallies.empty())
    for (const auto& f : cs.fields)
      fixed_tallies.emplace_back(static_cast<std::size_t>(f.num_levels() + 1), 0);
  cs.fixed_tallies = std::move(fixed_tallies);
  for (const auto& p : pairs)
    cs.candidates.push_back(linkmse::PairLevels{p.i, p.j, p.levels});
  cs.total_pairs = record_count * (record_count - 1) / 2;
  return cs;
}

}  // namespace testutil

#endif
