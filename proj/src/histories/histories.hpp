#ifndef LINKMSE_HISTORIES_HISTORIES_HPP
#define LINKMSE_HISTORIES_HISTORIES_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "linkage/partition.hpp"

namespace linkmse {

// Observed capture-history counts. Patterns are bit masks over lists: bit
// k-1 set = entity appears in list k; the all-zero pattern is unobservable
// and never stored. Sparse, sorted by mask.
struct ContingencyTable {
  int k = 0;
  std::vector<std::pair<std::uint32_t, long>> counts;  // (pattern, n_h), n_h > 0

  long n_obs() const;
  std::vector<long> dense() const;  // size 1<<k, index = mask, [0] = 0
};

constexpr int kMaxLists = 16;

// In pattern strings the leftmost character is list 1 (bit 0): mask 0b101
// with k=3 prints as "101".
std::string pattern_string(std::uint32_t mask, int k);
std::uint32_t parse_pattern(const std::string& s);

// Records are assigned to lists by concatenation order of list_sizes. Each
// cluster contributes one pattern: the bit-OR of its members' lists.
ContingencyTable capture_histories(const Labeling& z, const std::vector<std::size_t>& list_sizes);

// Project onto the kept list positions (0-based, strictly increasing);
// patterns that become all-zero are dropped.
ContingencyTable marginalize(const ContingencyTable& table, const std::vector<int>& keep);

void write_table(const ContingencyTable& table, const std::string& path);
ContingencyTable read_table(const std::string& path);

}  // namespace linkmse

#endif
