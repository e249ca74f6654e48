#include "histories/histories.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

#include "util/csv.hpp"
#include "util/errors.hpp"

namespace linkmse {

long ContingencyTable::n_obs() const {
  long total = 0;
  for (const auto& [mask, count] : counts) total += count;
  return total;
}

std::vector<long> ContingencyTable::dense() const {
  std::vector<long> out(static_cast<std::size_t>(1) << k, 0);
  for (const auto& [mask, count] : counts) out[mask] = count;
  return out;
}

std::string pattern_string(std::uint32_t mask, int k) {
  std::string s(static_cast<std::size_t>(k), '0');
  for (int b = 0; b < k; ++b)
    if (mask & (1u << b)) s[b] = '1';
  return s;
}

std::uint32_t parse_pattern(const std::string& s) {
  std::uint32_t mask = 0;
  for (std::size_t b = 0; b < s.size(); ++b) {
    if (s[b] == '1') mask |= 1u << b;
    else if (s[b] != '0') throw ParseError("bad capture pattern '" + s + "'");
  }
  return mask;
}

ContingencyTable capture_histories(const Labeling& z,
                                   const std::vector<std::size_t>& list_sizes) {
  if (list_sizes.size() < 2) throw ConstraintError("need at least two lists");
  if (list_sizes.size() > kMaxLists)
    throw TooLargeError("more than " + std::to_string(kMaxLists) + " lists");
  std::size_t total = 0;
  for (std::size_t s : list_sizes) total += s;
  if (total != z.size()) throw ConstraintError("list sizes do not sum to record count");

  std::vector<int> list_of(z.size());
  std::size_t pos = 0;
  for (std::size_t k = 0; k < list_sizes.size(); ++k)
    for (std::size_t i = 0; i < list_sizes[k]; ++i) list_of[pos++] = static_cast<int>(k);

  std::unordered_map<std::uint32_t, std::uint32_t> cluster_mask;
  for (std::size_t i = 0; i < z.size(); ++i)
    cluster_mask[z[i]] |= 1u << list_of[i];

  std::map<std::uint32_t, long> by_pattern;
  for (const auto& [label, mask] : cluster_mask) by_pattern[mask]++;

  ContingencyTable table;
  table.k = static_cast<int>(list_sizes.size());
  table.counts.assign(by_pattern.begin(), by_pattern.end());
  return table;
}

ContingencyTable marginalize(const ContingencyTable& table, const std::vector<int>& keep) {
  if (keep.empty()) throw ConstraintError("cannot marginalize to an empty list subset");
  for (std::size_t a = 0; a < keep.size(); ++a) {
    if (keep[a] < 0 || keep[a] >= table.k)
      throw ConstraintError("list position out of range");
    if (a > 0 && keep[a] <= keep[a - 1])
      throw ConstraintError("list subset must be strictly increasing");
  }
  std::map<std::uint32_t, long> by_pattern;
  for (const auto& [mask, count] : table.counts) {
    std::uint32_t projected = 0;
    for (std::size_t b = 0; b < keep.size(); ++b)
      if (mask & (1u << keep[b])) projected |= 1u << b;
    if (projected) by_pattern[projected] += count;
  }
  ContingencyTable out;
  out.k = static_cast<int>(keep.size());
  out.counts.assign(by_pattern.begin(), by_pattern.end());
  return out;
}

void write_table(const ContingencyTable& table, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << "# k=" << table.k << "\n";
  write_csv_row(out, {"pattern", "count"});
  for (const auto& [mask, count] : table.counts)
    write_csv_row(out, {pattern_string(mask, table.k), std::to_string(count)});
  if (!out) throw IoError("write failed: " + path);
}

ContingencyTable read_table(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::string first;
  if (!std::getline(in, first) || first.rfind("# k=", 0) != 0)
    throw ParseError(path + ": missing '# k=' header");
  ContingencyTable table;
  try {
    table.k = std::stoi(first.substr(4));
  } catch (...) {
    throw ParseError(path + ": bad k in header");
  }
  if (table.k < 1 || table.k > kMaxLists) throw ParseError(path + ": k out of range");

  CsvTable csv = parse_csv(in, path);
  if (csv.header != std::vector<std::string>{"pattern", "count"})
    throw ParseError(path + ": expected pattern,count columns");
  std::map<std::uint32_t, long> by_pattern;
  for (const auto& row : csv.rows) {
    if (static_cast<int>(row[0].size()) != table.k)
      throw ParseError(path + ": pattern '" + row[0] + "' length differs from k");
    const std::uint32_t mask = parse_pattern(row[0]);
    if (mask == 0) throw ParseError(path + ": the all-zero pattern is unobservable");
    long count = 0;
    try {
      count = std::stol(row[1]);
    } catch (...) {
      throw ParseError(path + ": bad count '" + row[1] + "'");
    }
    if (count < 0) throw ParseError(path + ": negative count");
    if (by_pattern.count(mask)) throw ParseError(path + ": duplicate pattern '" + row[0] + "'");
    if (count > 0) by_pattern[mask] = count;
  }
  table.counts.assign(by_pattern.begin(), by_pattern.end());
  return table;
}

}  // namespace linkmse
