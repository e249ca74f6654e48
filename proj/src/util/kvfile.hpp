#ifndef LINKMSE_UTIL_KVFILE_HPP
#define LINKMSE_UTIL_KVFILE_HPP

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace linkmse {

// Flat config format: "[section]" headers, "key = value" lines, '#' comments.
// Sections may repeat; entries keep file order.
struct KvSection {
  std::string name;
  std::vector<std::pair<std::string, std::string>> entries;

  std::optional<std::string> get(const std::string& key) const;
  std::string require(const std::string& key) const;
  double require_double(const std::string& key) const;
  long require_long(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  long get_long(const std::string& key, long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<std::string> values(const std::string& key) const;  // all repeats
};

struct KvFile {
  std::vector<KvSection> sections;

  const KvSection* find(const std::string& name) const;
  std::vector<const KvSection*> find_all(const std::string& name) const;
};

KvFile read_kvfile(const std::string& path);
KvFile parse_kvfile(const std::string& text, const std::string& origin);

std::vector<std::string> split_list(const std::string& value);  // comma/space separated
std::string trim(const std::string& s);

}  // namespace linkmse

#endif
