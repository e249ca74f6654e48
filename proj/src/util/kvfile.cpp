#include "util/kvfile.hpp"

#include <fstream>
#include <sstream>
#include "util/errors.hpp"

namespace linkmse {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::string token;
  for (char c : value) {
    if (c == ',' || c == ' ' || c == '\t') {
      if (!token.empty()) out.push_back(token);
      token.clear();
    } else {
      token.push_back(c);
    }
  }
  if (!token.empty()) out.push_back(token);
  return out;
}

std::optional<std::string> KvSection::get(const std::string& key) const {
  for (const auto& [k, v] : entries)
    if (k == key) return v;
  return std::nullopt;
}

std::string KvSection::require(const std::string& key) const {
  auto v = get(key);
  if (!v) throw ParseError("section [" + name + "]: missing key '" + key + "'");
  return *v;
}

double KvSection::require_double(const std::string& key) const {
  const std::string v = require(key);
  try {
    std::size_t pos = 0;
    double d = std::stod(v, &pos);
    if (trim(v.substr(pos)).empty()) return d;
  } catch (...) {
  }
  throw ParseError("section [" + name + "]: key '" + key + "' is not a number: " + v);
}

long KvSection::require_long(const std::string& key) const {
  const std::string v = require(key);
  try {
    std::size_t pos = 0;
    long d = std::stol(v, &pos);
    if (trim(v.substr(pos)).empty()) return d;
  } catch (...) {
  }
  throw ParseError("section [" + name + "]: key '" + key + "' is not an integer: " + v);
}

double KvSection::get_double(const std::string& key, double fallback) const {
  return get(key) ? require_double(key) : fallback;
}

long KvSection::get_long(const std::string& key, long fallback) const {
  return get(key) ? require_long(key) : fallback;
}

bool KvSection::get_bool(const std::string& key, bool fallback) const {
  auto v = get(key);
  if (!v) return fallback;
  std::string s = trim(*v);
  if (s == "true" || s == "yes" || s == "1" || s == "on") return true;
  if (s == "false" || s == "no" || s == "0" || s == "off") return false;
  throw ParseError("section [" + name + "]: key '" + key + "' is not a boolean: " + *v);
}

std::vector<std::string> KvSection::values(const std::string& key) const {
  std::vector<std::string> out;
  for (const auto& [k, v] : entries)
    if (k == key) out.push_back(v);
  return out;
}

const KvSection* KvFile::find(const std::string& name) const {
  for (const auto& s : sections)
    if (s.name == name) return &s;
  return nullptr;
}

std::vector<const KvSection*> KvFile::find_all(const std::string& name) const {
  std::vector<const KvSection*> out;
  for (const auto& s : sections)
    if (s.name == name) out.push_back(&s);
  return out;
}

KvFile parse_kvfile(const std::string& text, const std::string& origin) {
  KvFile file;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  KvSection* current = nullptr;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ParseError(origin + ":" + std::to_string(lineno) + ": malformed section header");
      file.sections.push_back(KvSection{trim(line.substr(1, line.size() - 2)), {}});
      current = &file.sections.back();
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
    if (!current) {
      file.sections.push_back(KvSection{"", {}});
      current = &file.sections.back();
    }
    current->entries.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return file;
}

KvFile read_kvfile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_kvfile(ss.str(), path);
}

}  // namespace linkmse
