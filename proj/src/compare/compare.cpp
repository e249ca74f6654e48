#include "compare/compare.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "util/csv.hpp"
#include "util/errors.hpp"
#include "util/kvfile.hpp"

namespace linkmse {

namespace {

MeasureKind measure_from_string(const std::string& s) {
  if (s == "normalized-edit-distance") return MeasureKind::NormalizedEdit;
  if (s == "absolute-difference") return MeasureKind::AbsoluteDifference;
  if (s == "binary") return MeasureKind::Binary;
  throw ParseError("unknown measure '" + s + "'");
}

std::string measure_to_string(MeasureKind m) {
  switch (m) {
    case MeasureKind::NormalizedEdit: return "normalized-edit-distance";
    case MeasureKind::AbsoluteDifference: return "absolute-difference";
    case MeasureKind::Binary: return "binary";
  }
  return "?";
}

int schema_index(const Schema& schema, const std::string& name) {
  for (std::size_t i = 0; i < schema.size(); ++i)
    if (schema[i].name == name) return static_cast<int>(i);
  return -1;
}

}  // namespace

ComparisonConfig read_compare_config(const std::string& path, const Schema& schema) {
  KvFile file = read_kvfile(path);
  ComparisonConfig config;
  for (const KvSection* sec : file.find_all("compare")) {
    FieldCompareSpec spec;
    spec.field_name = sec->require("field");
    spec.field_index = schema_index(schema, spec.field_name);
    if (spec.field_index < 0)
      throw ParseError(path + ": compare field '" + spec.field_name + "' not in schema");
    spec.measure = measure_from_string(sec->require("measure"));
    spec.permute_tokens = sec->get_bool("permute", true);
    const FieldKind kind = schema[spec.field_index].kind;
    if (spec.measure == MeasureKind::NormalizedEdit && kind != FieldKind::NameString)
      throw ParseError(path + ": edit distance needs a name-string field");
    if (spec.measure == MeasureKind::AbsoluteDifference && kind == FieldKind::NameString)
      throw ParseError(path + ": absolute difference needs a numeric field");
    if (spec.measure != MeasureKind::Binary) {
      for (const std::string& b : split_list(sec->require("levels")))
        spec.bounds.push_back(std::stod(b));
      if (spec.bounds.empty()) throw ParseError(path + ": empty levels list");
      for (std::size_t i = 0; i + 1 < spec.bounds.size(); ++i)
        if (spec.bounds[i] >= spec.bounds[i + 1])
          throw ParseError(path + ": level bounds must increase");
      if (spec.bounds.front() < 0.0)
        throw ParseError(path + ": level bounds must be nonnegative");
    } else if (sec->get("levels")) {
      throw ParseError(path + ": binary comparison takes no levels");
    }
    config.fields.push_back(std::move(spec));
  }
  if (config.fields.empty()) throw ParseError(path + ": no [compare] sections");

  if (const KvSection* sec = file.find("blocking")) {
    config.blocking_field = sec->require("field");
    config.blocking_index = schema_index(schema, config.blocking_field);
    if (config.blocking_index < 0)
      throw ParseError(path + ": blocking field '" + config.blocking_field + "' not in schema");
  }
  for (const KvSection* sec : file.find_all("fix")) {
    FixRule rule;
    const std::string fname = sec->require("field");
    for (std::size_t i = 0; i < config.fields.size(); ++i)
      if (config.fields[i].field_name == fname) rule.spec_index = static_cast<int>(i);
    if (rule.spec_index < 0)
      throw ParseError(path + ": fix rule field '" + fname + "' has no compare entry");
    rule.min_level = static_cast<int>(sec->require_long("min_level"));
    if (rule.min_level < 1 || rule.min_level > config.fields[rule.spec_index].num_levels())
      throw ParseError(path + ": fix rule level out of range for '" + fname + "'");
    config.fix_rules.push_back(rule);
  }
  return config;
}

double levenshtein(const std::string& a, const std::string& b) {
  const std::size_t n = a.size(), m = b.size();
  if (n == 0) return static_cast<double>(m);
  if (m == 0) return static_cast<double>(n);
  std::vector<int> prev(m + 1), cur(m + 1);
  for (std::size_t j = 0; j <= m; ++j) prev[j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = static_cast<int>(i);
    for (std::size_t j = 1; j <= m; ++j) {
      const int sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return static_cast<double>(prev[m]);
}

namespace {

std::string join(const std::vector<std::string>& tokens) {
  std::string out;
  for (const std::string& t : tokens) out += t;
  return out;
}

// Orderings to try for one side: all permutations up to 3 tokens, otherwise
// the identity plus each single adjacent swap.
std::vector<std::vector<std::string>> orderings(const std::vector<std::string>& tokens) {
  std::vector<std::vector<std::string>> out;
  if (tokens.size() <= 3) {
    std::vector<std::size_t> idx(tokens.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end());
    do {
      std::vector<std::string> perm;
      for (std::size_t i : idx) perm.push_back(tokens[i]);
      out.push_back(std::move(perm));
    } while (std::next_permutation(idx.begin(), idx.end()));
  } else {
    out.push_back(tokens);
    for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
      std::vector<std::string> swapped = tokens;
      std::swap(swapped[i], swapped[i + 1]);
      out.push_back(std::move(swapped));
    }
  }
  return out;
}

}  // namespace

double normalized_edit_distance(const std::vector<std::string>& a,
                                const std::vector<std::string>& b, bool permute) {
  if (a.empty() && b.empty())
    throw ConstraintError("edit distance on two empty names (should be missing)");
  const std::string ja = join(a), jb = join(b);
  const double len = static_cast<double>(std::max(ja.size(), jb.size()));
  double best = levenshtein(ja, jb);
  if (permute && best > 0.0 && (a.size() > 1 || b.size() > 1)) {
    for (const auto& perm : orderings(b)) {
      best = std::min(best, levenshtein(ja, join(perm)));
      if (best == 0.0) break;
    }
    if (best > 0.0) {
      for (const auto& perm : orderings(a))
        best = std::min(best, levenshtein(join(perm), jb));
    }
  }
  return best / len;
}

int discretize(double value, const FieldCompareSpec& spec) {
  if (spec.measure == MeasureKind::Binary) {
    if (value != 0.0 && value != 1.0) throw ConstraintError("binary level must be 0 or 1");
    return static_cast<int>(value);
  }
  if (value < 0.0) throw ConstraintError("similarity value below measure range");
  if (value <= spec.bounds.front()) return 0;
  for (std::size_t l = 1; l < spec.bounds.size(); ++l)
    if (value <= spec.bounds[l]) return static_cast<int>(l);
  if (spec.measure == MeasureKind::NormalizedEdit && value > 1.0)
    throw ConstraintError("normalized edit distance above 1");
  return static_cast<int>(spec.bounds.size());
}

namespace {

// Per-field record value caches so the pair loop touches POD only.
struct FieldCache {
  std::vector<std::vector<std::string>> tokens;  // edit distance
  std::vector<double> numbers;                   // absolute difference
  std::vector<std::string> texts;                // binary on text
  std::vector<char> present;
  bool numeric_binary = false;
};

std::vector<std::string> split_tokens(const std::string& joined) {
  std::vector<std::string> out;
  std::string tok;
  for (char c : joined) {
    if (c == ' ') {
      if (!tok.empty()) out.push_back(tok);
      tok.clear();
    } else {
      tok.push_back(c);
    }
  }
  if (!tok.empty()) out.push_back(tok);
  return out;
}

std::vector<FieldCache> build_caches(const RecordStore& store, const ComparisonConfig& config) {
  const std::size_t r = store.records.size();
  std::vector<FieldCache> caches(config.fields.size());
  for (std::size_t f = 0; f < config.fields.size(); ++f) {
    const auto& spec = config.fields[f];
    FieldCache& cache = caches[f];
    cache.present.assign(r, 0);
    const FieldKind kind = store.schema[spec.field_index].kind;
    const bool numeric = kind != FieldKind::NameString && kind != FieldKind::Categorical;
    cache.numeric_binary = numeric;
    if (spec.measure == MeasureKind::NormalizedEdit) cache.tokens.resize(r);
    if (spec.measure == MeasureKind::AbsoluteDifference || numeric) cache.numbers.assign(r, 0.0);
    if (spec.measure == MeasureKind::Binary && !numeric) cache.texts.resize(r);
    for (std::size_t i = 0; i < r; ++i) {
      const auto& v = store.records[i].values[spec.field_index];
      if (!v) continue;
      cache.present[i] = 1;
      switch (spec.measure) {
        case MeasureKind::NormalizedEdit:
          cache.tokens[i] = split_tokens(v->text);
          break;
        case MeasureKind::AbsoluteDifference:
          cache.numbers[i] = static_cast<double>(v->number);
          break;
        case MeasureKind::Binary:
          if (numeric) cache.numbers[i] = static_cast<double>(v->number);
          else cache.texts[i] = v->text;
          break;
      }
    }
  }
  return caches;
}

std::vector<std::int8_t> compare_pair(const ComparisonConfig& config,
                                      const std::vector<FieldCache>& caches,
                                      std::uint32_t i, std::uint32_t j) {
  std::vector<std::int8_t> levels(config.fields.size(), kLevelMissing);
  for (std::size_t f = 0; f < config.fields.size(); ++f) {
    const auto& spec = config.fields[f];
    const auto& cache = caches[f];
    if (!cache.present[i] || !cache.present[j]) continue;
    double value = 0.0;
    switch (spec.measure) {
      case MeasureKind::NormalizedEdit:
        value = normalized_edit_distance(cache.tokens[i], cache.tokens[j], spec.permute_tokens);
        break;
      case MeasureKind::AbsoluteDifference:
        value = std::fabs(cache.numbers[i] - cache.numbers[j]);
        break;
      case MeasureKind::Binary:
        value = cache.numeric_binary ? (cache.numbers[i] == cache.numbers[j] ? 0.0 : 1.0)
                                     : (cache.texts[i] == cache.texts[j] ? 0.0 : 1.0);
        break;
    }
    levels[f] = static_cast<std::int8_t>(discretize(value, spec));
  }
  return levels;
}

// Pairs in P under the optional blocking predicate, in (i, j) order.
// With blocking, records missing the blocking field generate no pairs.
template <typename Fn>
void for_each_pair(const RecordStore& store, const ComparisonConfig& config, Fn&& fn) {
  const std::size_t r = store.records.size();
  if (config.blocking_index < 0) {
    for (std::uint32_t i = 0; i + 1 < r; ++i)
      for (std::uint32_t j = i + 1; j < r; ++j) fn(i, j);
    return;
  }
  std::map<std::string, std::vector<std::uint32_t>> groups;
  for (std::uint32_t i = 0; i < r; ++i) {
    const auto& v = store.records[i].values[config.blocking_index];
    if (!v) continue;
    const FieldKind kind = store.schema[config.blocking_index].kind;
    const bool numeric = kind != FieldKind::NameString && kind != FieldKind::Categorical;
    groups[numeric ? std::to_string(v->number) : v->text].push_back(i);
  }
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
  for (const auto& [key, members] : groups)
    for (std::size_t a = 0; a + 1 < members.size(); ++a)
      for (std::size_t b = a + 1; b < members.size(); ++b)
        pairs.emplace_back(members[a], members[b]);
  std::sort(pairs.begin(), pairs.end());
  for (const auto& [i, j] : pairs) fn(i, j);
}

bool fixed_by_rules(const ComparisonConfig& config, const std::vector<std::int8_t>& levels) {
  for (const FixRule& rule : config.fix_rules) {
    const std::int8_t l = levels[rule.spec_index];
    if (l != kLevelMissing && l >= rule.min_level) return true;  // missing never fires
  }
  return false;
}

struct UnionFind {
  std::vector<std::uint32_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) {
    for (std::size_t i = 0; i < n; ++i) parent[i] = static_cast<std::uint32_t>(i);
  }
  std::uint32_t find(std::uint32_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void merge(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a > b) std::swap(a, b);  // root is the smallest index
    parent[b] = a;
  }
};

std::vector<std::vector<std::uint32_t>> components_of(const std::vector<PairLevels>& candidates,
                                                      std::size_t r) {
  UnionFind uf(r);
  std::vector<char> touched(r, 0);
  for (const auto& p : candidates) {
    uf.merge(p.i, p.j);
    touched[p.i] = touched[p.j] = 1;
  }
  std::map<std::uint32_t, std::vector<std::uint32_t>> by_root;
  for (std::uint32_t i = 0; i < r; ++i)
    if (touched[i]) by_root[uf.find(i)].push_back(i);
  std::vector<std::vector<std::uint32_t>> out;
  out.reserve(by_root.size());
  for (auto& [root, members] : by_root) out.push_back(std::move(members));
  return out;
}

std::vector<std::size_t> store_list_sizes(const RecordStore& store) {
  std::vector<std::size_t> sizes;
  for (const auto& l : store.lists) sizes.push_back(l.size);
  return sizes;
}

}  // namespace

ComparisonSet build_comparisons(const RecordStore& store, const ComparisonConfig& config) {
  if (store.records.size() < 2) throw ConstraintError("need at least two records");
  ComparisonSet set;
  set.fields = config.fields;
  set.record_count = store.records.size();
  const auto caches = build_caches(store, config);
  for_each_pair(store, config, [&](std::uint32_t i, std::uint32_t j) {
    set.pairs.push_back(PairLevels{i, j, compare_pair(config, caches, i, j)});
  });
  return set;
}

CandidateSets filter_candidates(const ComparisonSet& all, const ComparisonConfig& config,
                                const std::vector<std::size_t>& list_sizes) {
  CandidateSets cs;
  cs.fields = all.fields;
  cs.record_count = all.record_count;
  cs.list_sizes = list_sizes;
  cs.total_pairs = all.pairs.size();
  cs.fixed_tallies.resize(all.fields.size());
  for (std::size_t f = 0; f < all.fields.size(); ++f)
    cs.fixed_tallies[f].assign(all.fields[f].num_levels() + 1, 0);
  for (const auto& p : all.pairs) {
    if (fixed_by_rules(config, p.levels)) {
      for (std::size_t f = 0; f < p.levels.size(); ++f)
        if (p.levels[f] != kLevelMissing) cs.fixed_tallies[f][p.levels[f]]++;
    } else {
      cs.candidates.push_back(p);
    }
  }
  cs.components = components_of(cs.candidates, cs.record_count);
  return cs;
}

CandidateSets build_candidates(const RecordStore& store, const ComparisonConfig& config) {
  if (store.records.size() < 2) throw ConstraintError("need at least two records");
  CandidateSets cs;
  cs.fields = config.fields;
  cs.record_count = store.records.size();
  cs.list_sizes = store_list_sizes(store);
  cs.fixed_tallies.resize(config.fields.size());
  for (std::size_t f = 0; f < config.fields.size(); ++f)
    cs.fixed_tallies[f].assign(config.fields[f].num_levels() + 1, 0);
  const auto caches = build_caches(store, config);
  for_each_pair(store, config, [&](std::uint32_t i, std::uint32_t j) {
    auto levels = compare_pair(config, caches, i, j);
    ++cs.total_pairs;
    if (fixed_by_rules(config, levels)) {
      for (std::size_t f = 0; f < levels.size(); ++f)
        if (levels[f] != kLevelMissing) cs.fixed_tallies[f][levels[f]]++;
    } else {
      cs.candidates.push_back(PairLevels{i, j, std::move(levels)});
    }
  });
  cs.components = components_of(cs.candidates, cs.record_count);
  return cs;
}

void write_candidates(const CandidateSets& cs, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);

  {
    std::ofstream meta(dir + "/meta.ini", std::ios::binary);
    if (!meta) throw IoError("cannot write " + dir + "/meta.ini");
    meta << "[meta]\n";
    meta << "record_count = " << cs.record_count << "\n";
    meta << "total_pairs = " << cs.total_pairs << "\n";
    meta << "list_sizes =";
    for (std::size_t k = 0; k < cs.list_sizes.size(); ++k)
      meta << (k ? "," : " ") << cs.list_sizes[k];
    meta << "\n";
    for (const auto& spec : cs.fields) {
      meta << "[field]\n";
      meta << "name = " << spec.field_name << "\n";
      meta << "measure = " << measure_to_string(spec.measure) << "\n";
      meta << "levels = " << spec.num_levels() << "\n";
    }
  }
  {
    std::ofstream out(dir + "/candidates.csv", std::ios::binary);
    if (!out) throw IoError("cannot write " + dir + "/candidates.csv");
    std::vector<std::string> header = {"i", "j"};
    for (const auto& spec : cs.fields) header.push_back(spec.field_name);
    write_csv_row(out, header);
    for (const auto& p : cs.candidates) {
      std::vector<std::string> row = {std::to_string(p.i), std::to_string(p.j)};
      for (std::int8_t l : p.levels)
        row.push_back(l == kLevelMissing ? "NA" : std::to_string(static_cast<int>(l)));
      write_csv_row(out, row);
    }
  }
  {
    std::ofstream out(dir + "/fixed_tallies.csv", std::ios::binary);
    if (!out) throw IoError("cannot write " + dir + "/fixed_tallies.csv");
    write_csv_row(out, {"field", "level", "count"});
    for (std::size_t f = 0; f < cs.fields.size(); ++f)
      for (std::size_t l = 0; l < cs.fixed_tallies[f].size(); ++l)
        write_csv_row(out, {cs.fields[f].field_name, std::to_string(l),
                            std::to_string(cs.fixed_tallies[f][l])});
  }
  {
    std::ofstream out(dir + "/components.csv", std::ios::binary);
    if (!out) throw IoError("cannot write " + dir + "/components.csv");
    write_csv_row(out, {"component", "record"});
    for (std::size_t c = 0; c < cs.components.size(); ++c)
      for (std::uint32_t rec : cs.components[c])
        write_csv_row(out, {std::to_string(c), std::to_string(rec)});
  }
}

CandidateSets read_candidates(const std::string& dir) {
  CandidateSets cs;
  KvFile meta = read_kvfile(dir + "/meta.ini");
  const KvSection* m = meta.find("meta");
  if (!m) throw ParseError(dir + "/meta.ini: missing [meta]");
  cs.record_count = static_cast<std::size_t>(m->require_long("record_count"));
  cs.total_pairs = static_cast<std::size_t>(m->require_long("total_pairs"));
  for (const std::string& s : split_list(m->require("list_sizes")))
    cs.list_sizes.push_back(static_cast<std::size_t>(std::stoul(s)));
  for (const KvSection* sec : meta.find_all("field")) {
    FieldCompareSpec spec;
    spec.field_name = sec->require("name");
    spec.measure = measure_from_string(sec->require("measure"));
    const int levels = static_cast<int>(sec->require_long("levels"));
    if (spec.measure != MeasureKind::Binary)
      for (int l = 0; l < levels; ++l) spec.bounds.push_back(static_cast<double>(l));
    cs.fields.push_back(std::move(spec));
  }

  CsvTable cand = read_csv(dir + "/candidates.csv");
  for (const auto& row : cand.rows) {
    PairLevels p;
    p.i = static_cast<std::uint32_t>(std::stoul(row[0]));
    p.j = static_cast<std::uint32_t>(std::stoul(row[1]));
    for (std::size_t f = 0; f < cs.fields.size(); ++f) {
      const std::string& cell = row[2 + f];
      p.levels.push_back(cell == "NA" ? kLevelMissing
                                      : static_cast<std::int8_t>(std::stoi(cell)));
    }
    cs.candidates.push_back(std::move(p));
  }

  cs.fixed_tallies.resize(cs.fields.size());
  for (std::size_t f = 0; f < cs.fields.size(); ++f)
    cs.fixed_tallies[f].assign(cs.fields[f].num_levels() + 1, 0);
  CsvTable tallies = read_csv(dir + "/fixed_tallies.csv");
  for (const auto& row : tallies.rows) {
    int f = -1;
    for (std::size_t k = 0; k < cs.fields.size(); ++k)
      if (cs.fields[k].field_name == row[0]) f = static_cast<int>(k);
    if (f < 0) throw ParseError(dir + "/fixed_tallies.csv: unknown field " + row[0]);
    const int level = std::stoi(row[1]);
    cs.fixed_tallies[f][level] = std::stol(row[2]);
  }

  cs.components = components_of(cs.candidates, cs.record_count);
  return cs;
}

}  // namespace linkmse
