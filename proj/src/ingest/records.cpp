#include "ingest/records.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "util/csv.hpp"
#include "util/errors.hpp"
#include "util/kvfile.hpp"

namespace linkmse {

FieldKind field_kind_from_string(const std::string& s) {
  if (s == "name-string") return FieldKind::NameString;
  if (s == "date-year") return FieldKind::DateYear;
  if (s == "date-month") return FieldKind::DateMonth;
  if (s == "date-day") return FieldKind::DateDay;
  if (s == "categorical") return FieldKind::Categorical;
  throw ParseError("unknown field kind '" + s + "'");
}

std::string field_kind_to_string(FieldKind k) {
  switch (k) {
    case FieldKind::NameString: return "name-string";
    case FieldKind::DateYear: return "date-year";
    case FieldKind::DateMonth: return "date-month";
    case FieldKind::DateDay: return "date-day";
    case FieldKind::Categorical: return "categorical";
  }
  return "?";
}

Schema read_schema(const std::string& path) {
  KvFile file = read_kvfile(path);
  Schema schema;
  for (const KvSection* sec : file.find_all("field")) {
    FieldSchema f;
    f.name = sec->require("name");
    f.kind = field_kind_from_string(sec->require("kind"));
    f.required = sec->get_bool("required", false);
    schema.push_back(std::move(f));
  }
  if (schema.empty()) throw ParseError(path + ": no [field] sections");
  std::set<std::string> seen;
  for (const auto& f : schema)
    if (!seen.insert(f.name).second)
      throw ParseError(path + ": duplicate field name '" + f.name + "'");
  return schema;
}

namespace {

// Latin-1 letters folded to ASCII; returns empty for non-letter symbols.
const char* fold_codepoint(unsigned cp) {
  if (cp >= 'A' && cp <= 'Z') {
    static char buf[2];
    buf[0] = static_cast<char>(cp);
    buf[1] = 0;
    return buf;
  }
  switch (cp) {
    case 0xC0: case 0xC1: case 0xC2: case 0xC3: case 0xC4: case 0xC5:
    case 0xE0: case 0xE1: case 0xE2: case 0xE3: case 0xE4: case 0xE5: return "A";
    case 0xC6: case 0xE6: return "AE";
    case 0xC7: case 0xE7: return "C";
    case 0xC8: case 0xC9: case 0xCA: case 0xCB:
    case 0xE8: case 0xE9: case 0xEA: case 0xEB: return "E";
    case 0xCC: case 0xCD: case 0xCE: case 0xCF:
    case 0xEC: case 0xED: case 0xEE: case 0xEF: return "I";
    case 0xD0: case 0xF0: return "D";
    case 0xD1: case 0xF1: return "N";
    case 0xD2: case 0xD3: case 0xD4: case 0xD5: case 0xD6: case 0xD8:
    case 0xF2: case 0xF3: case 0xF4: case 0xF5: case 0xF6: case 0xF8: return "O";
    case 0xD9: case 0xDA: case 0xDB: case 0xDC:
    case 0xF9: case 0xFA: case 0xFB: case 0xFC: return "U";
    case 0xDD: case 0xFD: case 0xFF: return "Y";
    case 0xDE: case 0xFE: return "TH";
    case 0xDF: return "SS";
    default: return "";
  }
}

std::string basename_stem(const std::string& path) {
  auto slash = path.find_last_of("/\\");
  std::string base = slash == std::string::npos ? path : path.substr(slash + 1);
  auto dot = base.find_last_of('.');
  if (dot != std::string::npos && dot > 0) base.erase(dot);
  return base;
}

int parse_date_component(const std::string& raw, FieldKind kind, const std::string& where) {
  int v = 0;
  try {
    std::size_t pos = 0;
    v = std::stoi(raw, &pos);
    if (!trim(raw.substr(pos)).empty()) throw ParseError("");
  } catch (...) {
    throw ParseError(where + ": unparseable date component '" + raw + "'");
  }
  if (kind == FieldKind::DateMonth && (v < 1 || v > 12))
    throw ParseError(where + ": month out of range: " + raw);
  if (kind == FieldKind::DateDay && (v < 1 || v > 31))
    throw ParseError(where + ": day out of range: " + raw);
  return v;
}

std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

std::optional<FieldValue> parse_cell(const std::string& raw, const FieldSchema& field,
                                     const std::string& where) {
  const std::string cell = trim(raw);
  if (cell.empty()) {
    if (field.required)
      throw ParseError(where + ": required field '" + field.name + "' is empty");
    return std::nullopt;
  }
  FieldValue v;
  switch (field.kind) {
    case FieldKind::NameString: {
      auto tokens = standardize_name(cell);
      if (tokens.empty()) {
        if (field.required)
          throw ParseError(where + ": required field '" + field.name + "' is empty");
        return std::nullopt;
      }
      v.text = join_tokens(tokens);
      break;
    }
    case FieldKind::DateYear:
    case FieldKind::DateMonth:
    case FieldKind::DateDay:
      v.number = parse_date_component(cell, field.kind, where);
      break;
    case FieldKind::Categorical: {
      std::string up = cell;
      std::transform(up.begin(), up.end(), up.begin(),
                     [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
      v.text = up;
      break;
    }
  }
  return v;
}

}  // namespace

std::vector<std::string> standardize_name(const std::string& raw) {
  std::vector<std::string> tokens;
  std::string token;
  auto flush = [&] {
    if (!token.empty()) tokens.push_back(token);
    token.clear();
  };
  std::size_t i = 0;
  while (i < raw.size()) {
    const unsigned char b = static_cast<unsigned char>(raw[i]);
    unsigned cp;
    if (b < 0x80) {
      cp = b;
      ++i;
    } else if ((b == 0xC2 || b == 0xC3) && i + 1 < raw.size() &&
               (static_cast<unsigned char>(raw[i + 1]) & 0xC0) == 0x80) {
      cp = ((b & 0x1F) << 6) | (static_cast<unsigned char>(raw[i + 1]) & 0x3F);
      i += 2;
    } else {
      // lone high byte: treat as Latin-1
      cp = b;
      ++i;
    }
    if (cp == ' ' || cp == '\t' || cp == '\n' || cp == '\r' || cp == 0xA0) {
      flush();
      continue;
    }
    if (cp >= 'a' && cp <= 'z') cp = cp - 'a' + 'A';
    if (cp >= '0' && cp <= '9') {
      token.push_back(static_cast<char>(cp));
      continue;
    }
    token += fold_codepoint(cp);  // punctuation folds to nothing
  }
  flush();
  return tokens;
}

RecordStore load_lists(const std::vector<std::string>& paths, const Schema& schema) {
  if (paths.size() < 2) throw ConstraintError("need at least two lists");
  RecordStore store;
  store.schema = schema;
  std::uint32_t next_index = 0;
  for (std::size_t li = 0; li < paths.size(); ++li) {
    const std::string& path = paths[li];
    CsvTable csv = read_csv(path);
    std::set<std::string> seen;
    for (const auto& h : csv.header)
      if (!seen.insert(h).second)
        throw ParseError(path + ": duplicate header name '" + h + "'");

    std::vector<int> field_col(schema.size(), -1);
    for (std::size_t f = 0; f < schema.size(); ++f) {
      field_col[f] = csv.column(schema[f].name);
      if (field_col[f] < 0)
        throw ParseError(path + ": missing column '" + schema[f].name + "'");
    }
    const int label_col = csv.column("record_label");
    for (const auto& h : csv.header) {
      if (h == "record_label") continue;
      bool known = false;
      for (const auto& f : schema)
        if (f.name == h) known = true;
      if (!known) throw ParseError(path + ": unexpected column '" + h + "'");
    }

    SourceList list;
    list.list_index = static_cast<int>(li + 1);
    list.label = basename_stem(path);
    for (std::size_t row = 0; row < csv.rows.size(); ++row) {
      const auto& cells = csv.rows[row];
      const std::string where = path + ":" + std::to_string(row + 2);
      if (cells.size() != csv.header.size())
        throw ParseError(where + ": wrong number of cells");
      RecordEntry rec;
      rec.record_index = next_index++;
      rec.list_index = list.list_index;
      if (label_col >= 0) rec.label = trim(cells[label_col]);
      rec.values.reserve(schema.size());
      for (std::size_t f = 0; f < schema.size(); ++f)
        rec.values.push_back(parse_cell(cells[field_col[f]], schema[f], where));
      store.records.push_back(std::move(rec));
    }
    list.size = csv.rows.size();
    store.lists.push_back(std::move(list));
  }
  return store;
}

void write_store(const RecordStore& store, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  std::vector<std::string> header = {"__list", "__idx", "record_label"};
  for (const auto& f : store.schema) header.push_back(f.name);
  write_csv_row(out, header);
  for (const auto& rec : store.records) {
    std::vector<std::string> row;
    row.push_back(std::to_string(rec.list_index));
    row.push_back(std::to_string(rec.record_index));
    row.push_back(rec.label);
    for (std::size_t f = 0; f < store.schema.size(); ++f) {
      const auto& v = rec.values[f];
      if (!v) {
        row.emplace_back();
      } else if (store.schema[f].kind == FieldKind::NameString ||
                 store.schema[f].kind == FieldKind::Categorical) {
        row.push_back(v->text);
      } else {
        row.push_back(std::to_string(v->number));
      }
    }
    write_csv_row(out, row);
  }
  if (!out) throw IoError("write failed: " + path);
}

RecordStore read_store(const std::string& path, const Schema& schema) {
  CsvTable csv = read_csv(path);
  const int list_col = csv.column("__list");
  const int idx_col = csv.column("__idx");
  const int label_col = csv.column("record_label");
  if (list_col < 0 || idx_col < 0)
    throw ParseError(path + ": not a record store (missing __list/__idx)");
  std::vector<int> field_col(schema.size());
  for (std::size_t f = 0; f < schema.size(); ++f) {
    field_col[f] = csv.column(schema[f].name);
    if (field_col[f] < 0) throw ParseError(path + ": missing column '" + schema[f].name + "'");
  }
  RecordStore store;
  store.schema = schema;
  int max_list = 0;
  for (std::size_t row = 0; row < csv.rows.size(); ++row) {
    const auto& cells = csv.rows[row];
    const std::string where = path + ":" + std::to_string(row + 2);
    RecordEntry rec;
    rec.list_index = static_cast<int>(std::stol(cells[list_col]));
    rec.record_index = static_cast<std::uint32_t>(std::stoul(cells[idx_col]));
    if (rec.record_index != row)
      throw ParseError(where + ": record store indices out of order");
    if (label_col >= 0) rec.label = cells[label_col];
    max_list = std::max(max_list, rec.list_index);
    for (std::size_t f = 0; f < schema.size(); ++f)
      rec.values.push_back(parse_cell(cells[field_col[f]], schema[f], where));
    store.records.push_back(std::move(rec));
  }
  store.lists.resize(static_cast<std::size_t>(max_list));
  for (int k = 0; k < max_list; ++k) {
    store.lists[k].list_index = k + 1;
    store.lists[k].label = "list" + std::to_string(k + 1);
  }
  for (const auto& rec : store.records) store.lists[rec.list_index - 1].size++;
  if (store.lists.size() < 2) throw ConstraintError("need at least two lists");
  return store;
}

}  // namespace linkmse
