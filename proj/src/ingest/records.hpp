#ifndef LINKMSE_INGEST_RECORDS_HPP
#define LINKMSE_INGEST_RECORDS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace linkmse {

enum class FieldKind { NameString, DateYear, DateMonth, DateDay, Categorical };

struct FieldSchema {
  std::string name;
  FieldKind kind = FieldKind::Categorical;
  bool required = false;
};

using Schema = std::vector<FieldSchema>;

FieldKind field_kind_from_string(const std::string& s);
std::string field_kind_to_string(FieldKind k);

// "[field]" sections with name/kind/required keys.
Schema read_schema(const std::string& path);

// One cell: text for name/categorical fields, number for date components.
struct FieldValue {
  std::string text;
  int number = 0;
};

struct RecordEntry {
  std::uint32_t record_index = 0;  // global, concatenation order
  int list_index = 0;              // 1..K
  std::string label;               // record_label passthrough, empty if absent
  std::vector<std::optional<FieldValue>> values;  // one per schema field
};

struct SourceList {
  int list_index = 0;
  std::string label;
  std::size_t size = 0;
};

struct RecordStore {
  Schema schema;
  std::vector<SourceList> lists;
  std::vector<RecordEntry> records;

  std::size_t record_count() const { return records.size(); }
  std::size_t list_count() const { return lists.size(); }
};

// Uppercase, Latin-1 accents folded, punctuation stripped, split on whitespace.
// Empty result means the value is missing.
std::vector<std::string> standardize_name(const std::string& raw);

RecordStore load_lists(const std::vector<std::string>& paths, const Schema& schema);

void write_store(const RecordStore& store, const std::string& path);
RecordStore read_store(const std::string& path, const Schema& schema);

}  // namespace linkmse

#endif
