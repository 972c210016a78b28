#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "triage/ingest/schema.hpp"

namespace triage::ingest {

// Missing, numeric, or text. Numeric columns hold doubles; categorical and
// target columns hold text until encoded.
using Cell = std::variant<std::monostate, double, std::string>;

inline bool is_missing(const Cell& c) { return std::holds_alternative<std::monostate>(c); }

struct PatientTable {
  std::vector<ColumnMeta> columns;
  std::vector<std::vector<Cell>> rows;

  std::size_t n_rows() const { return rows.size(); }
  std::size_t n_features() const;
  std::size_t column_index(std::string_view name) const;  // throws kSchema
  std::size_t target_index() const;
};

// Binds the headers found in a CSV file to canonical column names.
//
// Text format, one binding per line, '#' starts a comment:
//
//   chest_pain_type = chest pain type
//   ignore = Unnamed: 0
//
// Headers without an explicit binding are matched against the canonical
// names after lower-casing and folding spaces, dashes and underscores. An
// empty header (a pandas index column) is ignored.
class HeaderMapping {
 public:
  static HeaderMapping defaults();
  static HeaderMapping parse(std::string_view text);
  static HeaderMapping load(const std::string& path);

  // Canonical name, "" for an ignored header, nullopt when unmappable.
  std::optional<std::string> resolve(std::string_view header) const;

 private:
  std::map<std::string, std::string> header_to_canonical_;
  std::set<std::string> ignored_;
};

// Lower-cased name with runs of other characters folded to '_'
// ("Chest Pain Type" -> "chest_pain_type").
std::string fold_name(std::string_view s);

PatientTable parse_csv(std::string_view text, const HeaderMapping& mapping);
PatientTable load_csv(const std::string& path, const HeaderMapping& mapping);

}  // namespace triage::ingest
