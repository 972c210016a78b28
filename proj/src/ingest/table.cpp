#include "triage/ingest/table.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "triage/common/error.hpp"

namespace triage::ingest {
namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

// Lower-case, runs of non-alphanumerics folded to a single '_'.
std::string fold(std::string_view s) {
  std::string out;
  for (char c : s) {
    const auto u = static_cast<unsigned char>(c);
    if (std::isalnum(u)) {
      out.push_back(static_cast<char>(std::tolower(u)));
    } else if (!out.empty() && out.back() != '_') {
      out.push_back('_');
    }
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  return out;
}

bool is_null_token(const std::string& s) {
  if (s.empty()) return true;
  const std::string f = fold(s);
  return f == "na" || f == "nan" || f == "null" || f == "none" || f == "n_a";
}

// RFC 4180 style splitting; handles quoted fields and doubled quotes.
std::vector<std::vector<std::string>> split_records(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  bool any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (any || !field.empty()) {
        fields.push_back(std::move(field));
        records.push_back(std::move(fields));
      }
      fields.clear();
      field.clear();
      any = false;
    } else {
      field.push_back(c);
      any = true;
    }
  }
  if (any || !field.empty()) {
    fields.push_back(std::move(field));
    records.push_back(std::move(fields));
  }
  return records;
}

Cell parse_cell(const std::string& raw, ColumnKind kind) {
  const std::string s = trim(raw);
  if (is_null_token(s)) return std::monostate{};
  if (kind != ColumnKind::kNumeric) return s;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  // Unparsable numeric cells are inconsistent records: treated as missing
  // and imputed downstream.
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::monostate{};
  return v;
}

}  // namespace

std::size_t PatientTable::n_features() const {
  return static_cast<std::size_t>(
      std::count_if(columns.begin(), columns.end(),
                    [](const ColumnMeta& c) { return c.kind != ColumnKind::kTarget; }));
}

std::size_t PatientTable::column_index(std::string_view name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i].name == name) return i;
  fail(ErrorCode::kSchema, "no column named " + std::string(name));
}

std::size_t PatientTable::target_index() const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i].kind == ColumnKind::kTarget) return i;
  fail(ErrorCode::kSchema, "table has no target column");
}

HeaderMapping HeaderMapping::defaults() { return HeaderMapping{}; }

HeaderMapping HeaderMapping::parse(std::string_view text) {
  HeaderMapping m;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      fail(ErrorCode::kParse, "mapping line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "ignore") {
      m.ignored_.insert(value);
      continue;
    }
    bool known = false;
    for (const auto& f : canonical_fields()) known = known || f.name == key;
    if (!known)
      fail(ErrorCode::kSchema, "mapping line " + std::to_string(line_no) +
                                   ": unknown canonical column '" + key + "'");
    m.header_to_canonical_[value] = key;
  }
  return m;
}

HeaderMapping HeaderMapping::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open mapping config: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::optional<std::string> HeaderMapping::resolve(std::string_view header) const {
  const std::string h = trim(header);
  if (ignored_.count(h) != 0 || h.empty()) return std::string{};
  if (const auto it = header_to_canonical_.find(h); it != header_to_canonical_.end())
    return it->second;
  const std::string folded = fold(h);
  for (const auto& f : canonical_fields())
    if (folded == f.name) return std::string(f.name);
  return std::nullopt;
}

std::string fold_name(std::string_view s) { return fold(s); }

PatientTable parse_csv(std::string_view text, const HeaderMapping& mapping) {
  auto records = split_records(text);
  if (records.empty()) fail(ErrorCode::kNoRows, "no rows: CSV is empty");

  const auto& header = records.front();
  const auto fields = canonical_fields();
  // source column for each canonical column
  std::vector<std::optional<std::size_t>> source(fields.size());
  for (std::size_t c = 0; c < header.size(); ++c) {
    const auto canonical = mapping.resolve(header[c]);
    if (!canonical) fail(ErrorCode::kSchema, "unmappable CSV header: '" + header[c] + "'");
    if (canonical->empty()) continue;
    for (std::size_t f = 0; f < fields.size(); ++f) {
      if (fields[f].name != *canonical) continue;
      if (source[f]) fail(ErrorCode::kSchema, "column mapped twice: " + *canonical);
      source[f] = c;
    }
  }
  for (std::size_t f = 0; f < fields.size(); ++f)
    if (!source[f])
      fail(ErrorCode::kSchema, "CSV lacks column for '" + std::string(fields[f].name) + "'");

  PatientTable table;
  table.columns = canonical_columns();
  table.rows.reserve(records.size() - 1);
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.size() != header.size())
      fail(ErrorCode::kArity, "CSV row " + std::to_string(r + 1) + " has " +
                                  std::to_string(rec.size()) + " fields, expected " +
                                  std::to_string(header.size()));
    std::vector<Cell> row(fields.size());
    for (std::size_t f = 0; f < fields.size(); ++f) row[f] = parse_cell(rec[*source[f]], fields[f].kind);
    table.rows.push_back(std::move(row));
  }
  if (table.rows.empty()) fail(ErrorCode::kNoRows, "no rows: CSV has only a header");
  return table;
}

PatientTable load_csv(const std::string& path, const HeaderMapping& mapping) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open CSV: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str(), mapping);
}

}  // namespace triage::ingest
