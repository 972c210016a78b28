#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace triage::ingest {

enum class ColumnKind { kNumeric, kCategorical, kTarget };

std::string_view to_string(ColumnKind kind);

struct ColumnMeta {
  std::string name;  // canonical snake_case name
  ColumnKind kind = ColumnKind::kNumeric;
};

inline constexpr std::size_t kFeatureCount = 16;
inline constexpr std::size_t kClassCount = 4;

struct FieldInfo {
  std::string_view name;
  std::string_view display;
  ColumnKind kind;
  std::string_view description;
};

// The 16 patient features plus the severity target, in canonical order.
const std::array<FieldInfo, kFeatureCount + 1>& canonical_fields();

std::vector<ColumnMeta> canonical_columns();

// Index of a canonical feature name in [0, 16), or nullopt.
std::optional<std::size_t> feature_index(std::string_view name);

// Severity codes. The integer order green < yellow < orange < red is used only
// as an encoding, never as a distance.
enum class Severity : int { kGreen = 0, kYellow = 1, kOrange = 2, kRed = 3 };

std::string_view severity_name(int label);

// Case-insensitive; nullopt when the text is not one of the four colors.
std::optional<int> parse_severity(std::string_view text);

}  // namespace triage::ingest
