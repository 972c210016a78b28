#include "triage/ingest/schema.hpp"

#include <algorithm>
#include <cctype>

namespace triage::ingest {

std::string_view to_string(ColumnKind kind) {
  switch (kind) {
    case ColumnKind::kNumeric: return "numeric";
    case ColumnKind::kCategorical: return "categorical";
    case ColumnKind::kTarget: return "target";
  }
  return "numeric";
}

const std::array<FieldInfo, kFeatureCount + 1>& canonical_fields() {
  static const std::array<FieldInfo, kFeatureCount + 1> fields{{
      {"age", "Age", ColumnKind::kNumeric, "age of the patient"},
      {"gender", "Gender", ColumnKind::kNumeric, "patient's sex"},
      {"chest_pain_type", "Chest pain type", ColumnKind::kNumeric, "the type of chest pain"},
      {"blood_pressure", "Blood pressure", ColumnKind::kNumeric, "blood pressure value"},
      {"cholesterol", "Cholesterol", ColumnKind::kNumeric, "cholesterol level"},
      {"max_heart_rate", "Max heart rate", ColumnKind::kNumeric, "maximum heart rate value"},
      {"exercise_angina", "Exercise angina", ColumnKind::kNumeric, "presence of angina"},
      {"plasma_glucose", "Plasma glucose", ColumnKind::kNumeric,
       "glucose level in blood plasma"},
      {"skin_thickness", "Skin thickness", ColumnKind::kNumeric,
       "any thickening of the skin"},
      {"insulin", "Insulin", ColumnKind::kNumeric, "insulin level"},
      {"bmi", "BMI", ColumnKind::kNumeric, "body mass index"},
      {"diabetes_pedigree", "Diabetes Pedigree", ColumnKind::kNumeric,
       "genetic predisposition to diabetes"},
      {"hypertension", "Hypertension", ColumnKind::kNumeric, "elevated blood pressure"},
      {"heart_disease", "Heart disease", ColumnKind::kNumeric, "presence of heart disease"},
      {"residence_type", "Residence type", ColumnKind::kCategorical,
       "type of residence place"},
      {"smoking_status", "Smoking status", ColumnKind::kCategorical,
       "whether or not the patient is a smoker"},
      {"triage", "Triage", ColumnKind::kTarget, "assigned severity code"},
  }};
  return fields;
}

std::vector<ColumnMeta> canonical_columns() {
  std::vector<ColumnMeta> out;
  for (const auto& f : canonical_fields()) out.push_back({std::string(f.name), f.kind});
  return out;
}

std::optional<std::size_t> feature_index(std::string_view name) {
  const auto& fields = canonical_fields();
  for (std::size_t i = 0; i < kFeatureCount; ++i)
    if (fields[i].name == name) return i;
  return std::nullopt;
}

std::string_view severity_name(int label) {
  switch (label) {
    case 0: return "green";
    case 1: return "yellow";
    case 2: return "orange";
    case 3: return "red";
    default: return "unknown";
  }
}

std::optional<int> parse_severity(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (int c = 0; c < static_cast<int>(kClassCount); ++c)
    if (lower == severity_name(c)) return c;
  return std::nullopt;
}

}  // namespace triage::ingest
