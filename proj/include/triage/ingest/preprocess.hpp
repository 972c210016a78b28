#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "triage/ingest/table.hpp"

namespace triage::ingest {

struct FeatureMatrix {
  std::size_t n = 0;
  std::size_t d = 0;
  std::vector<double> values;  // row-major n x d
  // Scaling parameters kept for inference; empty before normalization.
  std::vector<double> column_mins;
  std::vector<double> column_maxs;

  const double* row(std::size_t i) const { return values.data() + i * d; }
  double* row(std::size_t i) { return values.data() + i * d; }
  double at(std::size_t i, std::size_t j) const { return values[i * d + j]; }
};

using LabelVector = std::vector<int>;

using ClassCounts = std::array<std::size_t, kClassCount>;

ClassCounts class_counts(const LabelVector& labels);

struct PreprocessReport {
  std::size_t rows_in = 0;
  std::size_t rows_dropped_null = 0;
  std::size_t rows_dropped_duplicate = 0;
  std::size_t cells_imputed = 0;
  std::size_t synthetic_rows = 0;
  std::size_t rows_out = 0;
  ClassCounts class_counts_before{};
  ClassCounts class_counts_after{};
  std::size_t smote_k = 0;
  std::uint64_t seed = 0;

  std::string to_json() const;
};

// Sorted category lists per categorical column, persisted for inference.
struct CategoryEncoders {
  std::map<std::string, std::vector<std::string>> categories;

  // Throws ErrorCode::kUnknownCategory for values not seen during fitting.
  int encode(const std::string& column, const std::string& value) const;
};

// Step 1. Drops rows whose cells are all missing or whose severity label is
// missing, then exact duplicates (first occurrence kept). Throws kNoRows if
// nothing is left.
PatientTable drop_null_and_duplicates(const PatientTable& table, PreprocessReport& report);

// Step 2. Fills each missing cell with its column mode. Ties go to the
// smallest number or the lexicographically first text. Throws kAllMissing
// for a column with no values.
PatientTable impute_mode(const PatientTable& table, std::size_t* cells_imputed = nullptr);

// Step 3. Replaces categorical text by its index in the sorted category list
// and the severity by its fixed code. Columns already holding numbers pass
// through.
PatientTable encode_categoricals(const PatientTable& table, CategoryEncoders& encoders);

// Splits an encoded table into the 16-column feature block and labels.
std::pair<FeatureMatrix, LabelVector> to_features(const PatientTable& encoded);

// Step 4. SMOTE with k same-class Euclidean neighbours. Synthetic rows are
// appended after the originals, class by class.
std::pair<FeatureMatrix, LabelVector> smote_resample(const FeatureMatrix& x,
                                                     const LabelVector& y, std::size_t k,
                                                     std::uint64_t seed);

// Step 5. Per-column min-max scaling into [0,1]; constant columns become 0.
FeatureMatrix minmax_normalize(const FeatureMatrix& x);

// Scales one raw feature vector with stored parameters and clamps into
// [0,1]. Indices of clamped features are appended to `clamped`.
std::vector<double> apply_scaling(const FeatureMatrix& fitted, const std::vector<double>& raw,
                                  std::vector<std::size_t>* clamped = nullptr);

struct PreprocessConfig {
  std::size_t smote_k = 5;
  std::uint64_t seed = 0;
};

struct PreprocessResult {
  FeatureMatrix features;
  LabelVector labels;
  PreprocessReport report;
  CategoryEncoders encoders;
  // Cleaned, imputed (not yet encoded) table. Row i is node i for i < its
  // row count; later nodes are synthetic.
  PatientTable cleaned;
};

PreprocessResult preprocess_table(const PatientTable& raw, const PreprocessConfig& config);

PreprocessResult preprocess_pipeline(const std::string& csv_path, const HeaderMapping& mapping,
                                     const PreprocessConfig& config);

// Wraps an already-numeric matrix as a table so the pipeline can be re-run
// on its own output.
PatientTable table_from_features(const FeatureMatrix& x, const LabelVector& labels);

}  // namespace triage::ingest
