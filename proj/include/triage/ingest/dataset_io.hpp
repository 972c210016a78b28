#pragma once

#include <string>

#include "triage/ingest/preprocess.hpp"

namespace triage::ingest {

// Preprocessed dataset file, little-endian:
//
//   "TRGD" | u32 version | u64 n | u64 d | f64[n*d] row-major values
//   | i32[n] labels | f64[d] mins | f64[d] maxs | u64 json_len | json
//
// The trailing JSON carries column names, category encoders and the
// preprocessing report.
inline constexpr std::uint32_t kDatasetVersion = 1;

struct Dataset {
  FeatureMatrix features;
  LabelVector labels;
  CategoryEncoders encoders;
  PreprocessReport report;
};

void save_dataset(const std::string& path, const Dataset& dataset);
Dataset load_dataset(const std::string& path);

// Inspection export: canonical feature names plus the severity color.
std::string dataset_to_csv(const FeatureMatrix& x, const LabelVector& labels);

}  // namespace triage::ingest
