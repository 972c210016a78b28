#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "triage/common/error.hpp"
#include "triage/ingest/schema.hpp"
#include "triage/serve/checkpoint.hpp"
#include "triage/simnet/attach.hpp"

namespace triage::serve {

inline constexpr std::size_t kFallbackK = 10;
inline constexpr std::size_t kTopNeighbors = 5;

struct FieldIssue {
  std::string field;
  ErrorCode code;  // kMissingField, kInvalidField or kUnknownCategory
  std::string message;
};

// Every problem found in a submitted record. code() is kUnknownCategory when
// that is the only kind of problem, otherwise kInvalidField.
class RecordError : public Error {
 public:
  explicit RecordError(std::vector<FieldIssue> issues);
  const std::vector<FieldIssue>& issues() const { return issues_; }

 private:
  std::vector<FieldIssue> issues_;
};

struct EncodedRecord {
  std::vector<double> encoded;  // 16 raw values, categoricals as codes
  std::vector<double> scaled;   // min-max scaled and clamped into [0,1]
  std::vector<std::string> clamped_fields;
};

// Field names match the canonical names after folding, so "Age" and
// "chest pain type" are accepted. The severity field, if present, is
// ignored. Missing values are errors: nothing is imputed at inference.
EncodedRecord encode_record(const Checkpoint& ckpt, const nlohmann::json& record);

struct NeighborSummary {
  std::uint32_t node = 0;
  int label = 0;
  double score = 0.0;  // metric value: cosine similarity or normalized distance
};

struct PredictionResponse {
  int predicted = 0;
  std::array<double, ingest::kClassCount> probabilities{};
  std::size_t neighbor_count = 0;
  std::vector<NeighborSummary> top_neighbors;  // most similar first
  bool fallback_used = false;
  std::vector<std::string> clamped_fields;
  std::string model;
  std::string config_hash;
  std::string metric;
  double threshold = 0.0;

  nlohmann::ordered_json to_json() const;
};

// Encodes and scales the record with the checkpoint's parameters, attaches
// it to `g` (never modified) and runs the model on the new node's receptive
// field only.
PredictionResponse predict_patient(const Checkpoint& ckpt, const simnet::PatientGraph& g,
                                   const nlohmann::json& record,
                                   std::size_t fallback_k = kFallbackK);

// Same, starting from an already scaled feature vector.
PredictionResponse predict_scaled(const Checkpoint& ckpt, const simnet::PatientGraph& g,
                                  const std::vector<double>& scaled,
                                  std::size_t fallback_k = kFallbackK);

// Field descriptions for form builders: 17 entries, categorical fields with
// their allowed values.
nlohmann::ordered_json schema_json(const Checkpoint& ckpt);

}  // namespace triage::serve
