#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "triage/gnn/params.hpp"
#include "triage/gnn/sampler.hpp"
#include "triage/ingest/preprocess.hpp"
#include "triage/simnet/metric.hpp"

namespace triage::serve {

// Checkpoint file, little-endian:
//
//   "TRGC" | u32 version | u64 header_len | header JSON
//   | u64 tensor_count | per tensor: u64 rows, u64 cols, f64[rows*cols]
//   | u64 FNV-1a of every preceding byte
//
// The header carries the model spec, scaler and encoder state, metric and
// threshold, graph file reference, config hash and the evaluation sampling
// seed.
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  gnn::ModelSpec spec;
  gnn::ParamSet params;
  std::vector<double> column_mins;
  std::vector<double> column_maxs;
  ingest::CategoryEncoders encoders;
  simnet::SimilarityMetric metric;
  double threshold = 0.0;
  std::string graph_file;  // relative paths are relative to the checkpoint
  std::string config_hash;
  std::uint64_t seed = 0;
  gnn::Sampling sampling;  // evaluation-time neighbour sampling
};

std::vector<std::byte> encode_checkpoint(const Checkpoint& ckpt);
// Throws kChecksum on corruption or truncation, kVersionMismatch on an
// unknown version, kParse on a malformed header.
Checkpoint decode_checkpoint(std::span<const std::byte> bytes);

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace triage::serve
