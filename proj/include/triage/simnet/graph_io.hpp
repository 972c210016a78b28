#pragma once

#include <string>

#include "triage/simnet/graph.hpp"

namespace triage::simnet {

// Graph file, little-endian:
//
//   "TRGG" | u32 version | u64 n | u64 edge_count
//   | u64[n+1] offsets | u32[2*edge_count] targets | f32[2*edge_count] weights
//   | u64 d | f64[n*d] features | f64[d] mins | f64[d] maxs | i32[n] labels
//   | u8[n] train | u8[n] eval | u8[n] test
//   | u32 metric kind | f64 p | f64 threshold | u64 isolated_node_count
inline constexpr std::uint32_t kGraphVersion = 1;

void save_graph(const std::string& path, const PatientGraph& g);
PatientGraph load_graph(const std::string& path);

// "source,target,weight" per undirected edge (source < target).
std::string edges_to_csv(const PatientGraph& g);

}  // namespace triage::simnet
