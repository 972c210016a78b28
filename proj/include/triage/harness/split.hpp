#pragma once

#include <cstdint>

#include "triage/ingest/preprocess.hpp"
#include "triage/simnet/graph.hpp"

namespace triage::harness {

// Stratified 70/21/9 split. Per class of size c: round(0.3 c) held out, of
// which round(0.3 * held_out) evaluate and the rest test. Each class needs
// at least 4 samples.
simnet::SplitMasks split_masks(const ingest::LabelVector& labels, std::uint64_t seed);

// Throws unless the masks are disjoint and cover every node.
void check_masks(const simnet::SplitMasks& masks, std::size_t n);

}  // namespace triage::harness
