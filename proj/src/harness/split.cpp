#include "triage/harness/split.hpp"

#include <cmath>
#include <string>

#include "triage/common/error.hpp"
#include "triage/common/random.hpp"

namespace triage::harness {

simnet::SplitMasks split_masks(const ingest::LabelVector& labels, std::uint64_t seed) {
  const std::size_t n = labels.size();
  simnet::SplitMasks m;
  m.train.assign(n, 0);
  m.eval.assign(n, 0);
  m.test.assign(n, 0);
  Rng rng(derive_seed(seed, 0x5117));
  for (int c = 0; c < static_cast<int>(ingest::kClassCount); ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < n; ++i)
      if (labels[i] == c) members.push_back(i);
    if (members.empty()) continue;
    require(members.size() >= 4, ErrorCode::kClassTooSmall,
            "class " + std::string(ingest::severity_name(c)) + " has " +
                std::to_string(members.size()) + " samples; splitting needs at least 4");
    rng.shuffle(members.begin(), members.end());
    const auto held = static_cast<std::size_t>(std::lround(0.3 * static_cast<double>(members.size())));
    const auto eval = static_cast<std::size_t>(std::lround(0.3 * static_cast<double>(held)));
    const std::size_t train = members.size() - held;
    for (std::size_t k = 0; k < members.size(); ++k) {
      if (k < train) {
        m.train[members[k]] = 1;
      } else if (k < train + eval) {
        m.eval[members[k]] = 1;
      } else {
        m.test[members[k]] = 1;
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    require(labels[i] >= 0 && labels[i] < static_cast<int>(ingest::kClassCount),
            ErrorCode::kInvalidArgument, "label out of range at row " + std::to_string(i));
  return m;
}

void check_masks(const simnet::SplitMasks& masks, std::size_t n) {
  require(masks.train.size() == n && masks.eval.size() == n && masks.test.size() == n,
          ErrorCode::kShapeMismatch, "mask sizes do not match node count");
  for (std::size_t i = 0; i < n; ++i) {
    const int hits = (masks.train[i] != 0) + (masks.eval[i] != 0) + (masks.test[i] != 0);
    require(hits == 1, ErrorCode::kInvalidArgument,
            "node " + std::to_string(i) + " is in " + std::to_string(hits) + " masks");
  }
}

}  // namespace triage::harness
