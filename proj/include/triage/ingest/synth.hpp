#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

namespace triage::ingest {

struct SynthOptions {
  std::size_t rows = 2000;
  std::uint64_t seed = 1;
  double missing_cell_rate = 0.004;
  std::size_t null_rows = 3;
  std::size_t duplicate_rows = 5;
};

// Generates a patient CSV with the same 17-column layout (plus a leading
// unnamed index column) as the public patient-priority dataset. Classes are
// imbalanced and features shift with severity, so every pipeline stage has
// real work to do. Used when the real file is not available.
std::string synthesize_patient_csv(const SynthOptions& options);

}  // namespace triage::ingest
