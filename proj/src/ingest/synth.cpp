#include "triage/ingest/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "triage/common/random.hpp"
#include "triage/ingest/schema.hpp"

namespace triage::ingest {
namespace {

constexpr std::array<double, 4> kClassPrior = {0.14, 0.50, 0.24, 0.12};
constexpr std::array<const char*, 4> kSmoking = {"never smoked", "formerly smoked", "smokes",
                                                 "Unknown"};

int draw_class(Rng& rng) {
  double u = rng.uniform();
  for (int c = 0; c < 4; ++c) {
    if (u < kClassPrior[static_cast<std::size_t>(c)]) return c;
    u -= kClassPrior[static_cast<std::size_t>(c)];
  }
  return 3;
}

double clip(double v, double lo, double hi) { return std::clamp(v, lo, hi); }

std::string fmt(double v, int decimals) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

// One record as CSV fields (without the index column). Each feature is a
// noisy function of the severity so the classes overlap but stay learnable.
std::vector<std::string> make_record(Rng& rng, int c) {
  const double s = c;
  std::vector<std::string> f;
  f.push_back(fmt(clip(std::round(38.0 + 9.0 * s + 13.0 * rng.normal()), 18, 90), 0));
  f.push_back(fmt(rng.uniform() < 0.5 ? 1.0 : 0.0, 1));
  const double cp = clip(std::round(0.3 + 0.75 * s + 0.8 * rng.normal()), 0, 3);
  f.push_back(fmt(cp, 1));
  f.push_back(fmt(clip(std::round(118.0 + 9.0 * s + 14.0 * rng.normal()), 80, 200), 1));
  f.push_back(fmt(clip(std::round(195.0 + 18.0 * s + 38.0 * rng.normal()), 100, 420), 1));
  f.push_back(fmt(clip(std::round(165.0 - 12.0 * s + 18.0 * rng.normal()), 70, 205), 1));
  f.push_back(fmt(rng.uniform() < 0.08 + 0.2 * s ? 1.0 : 0.0, 1));
  f.push_back(fmt(clip(std::round(95.0 + 17.0 * s + 22.0 * rng.normal()), 50, 300), 1));
  f.push_back(fmt(clip(std::round(20.0 + 3.0 * s + 9.0 * rng.normal()), 0, 99), 1));
  f.push_back(fmt(clip(std::round(75.0 + 25.0 * s + 45.0 * rng.normal()), 0, 846), 1));
  f.push_back(fmt(clip(25.5 + 1.8 * s + 4.5 * rng.normal(), 15, 60), 1));
  f.push_back(fmt(clip(0.3 + 0.12 * s + 0.22 * rng.normal(), 0.078, 2.42), 3));
  f.push_back(fmt(rng.uniform() < 0.04 + 0.16 * s ? 1.0 : 0.0, 0));
  f.push_back(fmt(rng.uniform() < 0.03 + 0.13 * s ? 1.0 : 0.0, 0));
  f.push_back(rng.uniform() < 0.5 ? "Urban" : "Rural");
  const double smoke = rng.uniform() + 0.08 * s;
  f.push_back(kSmoking[smoke < 0.35 ? 0 : smoke < 0.55 ? 1 : smoke < 0.75 ? 2 : 3]);
  f.push_back(std::string(severity_name(c)));
  return f;
}

}  // namespace

std::string synthesize_patient_csv(const SynthOptions& options) {
  Rng rng(options.seed);
  std::vector<std::vector<std::string>> records;
  records.reserve(options.rows + options.duplicate_rows + options.null_rows);
  for (std::size_t i = 0; i < options.rows; ++i) {
    auto rec = make_record(rng, draw_class(rng));
    // Sparse missing cells; the severity label is left intact.
    for (std::size_t j = 0; j + 1 < rec.size(); ++j)
      if (rng.uniform() < options.missing_cell_rate) rec[j].clear();
    records.push_back(std::move(rec));
  }
  for (std::size_t i = 0; i < options.duplicate_rows && !records.empty(); ++i)
    records.push_back(records[static_cast<std::size_t>(rng.index(options.rows))]);
  for (std::size_t i = 0; i < options.null_rows; ++i)
    records.push_back(std::vector<std::string>(kFeatureCount + 1));

  std::ostringstream out;
  out << ",age,gender,chest pain type,blood pressure,cholesterol,max heart rate,"
         "exercise angina,plasma glucose,skin_thickness,insulin,bmi,diabetes_pedigree,"
         "hypertension,heart_disease,Residence_type,smoking_status,triage\n";
  for (std::size_t i = 0; i < records.size(); ++i) {
    out << i;
    for (const auto& field : records[i]) out << ',' << field;
    out << '\n';
  }
  return out.str();
}

}  // namespace triage::ingest
