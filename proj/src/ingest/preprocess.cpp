#include "triage/ingest/preprocess.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include <json.hpp>

#include "triage/common/error.hpp"
#include "triage/common/random.hpp"
#include "triage/simd/kernels.hpp"

namespace triage::ingest {

ClassCounts class_counts(const LabelVector& labels) {
  ClassCounts counts{};
  for (int y : labels) {
    require(y >= 0 && y < static_cast<int>(kClassCount), ErrorCode::kInvalidArgument,
            "label out of range: " + std::to_string(y));
    ++counts[static_cast<std::size_t>(y)];
  }
  return counts;
}

std::string PreprocessReport::to_json() const {
  nlohmann::ordered_json j;
  j["rows_in"] = rows_in;
  j["rows_dropped_null"] = rows_dropped_null;
  j["rows_dropped_duplicate"] = rows_dropped_duplicate;
  j["cells_imputed"] = cells_imputed;
  j["synthetic_rows"] = synthetic_rows;
  j["rows_out"] = rows_out;
  j["class_counts_before"] = class_counts_before;
  j["class_counts_after"] = class_counts_after;
  j["smote_k"] = smote_k;
  j["seed"] = seed;
  return j.dump(2);
}

int CategoryEncoders::encode(const std::string& column, const std::string& value) const {
  const auto it = categories.find(column);
  if (it == categories.end())
    fail(ErrorCode::kSchema, "no encoder for column " + column);
  const auto& cats = it->second;
  const auto pos = std::lower_bound(cats.begin(), cats.end(), value);
  if (pos == cats.end() || *pos != value)
    fail(ErrorCode::kUnknownCategory,
         "unknown category '" + value + "' for column " + column);
  return static_cast<int>(pos - cats.begin());
}

PatientTable drop_null_and_duplicates(const PatientTable& table, PreprocessReport& report) {
  const std::size_t target = table.target_index();
  PatientTable out;
  out.columns = table.columns;
  std::set<std::vector<Cell>> seen;
  std::size_t dropped_null = 0;
  std::size_t dropped_dup = 0;
  for (const auto& row : table.rows) {
    const bool all_missing = std::all_of(row.begin(), row.end(), is_missing);
    if (all_missing || is_missing(row[target])) {
      ++dropped_null;
      continue;
    }
    if (!seen.insert(row).second) {
      ++dropped_dup;
      continue;
    }
    out.rows.push_back(row);
  }
  report.rows_in = table.n_rows();
  report.rows_dropped_null = dropped_null;
  report.rows_dropped_duplicate = dropped_dup;
  if (out.rows.empty()) fail(ErrorCode::kNoRows, "no rows left after dropping nulls/duplicates");
  return out;
}

PatientTable impute_mode(const PatientTable& table, std::size_t* cells_imputed) {
  PatientTable out = table;
  std::size_t imputed = 0;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    // std::map orders doubles numerically and strings lexicographically, and
    // variant ordering puts monostate < double < string, so the first
    // maximal entry is the tie-break winner.
    std::map<Cell, std::size_t> freq;
    bool has_missing = false;
    for (const auto& row : table.rows) {
      if (is_missing(row[c])) {
        has_missing = true;
      } else {
        ++freq[row[c]];
      }
    }
    if (!has_missing) continue;
    if (freq.empty())
      fail(ErrorCode::kAllMissing, "column '" + table.columns[c].name + "' has no values");
    auto best = freq.begin();
    for (auto it = freq.begin(); it != freq.end(); ++it)
      if (it->second > best->second) best = it;
    for (auto& row : out.rows) {
      if (is_missing(row[c])) {
        row[c] = best->first;
        ++imputed;
      }
    }
  }
  if (cells_imputed != nullptr) *cells_imputed = imputed;
  return out;
}

PatientTable encode_categoricals(const PatientTable& table, CategoryEncoders& encoders) {
  PatientTable out = table;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    const auto& meta = table.columns[c];
    if (meta.kind == ColumnKind::kNumeric) continue;
    const bool numeric = std::all_of(table.rows.begin(), table.rows.end(), [&](const auto& r) {
      return std::holds_alternative<double>(r[c]);
    });
    if (numeric) continue;  // already encoded
    if (meta.kind == ColumnKind::kTarget) {
      for (auto& row : out.rows) {
        const auto* text = std::get_if<std::string>(&row[c]);
        require(text != nullptr, ErrorCode::kSchema, "mixed numeric/text target column");
        const auto code = parse_severity(*text);
        if (!code) fail(ErrorCode::kUnknownCategory, "unknown severity code '" + *text + "'");
        row[c] = static_cast<double>(*code);
      }
      continue;
    }
    std::set<std::string> values;
    for (const auto& row : table.rows) {
      const auto* text = std::get_if<std::string>(&row[c]);
      require(text != nullptr, ErrorCode::kSchema,
              "column '" + meta.name + "' mixes numbers and categories or has missing cells");
      values.insert(*text);
    }
    auto& cats = encoders.categories[meta.name];
    cats.assign(values.begin(), values.end());
    for (auto& row : out.rows)
      row[c] = static_cast<double>(encoders.encode(meta.name, std::get<std::string>(row[c])));
  }
  return out;
}

std::pair<FeatureMatrix, LabelVector> to_features(const PatientTable& encoded) {
  const std::size_t target = encoded.target_index();
  FeatureMatrix x;
  x.n = encoded.n_rows();
  x.d = encoded.n_features();
  require(x.d == kFeatureCount, ErrorCode::kSchema,
          "expected 16 feature columns, found " + std::to_string(x.d));
  x.values.reserve(x.n * x.d);
  LabelVector y;
  y.reserve(x.n);
  for (const auto& row : encoded.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      const auto* v = std::get_if<double>(&row[c]);
      require(v != nullptr, ErrorCode::kSchema,
              "column '" + encoded.columns[c].name + "' is not numeric after encoding");
      if (c == target) {
        y.push_back(static_cast<int>(*v));
      } else {
        x.values.push_back(*v);
      }
    }
  }
  class_counts(y);  // validates label range
  return {std::move(x), std::move(y)};
}

std::pair<FeatureMatrix, LabelVector> smote_resample(const FeatureMatrix& x,
                                                     const LabelVector& y, std::size_t k,
                                                     std::uint64_t seed) {
  require(k >= 1, ErrorCode::kInvalidArgument, "SMOTE needs k >= 1");
  require(y.size() == x.n, ErrorCode::kShapeMismatch, "labels and rows differ in count");
  const ClassCounts counts = class_counts(y);
  const std::size_t target = *std::max_element(counts.begin(), counts.end());
  for (std::size_t c = 0; c < kClassCount; ++c) {
    if (counts[c] < target && counts[c] < k + 1)
      fail(ErrorCode::kClassTooSmall,
           "class " + std::string(severity_name(static_cast<int>(c))) + " has " +
               std::to_string(counts[c]) + " members; SMOTE with k=" + std::to_string(k) +
               " needs at least " + std::to_string(k + 1));
  }

  FeatureMatrix out_x = x;
  LabelVector out_y = y;
  out_x.column_mins.clear();
  out_x.column_maxs.clear();
  const auto& kern = simd::active_kernels();
  Rng rng(seed);
  std::vector<double> synthetic(x.d);

  for (std::size_t c = 0; c < kClassCount; ++c) {
    const std::size_t needed = target - counts[c];
    if (needed == 0) continue;
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < x.n; ++i)
      if (y[i] == static_cast<int>(c)) members.push_back(i);

    // k nearest same-class neighbours of every member, ties by row index.
    const std::size_t m = members.size();
    std::vector<std::vector<std::size_t>> neighbours(m);
    std::vector<std::pair<double, std::size_t>> dist;
    for (std::size_t a = 0; a < m; ++a) {
      dist.clear();
      for (std::size_t b = 0; b < m; ++b) {
        if (a == b) continue;
        dist.emplace_back(kern.power_sum(x.row(members[a]), x.row(members[b]), x.d,
                                         simd::PowerKind::kSquare, 2.0),
                          members[b]);
      }
      std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
      for (std::size_t t = 0; t < k; ++t) neighbours[a].push_back(dist[t].second);
    }

    for (std::size_t s = 0; s < needed; ++s) {
      const std::size_t a = static_cast<std::size_t>(rng.index(m));
      const std::size_t nn = neighbours[a][static_cast<std::size_t>(rng.index(k))];
      const double gap = rng.uniform();
      const double* base = x.row(members[a]);
      const double* other = x.row(nn);
      for (std::size_t j = 0; j < x.d; ++j) synthetic[j] = base[j] + gap * (other[j] - base[j]);
      out_x.values.insert(out_x.values.end(), synthetic.begin(), synthetic.end());
      out_y.push_back(static_cast<int>(c));
      ++out_x.n;
    }
  }
  return {std::move(out_x), std::move(out_y)};
}

FeatureMatrix minmax_normalize(const FeatureMatrix& x) {
  FeatureMatrix out = x;
  out.column_mins.assign(x.d, 0.0);
  out.column_maxs.assign(x.d, 0.0);
  for (std::size_t j = 0; j < x.d; ++j) {
    double lo = x.n > 0 ? x.at(0, j) : 0.0;
    double hi = lo;
    for (std::size_t i = 1; i < x.n; ++i) {
      lo = std::min(lo, x.at(i, j));
      hi = std::max(hi, x.at(i, j));
    }
    out.column_mins[j] = lo;
    out.column_maxs[j] = hi;
    const double range = hi - lo;
    for (std::size_t i = 0; i < x.n; ++i) {
      double& v = out.values[i * x.d + j];
      v = range > 0.0 ? (v - lo) / range : 0.0;
    }
  }
  return out;
}

std::vector<double> apply_scaling(const FeatureMatrix& fitted, const std::vector<double>& raw,
                                  std::vector<std::size_t>* clamped) {
  require(raw.size() == fitted.d && fitted.column_mins.size() == fitted.d,
          ErrorCode::kShapeMismatch, "feature vector does not match the fitted scaler");
  std::vector<double> out(raw.size());
  for (std::size_t j = 0; j < raw.size(); ++j) {
    const double lo = fitted.column_mins[j];
    const double range = fitted.column_maxs[j] - lo;
    double v = range > 0.0 ? (raw[j] - lo) / range : 0.0;
    if (v < 0.0 || v > 1.0 || (range == 0.0 && raw[j] != lo)) {
      if (clamped != nullptr) clamped->push_back(j);
      v = std::clamp(v, 0.0, 1.0);
    }
    out[j] = v;
  }
  return out;
}

PreprocessResult preprocess_table(const PatientTable& raw, const PreprocessConfig& config) {
  PreprocessResult result;
  result.report.seed = config.seed;
  result.report.smote_k = config.smote_k;

  PatientTable cleaned = drop_null_and_duplicates(raw, result.report);
  cleaned = impute_mode(cleaned, &result.report.cells_imputed);
  const PatientTable encoded = encode_categoricals(cleaned, result.encoders);
  auto [x, y] = to_features(encoded);
  result.report.class_counts_before = class_counts(y);

  auto [bx, by] = smote_resample(x, y, config.smote_k, config.seed);
  result.report.synthetic_rows = bx.n - x.n;
  result.report.class_counts_after = class_counts(by);
  result.report.rows_out = bx.n;

  result.features = minmax_normalize(bx);
  result.labels = std::move(by);
  result.cleaned = std::move(cleaned);
  return result;
}

PreprocessResult preprocess_pipeline(const std::string& csv_path, const HeaderMapping& mapping,
                                     const PreprocessConfig& config) {
  return preprocess_table(load_csv(csv_path, mapping), config);
}

PatientTable table_from_features(const FeatureMatrix& x, const LabelVector& labels) {
  require(labels.size() == x.n && x.d == kFeatureCount, ErrorCode::kShapeMismatch,
          "matrix/labels do not describe a 16-feature dataset");
  PatientTable t;
  t.columns = canonical_columns();
  t.rows.reserve(x.n);
  for (std::size_t i = 0; i < x.n; ++i) {
    std::vector<Cell> row;
    row.reserve(x.d + 1);
    for (std::size_t j = 0; j < x.d; ++j) row.emplace_back(x.at(i, j));
    row.emplace_back(static_cast<double>(labels[i]));
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace triage::ingest
