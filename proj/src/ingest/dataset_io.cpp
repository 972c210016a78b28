#include "triage/ingest/dataset_io.hpp"

#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "triage/common/binary_io.hpp"
#include "triage/common/error.hpp"

namespace triage::ingest {
namespace {

constexpr char kMagic[4] = {'T', 'R', 'G', 'D'};

nlohmann::ordered_json report_json(const PreprocessReport& r) {
  return nlohmann::ordered_json::parse(r.to_json());
}

PreprocessReport report_from_json(const nlohmann::json& j) {
  PreprocessReport r;
  r.rows_in = j.value("rows_in", std::size_t{0});
  r.rows_dropped_null = j.value("rows_dropped_null", std::size_t{0});
  r.rows_dropped_duplicate = j.value("rows_dropped_duplicate", std::size_t{0});
  r.cells_imputed = j.value("cells_imputed", std::size_t{0});
  r.synthetic_rows = j.value("synthetic_rows", std::size_t{0});
  r.rows_out = j.value("rows_out", std::size_t{0});
  if (j.contains("class_counts_before")) r.class_counts_before = j["class_counts_before"].get<ClassCounts>();
  if (j.contains("class_counts_after")) r.class_counts_after = j["class_counts_after"].get<ClassCounts>();
  r.smote_k = j.value("smote_k", std::size_t{0});
  r.seed = j.value("seed", std::uint64_t{0});
  return r;
}

}  // namespace

void save_dataset(const std::string& path, const Dataset& dataset) {
  const auto& x = dataset.features;
  require(dataset.labels.size() == x.n && x.values.size() == x.n * x.d, ErrorCode::kShapeMismatch,
          "dataset arrays inconsistent");
  require(x.column_mins.size() == x.d && x.column_maxs.size() == x.d,
          ErrorCode::kInvalidArgument, "dataset is missing scaling parameters");
  ByteWriter w;
  w.put_raw(std::string_view(kMagic, 4));
  w.put<std::uint32_t>(kDatasetVersion);
  w.put<std::uint64_t>(x.n);
  w.put<std::uint64_t>(x.d);
  w.put_span<double>(x.values);
  std::vector<std::int32_t> labels(dataset.labels.begin(), dataset.labels.end());
  w.put_span<std::int32_t>(labels);
  w.put_span<double>(x.column_mins);
  w.put_span<double>(x.column_maxs);

  nlohmann::ordered_json meta;
  std::vector<std::string> names;
  for (std::size_t i = 0; i < kFeatureCount; ++i) names.emplace_back(canonical_fields()[i].name);
  meta["columns"] = names;
  meta["encoders"] = dataset.encoders.categories;
  meta["report"] = report_json(dataset.report);
  w.put_string(meta.dump());
  write_file_atomic(path, w.bytes());
}

Dataset load_dataset(const std::string& path) {
  const auto bytes = read_file_bytes(path);
  ByteReader r(bytes);
  if (r.remaining() < 4 || r.get_raw(4) != std::string_view(kMagic, 4))
    fail(ErrorCode::kParse, path + " is not a dataset file");
  const auto version = r.get<std::uint32_t>();
  if (version != kDatasetVersion)
    fail(ErrorCode::kVersionMismatch, "dataset version " + std::to_string(version) +
                                          " unsupported (expected " +
                                          std::to_string(kDatasetVersion) + ")");
  Dataset ds;
  auto& x = ds.features;
  x.n = r.get<std::uint64_t>();
  x.d = r.get<std::uint64_t>();
  x.values = r.get_vector<double>(x.n * x.d);
  const auto labels = r.get_vector<std::int32_t>(x.n);
  ds.labels.assign(labels.begin(), labels.end());
  x.column_mins = r.get_vector<double>(x.d);
  x.column_maxs = r.get_vector<double>(x.d);
  const auto meta = nlohmann::json::parse(r.get_string());
  ds.encoders.categories =
      meta.at("encoders").get<std::map<std::string, std::vector<std::string>>>();
  ds.report = report_from_json(meta.at("report"));
  return ds;
}

std::string dataset_to_csv(const FeatureMatrix& x, const LabelVector& labels) {
  std::ostringstream out;
  for (std::size_t j = 0; j < kFeatureCount; ++j) out << canonical_fields()[j].name << ',';
  out << "triage\n";
  char buf[32];
  for (std::size_t i = 0; i < x.n; ++i) {
    for (std::size_t j = 0; j < x.d; ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", x.at(i, j));
      out << buf << ',';
    }
    out << severity_name(labels[i]) << '\n';
  }
  return out.str();
}

}  // namespace triage::ingest
