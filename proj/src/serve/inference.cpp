#include "triage/serve/inference.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <numeric>

#include "triage/gnn/model.hpp"
#include "triage/ingest/preprocess.hpp"
#include "triage/ingest/table.hpp"

namespace triage::serve {
namespace {

using json = nlohmann::ordered_json;

ErrorCode combined_code(const std::vector<FieldIssue>& issues) {
  const bool only_category = !issues.empty() && std::all_of(issues.begin(), issues.end(), [](const auto& i) {
    return i.code == ErrorCode::kUnknownCategory;
  });
  return only_category ? ErrorCode::kUnknownCategory : ErrorCode::kInvalidField;
}

std::string combined_message(const std::vector<FieldIssue>& issues) {
  std::string msg = "invalid patient record:";
  for (const auto& i : issues) msg += " " + (i.field.empty() ? std::string("record") : i.field) + ": " + i.message + ";";
  msg.pop_back();
  return msg;
}

bool parse_number(const std::string& text, double& out) {
  if (text.empty()) return false;
  char* end = nullptr;
  out = std::strtod(text.c_str(), &end);
  while (end != nullptr && *end == ' ') ++end;
  return end != text.c_str() && *end == '\0';
}

}  // namespace

RecordError::RecordError(std::vector<FieldIssue> issues)
    : Error(combined_code(issues), combined_message(issues)), issues_(std::move(issues)) {}

EncodedRecord encode_record(const Checkpoint& ckpt, const nlohmann::json& record) {
  std::vector<FieldIssue> issues;
  if (!record.is_object()) {
    issues.push_back({"", ErrorCode::kInvalidField, "record must be a JSON object"});
    throw RecordError(std::move(issues));
  }
  const auto& fields = ingest::canonical_fields();
  const std::string target_name(fields[ingest::kFeatureCount].name);

  std::map<std::string, const nlohmann::json*> by_name;
  for (const auto& [key, value] : record.items()) {
    const std::string name = ingest::fold_name(key);
    if (name == target_name) continue;
    if (!ingest::feature_index(name)) {
      issues.push_back({key, ErrorCode::kInvalidField, "unknown field"});
      continue;
    }
    if (!by_name.emplace(name, &value).second)
      issues.push_back({key, ErrorCode::kInvalidField, "field given more than once"});
  }

  EncodedRecord out;
  out.encoded.assign(ingest::kFeatureCount, 0.0);
  for (std::size_t i = 0; i < ingest::kFeatureCount; ++i) {
    const std::string name(fields[i].name);
    const auto it = by_name.find(name);
    if (it == by_name.end() || it->second->is_null()) {
      issues.push_back({name, ErrorCode::kMissingField, "is required"});
      continue;
    }
    const nlohmann::json& v = *it->second;
    const auto enc = ckpt.encoders.categories.find(name);
    if (enc != ckpt.encoders.categories.end()) {
      if (!v.is_string()) {
        issues.push_back({name, ErrorCode::kInvalidField, "must be one of the allowed categories"});
        continue;
      }
      try {
        out.encoded[i] = ckpt.encoders.encode(name, v.get<std::string>());
      } catch (const Error&) {
        std::string allowed;
        for (const auto& c : enc->second) allowed += (allowed.empty() ? "" : ", ") + c;
        issues.push_back({name, ErrorCode::kUnknownCategory,
                          "unknown category '" + v.get<std::string>() + "' (allowed: " + allowed + ")"});
      }
      continue;
    }
    double number = 0.0;
    const bool ok = v.is_number() ? (number = v.get<double>(), true)
                                  : v.is_string() && parse_number(v.get<std::string>(), number);
    if (!ok || !std::isfinite(number)) {
      issues.push_back({name, ErrorCode::kInvalidField, "must be a finite number"});
      continue;
    }
    out.encoded[i] = number;
  }
  if (!issues.empty()) throw RecordError(std::move(issues));

  ingest::FeatureMatrix fitted;
  fitted.d = ingest::kFeatureCount;
  fitted.column_mins = ckpt.column_mins;
  fitted.column_maxs = ckpt.column_maxs;
  std::vector<std::size_t> clamped;
  out.scaled = ingest::apply_scaling(fitted, out.encoded, &clamped);
  for (std::size_t c : clamped) out.clamped_fields.emplace_back(fields[c].name);
  return out;
}

PredictionResponse predict_scaled(const Checkpoint& ckpt, const simnet::PatientGraph& g,
                                  const std::vector<double>& scaled, std::size_t fallback_k) {
  simnet::AttachedNeighborhood nb =
      simnet::attach_node(g, scaled, ckpt.metric, ckpt.threshold, fallback_k);
  PredictionResponse r;
  r.neighbor_count = nb.neighbors.size();
  r.fallback_used = nb.fallback_used;
  r.model = ckpt.spec.name;
  r.config_hash = ckpt.config_hash;
  r.metric = ckpt.metric.name();
  r.threshold = ckpt.threshold;

  std::vector<std::size_t> order(nb.neighbors.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto& metric = ckpt.metric;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (nb.scores[a] != nb.scores[b]) return metric.closer(nb.scores[a], nb.scores[b]);
    return nb.neighbors[a] < nb.neighbors[b];
  });
  for (std::size_t k = 0; k < std::min(kTopNeighbors, order.size()); ++k) {
    const std::uint32_t v = nb.neighbors[order[k]];
    r.top_neighbors.push_back({v, g.labels[v], nb.scores[order[k]]});
  }

  const simnet::AttachedView view(g, scaled, std::move(nb));
  const ag::Tensor logp = gnn::predict_log_proba(
      ckpt.spec, ckpt.params, view, ckpt.sampling,
      {static_cast<std::uint32_t>(view.new_node())});
  for (std::size_t c = 0; c < ingest::kClassCount; ++c) r.probabilities[c] = std::exp(logp.at(0, c));
  r.predicted = static_cast<int>(std::max_element(r.probabilities.begin(), r.probabilities.end()) -
                                 r.probabilities.begin());
  return r;
}

PredictionResponse predict_patient(const Checkpoint& ckpt, const simnet::PatientGraph& g,
                                   const nlohmann::json& record, std::size_t fallback_k) {
  EncodedRecord enc = encode_record(ckpt, record);
  PredictionResponse r = predict_scaled(ckpt, g, enc.scaled, fallback_k);
  r.clamped_fields = std::move(enc.clamped_fields);
  return r;
}

nlohmann::ordered_json PredictionResponse::to_json() const {
  json j;
  j["predicted_class"] = ingest::severity_name(predicted);
  j["predicted_index"] = predicted;
  json probs = json::object();
  for (std::size_t c = 0; c < probabilities.size(); ++c)
    probs[std::string(ingest::severity_name(static_cast<int>(c)))] = probabilities[c];
  j["probabilities"] = probs;
  json top = json::array();
  for (const auto& n : top_neighbors)
    top.push_back({{"node", n.node}, {"label", ingest::severity_name(n.label)}, {"score", n.score}});
  j["neighbors"] = {{"count", neighbor_count}, {"top", top}};
  j["fallback_used"] = fallback_used;
  j["clamped_fields"] = clamped_fields;
  j["provenance"] = {{"model", model},
                     {"config_hash", config_hash},
                     {"metric", metric},
                     {"threshold", threshold}};
  return j;
}

nlohmann::ordered_json schema_json(const Checkpoint& ckpt) {
  json fields = json::array();
  for (const auto& f : ingest::canonical_fields()) {
    json e;
    e["name"] = f.name;
    e["display"] = f.display;
    e["description"] = f.description;
    const std::string name(f.name);
    const auto enc = ckpt.encoders.categories.find(name);
    if (f.kind == ingest::ColumnKind::kTarget) {
      e["type"] = "label";
      e["required"] = false;
      json allowed = json::array();
      for (int c = 0; c < static_cast<int>(ingest::kClassCount); ++c)
        allowed.push_back(ingest::severity_name(c));
      e["allowed"] = allowed;
    } else if (enc != ckpt.encoders.categories.end()) {
      e["type"] = "category";
      e["required"] = true;
      e["allowed"] = enc->second;
    } else {
      e["type"] = "number";
      e["required"] = true;
    }
    fields.push_back(e);
  }
  json classes = json::array();
  for (int c = 0; c < static_cast<int>(ingest::kClassCount); ++c)
    classes.push_back(ingest::severity_name(c));
  return {{"version", "v1"}, {"fields", fields}, {"classes", classes}};
}

}  // namespace triage::serve
