#include "triage/serve/checkpoint.hpp"

#include <json.hpp>

#include "triage/common/binary_io.hpp"
#include "triage/common/error.hpp"
#include "triage/common/hash.hpp"

namespace triage::serve {
namespace {

using json = nlohmann::ordered_json;

constexpr char kMagic[4] = {'T', 'R', 'G', 'C'};

const char* kind_name(gnn::LayerKind k) {
  switch (k) {
    case gnn::LayerKind::kGcn: return "gcn";
    case gnn::LayerKind::kGatv2: return "gatv2";
    case gnn::LayerKind::kSage: return "sage";
  }
  return "gcn";
}

gnn::LayerKind kind_from(const std::string& s) {
  if (s == "gcn") return gnn::LayerKind::kGcn;
  if (s == "gatv2") return gnn::LayerKind::kGatv2;
  if (s == "sage") return gnn::LayerKind::kSage;
  fail(ErrorCode::kParse, "unknown layer kind in checkpoint: " + s);
}

json spec_json(const gnn::ModelSpec& s) {
  json layers = json::array();
  for (const auto& l : s.layers) {
    layers.push_back({{"kind", kind_name(l.kind)},
                      {"in_dim", l.in_dim},
                      {"out_dim", l.out_dim},
                      {"heads", l.heads},
                      {"concat_heads", l.concat_heads},
                      {"aggregator", l.aggregator == gnn::Aggregator::kMax ? "max" : "mean"},
                      {"activation_after", l.activation_after},
                      {"dropout_after", l.dropout_after}});
  }
  return {{"name", s.name},         {"lr", s.lr},
          {"dropout_rate", s.dropout_rate}, {"input_dropout", s.input_dropout},
          {"fan_out", s.fan_out},   {"batch_size", s.batch_size},
          {"layers", layers}};
}

gnn::ModelSpec spec_from(const json& j) {
  gnn::ModelSpec s;
  s.name = j.at("name").get<std::string>();
  s.lr = j.at("lr").get<double>();
  s.dropout_rate = j.at("dropout_rate").get<double>();
  s.input_dropout = j.at("input_dropout").get<bool>();
  s.fan_out = j.at("fan_out").get<std::size_t>();
  s.batch_size = j.at("batch_size").get<std::size_t>();
  for (const auto& lj : j.at("layers")) {
    gnn::LayerSpec l;
    l.kind = kind_from(lj.at("kind").get<std::string>());
    l.in_dim = lj.at("in_dim").get<std::size_t>();
    l.out_dim = lj.at("out_dim").get<std::size_t>();
    l.heads = lj.at("heads").get<std::size_t>();
    l.concat_heads = lj.at("concat_heads").get<bool>();
    l.aggregator = lj.at("aggregator").get<std::string>() == "max" ? gnn::Aggregator::kMax
                                                                   : gnn::Aggregator::kMean;
    l.activation_after = lj.at("activation_after").get<bool>();
    l.dropout_after = lj.at("dropout_after").get<bool>();
    s.layers.push_back(l);
  }
  return s;
}

}  // namespace

std::vector<std::byte> encode_checkpoint(const Checkpoint& c) {
  require(c.params.names.size() == c.params.tensors.size(), ErrorCode::kShapeMismatch,
          "parameter names and tensors differ in count");
  json header;
  header["spec"] = spec_json(c.spec);
  header["param_names"] = c.params.names;
  header["column_mins"] = c.column_mins;
  header["column_maxs"] = c.column_maxs;
  header["encoders"] = c.encoders.categories;
  header["metric"] = {{"kind", static_cast<int>(c.metric.kind)}, {"p", c.metric.p},
                      {"name", c.metric.name()}};
  header["threshold"] = c.threshold;
  header["graph_file"] = c.graph_file;
  header["config_hash"] = c.config_hash;
  header["seed"] = c.seed;
  header["sampling"] = {{"fan_out", c.sampling.fan_out}, {"seed", c.sampling.seed}};

  ByteWriter w;
  w.put_raw(std::string_view(kMagic, 4));
  w.put<std::uint32_t>(kCheckpointVersion);
  w.put_string(header.dump());
  w.put<std::uint64_t>(c.params.tensors.size());
  for (const auto& t : c.params.tensors) {
    w.put<std::uint64_t>(t.rows);
    w.put<std::uint64_t>(t.cols);
    w.put_span<double>(t.values);
  }
  const std::uint64_t sum = fnv1a(w.bytes());
  w.put<std::uint64_t>(sum);
  return std::move(w.bytes());
}

Checkpoint decode_checkpoint(std::span<const std::byte> bytes) {
  require(bytes.size() >= 4 + 4 + 8 + 8, ErrorCode::kChecksum, "checkpoint truncated");
  require(std::memcmp(bytes.data(), kMagic, 4) == 0, ErrorCode::kParse, "not a checkpoint file");
  const auto body = bytes.first(bytes.size() - 8);
  std::uint64_t stored;
  std::memcpy(&stored, bytes.data() + body.size(), 8);
  require(fnv1a(body) == stored, ErrorCode::kChecksum,
          "checkpoint checksum mismatch (corrupt or truncated file)");

  ByteReader r(body);
  r.get_raw(4);
  const auto version = r.get<std::uint32_t>();
  require(version == kCheckpointVersion, ErrorCode::kVersionMismatch,
          "checkpoint version " + std::to_string(version) + ", expected " +
              std::to_string(kCheckpointVersion));
  Checkpoint c;
  try {
    const json h = json::parse(r.get_string());
    c.spec = spec_from(h.at("spec"));
    c.params.names = h.at("param_names").get<std::vector<std::string>>();
    c.column_mins = h.at("column_mins").get<std::vector<double>>();
    c.column_maxs = h.at("column_maxs").get<std::vector<double>>();
    c.encoders.categories =
        h.at("encoders").get<std::map<std::string, std::vector<std::string>>>();
    c.metric.kind = static_cast<simnet::MetricKind>(h.at("metric").at("kind").get<int>());
    c.metric.p = h.at("metric").at("p").get<double>();
    c.threshold = h.at("threshold").get<double>();
    c.graph_file = h.at("graph_file").get<std::string>();
    c.config_hash = h.at("config_hash").get<std::string>();
    c.seed = h.at("seed").get<std::uint64_t>();
    c.sampling.fan_out = h.at("sampling").at("fan_out").get<std::size_t>();
    c.sampling.seed = h.at("sampling").at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kParse, std::string("malformed checkpoint header: ") + e.what());
  }
  const auto count = r.get<std::uint64_t>();
  require(count == c.params.names.size(), ErrorCode::kParse,
          "checkpoint tensor count does not match names");
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto rows = r.get<std::uint64_t>();
    const auto cols = r.get<std::uint64_t>();
    c.params.tensors.emplace_back(rows, cols, r.get_vector<double>(rows * cols));
  }
  require(r.remaining() == 0, ErrorCode::kParse, "trailing bytes in checkpoint");
  return c;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  write_file_atomic(path, encode_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::string& path) {
  return decode_checkpoint(read_file_bytes(path));
}

}  // namespace triage::serve
