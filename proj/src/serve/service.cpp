#include "triage/serve/service.hpp"

#include <filesystem>

#include <httplib.h>

#include "triage/serve/inference.hpp"
#include "triage/simnet/graph_io.hpp"

namespace triage::serve {
namespace {

using json = nlohmann::ordered_json;

HttpReply reply(int status, const json& body) { return {status, body.dump()}; }

HttpReply error_reply(int status, const std::string& message) {
  return reply(status, json{{"error", message}});
}

}  // namespace

std::shared_ptr<const LoadedModel> load_model(const std::string& checkpoint_path,
                                              const std::string& graph_path) {
  namespace fs = std::filesystem;
  auto m = std::make_shared<LoadedModel>();
  m->checkpoint = load_checkpoint(checkpoint_path);
  m->checkpoint_path = checkpoint_path;
  std::string path = graph_path;
  if (path.empty()) {
    require(!m->checkpoint.graph_file.empty(), ErrorCode::kInvalidArgument,
            "checkpoint has no graph reference; pass the graph explicitly");
    fs::path ref(m->checkpoint.graph_file);
    if (ref.is_relative()) ref = fs::path(checkpoint_path).parent_path() / ref;
    path = ref.lexically_normal().string();
  }
  m->graph = simnet::load_graph(path);
  const auto& ck = m->checkpoint;
  require(!ck.spec.layers.empty() && m->graph.features.d == ck.spec.layers.front().in_dim,
          ErrorCode::kShapeMismatch, "graph feature width does not match the model");
  require(m->graph.stats.metric == ck.metric && m->graph.stats.threshold == ck.threshold,
          ErrorCode::kInvalidArgument,
          "graph was built with " + m->graph.stats.metric.name() + " but the checkpoint expects " +
              ck.metric.name());
  return m;
}

TriageService::TriageService(std::shared_ptr<const LoadedModel> model) : model_(std::move(model)) {
  require(model_ != nullptr, ErrorCode::kInvalidArgument, "service needs a model");
}

std::shared_ptr<const LoadedModel> TriageService::current() const {
  std::lock_guard<std::mutex> lock(mu_);
  return model_;
}

void TriageService::swap(std::shared_ptr<const LoadedModel> model) {
  require(model != nullptr, ErrorCode::kInvalidArgument, "cannot swap in an empty model");
  std::lock_guard<std::mutex> lock(mu_);
  model_ = std::move(model);
}

HttpReply TriageService::predict(const std::string& body) const {
  ++requests_;
  const auto model = current();
  nlohmann::json record;
  try {
    record = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception&) {
    ++failures_;
    return error_reply(400, "request body is not valid JSON");
  }
  try {
    return reply(200, predict_patient(model->checkpoint, model->graph, record).to_json());
  } catch (const RecordError& e) {
    ++failures_;
    json fields = json::array();
    for (const auto& issue : e.issues())
      fields.push_back({{"field", issue.field},
                        {"code", to_string(issue.code)},
                        {"message", issue.message}});
    const int status = e.code() == ErrorCode::kUnknownCategory ? 422 : 400;
    return reply(status, json{{"error", e.what()}, {"fields", fields}});
  } catch (const std::exception&) {
    ++failures_;
    return error_reply(500, "internal error");
  }
}

HttpReply TriageService::health() const {
  const auto model = current();
  const auto& ck = model->checkpoint;
  return reply(200, json{{"status", "ok"},
                         {"model", ck.spec.name},
                         {"config_hash", ck.config_hash},
                         {"metric", ck.metric.name()},
                         {"threshold", ck.threshold},
                         {"nodes", model->graph.n},
                         {"edges", model->graph.stats.edge_count},
                         {"checkpoint", model->checkpoint_path},
                         {"requests", requests_.load()},
                         {"failures", failures_.load()}});
}

HttpReply TriageService::schema() const { return reply(200, schema_json(current()->checkpoint)); }

void TriageService::install(httplib::Server& server) {
  auto send = [](httplib::Response& res, const HttpReply& r) {
    res.status = r.status;
    res.set_content(r.body, "application/json");
  };
  server.Post("/v1/predict", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, predict(req.body));
  });
  server.Get("/v1/health", [this, send](const httplib::Request&, httplib::Response& res) {
    send(res, health());
  });
  server.Get("/v1/schema", [this, send](const httplib::Request&, httplib::Response& res) {
    send(res, schema());
  });
}

}  // namespace triage::serve
