#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>

#include "triage/serve/checkpoint.hpp"
#include "triage/simnet/graph.hpp"

namespace httplib {
class Server;
}

namespace triage::serve {

struct LoadedModel {
  Checkpoint checkpoint;
  simnet::PatientGraph graph;
  std::string checkpoint_path;
};

// Loads a checkpoint and its graph. An empty graph_path uses the
// checkpoint's graph reference, resolved against the checkpoint's directory
// when relative. Throws if the graph does not match the checkpoint.
std::shared_ptr<const LoadedModel> load_model(const std::string& checkpoint_path,
                                              const std::string& graph_path = "");

struct HttpReply {
  int status = 200;
  std::string body;  // JSON
};

// Request handling independent of the transport. Each request works on the
// model that was current when it started; swap() replaces it for later
// requests.
class TriageService {
 public:
  explicit TriageService(std::shared_ptr<const LoadedModel> model);

  HttpReply predict(const std::string& body) const;
  HttpReply health() const;
  HttpReply schema() const;

  void swap(std::shared_ptr<const LoadedModel> model);
  std::shared_ptr<const LoadedModel> current() const;

  // Routes /v1/predict (POST), /v1/health and /v1/schema (GET).
  void install(httplib::Server& server);

 private:
  mutable std::mutex mu_;
  std::shared_ptr<const LoadedModel> model_;
  mutable std::atomic<std::uint64_t> requests_{0};
  mutable std::atomic<std::uint64_t> failures_{0};
};

}  // namespace triage::serve
