// Copyright 2026 The provgraph Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// HTTP facade over the store, ingestion pipeline and query engine.
//
//   POST /workflows                      register a WorkflowSpec
//   POST /provenance                     enqueue an IngestEnvelope (202)
//   GET  /jobs/{job_id}                  ingestion job status
//   GET  /provenance/seeds/.../targets/… lineage query
//   GET  /health                         status, epoch, queue depth
//
// Writes go through the queue and the single background worker; each query
// runs against a snapshot taken when the request starts.

#ifndef PROVGRAPH_SERVICE_H_
#define PROVGRAPH_SERVICE_H_

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>

#include "provgraph/graph_store.h"
#include "provgraph/ingestion.h"

namespace httplib {
class Server;
}

namespace provgraph {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::size_t queue_capacity = 10000;
  std::size_t worker_max_batch = 256;
  std::chrono::milliseconds worker_poll_interval{50};
  std::optional<std::filesystem::path> persistence_log;
  std::size_t status_retention = 100000;
  std::chrono::milliseconds shutdown_timeout{5000};
  // Tests start with a stalled worker to exercise backpressure.
  bool start_worker_paused = false;

  // Throws ConfigError unless capacity and max-batch are >= 1.
  void validate() const;
};

// Config file: one `key = value` per line, '#' comments. Keys:
//   listen                   host:port
//   queue_capacity           integer >= 1
//   worker_max_batch         integer >= 1
//   worker_poll_interval_ms  integer
//   persistence_log          path (empty disables)
//   status_retention         integer
//   shutdown_timeout_ms      integer
// Each key may be overridden by an environment variable named PROVSVC_ plus
// the upper-cased key (PROVSVC_LISTEN, PROVSVC_QUEUE_CAPACITY, ...).
ServiceConfig parse_config(const std::string& text,
                           const std::map<std::string, std::string>& env);
ServiceConfig load_config(const std::optional<std::filesystem::path>& path);

class ProvenanceService {
 public:
  explicit ProvenanceService(ServiceConfig config);
  ~ProvenanceService();

  ProvenanceService(const ProvenanceService&) = delete;
  ProvenanceService& operator=(const ProvenanceService&) = delete;

  // Binds the listening socket and serves on a background thread. Returns
  // the bound port.
  int start();
  // Serves on the calling thread until stop() is called elsewhere.
  void run();
  // Stops accepting requests, drains the queue within shutdown_timeout and
  // stops the worker. Idempotent.
  void stop();

  int port() const { return port_; }
  GraphStore& store() { return *store_; }
  SpecRegistry& specs() { return specs_; }
  IngestionPipeline& pipeline() { return *pipeline_; }
  IngestionWorker& worker() { return *worker_; }

 private:
  void bind();
  void install_routes();

  ServiceConfig config_;
  std::unique_ptr<GraphStore> store_;
  SpecRegistry specs_;
  std::unique_ptr<IngestionPipeline> pipeline_;
  std::unique_ptr<IngestionWorker> worker_;
  std::unique_ptr<httplib::Server> server_;
  std::thread server_thread_;
  int port_ = 0;
  bool stopped_ = false;
};

}  // namespace provgraph

#endif  // PROVGRAPH_SERVICE_H_
