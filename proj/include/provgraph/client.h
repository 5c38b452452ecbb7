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

// Blocking HTTP client for the provenance service, used by the CLI and the
// end-to-end tests.

#ifndef PROVGRAPH_CLIENT_H_
#define PROVGRAPH_CLIENT_H_

#include <chrono>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>

#include "provgraph/ingestion.h"
#include "provgraph/json_codec.h"
#include "provgraph/query_engine.h"

namespace httplib {
class Client;
}

namespace provgraph {

// The service could not be reached or answered unexpectedly.
class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct HttpReply {
  int status = 0;
  Json body;
};

class ServiceClient {
 public:
  // `base_url` like "http://127.0.0.1:8080".
  explicit ServiceClient(const std::string& base_url);
  ~ServiceClient();

  HttpReply get(const std::string& path_and_query);
  HttpReply post(const std::string& path, const std::string& body);

  HttpReply register_spec(const WorkflowSpec& spec);
  HttpReply submit(const IngestEnvelope& env);
  HttpReply job(const std::string& job_id);
  HttpReply health();
  // GETs the REST form of `request`, carrying max_depth and ordering as
  // query parameters.
  HttpReply query(const QueryRequest& request, bool include_paths = true);

  // Polls /jobs until the job is terminal or `timeout` passes.
  Json wait_for_job(const std::string& job_id,
                    std::chrono::milliseconds timeout = std::chrono::seconds(30));

 private:
  std::unique_ptr<httplib::Client> http_;
};

// Full request URL path (with query string) for `request`.
std::string query_target(const QueryRequest& request, bool include_paths);

// Sends historical records through POST /provenance.
class HttpLoadSink : public LoadSink {
 public:
  explicit HttpLoadSink(ServiceClient& client) : client_(client) {}

  std::optional<std::string> submit(const IngestEnvelope& env) override;
  Result await(const std::string& job_id) override;

 private:
  ServiceClient& client_;
};

}  // namespace provgraph

#endif  // PROVGRAPH_CLIENT_H_
