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

#include "provgraph/client.h"

#include <thread>

#include "httplib.h"

namespace provgraph {
namespace {

HttpReply to_reply(const httplib::Result& result, const std::string& what) {
  if (!result) {
    throw TransportError(what + ": " + httplib::to_string(result.error()));
  }
  HttpReply reply;
  reply.status = result->status;
  if (!result->body.empty()) {
    try {
      reply.body = Json::parse(result->body);
    } catch (const Json::parse_error&) {
      throw TransportError(what + ": response is not JSON");
    }
  }
  return reply;
}

}  // namespace

ServiceClient::ServiceClient(const std::string& base_url)
    : http_(std::make_unique<httplib::Client>(base_url)) {
  http_->set_connection_timeout(std::chrono::seconds(5));
  http_->set_read_timeout(std::chrono::seconds(60));
}

ServiceClient::~ServiceClient() = default;

HttpReply ServiceClient::get(const std::string& path_and_query) {
  return to_reply(http_->Get(path_and_query), "GET " + path_and_query);
}

HttpReply ServiceClient::post(const std::string& path, const std::string& body) {
  return to_reply(http_->Post(path, body, "application/json"), "POST " + path);
}

HttpReply ServiceClient::register_spec(const WorkflowSpec& spec) {
  return post("/workflows", canonical_json(spec));
}

HttpReply ServiceClient::submit(const IngestEnvelope& env) {
  return post("/provenance", canonical_json(env));
}

HttpReply ServiceClient::job(const std::string& job_id) {
  return get("/jobs/" + percent_encode(job_id));
}

HttpReply ServiceClient::health() { return get("/health"); }

HttpReply ServiceClient::query(const QueryRequest& request, bool include_paths) {
  return get(query_target(request, include_paths));
}

Json ServiceClient::wait_for_job(const std::string& job_id,
                                 std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  for (;;) {
    auto reply = job(job_id);
    if (reply.status != 200) {
      throw TransportError("job " + job_id + ": HTTP " + std::to_string(reply.status));
    }
    const auto status = reply.body.value("status", "");
    if (status == "persisted" || status == "failed" ||
        std::chrono::steady_clock::now() >= deadline) {
      return reply.body;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
}

std::string query_target(const QueryRequest& request, bool include_paths) {
  std::string target = format_query_path(request);
  std::string params;
  auto add = [&](const std::string& key, const std::string& value) {
    params += params.empty() ? '?' : '&';
    params += key + "=" + percent_encode(value);
  };
  if (request.max_depth) add("max_depth", std::to_string(*request.max_depth));
  if (request.order_by_attribute) {
    add("order_by", request.order_by_attribute->attribute);
    add("order", request.order_by_attribute->order == SortOrder::kDescending
                     ? "desc"
                     : "asc");
  }
  if (!include_paths) add("include_paths", "false");
  return target + params;
}

std::optional<std::string> HttpLoadSink::submit(const IngestEnvelope& env) {
  auto reply = client_.submit(env);
  if (reply.status == 429) return std::nullopt;
  if (reply.status != 202) {
    throw TransportError("POST /provenance: HTTP " + std::to_string(reply.status) +
                         " " + reply.body.dump());
  }
  return reply.body.at("job_id").get<std::string>();
}

LoadSink::Result HttpLoadSink::await(const std::string& job_id) {
  for (;;) {
    auto job = client_.wait_for_job(job_id);
    const auto status = job.value("status", "");
    if (status == "persisted") return {true, ""};
    if (status == "failed") return {false, job.value("failure_reason", "failed")};
  }
}

}  // namespace provgraph
