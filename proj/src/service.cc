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

#include "provgraph/service.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "httplib.h"
#include "provgraph/json_codec.h"
#include "provgraph/query_engine.h"

extern char** environ;

namespace provgraph {
namespace {

constexpr const char* kJsonType = "application/json";

std::string trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r");
  return std::string(text.substr(first, last - first + 1));
}

std::size_t parse_count(const std::string& key, const std::string& value) {
  std::size_t out = 0;
  auto res = std::from_chars(value.data(), value.data() + value.size(), out);
  if (res.ec != std::errc() || res.ptr != value.data() + value.size()) {
    throw ConfigError("config key '" + key + "' expects a non-negative integer, got '" +
                      value + "'");
  }
  return out;
}

void apply_setting(ServiceConfig& config, const std::string& key,
                   const std::string& value) {
  if (key == "listen") {
    auto colon = value.rfind(':');
    if (colon == std::string::npos) {
      throw ConfigError("listen expects host:port, got '" + value + "'");
    }
    config.host = value.substr(0, colon);
    config.port = static_cast<int>(parse_count(key, value.substr(colon + 1)));
    if (config.port > 65535) throw ConfigError("listen port out of range");
  } else if (key == "queue_capacity") {
    config.queue_capacity = parse_count(key, value);
  } else if (key == "worker_max_batch") {
    config.worker_max_batch = parse_count(key, value);
  } else if (key == "worker_poll_interval_ms") {
    config.worker_poll_interval = std::chrono::milliseconds(parse_count(key, value));
  } else if (key == "persistence_log") {
    if (value.empty()) {
      config.persistence_log.reset();
    } else {
      config.persistence_log = value;
    }
  } else if (key == "status_retention") {
    config.status_retention = parse_count(key, value);
  } else if (key == "shutdown_timeout_ms") {
    config.shutdown_timeout = std::chrono::milliseconds(parse_count(key, value));
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

void reply_json(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), kJsonType);
}

void reply_error(httplib::Response& res, int status, std::string_view code,
                 const std::string& message) {
  reply_json(res, status, Json{{"error", code}, {"message", message}});
}

std::optional<Json> parse_body(const httplib::Request& req,
                               httplib::Response& res) {
  try {
    return Json::parse(req.body);
  } catch (const Json::parse_error& e) {
    reply_error(res, 400, "malformed-body", e.what());
    return std::nullopt;
  }
}

}  // namespace

void ServiceConfig::validate() const {
  if (queue_capacity < 1) throw ConfigError("queue_capacity must be >= 1");
  if (worker_max_batch < 1) throw ConfigError("worker_max_batch must be >= 1");
}

ServiceConfig parse_config(const std::string& text,
                           const std::map<std::string, std::string>& env) {
  ServiceConfig config;
  std::istringstream in(text);
  std::string line;
  for (int line_no = 1; std::getline(in, line); ++line_no) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    if (trim(line).empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": expected key = value");
    }
    apply_setting(config, trim(std::string_view(line).substr(0, eq)),
                  trim(std::string_view(line).substr(eq + 1)));
  }
  static constexpr const char* kKeys[] = {
      "listen",           "queue_capacity",  "worker_max_batch",
      "worker_poll_interval_ms", "persistence_log", "status_retention",
      "shutdown_timeout_ms",
  };
  for (const char* key : kKeys) {
    std::string var = "PROVSVC_";
    for (const char* c = key; *c; ++c) {
      var += static_cast<char>(std::toupper(static_cast<unsigned char>(*c)));
    }
    if (auto it = env.find(var); it != env.end()) {
      apply_setting(config, key, trim(it->second));
    }
  }
  config.validate();
  return config;
}

ServiceConfig load_config(const std::optional<std::filesystem::path>& path) {
  std::string text;
  if (path) {
    std::ifstream in(*path);
    if (!in) throw ConfigError("cannot read config file " + path->string());
    std::ostringstream buf;
    buf << in.rdbuf();
    text = buf.str();
  }
  std::map<std::string, std::string> env;
  for (char** e = environ; e != nullptr && *e != nullptr; ++e) {
    std::string_view entry(*e);
    if (entry.rfind("PROVSVC_", 0) != 0) continue;
    auto eq = entry.find('=');
    if (eq == std::string_view::npos) continue;
    env.emplace(entry.substr(0, eq), entry.substr(eq + 1));
  }
  return parse_config(text, env);
}

ProvenanceService::ProvenanceService(ServiceConfig config)
    : config_(std::move(config)) {
  config_.validate();
  store_ = std::make_unique<GraphStore>(StoreOptions{config_.persistence_log});
  pipeline_ = std::make_unique<IngestionPipeline>(
      *store_, specs_,
      IngestionOptions{config_.queue_capacity, config_.worker_max_batch,
                       config_.status_retention});
  worker_ = std::make_unique<IngestionWorker>(*pipeline_,
                                              config_.worker_poll_interval);
  if (config_.start_worker_paused) worker_->pause();
  server_ = std::make_unique<httplib::Server>();
  install_routes();
}

ProvenanceService::~ProvenanceService() { stop(); }

void ProvenanceService::install_routes() {
  auto& server = *server_;

  server.Post("/workflows", [this](const httplib::Request& req,
                                   httplib::Response& res) {
    auto body = parse_body(req, res);
    if (!body) return;
    WorkflowSpec spec;
    try {
      spec = body->get<WorkflowSpec>();
    } catch (const std::exception& e) {
      reply_error(res, 400, "malformed-body", e.what());
      return;
    }
    auto registration = specs_.register_spec(std::move(spec));
    if (!registration.report.ok()) {
      Json out = registration.report;
      out["name"] = registration.name;
      reply_json(res, 400, out);
      return;
    }
    reply_json(res, 200,
               Json{{"name", registration.name}, {"version", registration.version}});
  });

  server.Post("/provenance", [this](const httplib::Request& req,
                                    httplib::Response& res) {
    auto body = parse_body(req, res);
    if (!body) return;
    std::vector<IngestEnvelope> envs;
    try {
      if (body->is_array()) {
        for (const auto& item : *body) envs.push_back(envelope_from_json(item));
      } else {
        envs.push_back(envelope_from_json(*body));
      }
    } catch (const std::exception& e) {
      reply_error(res, 400, "malformed-body", e.what());
      return;
    }
    try {
      auto id = envs.size() == 1 ? pipeline_->enqueue(std::move(envs.front()))
                                 : pipeline_->enqueue_batch(std::move(envs));
      reply_json(res, 202, Json{{"job_id", id}});
    } catch (const QueueFull& e) {
      res.set_header("Retry-After", "1");
      reply_error(res, 429, "queue-full", e.what());
    }
  });

  server.Get(R"(/jobs/([^/]+))", [this](const httplib::Request& req,
                                        httplib::Response& res) {
    try {
      reply_json(res, 200, Json(pipeline_->job_status(req.matches[1].str())));
    } catch (const UnknownJob& e) {
      reply_error(res, 404, "unknown-job", e.what());
    }
  });

  server.Get(R"(/provenance/.*)", [this](const httplib::Request& req,
                                         httplib::Response& res) {
    QueryRequest query;
    try {
      // Raw target: segments are percent-decoded by the parser itself.
      query = parse_query_path(req.target);
    } catch (const InvalidDirection& e) {
      reply_error(res, 400, "invalid-direction", e.what());
      return;
    } catch (const MalformedPath& e) {
      reply_error(res, 400, "malformed-path", e.what());
      return;
    }
    bool include_paths = true;
    try {
      if (req.has_param("max_depth")) {
        int depth = std::stoi(req.get_param_value("max_depth"));
        if (depth < 1) throw std::invalid_argument("max_depth must be >= 1");
        query.max_depth = depth;
      }
      if (req.has_param("order_by")) {
        AttributeOrder order{req.get_param_value("order_by"), SortOrder::kAscending};
        if (req.has_param("order")) {
          auto dir = req.get_param_value("order");
          if (dir == "desc") {
            order.order = SortOrder::kDescending;
          } else if (dir != "asc") {
            throw std::invalid_argument("order must be asc or desc");
          }
        }
        query.order_by_attribute = std::move(order);
      }
      if (req.has_param("include_paths")) {
        auto v = req.get_param_value("include_paths");
        if (v != "true" && v != "false") {
          throw std::invalid_argument("include_paths must be true or false");
        }
        include_paths = v == "true";
      }
    } catch (const std::exception& e) {
      reply_error(res, 400, "invalid-parameter", e.what());
      return;
    }
    auto result = traverse(store_->snapshot(), query);
    Json out = result;
    if (!include_paths) out.erase("paths");
    reply_json(res, 200, out);
  });

  server.Get("/health", [this](const httplib::Request&, httplib::Response& res) {
    reply_json(res, 200,
               Json{{"status", "ok"},
                    {"epoch", store_->snapshot().epoch()},
                    {"queue_depth", pipeline_->queue_depth()}});
  });
}

void ProvenanceService::bind() {
  if (config_.port == 0) {
    port_ = server_->bind_to_any_port(config_.host);
  } else {
    port_ = server_->bind_to_port(config_.host, config_.port) ? config_.port : -1;
  }
  if (port_ <= 0) {
    throw ConfigError("cannot listen on " + config_.host + ":" +
                      std::to_string(config_.port));
  }
}

int ProvenanceService::start() {
  bind();
  server_thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return port_;
}

void ProvenanceService::run() {
  bind();
  server_->listen_after_bind();
}

void ProvenanceService::stop() {
  if (stopped_) return;
  stopped_ = true;
  server_->stop();
  if (server_thread_.joinable()) server_thread_.join();
  worker_->stop(config_.shutdown_timeout);
}

}  // namespace provgraph
