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

// provgraph: run the provenance service and talk to it.
//
// Exit codes: 0 success, 1 domain failure (validation or load errors),
// 2 usage or I/O errors.

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "provgraph/client.h"
#include "provgraph/fixture.h"
#include "provgraph/json_codec.h"
#include "provgraph/query_engine.h"
#include "provgraph/service.h"

namespace {

using namespace provgraph;

constexpr int kOk = 0;
constexpr int kDomainFailure = 1;
constexpr int kUsageError = 2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// "250ms", "2s", "1.5s", "1m", or a bare number of milliseconds.
std::chrono::milliseconds parse_duration(const std::string& text) {
  std::size_t used = 0;
  double value = 0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    throw UsageError("invalid duration '" + text + "'");
  }
  const std::string unit = text.substr(used);
  double ms = 0;
  if (unit.empty() || unit == "ms") {
    ms = value;
  } else if (unit == "s") {
    ms = value * 1000;
  } else if (unit == "m") {
    ms = value * 60000;
  } else {
    throw UsageError("invalid duration unit in '" + text + "'");
  }
  if (ms < 0) throw UsageError("duration must be non-negative");
  return std::chrono::milliseconds(static_cast<long long>(ms));
}

std::string scalar_text(const Scalar& value) {
  Json j = value;
  return j.is_string() ? j.get<std::string>() : j.dump();
}

int cmd_serve(const std::string& config_path) {
  auto config = load_config(config_path.empty()
                                ? std::nullopt
                                : std::optional<std::filesystem::path>(config_path));
  // Block termination signals in every thread; the main thread waits for
  // them synchronously.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  ProvenanceService service(config);
  const int port = service.start();
  std::cerr << "provgraph serving on " << config.host << ":" << port << std::endl;
  int sig = 0;
  sigwait(&signals, &sig);
  std::cerr << "shutting down, draining queue" << std::endl;
  service.stop();
  return kOk;
}

int cmd_register(ServiceClient& client, const std::string& file, bool json) {
  WorkflowSpec spec;
  try {
    spec = decode<WorkflowSpec>(read_file(file));
  } catch (const DecodeError& e) {
    throw UsageError(file + ": " + e.what());
  }
  auto reply = client.register_spec(spec);
  if (json) std::cout << reply.body.dump() << "\n";
  if (reply.status == 200) {
    if (!json) {
      std::cout << "registered version " << reply.body.at("version").get<std::int64_t>()
                << " of workflow " << reply.body.at("name").get<std::string>() << "\n";
    }
    return kOk;
  }
  if (reply.status == 400) {
    if (!json) {
      std::cout << "spec rejected:\n";
      for (const auto& v : reply.body.value("violations", Json::array())) {
        std::cout << "  " << v.value("code", "") << ": " << v.value("message", "") << "\n";
      }
      if (reply.body.contains("error")) std::cout << "  " << reply.body.dump() << "\n";
    }
    return kDomainFailure;
  }
  throw TransportError("POST /workflows: HTTP " + std::to_string(reply.status));
}

int cmd_load(ServiceClient& client, const std::string& file, std::size_t batch_size,
             const std::string& interval, bool json) {
  if (batch_size == 0) throw UsageError("--batch-size must be >= 1");
  std::ifstream in(file, std::ios::binary);
  if (!in) throw UsageError("cannot read " + file);
  HttpLoadSink sink(client);
  auto report = run_historical_load(in, batch_size, parse_duration(interval), sink);
  if (json) {
    std::cout << Json(report).dump() << "\n";
  } else {
    std::cout << "total=" << report.total << " persisted=" << report.persisted
              << " failed=" << report.failed << " batches=" << report.batch_sizes.size();
    if (!report.batch_sizes.empty()) {
      std::cout << " (";
      for (std::size_t i = 0; i < report.batch_sizes.size(); ++i) {
        std::cout << (i ? "," : "") << report.batch_sizes[i];
      }
      std::cout << ")";
    }
    std::cout << "\n";
    for (const auto& f : report.failures) {
      std::cout << "line " << f.line << ": " << f.reason << "\n";
    }
  }
  return report.failed == 0 ? kOk : kDomainFailure;
}

struct QueryFlags {
  std::string seed_type;
  std::vector<std::string> values;
  std::string direction;
  std::vector<std::string> targets;
  std::string min_attr;
  std::string order_by;
  bool descending = false;
  int max_depth = 0;
  bool dot = false;
};

int cmd_query(ServiceClient& client, const QueryFlags& flags, bool json) {
  QueryRequest request;
  request.seed_type = flags.seed_type;
  request.seed_values = flags.values;
  auto direction = parse_direction(flags.direction);
  if (!direction) throw UsageError("--direction must be forward or backward");
  request.direction = *direction;
  request.target_types = flags.targets;
  if (flags.max_depth > 0) request.max_depth = flags.max_depth;
  if (!flags.min_attr.empty()) {
    request.order_by_attribute = AttributeOrder{flags.min_attr, SortOrder::kAscending};
  } else if (!flags.order_by.empty()) {
    request.order_by_attribute = AttributeOrder{
        flags.order_by, flags.descending ? SortOrder::kDescending : SortOrder::kAscending};
  }

  auto reply = client.query(request);
  if (reply.status == 400) {
    std::cerr << reply.body.value("error", "bad-request") << ": "
              << reply.body.value("message", "") << "\n";
    return kUsageError;
  }
  if (reply.status != 200) {
    throw TransportError("query: HTTP " + std::to_string(reply.status));
  }
  auto result = reply.body.get<QueryResult>();

  if (!flags.min_attr.empty()) {
    // The service orders by the attribute; keep the first target carrying it.
    QueryResult best;
    best.visited_count = result.visited_count;
    best.snapshot_epoch = result.snapshot_epoch;
    for (std::size_t i = 0; i < result.targets.size(); ++i) {
      auto it = result.targets[i].attributes.find(flags.min_attr);
      if (it != result.targets[i].attributes.end() &&
          std::holds_alternative<double>(it->second)) {
        best.targets.push_back(result.targets[i]);
        if (i < result.paths.size()) best.paths.push_back(result.paths[i]);
        break;
      }
    }
    result = std::move(best);
  }

  if (flags.dot) {
    std::cout << to_dot(result);
    return kOk;
  }
  if (json) {
    std::cout << Json(result).dump() << "\n";
    return kOk;
  }
  if (result.targets.empty()) {
    std::cout << "no targets\n";
    return kOk;
  }
  for (const auto& t : result.targets) {
    std::cout << t.type_label << " " << t.identity;
    for (const auto& [key, value] : t.attributes) {
      if (key == flags.min_attr || key == flags.order_by) {
        std::cout << " " << key << "=" << scalar_text(value);
      }
    }
    std::cout << "\n";
  }
  return kOk;
}

int cmd_gen_fixture(const FixtureOptions& options, const std::string& out, bool json) {
  auto fixture = generate_fixture(options);
  write_fixture(fixture, out);
  if (json) {
    std::cout << Json{{"spec", out + "/spec.json"},
                      {"envelopes", out + "/envelopes.jsonl"},
                      {"envelope_count", fixture.envelopes.size()}}
                     .dump()
              << "\n";
  } else {
    std::cout << "wrote " << out << "/spec.json and " << out << "/envelopes.jsonl ("
              << fixture.envelopes.size() << " envelopes)\n";
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"provgraph: provenance tracking and lineage queries for ML workflows"};
  app.require_subcommand(1);
  bool json = false;
  std::string url = "http://127.0.0.1:8080";
  app.add_flag("--json", json, "Machine-readable JSON output");

  auto* serve = app.add_subcommand("serve", "Run the provenance service");
  std::string config_path;
  serve->add_option("--config", config_path, "key = value config file");

  auto* reg = app.add_subcommand("register-spec", "Register a workflow spec");
  std::string spec_file;
  reg->add_option("file", spec_file, "WorkflowSpec JSON")->required();
  reg->add_option("--url", url, "Service base URL");

  auto* load = app.add_subcommand("load", "Load historical envelopes in timed batches");
  std::string load_file;
  std::size_t batch_size = 100;
  std::string interval = "0";
  load->add_option("file", load_file, "Newline-delimited IngestEnvelope JSON")->required();
  load->add_option("--batch-size", batch_size, "Records per submission");
  load->add_option("--interval", interval, "Pause between submissions (e.g. 200ms, 1s)");
  load->add_option("--url", url, "Service base URL");

  auto* query = app.add_subcommand("query", "Run a lineage query");
  QueryFlags flags;
  query->add_option("--seed-type", flags.seed_type, "Seed type label")->required();
  query->add_option("--value", flags.values, "Seed identity (repeatable)")->required();
  query->add_option("--direction", flags.direction, "forward or backward")->required();
  query->add_option("--target", flags.targets, "Target type label (repeatable)")->required();
  auto* min_attr =
      query->add_option("--min-attr", flags.min_attr, "Print only the target minimizing A");
  auto* order_by = query->add_option("--order-by", flags.order_by, "Order targets by A");
  min_attr->excludes(order_by);
  query->add_flag("--desc", flags.descending, "Descending order for --order-by");
  query->add_option("--max-depth", flags.max_depth, "Traversal depth limit");
  query->add_flag("--dot", flags.dot, "Print witness paths as Graphviz DOT");
  query->add_option("--url", url, "Service base URL");

  auto* gen = app.add_subcommand("gen-fixture", "Write a synthetic lineage fixture");
  FixtureOptions fixture_options;
  std::string out_dir;
  gen->add_option("--wells", fixture_options.wells, "Number of wells")->required();
  gen->add_option("--zones", fixture_options.zones, "Number of zones")->required();
  gen->add_option("--models-per-zone", fixture_options.models_per_zone,
                  "Training runs per zone");
  gen->add_option("--seed", fixture_options.seed, "Generator seed");
  gen->add_option("--out", out_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsageError;
  }

  try {
    if (*serve) return cmd_serve(config_path);
    if (*gen) return cmd_gen_fixture(fixture_options, out_dir, json);
    ServiceClient client(url);
    if (*reg) return cmd_register(client, spec_file, json);
    if (*load) return cmd_load(client, load_file, batch_size, interval, json);
    if (*query) return cmd_query(client, flags, json);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const TransportError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  }
  return kUsageError;
}
