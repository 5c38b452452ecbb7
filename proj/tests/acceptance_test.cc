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

// Acceptance suite. Each test is one criterion; a listener prints a single
// "[ACCEPTANCE] PASS|FAIL <criterion>" line per test.

#include <gtest/gtest.h>

#include <algorithm>
#include <atomic>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "provgraph/client.h"
#include "provgraph/fixture.h"
#include "provgraph/service.h"
#include "test_support.h"

namespace provgraph {
namespace {

using namespace std::chrono_literals;
using Clock = std::chrono::steady_clock;

const char* const kWellQuery =
    "/provenance/seeds/WELL/values/12153/direction/forward/targets/PROJECTTRAINING";
const char* const kLogFileQuery =
    "/provenance/seeds/os_path/values/file_158.las/direction/forward/targets/PROJECTTRAINING";
const char* const kZoneQuery =
    "/provenance/seeds/ZONE/values/278/direction/forward/targets/PROJECTTRAINING";

ServiceConfig service_config() {
  ServiceConfig config;
  config.port = 0;
  config.worker_poll_interval = 5ms;
  return config;
}

std::string base_url(const ProvenanceService& service) {
  return "http://127.0.0.1:" + std::to_string(service.port());
}

std::string jsonl(const std::vector<IngestEnvelope>& envs) {
  std::string out;
  for (const auto& env : envs) out += canonical_json(env) + "\n";
  return out;
}

LoadReport http_load(const std::string& url, const std::string& lines, std::size_t batch,
                     std::chrono::milliseconds interval) {
  ServiceClient client(url);
  HttpLoadSink sink(client);
  std::istringstream in(lines);
  return run_historical_load(in, batch, interval, sink);
}

// Transitive closure over the envelopes themselves: items and tasks become
// vertices, used/generated records become arcs. Independent of the graph
// store and the traversal code.
std::set<std::string> closure_oracle(const std::vector<IngestEnvelope>& envs,
                                     const std::string& seed_type, const std::string& seed,
                                     const std::string& target_type) {
  using Vertex = std::pair<std::string, std::string>;  // (type or "#task", identity)
  std::set<std::pair<Vertex, Vertex>> arcs;
  for (const auto& env : envs) {
    const Vertex task{"#task", env.workflow_execution_id + "/" + env.task_id};
    for (const auto& u : env.used) arcs.insert({{u.type_label, u.identity}, task});
    for (const auto& g : env.generated) arcs.insert({task, {g.type_label, g.identity}});
  }
  std::set<Vertex> reached{{seed_type, seed}};
  for (bool grew = true; grew;) {
    grew = false;
    for (const auto& [from, to] : arcs) {
      if (reached.count(from) && reached.insert(to).second) grew = true;
    }
  }
  std::set<std::string> out;
  for (const auto& [type, identity] : reached) {
    if (type == target_type) out.insert(identity);
  }
  return out;
}

std::set<std::string> target_identities(const Json& result) {
  std::set<std::string> out;
  for (const auto& t : result.at("targets")) out.insert(t.at("identity").get<std::string>());
  return out;
}

TEST(Acceptance, LineageQueriesEndToEnd) {
  const auto start = Clock::now();
  ProvenanceService service(service_config());
  service.start();
  ServiceClient client(base_url(service));
  const auto fx = generate_fixture({.wells = 4, .zones = 5, .models_per_zone = 3, .seed = 42});
  ASSERT_EQ(client.register_spec(fx.spec).status, 200);
  const auto report = http_load(base_url(service), jsonl(fx.envelopes), 16, 0ms);
  ASSERT_EQ(report.persisted, fx.envelopes.size());

  const std::vector<std::tuple<const char*, std::string, std::string>> queries = {
      {kWellQuery, "WELL", "12153"},
      {kLogFileQuery, "os_path", "file_158.las"},
      {kZoneQuery, "ZONE", "278"}};
  for (const auto& [path, seed_type, seed] : queries) {
    auto reply = client.get(path);
    ASSERT_EQ(reply.status, 200) << path;
    const auto got = target_identities(reply.body);
    const auto expected = closure_oracle(fx.envelopes, seed_type, seed, "PROJECTTRAINING");
    EXPECT_FALSE(got.empty()) << path;
    EXPECT_EQ(got, expected) << path;
    for (const auto& t : reply.body.at("targets")) EXPECT_EQ(t.at("type_label"), "PROJECTTRAINING");
  }
  const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
  std::cout << "  runtime " << seconds << " s\n";
  EXPECT_LT(seconds, 10.0);
}

QueryRequest expected_request(std::string seed_type, std::string value) {
  QueryRequest r;
  r.seed_type = std::move(seed_type);
  r.seed_values = {std::move(value)};
  r.direction = Direction::kForward;
  r.target_types = {"PROJECTTRAINING"};
  return r;
}

TEST(Acceptance, PathGrammarGoldens) {
  EXPECT_EQ(parse_query_path(kWellQuery), expected_request("WELL", "12153"));
  EXPECT_EQ(parse_query_path(kLogFileQuery), expected_request("os_path", "file_158.las"));
  EXPECT_EQ(parse_query_path(kZoneQuery), expected_request("ZONE", "278"));
  EXPECT_THROW(parse_query_path("/provenance/seeds/ZONE/values/278/direction/sideways/targets/X"),
               InvalidDirection);

  const std::vector<std::pair<std::string, bool>> malformed = {
      // (path, expect InvalidDirection rather than MalformedPath)
      {"/provenance/seeds/WELL/values/12153/direction/forward", false},
      {"/provenance/seeds/WELL/values/12153/direction/forward/targets", false},
      {"/provenance/seeds/WELL/values/12153/direction/forward/targets/PROJECTTRAINING/x", false},
      {"/provenance/values/12153/seeds/WELL/direction/forward/targets/PROJECTTRAINING", false},
      {"/provenance/seeds/WELL/values/12153/targets/PROJECTTRAINING/direction/forward", false},
      {"/lineage/seeds/WELL/values/12153/direction/forward/targets/PROJECTTRAINING", false},
      {"provenance/seeds/WELL/values/12153/direction/forward/targets/PROJECTTRAINING", false},
      {"/provenance/seeds//values/12153/direction/forward/targets/PROJECTTRAINING", false},
      {"/provenance/seeds/WELL/values/12153/direction/upward/targets/PROJECTTRAINING", true},
      {"/provenance/seeds/WELL/values/12153/direction/FORWARD/targets/PROJECTTRAINING", true},
  };
  int correct = 0;
  for (const auto& [path, direction_error] : malformed) {
    try {
      parse_query_path(path);
      ADD_FAILURE() << "accepted " << path;
    } catch (const InvalidDirection&) {
      if (direction_error) ++correct; else ADD_FAILURE() << "wrong error for " << path;
    } catch (const MalformedPath&) {
      if (!direction_error) ++correct; else ADD_FAILURE() << "wrong error for " << path;
    }
  }
  std::cout << "  malformed variants rejected correctly: " << correct << "/" << malformed.size() << "\n";
  EXPECT_EQ(correct, 10);
}

constexpr int kCorpusGraphs = 500;
constexpr std::uint64_t kCorpusSeed = 20190501;
const std::vector<std::string> kTypes = {"T0", "T1", "T2", "T3", "A0", "A1", "A2", "A3"};

QueryRequest single_seed(const ProvNode& seed, Direction direction,
                         std::vector<std::string> targets) {
  QueryRequest r;
  r.seed_type = seed.type_label;
  r.seed_values = {seed.identity};
  r.direction = direction;
  r.target_types = std::move(targets);
  return r;
}

TEST(Acceptance, TraversalMatchesOracle) {
  std::mt19937_64 rng(kCorpusSeed);
  long queries = 0, mismatches = 0, bad_paths = 0;
  for (int round = 0; round < kCorpusGraphs; ++round) {
    const auto g = testing::random_graph(rng, 200);
    GraphStore store;
    store.apply_batch(g.delta());
    const auto s = store.snapshot();
    testing::ReachabilityOracle oracle(g);
    for (int q = 0; q < 5; ++q) {
      const auto& seed = g.nodes[rng() % g.nodes.size()];
      const auto direction = rng() % 2 ? Direction::kForward : Direction::kBackward;
      std::set<std::string> targets;
      for (int k = 0, n = 1 + static_cast<int>(rng() % 3); k < n; ++k) {
        targets.insert(kTypes[rng() % kTypes.size()]);
      }
      const auto result = traverse(s, single_seed(seed, direction, {targets.begin(), targets.end()}));
      const auto expected = oracle.targets({seed.node_id}, direction, targets);
      std::map<std::string, int> got;
      for (std::size_t i = 0; i < result.targets.size(); ++i) {
        const auto& path = result.paths.at(i);
        got[result.targets[i].node_id] = static_cast<int>(path.size()) - 1;
        if (path.front() != seed.node_id || path.back() != result.targets[i].node_id ||
            !testing::path_follows_edges(path, g.edges, direction)) {
          ++bad_paths;
        }
      }
      // Equal maps mean equal target sets and witness lengths equal to the
      // oracle's minimal hop counts.
      if (got != expected) ++mismatches;
      ++queries;
    }
  }
  std::cout << "  graphs " << kCorpusGraphs << ", queries " << queries << ", mismatches "
            << mismatches << ", invalid witnesses " << bad_paths << "\n";
  EXPECT_EQ(mismatches, 0);
  EXPECT_EQ(bad_paths, 0);
}

TEST(Acceptance, DirectionDuality) {
  std::mt19937_64 rng(kCorpusSeed);
  long pairs = 0, violations = 0, positive = 0;
  for (int round = 0; round < kCorpusGraphs; ++round) {
    const auto g = testing::random_graph(rng, 200);
    GraphStore store;
    store.apply_batch(g.delta());
    const auto s = store.snapshot();
    auto contains = [](const QueryResult& r, const std::string& id) {
      return std::any_of(r.targets.begin(), r.targets.end(),
                         [&](const TargetSummary& t) { return t.node_id == id; });
    };
    for (int k = 0; k < 10; ++k) {
      const auto& a = g.nodes[rng() % g.nodes.size()];
      const auto& b = g.nodes[rng() % g.nodes.size()];
      const bool forward = contains(traverse(s, single_seed(a, Direction::kForward, {b.type_label})), b.node_id);
      const bool backward = contains(traverse(s, single_seed(b, Direction::kBackward, {a.type_label})), a.node_id);
      if (forward != backward) ++violations;
      if (forward) ++positive;
      ++pairs;
    }
  }
  std::cout << "  pairs " << pairs << " (" << positive << " reachable), violations " << violations << "\n";
  EXPECT_EQ(violations, 0);
  EXPECT_GT(positive, 0);
}

TEST(Acceptance, SnapshotIsolationStress) {
  constexpr int kBatches = 100;
  constexpr int kPerBatch = 100;
  constexpr long kMinObservations = 10000;
  GraphStore store;
  std::atomic<bool> writer_done{false};
  std::atomic<long> observations{0};
  std::atomic<long> intermediate{0};
  std::vector<std::thread> readers;
  for (int r = 0; r < 8; ++r) {
    readers.emplace_back([&] {
      while (!writer_done.load() || observations.load() < kMinObservations) {
        const auto st = stats(store.snapshot());
        if (st.node_count % kPerBatch != 0 ||
            st.node_count != static_cast<std::size_t>(st.epoch) * kPerBatch) {
          ++intermediate;
        }
        ++observations;
      }
    });
  }
  std::thread writer([&] {
    for (int b = 0; b < kBatches; ++b) {
      GraphDelta delta;
      for (int i = 0; i < kPerBatch; ++i) {
        delta.nodes.push_back(testing::entity("T", std::to_string(b * kPerBatch + i)));
      }
      store.apply_batch(delta);
    }
    writer_done = true;
  });
  writer.join();
  for (auto& t : readers) t.join();
  std::cout << "  observations " << observations.load() << ", intermediate counts "
            << intermediate.load() << "\n";
  EXPECT_GE(observations.load(), kMinObservations);
  EXPECT_EQ(intermediate.load(), 0);
  EXPECT_EQ(store.snapshot().node_count(), static_cast<std::size_t>(kBatches * kPerBatch));
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

// Envelopes that touch none of the preloaded graph, so the queried
// subgraph stays fixed while the load runs.
std::vector<IngestEnvelope> disjoint_envelopes(int n) {
  std::vector<IngestEnvelope> out;
  for (int i = 0; i < n; ++i) {
    IngestEnvelope env;
    env.workflow_execution_id = "backfill";
    env.workflow_name = fixture::kWorkflowName;
    env.task_id = "ingest-" + std::to_string(i);
    env.transformation = "ingest-logs";
    env.started_at = testing::ts("2018-01-01T00:00:00Z") + std::chrono::seconds(i);
    env.ended_at = env.started_at + 30s;
    env.used.push_back({"WELL", "bf-" + std::to_string(i), {}});
    env.generated.push_back({"os_path", "bf-" + std::to_string(i) + ".las", {}});
    out.push_back(std::move(env));
  }
  return out;
}

TEST(Acceptance, QueryLatencyUnaffectedByLoad) {
  ProvenanceService service(service_config());
  service.start();
  const auto fx = generate_fixture({.wells = 50, .zones = 95, .models_per_zone = 2, .seed = 9});
  service.specs().register_spec(fx.spec);
  GraphDelta preload;
  for (const auto& env : fx.envelopes) preload.append(expand_envelope(env, fx.spec));
  service.store().apply_batch(preload);
  const auto fixed = stats(service.store().snapshot());
  std::cout << "  snapshot nodes " << fixed.node_count << "\n";
  ASSERT_GE(fixed.node_count, 10000u);

  ServiceClient client(base_url(service));
  const auto reference = target_identities(client.get(kWellQuery).body);
  auto sample = [&] {
    const auto t0 = Clock::now();
    auto reply = client.get(kWellQuery);
    const double dt = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
    EXPECT_EQ(reply.status, 200);
    EXPECT_EQ(target_identities(reply.body), reference);
    return dt;
  };

  std::vector<double> idle;
  for (int i = 0; i < 60; ++i) idle.push_back(sample());

  std::atomic<bool> loading{true};
  LoadReport report;
  std::thread loader([&] {
    report = http_load(base_url(service), jsonl(disjoint_envelopes(3000)), 100, 20ms);
    loading = false;
  });
  std::vector<double> busy;
  while (loading.load()) busy.push_back(sample());
  loader.join();

  const double idle_ms = median(idle);
  const double busy_ms = busy.empty() ? 0 : median(busy);
  std::cout << "  idle median " << idle_ms << " ms, under load " << busy_ms << " ms over "
            << busy.size() << " queries, ratio " << busy_ms / idle_ms << "\n";
  EXPECT_EQ(report.persisted, 3000u);
  EXPECT_GE(busy.size(), 20u);
  EXPECT_LE(busy_ms, 5 * idle_ms);
}

TEST(Acceptance, LoaderCadence) {
  ProvenanceService service(service_config());
  service.start();
  const auto fx = generate_fixture({.wells = 1, .zones = 1, .models_per_zone = 7, .seed = 1});
  ServiceClient(base_url(service)).register_spec(fx.spec);
  ASSERT_EQ(fx.envelopes.size(), 10u);
  const auto report = http_load(base_url(service), jsonl(fx.envelopes), 3, 200ms);
  ASSERT_EQ(report.submitted_at.size(), 4u);
  EXPECT_EQ(report.batch_sizes, (std::vector<std::size_t>{3, 3, 3, 1}));
  const auto span = report.submitted_at.back() - report.submitted_at.front();
  std::cout << "  submissions " << report.submitted_at.size() << ", span "
            << std::chrono::duration<double, std::milli>(span).count() << " ms, gaps";
  for (std::size_t i = 1; i < report.submitted_at.size(); ++i) {
    const auto gap = report.submitted_at[i] - report.submitted_at[i - 1];
    std::cout << " " << std::chrono::duration<double, std::milli>(gap).count();
    EXPECT_GE(gap, 180ms);
  }
  std::cout << " ms\n";
  EXPECT_GE(span, 600ms);
  EXPECT_EQ(report.persisted, 10u);
}

TEST(Acceptance, IdempotentReplay) {
  ProvenanceService service(service_config());
  service.start();
  ServiceClient client(base_url(service));
  const auto fx = generate_fixture({.wells = 3, .zones = 4, .models_per_zone = 3, .seed = 77});
  client.register_spec(fx.spec);
  const auto lines = jsonl(fx.envelopes);

  auto observe = [&] {
    Json out = client.health().body;
    out.erase("queue_depth");
    for (const char* q : {kWellQuery, kLogFileQuery, kZoneQuery}) out[q] = client.get(q).body;
    return out;
  };
  ASSERT_EQ(http_load(base_url(service), lines, 7, 0ms).failed, 0u);
  const auto once = observe();
  ASSERT_EQ(http_load(base_url(service), lines, 7, 0ms).failed, 0u);
  const auto twice = observe();
  std::cout << "  after one load: " << stats(service.store().snapshot()).node_count
            << " nodes, epoch " << once.at("epoch") << "; after two: epoch " << twice.at("epoch") << "\n";
  EXPECT_EQ(once, twice);
  EXPECT_FALSE(once.at(kWellQuery).at("targets").empty());
}

TEST(Acceptance, AsyncFailureTracking) {
  ProvenanceService service(service_config());
  service.start();
  ServiceClient client(base_url(service));
  const auto fx = generate_fixture({});
  client.register_spec(fx.spec);
  for (const auto& env : fx.envelopes) client.wait_for_job(client.submit(env).body.at("job_id"));
  const auto before = stats(service.store().snapshot());

  auto env = fx.envelopes.back();
  env.task_id = "rogue";
  env.transformation = "FeatureExtraction";
  const auto reply = client.submit(env);
  EXPECT_EQ(reply.status, 202);
  const auto job = client.wait_for_job(reply.body.at("job_id"));
  std::cout << "  job " << job.dump() << "\n";
  EXPECT_EQ(job.at("status"), "failed");
  EXPECT_EQ(job.value("failure_reason", "").rfind("unknown-transformation", 0), 0u);
  EXPECT_EQ(stats(service.store().snapshot()), before);
}

const std::map<std::string, std::string>& criteria() {
  static const std::map<std::string, std::string> names = {
      {"LineageQueriesEndToEnd", "well, log-file and zone queries over HTTP match the closure oracle in < 10 s"},
      {"PathGrammarGoldens", "path grammar goldens and 10 malformed variants"},
      {"TraversalMatchesOracle", "traversal oracle equivalence on 500 random graphs"},
      {"DirectionDuality", "forward/backward duality on the random corpus"},
      {"SnapshotIsolationStress", "snapshot isolation under 100x100 writes and 8 readers"},
      {"QueryLatencyUnaffectedByLoad", "query median under load within 5x of idle"},
      {"LoaderCadence", "loader cadence: 4 submissions, span >= 600 ms, gaps >= 180 ms"},
      {"IdempotentReplay", "replaying the fixture leaves stats and lineage answers unchanged"},
      {"AsyncFailureTracking", "202 then failed unknown-transformation with no mutation"},
  };
  return names;
}

class CriterionPrinter : public ::testing::EmptyTestEventListener {
  void OnTestEnd(const ::testing::TestInfo& info) override {
    auto it = criteria().find(info.name());
    const std::string name = it == criteria().end() ? info.name() : it->second;
    std::cout << "[ACCEPTANCE] " << (info.result()->Passed() ? "PASS" : "FAIL") << " " << name
              << std::endl;
  }
};

}  // namespace
}  // namespace provgraph

int main(int argc, char** argv) {
  ::testing::InitGoogleTest(&argc, argv);
  ::testing::UnitTest::GetInstance()->listeners().Append(new provgraph::CriterionPrinter);
  return RUN_ALL_TESTS();
}
