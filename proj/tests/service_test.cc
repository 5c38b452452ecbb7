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

#include <gtest/gtest.h>

#include "provgraph/client.h"
#include "provgraph/fixture.h"
#include "test_support.h"

namespace provgraph {
namespace {

using namespace std::chrono_literals;

ServiceConfig test_config() {
  ServiceConfig config;
  config.port = 0;
  config.worker_poll_interval = 5ms;
  return config;
}

class ServiceTest : public ::testing::Test {
 protected:
  explicit ServiceTest(ServiceConfig config = test_config())
      : service_(std::move(config)),
        client_("http://127.0.0.1:" + std::to_string(service_.start())) {}

  IngestEnvelope envelope(const std::string& transformation) {
    auto fx = generate_fixture({});
    auto env = fx.envelopes.front();
    env.transformation = transformation;
    return env;
  }

  ProvenanceService service_;
  ServiceClient client_;
};

TEST_F(ServiceTest, HealthOnIdleService) {
  auto reply = client_.health();
  EXPECT_EQ(reply.status, 200);
  EXPECT_EQ(reply.body.at("status"), "ok");
  EXPECT_EQ(reply.body.at("queue_depth"), 0);
  EXPECT_EQ(reply.body.at("epoch"), 0);
}

TEST_F(ServiceTest, RegisterSpecAssignsVersions) {
  auto first = client_.register_spec(fixture_spec());
  EXPECT_EQ(first.status, 200);
  EXPECT_EQ(first.body.at("version"), 1);
  EXPECT_EQ(first.body.at("name"), fixture::kWorkflowName);
  EXPECT_EQ(client_.register_spec(fixture_spec()).body.at("version"), 2);
}

TEST_F(ServiceTest, CyclicSpecRejectedWithReport) {
  WorkflowSpec spec;
  spec.name = "loop";
  DataTypeSpec t{"T", {{"id", ValueKind::kText, true}}};
  spec.transformations = {{"A", {t}, {t}}, {"B", {t}, {t}}};
  spec.dataflow = {{"A", "T", "B"}, {"B", "T", "A"}};
  auto reply = client_.register_spec(spec);
  EXPECT_EQ(reply.status, 400);
  bool cyclic = false;
  for (const auto& v : reply.body.at("violations")) {
    cyclic = cyclic || v.at("code") == "cyclic-dataflow";
  }
  EXPECT_TRUE(cyclic) << reply.body.dump();
}

TEST_F(ServiceTest, MalformedBodies) {
  EXPECT_EQ(client_.post("/workflows", "{").status, 400);
  auto reply = client_.post("/provenance", "not json");
  EXPECT_EQ(reply.status, 400);
  EXPECT_EQ(reply.body.at("error"), "malformed-body");
  EXPECT_EQ(client_.post("/provenance", R"({"task_id":"x"})").status, 400);
}

TEST_F(ServiceTest, IngestPersistsAndIsQueryable) {
  client_.register_spec(fixture_spec());
  auto fx = generate_fixture({});
  std::vector<std::string> ids;
  for (const auto& env : fx.envelopes) {
    auto reply = client_.submit(env);
    ASSERT_EQ(reply.status, 202);
    ids.push_back(reply.body.at("job_id"));
  }
  for (const auto& id : ids) EXPECT_EQ(client_.wait_for_job(id).at("status"), "persisted");

  auto reply = client_.get(
      "/provenance/seeds/WELL/values/12153/direction/forward/targets/PROJECTTRAINING");
  ASSERT_EQ(reply.status, 200);
  ASSERT_EQ(reply.body.at("targets").size(), 1u);
  EXPECT_EQ(reply.body.at("paths").size(), 1u);
  EXPECT_GT(reply.body.at("snapshot_epoch"), 0);
  EXPECT_GT(client_.health().body.at("epoch"), 0);

  auto no_paths = client_.get(
      "/provenance/seeds/WELL/values/12153/direction/forward/targets/PROJECTTRAINING"
      "?include_paths=false");
  EXPECT_FALSE(no_paths.body.contains("paths"));
}

TEST_F(ServiceTest, ArrayBodyIsOneJob) {
  client_.register_spec(fixture_spec());
  auto fx = generate_fixture({});
  Json body = Json::array();
  for (const auto& env : fx.envelopes) body.push_back(env);
  auto reply = client_.post("/provenance", body.dump());
  ASSERT_EQ(reply.status, 202);
  auto job = client_.wait_for_job(reply.body.at("job_id"));
  EXPECT_EQ(job.at("status"), "persisted");
  EXPECT_EQ(job.at("envelope_count"), fx.envelopes.size());
}

TEST_F(ServiceTest, FailedJobReportsReason) {
  client_.register_spec(fixture_spec());
  auto reply = client_.submit(envelope("FeatureExtraction"));
  ASSERT_EQ(reply.status, 202);
  auto job = client_.wait_for_job(reply.body.at("job_id"));
  EXPECT_EQ(job.at("status"), "failed");
  EXPECT_EQ(job.at("failure_reason").get<std::string>().rfind("unknown-transformation", 0), 0u);
  EXPECT_EQ(client_.health().body.at("epoch"), 0);
}

TEST_F(ServiceTest, UnknownJobIs404) {
  auto reply = client_.job("job-missing");
  EXPECT_EQ(reply.status, 404);
  EXPECT_EQ(reply.body.at("error"), "unknown-job");
}

TEST_F(ServiceTest, QueryErrors) {
  auto bad_direction = client_.get("/provenance/seeds/ZONE/values/278/direction/sideways/targets/X");
  EXPECT_EQ(bad_direction.status, 400);
  EXPECT_EQ(bad_direction.body.at("error"), "invalid-direction");
  auto malformed = client_.get("/provenance/seeds/ZONE/values/278");
  EXPECT_EQ(malformed.status, 400);
  EXPECT_EQ(malformed.body.at("error"), "malformed-path");
  auto bad_param = client_.get(
      "/provenance/seeds/ZONE/values/278/direction/forward/targets/X?max_depth=zero");
  EXPECT_EQ(bad_param.status, 400);
  EXPECT_EQ(bad_param.body.at("error"), "invalid-parameter");
  auto unknown = client_.get("/provenance/seeds/ZONE/values/nope/direction/forward/targets/X");
  EXPECT_EQ(unknown.status, 200);
  EXPECT_TRUE(unknown.body.at("targets").empty());
}

TEST_F(ServiceTest, QueryParametersApply) {
  client_.register_spec(fixture_spec());
  auto fx = generate_fixture({.wells = 1, .zones = 1, .models_per_zone = 3, .seed = 1});
  for (const auto& env : fx.envelopes) client_.wait_for_job(client_.submit(env).body.at("job_id"));
  QueryRequest request;
  request.seed_type = "ZONE";
  request.seed_values = {"278"};
  request.target_types = {"PROJECTTRAINING"};
  request.order_by_attribute = AttributeOrder{"mse", SortOrder::kDescending};
  auto result = client_.query(request).body.get<QueryResult>();
  ASSERT_EQ(result.targets.size(), 3u);
  EXPECT_EQ(std::get<double>(result.targets[0].attributes.at("mse")), 0.9);
  request.order_by_attribute.reset();
  request.max_depth = 1;
  EXPECT_TRUE(client_.query(request).body.at("targets").empty());
}

class PausedServiceTest : public ServiceTest {
 protected:
  static ServiceConfig paused_config() {
    auto config = test_config();
    config.queue_capacity = 3;
    config.start_worker_paused = true;
    return config;
  }
  PausedServiceTest() : ServiceTest(paused_config()) {}
};

TEST_F(PausedServiceTest, SaturatedQueueReturns429) {
  client_.register_spec(fixture_spec());
  const auto env = envelope("ingest-logs");
  for (int i = 0; i < 3; ++i) EXPECT_EQ(client_.submit(env).status, 202);
  EXPECT_EQ(client_.health().body.at("queue_depth"), 3);
  auto reply = client_.submit(env);
  EXPECT_EQ(reply.status, 429);
  EXPECT_EQ(reply.body.at("error"), "queue-full");
  // Accepted before persisted: nothing visible yet.
  EXPECT_EQ(service_.store().snapshot().node_count(), 0u);
  service_.worker().resume();
  service_.stop();
  EXPECT_EQ(service_.pipeline().queue_depth(), 0u);
  EXPECT_GT(service_.store().snapshot().node_count(), 0u);
}

TEST(ConfigTest, FileValuesAndEnvOverrides) {
  auto config = parse_config(
      "# service\nlisten = 0.0.0.0:9090\nqueue_capacity = 12\n"
      "worker_max_batch=4\npersistence_log = /tmp/x.log\n",
      {{"PROVSVC_QUEUE_CAPACITY", "99"}, {"PROVSVC_LISTEN", "127.0.0.1:7000"}});
  EXPECT_EQ(config.host, "127.0.0.1");
  EXPECT_EQ(config.port, 7000);
  EXPECT_EQ(config.queue_capacity, 99u);
  EXPECT_EQ(config.worker_max_batch, 4u);
  EXPECT_EQ(config.persistence_log, std::filesystem::path("/tmp/x.log"));
}

TEST(ConfigTest, Rejections) {
  EXPECT_THROW(parse_config("queue_capacity = 0\n", {}), ConfigError);
  EXPECT_THROW(parse_config("worker_max_batch = -1\n", {}), ConfigError);
  EXPECT_THROW(parse_config("bogus = 1\n", {}), ConfigError);
  EXPECT_THROW(parse_config("listen\n", {}), ConfigError);
  EXPECT_THROW(parse_config("", {{"PROVSVC_LISTEN", "nohost"}}), ConfigError);
  EXPECT_THROW(load_config(std::filesystem::path("/nonexistent/provgraph.conf")), ConfigError);
}

TEST(ConfigTest, DefaultsAreValid) {
  auto config = parse_config("", {});
  EXPECT_EQ(config.port, 8080);
  EXPECT_EQ(config.queue_capacity, 10000u);
  EXPECT_FALSE(config.persistence_log);
}

}  // namespace
}  // namespace provgraph
