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

#include "provgraph/fixture.h"

#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <stdexcept>

#include "provgraph/json_codec.h"

namespace provgraph {
namespace {

using namespace fixture;

DataTypeSpec port(const char* type, std::vector<AttributeSpec> attrs) {
  return {type, std::move(attrs)};
}

AttributeSpec id_attr(const char* name) {
  return {name, ValueKind::kText, true};
}

// Uniform in [0, 1) from raw engine bits; std distributions are not
// portable across standard libraries.
double unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double round4(double x) { return std::round(x * 1e4) / 1e4; }

std::vector<std::string> unique_ids(std::mt19937_64& rng, int count,
                                    const std::string& first, int lo, int hi,
                                    const std::string& prefix,
                                    const std::string& suffix) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (int i = 0; i < count; ++i) {
    std::string id = first;
    if (i > 0) {
      do {
        id = prefix +
             std::to_string(lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo))) +
             suffix;
      } while (seen.count(id) != 0);
    }
    seen.insert(id);
    out.push_back(std::move(id));
  }
  return out;
}

}  // namespace

WorkflowSpec fixture_spec() {
  WorkflowSpec spec;
  spec.name = kWorkflowName;
  const auto well = port(kWellType, {id_attr("well_id"),
                                     {"production_bopd", ValueKind::kNumber, false}});
  const auto log = port(kLogFileType, {id_attr("path"),
                                       {"well_id", ValueKind::kReference, false}});
  const auto zone = port(kZoneType, {id_attr("zone_id")});
  const auto dataset = port(kDatasetType, {id_attr("dataset_id"),
                                           {"kind", ValueKind::kText, false}});
  const auto model = port(kModelType, {id_attr("model_id"),
                                       {"mse", ValueKind::kNumber, false},
                                       {"algorithm", ValueKind::kText, false}});
  spec.transformations = {
      {"ingest-logs", {well}, {log}},
      {"feature-extraction-per-zone", {log, zone}, {dataset}},
      {"dataset-integration", {dataset}, {dataset}},
      {"model-training", {dataset}, {model}},
  };
  spec.dataflow = {
      {"ingest-logs", kLogFileType, "feature-extraction-per-zone"},
      {"feature-extraction-per-zone", kDatasetType, "dataset-integration"},
      {"dataset-integration", kDatasetType, "model-training"},
  };
  return spec;
}

Fixture generate_fixture(const FixtureOptions& options) {
  if (options.wells < 0 || options.zones < 0 || options.models_per_zone < 0) {
    throw std::invalid_argument("fixture sizes must be non-negative");
  }
  Fixture out;
  out.spec = fixture_spec();
  if (options.wells == 0) return out;

  std::mt19937_64 rng(options.seed);
  const auto wells = unique_ids(rng, options.wells, kWellId, 10000, 99999, "", "");
  const auto zones = unique_ids(rng, options.zones, kZoneId, 100, 999, "", "");
  std::vector<std::string> logs;
  for (int w = 0; w < options.wells; ++w) {
    logs.push_back(w == 0 ? std::string(kLogFile)
                          : "file_" + std::to_string(158 + w) + ".las");
  }

  const std::string execution = "sss-run-" + std::to_string(options.seed);
  const Timestamp base = Timestamp{std::chrono::sys_days{
      std::chrono::year{2019} / std::chrono::May / 1}} + std::chrono::hours(8);
  int task_index = 0;
  auto envelope = [&](std::string task_id, const char* transformation) {
    IngestEnvelope env;
    env.workflow_execution_id = execution;
    env.workflow_name = kWorkflowName;
    env.task_id = std::move(task_id);
    env.transformation = transformation;
    env.started_at = base + std::chrono::seconds(90 * task_index);
    env.ended_at = env.started_at + std::chrono::seconds(60);
    ++task_index;
    return env;
  };

  for (int w = 0; w < options.wells; ++w) {
    auto env = envelope("ingest-logs-" + wells[w], "ingest-logs");
    env.used.push_back({kWellType, wells[w],
                        {{"well_id", wells[w]},
                         {"production_bopd", round4(50.0 + 950.0 * unit(rng))}}});
    env.generated.push_back({kLogFileType, logs[w],
                             {{"path", logs[w]}, {"well_id", wells[w]}}});
    out.envelopes.push_back(std::move(env));
  }

  for (int z = 0; z < options.zones; ++z) {
    const std::string& zone = zones[z];
    std::vector<std::string> features;
    for (int w = 0; w < options.wells; ++w) {
      auto env = envelope("features-" + wells[w] + "-" + zone,
                          "feature-extraction-per-zone");
      const std::string dataset = "features-" + wells[w] + "-" + zone;
      env.used.push_back({kLogFileType, logs[w], {{"path", logs[w]}}});
      env.used.push_back({kZoneType, zone, {{"zone_id", zone}}});
      env.generated.push_back({kDatasetType, dataset,
                               {{"dataset_id", dataset}, {"kind", "zone-features"}}});
      features.push_back(dataset);
      out.envelopes.push_back(std::move(env));
    }

    const std::string integrated = "integrated-" + zone;
    auto integrate = envelope("integrate-" + zone, "dataset-integration");
    for (const auto& f : features) {
      integrate.used.push_back({kDatasetType, f, {{"dataset_id", f}}});
    }
    integrate.generated.push_back(
        {kDatasetType, integrated, {{"dataset_id", integrated}, {"kind", "integrated"}}});
    out.envelopes.push_back(std::move(integrate));

    static constexpr double kZeroZoneMse[] = {0.9, 0.4, 0.7};
    for (int r = 0; r < options.models_per_zone; ++r) {
      const std::string model = "model-" + zone + "-" + std::to_string(r);
      const double mse = (z == 0 && r < 3) ? kZeroZoneMse[r]
                                           : round4(0.05 + 0.9 * unit(rng));
      auto train = envelope("train-" + zone + "-" + std::to_string(r), "model-training");
      train.used.push_back({kDatasetType, integrated, {{"dataset_id", integrated}}});
      train.generated.push_back({kModelType, model,
                                 {{"model_id", model},
                                  {"mse", mse},
                                  {"algorithm", "gradient-boosting"}}});
      out.envelopes.push_back(std::move(train));
    }
  }
  return out;
}

void write_fixture(const Fixture& fixture, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream spec(dir / "spec.json", std::ios::binary);
    spec << Json(fixture.spec).dump(2) << '\n';
    if (!spec) throw std::runtime_error("cannot write " + (dir / "spec.json").string());
  }
  std::ofstream envs(dir / "envelopes.jsonl", std::ios::binary);
  for (const auto& env : fixture.envelopes) envs << canonical_json(env) << '\n';
  if (!envs) throw std::runtime_error("cannot write " + (dir / "envelopes.jsonl").string());
}

}  // namespace provgraph
