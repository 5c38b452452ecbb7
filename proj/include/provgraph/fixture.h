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

// Synthetic oil-and-gas ML lineage: well logs are ingested, features are
// extracted per zone, integrated into one dataset per zone, and models are
// trained on each integrated dataset. The transformation list is a
// stand-in, not a reproduction of any production workflow.

#ifndef PROVGRAPH_FIXTURE_H_
#define PROVGRAPH_FIXTURE_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "provgraph/prov_model.h"

namespace provgraph {

namespace fixture {
inline constexpr const char* kWorkflowName = "sweet-spot-ml";
// Identifiers that well 0, its log file and zone 0 always carry.
inline constexpr const char* kWellType = "WELL";
inline constexpr const char* kWellId = "12153";
inline constexpr const char* kLogFileType = "os_path";
inline constexpr const char* kLogFile = "file_158.las";
inline constexpr const char* kZoneType = "ZONE";
inline constexpr const char* kZoneId = "278";
inline constexpr const char* kDatasetType = "DATASET";
inline constexpr const char* kModelType = "PROJECTTRAINING";
}  // namespace fixture

struct FixtureOptions {
  int wells = 1;
  int zones = 1;
  int models_per_zone = 1;
  std::uint64_t seed = 1;
};

struct Fixture {
  WorkflowSpec spec;
  std::vector<IngestEnvelope> envelopes;
};

WorkflowSpec fixture_spec();

// Deterministic for a given `options`. With wells == 0 no envelopes are
// produced. Zone 0's first three models get MSE 0.9, 0.4 and 0.7.
Fixture generate_fixture(const FixtureOptions& options);

// Writes <dir>/spec.json and <dir>/envelopes.jsonl.
void write_fixture(const Fixture& fixture, const std::filesystem::path& dir);

}  // namespace provgraph

#endif  // PROVGRAPH_FIXTURE_H_
