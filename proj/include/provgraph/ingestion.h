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

// Asynchronous write path.
//
// Producers call enqueue(), which only admits the job into a bounded queue;
// validation, expansion and the graph write happen later on the single
// worker, which drains up to max_batch jobs per pass and applies all valid
// deltas with one apply_batch() call. Each job's outcome is recorded in a
// bounded status table that can be read concurrently.

#ifndef PROVGRAPH_INGESTION_H_
#define PROVGRAPH_INGESTION_H_

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <istream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "provgraph/graph_store.h"
#include "provgraph/json_codec.h"
#include "provgraph/prov_model.h"

namespace provgraph {

// Latest registered version of each workflow spec. Thread-safe.
class SpecRegistry {
 public:
  struct Registration {
    std::string name;
    std::int64_t version = 0;  // 0 when rejected
    ValidationReport report;
  };

  // Validates and stores `spec`, assigning the next version for its name.
  // Invalid specs are not stored.
  Registration register_spec(WorkflowSpec spec);

  std::shared_ptr<const WorkflowSpec> latest(const std::string& name) const;

 private:
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<const WorkflowSpec>> specs_;
};

enum class JobStatus { kQueued, kPersisting, kPersisted, kFailed };

std::string_view to_string(JobStatus status);

struct IngestJob {
  std::string job_id;
  // Envelopes to apply; released once the job is terminal.
  std::vector<IngestEnvelope> payload;
  std::size_t envelope_count = 0;
  Timestamp enqueued_at{};
  std::optional<Timestamp> completed_at;
  JobStatus status = JobStatus::kQueued;
  std::optional<std::string> failure_reason;
  ValidationReport violations;
  // Epoch at which a persisted job's delta is visible.
  std::optional<std::uint64_t> epoch;

  bool terminal() const {
    return status == JobStatus::kPersisted || status == JobStatus::kFailed;
  }
};

void to_json(Json& j, const IngestJob& job);

class QueueFull : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnknownJob : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SourceUnreadable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct IngestionOptions {
  std::size_t queue_capacity = 10000;
  std::size_t max_batch = 256;
  std::size_t status_retention = 100000;
};

class IngestionPipeline {
 public:
  IngestionPipeline(GraphStore& store, const SpecRegistry& specs,
                    IngestionOptions options = {});

  IngestionPipeline(const IngestionPipeline&) = delete;
  IngestionPipeline& operator=(const IngestionPipeline&) = delete;

  // Admits one envelope as one job. Never validates; throws QueueFull when
  // `queue_capacity` jobs are already queued.
  std::string enqueue(IngestEnvelope env);

  // Admits several envelopes as one job that succeeds or fails as a unit.
  std::string enqueue_batch(std::vector<IngestEnvelope> envs);

  // One worker pass. Must only be called from the single worker.
  std::size_t worker_step();

  // Copy of the job record, without its payload. Throws UnknownJob.
  IngestJob job_status(const std::string& job_id) const;

  // Blocks until the job is terminal or `timeout` elapses; returns the
  // latest record either way. Throws UnknownJob.
  IngestJob wait_for_job(const std::string& job_id,
                         std::chrono::milliseconds timeout) const;

  // Blocks until a job is queued or `timeout` elapses.
  void wait_for_work(std::chrono::milliseconds timeout) const;

  std::size_t queue_depth() const;
  const IngestionOptions& options() const { return options_; }
  GraphStore& store() { return store_; }

 private:
  struct Outcome {
    std::optional<GraphDelta> delta;  // set when valid
    std::string failure_reason;
    ValidationReport violations;
  };

  std::string admit(std::vector<IngestEnvelope> payload);
  Outcome prepare(const std::vector<IngestEnvelope>& payload) const;
  void finish(const std::string& job_id, const Outcome& outcome,
              std::optional<std::uint64_t> epoch,
              const std::string& apply_error);
  void evict_locked();

  GraphStore& store_;
  const SpecRegistry& specs_;
  IngestionOptions options_;

  mutable std::mutex mutex_;
  mutable std::condition_variable work_cv_;
  mutable std::condition_variable done_cv_;
  std::deque<std::string> queue_;
  std::unordered_map<std::string, IngestJob> jobs_;
  std::deque<std::string> finished_order_;
  std::uint64_t next_job_ = 0;
  std::string job_prefix_;
};

// Runs worker_step() on a background thread until stopped.
class IngestionWorker {
 public:
  IngestionWorker(IngestionPipeline& pipeline,
                  std::chrono::milliseconds poll_interval);
  ~IngestionWorker();

  IngestionWorker(const IngestionWorker&) = delete;
  IngestionWorker& operator=(const IngestionWorker&) = delete;

  // Paused workers leave jobs queued; used to exercise backpressure.
  void pause();
  void resume();

  // Keeps draining until the queue is empty or `drain_timeout` elapses,
  // then joins. Returns false if jobs were left queued.
  bool stop(std::chrono::milliseconds drain_timeout);

 private:
  void run();

  IngestionPipeline& pipeline_;
  std::chrono::milliseconds poll_interval_;
  std::mutex mutex_;
  std::condition_variable cv_;
  bool paused_ = false;
  bool stopping_ = false;
  std::chrono::steady_clock::time_point drain_deadline_;
  std::thread thread_;
};

struct HistoricalLoadPlan {
  std::filesystem::path source;
  std::size_t batch_size = 1;
  std::chrono::milliseconds interval{0};
};

struct LoadFailure {
  std::size_t line = 0;  // 1-based line in the source
  std::string reason;

  friend bool operator==(const LoadFailure&, const LoadFailure&) = default;
};

struct LoadReport {
  std::size_t total = 0;
  std::size_t persisted = 0;
  std::size_t failed = 0;
  std::vector<LoadFailure> failures;
  // Records per submission, in order.
  std::vector<std::size_t> batch_sizes;
  // Start of each submission.
  std::vector<std::chrono::steady_clock::time_point> submitted_at;
};

void to_json(Json& j, const LoadReport& report);

// Where a historical load sends its records. The in-process pipeline and
// the HTTP client both implement this.
class LoadSink {
 public:
  struct Result {
    bool persisted = false;
    std::string failure_reason;
  };

  virtual ~LoadSink() = default;
  // Returns the job id, or nullopt if the queue is full and the record
  // should be retried.
  virtual std::optional<std::string> submit(const IngestEnvelope& env) = 0;
  virtual Result await(const std::string& job_id) = 0;
};

// Splits newline-delimited envelopes into submissions of `batch_size`
// records spaced `interval` apart, waits for every job, and tallies the
// outcome. Blank lines are skipped; undecodable lines count as failed.
// Records without timestamps get deterministic synthetic ones.
LoadReport run_historical_load(std::istream& source, std::size_t batch_size,
                               std::chrono::milliseconds interval,
                               LoadSink& sink);

// Loads `plan.source` through `pipeline`. Needs a running worker.
// Throws SourceUnreadable.
LoadReport load_historical(IngestionPipeline& pipeline,
                           const HistoricalLoadPlan& plan);

}  // namespace provgraph

#endif  // PROVGRAPH_INGESTION_H_
