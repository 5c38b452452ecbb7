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

#include "provgraph/ingestion.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <random>

#include <sys/resource.h>
#include <sys/syscall.h>
#include <unistd.h>

namespace provgraph {
namespace {

Timestamp now() {
  return std::chrono::time_point_cast<std::chrono::microseconds>(
      std::chrono::system_clock::now());
}

std::string random_prefix() {
  std::random_device rd;
  std::uint64_t bits = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(bits));
  return buf;
}

}  // namespace

SpecRegistry::Registration SpecRegistry::register_spec(WorkflowSpec spec) {
  Registration result;
  result.name = spec.name;
  result.report = validate_spec(spec);
  if (!result.report.ok()) return result;

  std::lock_guard lock(mutex_);
  auto& slot = specs_[spec.name];
  spec.version = slot ? slot->version + 1 : 1;
  result.version = spec.version;
  slot = std::make_shared<const WorkflowSpec>(std::move(spec));
  return result;
}

std::shared_ptr<const WorkflowSpec> SpecRegistry::latest(
    const std::string& name) const {
  std::lock_guard lock(mutex_);
  auto it = specs_.find(name);
  return it == specs_.end() ? nullptr : it->second;
}

std::string_view to_string(JobStatus status) {
  switch (status) {
    case JobStatus::kQueued:
      return "queued";
    case JobStatus::kPersisting:
      return "persisting";
    case JobStatus::kPersisted:
      return "persisted";
    case JobStatus::kFailed:
      return "failed";
  }
  return "";
}

void to_json(Json& j, const IngestJob& job) {
  j = Json{{"job_id", job.job_id},
           {"status", to_string(job.status)},
           {"envelope_count", job.envelope_count},
           {"enqueued_at", format_timestamp(job.enqueued_at)},
           {"completed_at", nullptr}};
  if (job.completed_at) j["completed_at"] = format_timestamp(*job.completed_at);
  if (job.failure_reason) j["failure_reason"] = *job.failure_reason;
  if (!job.violations.ok()) j["violations"] = job.violations.violations;
  if (job.epoch) j["epoch"] = *job.epoch;
}

IngestionPipeline::IngestionPipeline(GraphStore& store,
                                     const SpecRegistry& specs,
                                     IngestionOptions options)
    : store_(store),
      specs_(specs),
      options_(options),
      job_prefix_("job-" + random_prefix().substr(0, 8) + "-") {
  if (options_.queue_capacity == 0 || options_.max_batch == 0) {
    throw std::invalid_argument("queue capacity and max batch must be >= 1");
  }
}

std::string IngestionPipeline::enqueue(IngestEnvelope env) {
  std::vector<IngestEnvelope> payload;
  payload.push_back(std::move(env));
  return admit(std::move(payload));
}

std::string IngestionPipeline::enqueue_batch(std::vector<IngestEnvelope> envs) {
  return admit(std::move(envs));
}

std::string IngestionPipeline::admit(std::vector<IngestEnvelope> payload) {
  std::unique_lock lock(mutex_);
  if (queue_.size() >= options_.queue_capacity) {
    throw QueueFull("ingestion queue is at capacity (" +
                    std::to_string(options_.queue_capacity) + ")");
  }
  IngestJob job;
  job.job_id = job_prefix_ + std::to_string(++next_job_);
  job.envelope_count = payload.size();
  job.payload = std::move(payload);
  job.enqueued_at = now();
  std::string id = job.job_id;
  queue_.push_back(id);
  jobs_.emplace(id, std::move(job));
  lock.unlock();
  work_cv_.notify_all();
  return id;
}

IngestionPipeline::Outcome IngestionPipeline::prepare(
    const std::vector<IngestEnvelope>& payload) const {
  Outcome outcome;
  GraphDelta combined;
  for (std::size_t i = 0; i < payload.size(); ++i) {
    const auto& env = payload[i];
    const std::string where =
        payload.size() > 1 ? " (envelope " + std::to_string(i) + ")" : "";
    auto spec = specs_.latest(env.workflow_name);
    if (!spec) {
      outcome.violations.add(codes::kUnknownWorkflow,
                             "no spec registered for workflow '" +
                                 env.workflow_name + "'" + where);
      continue;
    }
    auto report = validate_envelope(env, *spec);
    if (!report.ok()) {
      for (auto& v : report.violations) {
        outcome.violations.add(v.code, v.message + where);
      }
      continue;
    }
    try {
      combined.append(expand_envelope(env, *spec));
    } catch (const MissingIdentity& e) {
      outcome.violations.add(codes::kMissingIdentity, e.what() + where);
    }
  }
  if (outcome.violations.ok()) {
    outcome.delta = std::move(combined);
  } else {
    outcome.failure_reason = outcome.violations.summary();
  }
  return outcome;
}

std::size_t IngestionPipeline::worker_step() {
  std::vector<std::pair<std::string, std::vector<IngestEnvelope>>> batch;
  {
    std::lock_guard lock(mutex_);
    while (!queue_.empty() && batch.size() < options_.max_batch) {
      auto id = std::move(queue_.front());
      queue_.pop_front();
      auto& job = jobs_.at(id);
      job.status = JobStatus::kPersisting;
      batch.emplace_back(std::move(id), std::move(job.payload));
      job.payload.clear();
    }
  }
  if (batch.empty()) return 0;

  std::vector<Outcome> outcomes;
  outcomes.reserve(batch.size());
  GraphDelta combined;
  for (const auto& [id, payload] : batch) {
    outcomes.push_back(prepare(payload));
    if (outcomes.back().delta) combined.append(*outcomes.back().delta);
  }

  std::optional<std::uint64_t> shared_epoch;
  try {
    shared_epoch = store_.apply_batch(combined);
  } catch (const StoreError&) {
    // Fall through to per-job application below.
  }

  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto& outcome = outcomes[i];
    if (!outcome.delta || shared_epoch) {
      finish(batch[i].first, outcome, shared_epoch, "");
      continue;
    }
    // The combined write was rejected; isolate the offending jobs.
    try {
      finish(batch[i].first, outcome, store_.apply_batch(*outcome.delta), "");
    } catch (const StoreError& e) {
      finish(batch[i].first, outcome, std::nullopt, e.what());
    }
  }
  return batch.size();
}

void IngestionPipeline::finish(const std::string& job_id,
                               const Outcome& outcome,
                               std::optional<std::uint64_t> epoch,
                               const std::string& apply_error) {
  {
    std::lock_guard lock(mutex_);
    auto& job = jobs_.at(job_id);
    job.completed_at = now();
    job.violations = outcome.violations;
    if (outcome.delta && apply_error.empty()) {
      job.status = JobStatus::kPersisted;
      job.epoch = epoch;
    } else {
      job.status = JobStatus::kFailed;
      job.failure_reason =
          apply_error.empty() ? outcome.failure_reason : "store-rejected: " + apply_error;
    }
    finished_order_.push_back(job_id);
    evict_locked();
  }
  done_cv_.notify_all();
}

void IngestionPipeline::evict_locked() {
  while (finished_order_.size() > options_.status_retention) {
    jobs_.erase(finished_order_.front());
    finished_order_.pop_front();
  }
}

IngestJob IngestionPipeline::job_status(const std::string& job_id) const {
  std::lock_guard lock(mutex_);
  auto it = jobs_.find(job_id);
  if (it == jobs_.end()) throw UnknownJob("unknown job '" + job_id + "'");
  IngestJob copy = it->second;
  copy.payload.clear();
  return copy;
}

IngestJob IngestionPipeline::wait_for_job(
    const std::string& job_id, std::chrono::milliseconds timeout) const {
  std::unique_lock lock(mutex_);
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  for (;;) {
    auto it = jobs_.find(job_id);
    if (it == jobs_.end()) throw UnknownJob("unknown job '" + job_id + "'");
    if (it->second.terminal() ||
        done_cv_.wait_until(lock, deadline) == std::cv_status::timeout) {
      it = jobs_.find(job_id);
      if (it == jobs_.end()) throw UnknownJob("unknown job '" + job_id + "'");
      IngestJob copy = it->second;
      copy.payload.clear();
      return copy;
    }
  }
}

void IngestionPipeline::wait_for_work(std::chrono::milliseconds timeout) const {
  std::unique_lock lock(mutex_);
  work_cv_.wait_for(lock, timeout, [&] { return !queue_.empty(); });
}

std::size_t IngestionPipeline::queue_depth() const {
  std::lock_guard lock(mutex_);
  return queue_.size();
}

IngestionWorker::IngestionWorker(IngestionPipeline& pipeline,
                                 std::chrono::milliseconds poll_interval)
    : pipeline_(pipeline),
      poll_interval_(poll_interval),
      thread_([this] { run(); }) {}

IngestionWorker::~IngestionWorker() { stop(std::chrono::milliseconds(0)); }

void IngestionWorker::pause() {
  std::lock_guard lock(mutex_);
  paused_ = true;
}

void IngestionWorker::resume() {
  {
    std::lock_guard lock(mutex_);
    paused_ = false;
  }
  cv_.notify_all();
}

bool IngestionWorker::stop(std::chrono::milliseconds drain_timeout) {
  {
    std::lock_guard lock(mutex_);
    if (!thread_.joinable()) return pipeline_.queue_depth() == 0;
    stopping_ = true;
    paused_ = false;
    drain_deadline_ = std::chrono::steady_clock::now() + drain_timeout;
  }
  cv_.notify_all();
  thread_.join();
  return pipeline_.queue_depth() == 0;
}

void IngestionWorker::run() {
  // Writes yield the CPU to queries. Linux applies nice values per thread;
  // failure (e.g. a restrictive sandbox) only costs read latency.
  setpriority(PRIO_PROCESS, static_cast<id_t>(syscall(SYS_gettid)), 10);
  for (;;) {
    {
      std::unique_lock lock(mutex_);
      cv_.wait(lock, [&] { return !paused_ || stopping_; });
      if (stopping_ && (pipeline_.queue_depth() == 0 ||
                        std::chrono::steady_clock::now() >= drain_deadline_)) {
        return;
      }
    }
    if (pipeline_.worker_step() == 0) {
      bool stopping;
      {
        std::lock_guard lock(mutex_);
        stopping = stopping_;
      }
      if (!stopping) pipeline_.wait_for_work(poll_interval_);
    }
  }
}

void to_json(Json& j, const LoadReport& report) {
  j = Json{{"total", report.total},
           {"persisted", report.persisted},
           {"failed", report.failed},
           {"batches", report.batch_sizes.size()},
           {"batch_sizes", report.batch_sizes},
           {"failures", Json::array()}};
  for (const auto& f : report.failures) {
    j["failures"].push_back({{"line", f.line}, {"reason", f.reason}});
  }
}

LoadReport run_historical_load(std::istream& source, std::size_t batch_size,
                               std::chrono::milliseconds interval,
                               LoadSink& sink) {
  if (batch_size == 0) throw std::invalid_argument("batch_size must be >= 1");

  struct Record {
    std::size_t line;
    std::optional<IngestEnvelope> env;
    std::string error;
  };
  std::vector<Record> records;
  std::string text;
  for (std::size_t line = 1; std::getline(source, text); ++line) {
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (text.find_first_not_of(" \t") == std::string::npos) continue;
    Record rec{line, std::nullopt, {}};
    try {
      auto env = envelope_from_json(Json::parse(text),
                                    {.allow_missing_timestamps = true});
      if (env.synthetic_time) {
        // Deterministic and monotonic in line order, so replays agree.
        env.started_at = env.ended_at =
            Timestamp{std::chrono::seconds(static_cast<long long>(line))};
      }
      rec.env = std::move(env);
    } catch (const std::exception& e) {
      rec.error = std::string("malformed-record: ") + e.what();
    }
    records.push_back(std::move(rec));
  }

  LoadReport report;
  report.total = records.size();
  std::vector<std::pair<std::size_t, std::string>> jobs;  // record -> job
  std::optional<std::chrono::steady_clock::time_point> previous;
  for (std::size_t start = 0; start < records.size(); start += batch_size) {
    if (previous) std::this_thread::sleep_until(*previous + interval);
    const auto submitted = std::chrono::steady_clock::now();
    previous = submitted;
    const std::size_t end = std::min(records.size(), start + batch_size);
    report.submitted_at.push_back(submitted);
    report.batch_sizes.push_back(end - start);
    for (std::size_t i = start; i < end; ++i) {
      if (!records[i].env) continue;
      auto backoff = std::chrono::milliseconds(1);
      for (;;) {
        if (auto id = sink.submit(*records[i].env)) {
          jobs.emplace_back(i, std::move(*id));
          break;
        }
        std::this_thread::sleep_for(backoff);
        backoff = std::min(backoff * 2, std::chrono::milliseconds(50));
      }
    }
  }

  for (const auto& [i, id] : jobs) {
    auto result = sink.await(id);
    if (!result.persisted) {
      records[i].error = result.failure_reason.empty() ? "failed" : result.failure_reason;
    }
  }
  for (const auto& rec : records) {
    if (rec.error.empty()) {
      ++report.persisted;
    } else {
      ++report.failed;
      report.failures.push_back({rec.line, rec.error});
    }
  }
  return report;
}

namespace {

class PipelineSink : public LoadSink {
 public:
  explicit PipelineSink(IngestionPipeline& pipeline) : pipeline_(pipeline) {}

  std::optional<std::string> submit(const IngestEnvelope& env) override {
    try {
      return pipeline_.enqueue(env);
    } catch (const QueueFull&) {
      return std::nullopt;
    }
  }

  Result await(const std::string& job_id) override {
    for (;;) {
      auto job = pipeline_.wait_for_job(job_id, std::chrono::seconds(1));
      if (job.terminal()) {
        return {job.status == JobStatus::kPersisted,
                job.failure_reason.value_or("")};
      }
    }
  }

 private:
  IngestionPipeline& pipeline_;
};

}  // namespace

LoadReport load_historical(IngestionPipeline& pipeline,
                           const HistoricalLoadPlan& plan) {
  std::ifstream in(plan.source, std::ios::binary);
  if (!in) throw SourceUnreadable("cannot read " + plan.source.string());
  PipelineSink sink(pipeline);
  return run_historical_load(in, plan.batch_size, plan.interval, sink);
}

}  // namespace provgraph
