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

// In-process provenance graph with snapshot isolation.
//
// The store is append-oriented: batches only add nodes and edges or merge
// entity attributes. Each successful, non-empty batch publishes a new
// immutable state tagged with the next epoch. Readers take a Snapshot (a
// reference to one published state) and never observe a partially applied
// batch; the writer builds the next state by copy-on-write, so taking a
// snapshot never waits for a batch in progress.
//
// Thread-safety: any number of threads may call snapshot() and use
// snapshots concurrently. apply_batch() is serialized internally, but the
// intended discipline is a single writer (the ingestion worker).

#ifndef PROVGRAPH_GRAPH_STORE_H_
#define PROVGRAPH_GRAPH_STORE_H_

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "provgraph/prov_model.h"

namespace provgraph {

enum class Direction { kForward, kBackward };

std::string_view to_string(Direction direction);
std::optional<Direction> parse_direction(std::string_view text);

class StoreError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An edge references a node that is neither stored nor in the same delta.
class DanglingEdge : public StoreError {
 public:
  using StoreError::StoreError;
};

// An edge's endpoints have the wrong kinds, or a node id is reused with a
// different kind or type label.
class InvalidDelta : public StoreError {
 public:
  using StoreError::StoreError;
};

class UnknownNode : public StoreError {
 public:
  using StoreError::StoreError;
};

struct GraphState;

struct GraphStats {
  std::size_t node_count = 0;
  std::size_t edge_count = 0;
  std::uint64_t epoch = 0;

  friend bool operator==(const GraphStats&, const GraphStats&) = default;
};

struct Neighbor {
  ProvEdge edge;
  std::string node_id;  // the node at the far end of `edge`
};

// Read view of the graph as of one epoch. Cheap to copy; outlives later
// writes to the store.
class Snapshot {
 public:
  Snapshot();

  std::uint64_t epoch() const;
  std::size_t node_count() const;
  std::size_t edge_count() const;

  // nullptr when absent.
  const ProvNode* find_node(std::string_view node_id) const;
  bool contains(std::string_view node_id) const;

  // Node ids with this exact type label and identity, sorted.
  std::vector<std::string> find_by_type_value(std::string_view type_label,
                                              std::string_view identity) const;

  // Forward: out-edges along the dataflow. Backward: in-edges, with
  // node_id naming the edge source. Sorted by edge_id. Throws UnknownNode.
  std::vector<Neighbor> neighbors(std::string_view node_id,
                                  Direction direction) const;

  void for_each_node(const std::function<void(const ProvNode&)>& fn) const;
  void for_each_edge(const std::function<void(const ProvEdge&)>& fn) const;

 private:
  friend class GraphStore;
  explicit Snapshot(std::shared_ptr<const GraphState> state);

  std::shared_ptr<const GraphState> state_;
};

struct StoreOptions {
  // Append-only log of applied deltas, one canonical-JSON GraphDelta per
  // line. Replayed on construction when present.
  std::optional<std::filesystem::path> log_path;
};

class GraphStore {
 public:
  GraphStore();
  explicit GraphStore(StoreOptions options);
  ~GraphStore();

  GraphStore(const GraphStore&) = delete;
  GraphStore& operator=(const GraphStore&) = delete;

  // Applies `delta` atomically and returns the epoch at which it is
  // visible. Entity re-upserts merge attributes (last writer wins per key);
  // repeated edges collapse. A delta that changes nothing returns the
  // current epoch without publishing. Throws DanglingEdge / InvalidDelta
  // and leaves the store untouched.
  std::uint64_t apply_batch(const GraphDelta& delta);

  Snapshot snapshot() const;

 private:
  std::uint64_t apply_locked(const GraphDelta& delta, bool log);
  void replay(const std::filesystem::path& path);

  StoreOptions options_;
  std::mutex writer_mutex_;
  std::ofstream log_;

  mutable std::mutex publish_mutex_;  // guards the pointer swap only
  std::shared_ptr<const GraphState> current_;
};

// Free-function forms of the snapshot queries.
std::vector<std::string> find_by_type_value(const Snapshot& s,
                                            std::string_view type_label,
                                            std::string_view identity);
std::vector<Neighbor> neighbors(const Snapshot& s, std::string_view node_id,
                                Direction direction);
GraphStats stats(const Snapshot& s);

}  // namespace provgraph

#endif  // PROVGRAPH_GRAPH_STORE_H_
