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

#include "provgraph/graph_store.h"

#include <algorithm>
#include <atomic>

#include "cow_containers.h"
#include "provgraph/json_codec.h"

namespace provgraph {

struct NodeRecord {
  ProvNode node;
  std::vector<std::uint32_t> out_edges;
  std::vector<std::uint32_t> in_edges;
};

struct GraphState {
  std::uint64_t epoch = 0;
  internal::CowVector<NodeRecord> nodes;
  internal::CowVector<ProvEdge> edges;
  internal::CowHashMap<std::string, std::uint32_t> node_index;
  // Keyed by canonical (kind, src, dst) id so repeated edges collapse.
  internal::CowHashMap<std::string, std::uint32_t> edge_index;
  internal::CowHashMap<std::string, std::vector<std::uint32_t>> by_type_value;
};

namespace {

std::string type_value_key(std::string_view type_label,
                           std::string_view identity) {
  std::string key = std::to_string(type_label.size());
  key += ':';
  key += type_label;
  key += identity;
  return key;
}

const std::shared_ptr<const GraphState>& empty_state() {
  static const auto state = std::make_shared<const GraphState>();
  return state;
}

// Merges `from` into `into`; true when any key changed.
bool merge_attributes(AttributeMap& into, const AttributeMap& from) {
  bool changed = false;
  for (const auto& [key, value] : from) {
    auto it = into.find(key);
    if (it == into.end()) {
      into.emplace(key, value);
      changed = true;
    } else if (it->second != value) {
      it->second = value;
      changed = true;
    }
  }
  return changed;
}

// Builds the successor of a published state. Throwing at any point leaves
// the published state untouched; the partially built successor is dropped.
class StateBuilder {
 public:
  StateBuilder(const GraphState& base, std::uint64_t generation)
      : next_(base), generation_(generation) {}

  void upsert_node(const ProvNode& node) {
    if (node.node_id.empty()) throw InvalidDelta("node with empty node_id");
    if (const auto* idx = next_.node_index.find(node.node_id)) {
      const NodeRecord& existing = next_.nodes[*idx];
      if (existing.node.kind != node.kind ||
          existing.node.type_label != node.type_label ||
          existing.node.identity != node.identity) {
        throw InvalidDelta("node '" + node.node_id +
                           "' conflicts with the stored node of that id");
      }
      auto copy = std::make_shared<NodeRecord>(existing);
      if (merge_attributes(copy->node.attributes, node.attributes)) {
        next_.nodes.set(*idx, std::move(copy), generation_);
        changed_ = true;
      }
      return;
    }
    const auto idx = static_cast<std::uint32_t>(next_.nodes.size());
    next_.nodes.push_back(std::make_shared<NodeRecord>(NodeRecord{node, {}, {}}),
                          generation_);
    next_.node_index.upsert(node.node_id, generation_) = idx;
    next_.by_type_value.upsert(type_value_key(node.type_label, node.identity),
                               generation_)
        .push_back(idx);
    changed_ = true;
  }

  void add_edge(const ProvEdge& edge) {
    const auto* src = next_.node_index.find(edge.src);
    const auto* dst = next_.node_index.find(edge.dst);
    if (src == nullptr || dst == nullptr) {
      throw DanglingEdge("edge " + std::string(to_string(edge.kind)) + " " +
                         edge.src + " -> " + edge.dst +
                         " references an unknown node '" +
                         (src == nullptr ? edge.src : edge.dst) + "'");
    }
    const auto src_idx = *src;
    const auto dst_idx = *dst;
    if (next_.nodes[src_idx].node.kind != required_source_kind(edge.kind) ||
        next_.nodes[dst_idx].node.kind != required_destination_kind(edge.kind)) {
      throw InvalidDelta("edge " + std::string(to_string(edge.kind)) + " " +
                         edge.src + " -> " + edge.dst +
                         " connects the wrong node kinds");
    }
    auto key = edge_id(edge.kind, edge.src, edge.dst);
    if (next_.edge_index.find(key) != nullptr) return;

    ProvEdge stored = edge;
    if (stored.edge_id.empty()) stored.edge_id = key;
    const auto idx = static_cast<std::uint32_t>(next_.edges.size());
    next_.edges.push_back(std::make_shared<const ProvEdge>(std::move(stored)),
                          generation_);
    next_.edge_index.upsert(key, generation_) = idx;

    auto src_copy = std::make_shared<NodeRecord>(next_.nodes[src_idx]);
    src_copy->out_edges.push_back(idx);
    next_.nodes.set(src_idx, std::move(src_copy), generation_);
    auto dst_copy = std::make_shared<NodeRecord>(next_.nodes[dst_idx]);
    dst_copy->in_edges.push_back(idx);
    next_.nodes.set(dst_idx, std::move(dst_copy), generation_);
    changed_ = true;
  }

  bool changed() const { return changed_; }

  GraphState finish(std::uint64_t epoch) && {
    next_.epoch = epoch;
    return std::move(next_);
  }

 private:
  GraphState next_;
  std::uint64_t generation_;
  bool changed_ = false;
};

std::uint64_t next_generation() {
  static std::atomic<std::uint64_t> counter{0};
  return ++counter;
}

}  // namespace

std::string_view to_string(Direction direction) {
  return direction == Direction::kForward ? "forward" : "backward";
}

std::optional<Direction> parse_direction(std::string_view text) {
  if (text == "forward") return Direction::kForward;
  if (text == "backward") return Direction::kBackward;
  return std::nullopt;
}

Snapshot::Snapshot() : state_(empty_state()) {}

Snapshot::Snapshot(std::shared_ptr<const GraphState> state)
    : state_(std::move(state)) {}

std::uint64_t Snapshot::epoch() const { return state_->epoch; }

std::size_t Snapshot::node_count() const { return state_->nodes.size(); }

std::size_t Snapshot::edge_count() const { return state_->edges.size(); }

const ProvNode* Snapshot::find_node(std::string_view node_id) const {
  const auto* idx = state_->node_index.find(std::string(node_id));
  return idx == nullptr ? nullptr : &state_->nodes[*idx].node;
}

bool Snapshot::contains(std::string_view node_id) const {
  return find_node(node_id) != nullptr;
}

std::vector<std::string> Snapshot::find_by_type_value(
    std::string_view type_label, std::string_view identity) const {
  std::vector<std::string> out;
  if (const auto* hits =
          state_->by_type_value.find(type_value_key(type_label, identity))) {
    out.reserve(hits->size());
    for (auto idx : *hits) out.push_back(state_->nodes[idx].node.node_id);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Neighbor> Snapshot::neighbors(std::string_view node_id,
                                          Direction direction) const {
  const auto* idx = state_->node_index.find(std::string(node_id));
  if (idx == nullptr) {
    throw UnknownNode("unknown node '" + std::string(node_id) + "'");
  }
  const NodeRecord& record = state_->nodes[*idx];
  const bool forward = direction == Direction::kForward;
  const auto& edge_ids = forward ? record.out_edges : record.in_edges;
  std::vector<Neighbor> out;
  out.reserve(edge_ids.size());
  for (auto e : edge_ids) {
    const ProvEdge& edge = state_->edges[e];
    out.push_back({edge, forward ? edge.dst : edge.src});
  }
  std::sort(out.begin(), out.end(), [](const Neighbor& a, const Neighbor& b) {
    return a.edge.edge_id < b.edge.edge_id;
  });
  return out;
}

void Snapshot::for_each_node(
    const std::function<void(const ProvNode&)>& fn) const {
  for (std::size_t i = 0; i < state_->nodes.size(); ++i) fn(state_->nodes[i].node);
}

void Snapshot::for_each_edge(
    const std::function<void(const ProvEdge&)>& fn) const {
  for (std::size_t i = 0; i < state_->edges.size(); ++i) fn(state_->edges[i]);
}

GraphStore::GraphStore() : GraphStore(StoreOptions{}) {}

GraphStore::GraphStore(StoreOptions options)
    : options_(std::move(options)), current_(empty_state()) {
  if (options_.log_path) {
    if (std::filesystem::exists(*options_.log_path)) replay(*options_.log_path);
    log_.open(*options_.log_path, std::ios::app | std::ios::binary);
    if (!log_) {
      throw StoreError("cannot open persistence log " +
                       options_.log_path->string());
    }
  }
}

GraphStore::~GraphStore() = default;

std::uint64_t GraphStore::apply_batch(const GraphDelta& delta) {
  std::lock_guard writer(writer_mutex_);
  return apply_locked(delta, true);
}

std::uint64_t GraphStore::apply_locked(const GraphDelta& delta, bool log) {
  std::shared_ptr<const GraphState> base;
  {
    std::lock_guard lock(publish_mutex_);
    base = current_;
  }
  if (delta.empty()) return base->epoch;

  StateBuilder builder(*base, next_generation());
  for (const auto& node : delta.nodes) builder.upsert_node(node);
  for (const auto& edge : delta.edges) builder.add_edge(edge);
  if (!builder.changed()) return base->epoch;

  if (log && log_.is_open()) {
    log_ << canonical_json(delta) << '\n';
    log_.flush();
    if (!log_) throw StoreError("failed to append to persistence log");
  }
  auto next =
      std::make_shared<const GraphState>(std::move(builder).finish(base->epoch + 1));
  std::lock_guard lock(publish_mutex_);
  current_ = std::move(next);
  return current_->epoch;
}

void GraphStore::replay(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StoreError("cannot read persistence log " + path.string());
  std::string line;
  std::size_t line_no = 0;
  std::optional<std::uintmax_t> truncate_at;
  std::lock_guard writer(writer_mutex_);
  for (std::streamoff offset = 0; std::getline(in, line);) {
    ++line_no;
    const bool torn_tail = in.eof();  // last line without a newline
    const std::streamoff line_start = offset;
    offset += static_cast<std::streamoff>(line.size()) + 1;
    if (line.empty()) continue;
    GraphDelta delta;
    try {
      delta = decode<GraphDelta>(line);
    } catch (const DecodeError& e) {
      if (torn_tail) {
        truncate_at = static_cast<std::uintmax_t>(line_start);
        break;
      }
      throw StoreError("persistence log line " + std::to_string(line_no) +
                       ": " + e.what());
    }
    apply_locked(delta, false);
  }
  in.close();
  // Drop a partial write so the next append starts on a fresh line.
  if (truncate_at) std::filesystem::resize_file(path, *truncate_at);
}

Snapshot GraphStore::snapshot() const {
  std::lock_guard lock(publish_mutex_);
  return Snapshot(current_);
}

std::vector<std::string> find_by_type_value(const Snapshot& s,
                                            std::string_view type_label,
                                            std::string_view identity) {
  return s.find_by_type_value(type_label, identity);
}

std::vector<Neighbor> neighbors(const Snapshot& s, std::string_view node_id,
                                Direction direction) {
  return s.neighbors(node_id, direction);
}

GraphStats stats(const Snapshot& s) {
  return {s.node_count(), s.edge_count(), s.epoch()};
}

}  // namespace provgraph
