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

// Shared test helpers: random graph generation and reachability oracles
// that work on raw edge lists, independent of the store's adjacency and the
// query engine's BFS.

#ifndef PROVGRAPH_TESTS_TEST_SUPPORT_H_
#define PROVGRAPH_TESTS_TEST_SUPPORT_H_

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "provgraph/graph_store.h"
#include "provgraph/prov_model.h"
#include "provgraph/query_engine.h"

namespace provgraph::testing {

inline Timestamp ts(const char* text) { return *parse_timestamp(text); }

inline ProvNode entity(const std::string& type, const std::string& identity,
                       AttributeMap attributes = {}) {
  return {entity_node_id(type, identity), NodeKind::kEntity, type, identity,
          std::move(attributes)};
}

inline ProvNode activity(const std::string& transformation, const std::string& task,
                         const std::string& execution = "exec-1") {
  return {activity_node_id(execution, task), NodeKind::kActivity, transformation,
          task, {}};
}

inline ProvEdge edge(EdgeKind kind, const ProvNode& src, const ProvNode& dst) {
  return {edge_id(kind, src.node_id, dst.node_id), kind, src.node_id, dst.node_id};
}

// Random provenance graph: entities and activities with type labels from a
// small alphabet, mixed Used/Generated/Derived edges (Derived may form
// cycles).
struct RandomGraph {
  std::vector<ProvNode> nodes;
  std::vector<ProvEdge> edges;

  GraphDelta delta() const { return {nodes, edges}; }
};

inline RandomGraph random_graph(std::mt19937_64& rng, int max_nodes = 200) {
  RandomGraph g;
  std::uniform_int_distribution<int> size_dist(2, max_nodes);
  const int n = size_dist(rng);
  std::uniform_int_distribution<int> type_dist(0, 3);
  std::uniform_int_distribution<int> identity_dist(0, n / 2 + 1);
  std::set<std::string> ids;
  std::vector<int> entities, activities;
  for (int i = 0; i < n; ++i) {
    const bool is_entity = rng() % 3 != 0;
    ProvNode node;
    if (is_entity) {
      // Small identity range: the same identity recurs under several types.
      node = entity("T" + std::to_string(type_dist(rng)),
                    "v" + std::to_string(identity_dist(rng)));
    } else {
      node = activity("A" + std::to_string(type_dist(rng)), "task-" + std::to_string(i));
    }
    if (!ids.insert(node.node_id).second) continue;
    (is_entity ? entities : activities).push_back(static_cast<int>(g.nodes.size()));
    g.nodes.push_back(std::move(node));
  }
  if (entities.empty()) return g;
  std::uniform_real_distribution<double> density(0.5, 2.5);
  const int m = static_cast<int>(density(rng) * static_cast<double>(g.nodes.size()));
  std::set<std::string> edge_ids;
  auto pick = [&](const std::vector<int>& from) {
    return from[std::uniform_int_distribution<std::size_t>(0, from.size() - 1)(rng)];
  };
  for (int i = 0; i < m; ++i) {
    const int kind = static_cast<int>(rng() % 3);
    ProvEdge e;
    if (kind == 2 || activities.empty()) {
      e = edge(EdgeKind::kDerived, g.nodes[pick(entities)], g.nodes[pick(entities)]);
    } else if (kind == 0) {
      e = edge(EdgeKind::kUsed, g.nodes[pick(entities)], g.nodes[pick(activities)]);
    } else {
      e = edge(EdgeKind::kGenerated, g.nodes[pick(activities)], g.nodes[pick(entities)]);
    }
    if (edge_ids.insert(e.edge_id).second) g.edges.push_back(std::move(e));
  }
  return g;
}

// Hop distances by repeated relaxation over the raw edge list
// (Bellman-Ford with unit weights), computed per source on demand.
class ReachabilityOracle {
 public:
  explicit ReachabilityOracle(const RandomGraph& g) : edges_(g.edges) {
    for (const auto& n : g.nodes) type_[n.node_id] = n.type_label;
  }

  // Hops from `from` to `to` along edges; -1 when unreachable.
  int distance(const std::string& from, const std::string& to) {
    const auto& r = row(from, false);
    auto it = r.find(to);
    return it == r.end() ? -1 : it->second;
  }

  // Target ids reachable from any of `seeds` in `direction` whose type is in
  // `targets`, with the minimal hop count over seeds.
  std::map<std::string, int> targets(const std::vector<std::string>& seeds,
                                     Direction direction,
                                     const std::set<std::string>& targets) {
    std::map<std::string, int> out;
    for (const auto& s : seeds) {
      for (const auto& [id, d] : row(s, direction == Direction::kBackward)) {
        if (targets.count(type_.at(id)) == 0) continue;
        auto [it, inserted] = out.emplace(id, d);
        if (!inserted && d < it->second) it->second = d;
      }
    }
    return out;
  }

 private:
  const std::map<std::string, int>& row(const std::string& source, bool reversed) {
    auto key = std::make_pair(source, reversed);
    if (auto it = rows_.find(key); it != rows_.end()) return it->second;
    std::map<std::string, int> dist{{source, 0}};
    for (bool changed = true; changed;) {
      changed = false;
      for (const auto& e : edges_) {
        const auto& from = reversed ? e.dst : e.src;
        const auto& to = reversed ? e.src : e.dst;
        auto it = dist.find(from);
        if (it == dist.end()) continue;
        const int candidate = it->second + 1;
        auto [jt, inserted] = dist.emplace(to, candidate);
        if (inserted || candidate < jt->second) {
          jt->second = candidate;
          changed = true;
        }
      }
    }
    return rows_.emplace(key, std::move(dist)).first->second;
  }

  std::vector<ProvEdge> edges_;
  std::map<std::string, std::string> type_;
  std::map<std::pair<std::string, bool>, std::map<std::string, int>> rows_;
};

// True when consecutive path nodes are joined by an edge traversable in
// `direction`, checked against the raw edge list.
inline bool path_follows_edges(const std::vector<std::string>& path,
                               const std::vector<ProvEdge>& edges, Direction direction) {
  for (std::size_t i = 1; i < path.size(); ++i) {
    bool found = false;
    for (const auto& e : edges) {
      const bool fwd = e.src == path[i - 1] && e.dst == path[i];
      const bool bwd = e.dst == path[i - 1] && e.src == path[i];
      if (direction == Direction::kForward ? fwd : bwd) {
        found = true;
        break;
      }
    }
    if (!found) return false;
  }
  return true;
}

// Temporary directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("provgraph-test-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

  std::filesystem::path write(const std::string& name, const std::string& content) const {
    auto p = path_ / name;
    std::ofstream(p, std::ios::binary) << content;
    return p;
  }

 private:
  std::filesystem::path path_;
};

}  // namespace provgraph::testing

#endif  // PROVGRAPH_TESTS_TEST_SUPPORT_H_
