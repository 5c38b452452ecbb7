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

// Lineage queries: seed -> direction -> target traversals.
//
// A query names an identified seed (type label plus one or more identity
// values), a traversal direction, and the type labels of interesting
// targets. The REST form is
//
//   /provenance/seeds/{TYPE}/values/{V1,V2,...}/direction/{forward|backward}
//       /targets/{T1,T2,...}
//
// with percent-encoded segments and comma-separated lists.

#ifndef PROVGRAPH_QUERY_ENGINE_H_
#define PROVGRAPH_QUERY_ENGINE_H_

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "provgraph/graph_store.h"
#include "provgraph/json_codec.h"

namespace provgraph {

class QueryError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class MalformedPath : public QueryError {
 public:
  using QueryError::QueryError;
};

class InvalidDirection : public QueryError {
 public:
  using QueryError::QueryError;
};

enum class SortOrder { kAscending, kDescending };

struct AttributeOrder {
  std::string attribute;
  SortOrder order = SortOrder::kAscending;

  friend bool operator==(const AttributeOrder&, const AttributeOrder&) = default;
};

// Target type labels that match on node kind rather than type label.
inline constexpr std::string_view kAnyEntity = "Entity";
inline constexpr std::string_view kAnyActivity = "Activity";

struct QueryRequest {
  std::string seed_type;
  std::vector<std::string> seed_values;
  Direction direction = Direction::kForward;
  std::vector<std::string> target_types;
  std::optional<int> max_depth;
  std::optional<AttributeOrder> order_by_attribute;

  friend bool operator==(const QueryRequest&, const QueryRequest&) = default;
};

struct TargetSummary {
  std::string node_id;
  std::string type_label;
  std::string identity;
  AttributeMap attributes;
};

struct QueryResult {
  std::vector<TargetSummary> targets;
  // paths[i] runs from a seed to targets[i], inclusive of both.
  std::vector<std::vector<std::string>> paths;
  std::size_t visited_count = 0;
  std::uint64_t snapshot_epoch = 0;
};

void to_json(Json& j, const TargetSummary& target);
void to_json(Json& j, const QueryResult& result);
void from_json(const Json& j, TargetSummary& target);
void from_json(const Json& j, QueryResult& result);

// Parses the REST traversal path. A query string after '?' is ignored.
// Throws MalformedPath or InvalidDirection.
QueryRequest parse_query_path(std::string_view path);

// Inverse of parse_query_path for the path part.
std::string format_query_path(const QueryRequest& request);

std::string percent_decode(std::string_view text);
std::string percent_encode(std::string_view text);

// Breadth-first traversal from every seed node in `request.direction`.
// Every reached node whose type label is a target type is reported with
// one shortest witness path; traversal continues through targets. A seed
// that is itself target-typed is reported with a single-node path.
QueryResult traverse(const Snapshot& snapshot, const QueryRequest& request);

// Renders the witness paths of `result` as a Graphviz digraph. Nodes are
// labelled from `snapshot` when given, else from the targets and ids.
std::string to_dot(const QueryResult& result, const Snapshot* snapshot = nullptr);

}  // namespace provgraph

#endif  // PROVGRAPH_QUERY_ENGINE_H_
