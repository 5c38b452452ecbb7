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

// Provenance data model: prospective workflow specs, retrospective ingest
// envelopes, and the graph elements envelopes expand into.
//
// Everything here is plain immutable data plus pure functions; values are
// safe to share between threads once constructed.

#ifndef PROVGRAPH_PROV_MODEL_H_
#define PROVGRAPH_PROV_MODEL_H_

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace provgraph {

// Scalar attribute value. Nested structures are flattened by the producer.
using Scalar = std::variant<std::string, double, bool>;
using AttributeMap = std::map<std::string, Scalar>;

// Microsecond-resolution UTC instant.
using Timestamp = std::chrono::sys_time<std::chrono::microseconds>;

enum class ValueKind { kText, kNumber, kBoolean, kReference };

struct AttributeSpec {
  std::string name;
  ValueKind value_kind = ValueKind::kText;
  // The attribute whose value identifies a data item of the owning type.
  bool identifying = false;

  friend bool operator==(const AttributeSpec&, const AttributeSpec&) = default;
};

// One typed data port of a transformation.
struct DataTypeSpec {
  std::string type_label;
  std::vector<AttributeSpec> attributes;

  const AttributeSpec* identifying_attribute() const;

  friend bool operator==(const DataTypeSpec&, const DataTypeSpec&) = default;
};

struct TransformationSpec {
  std::string name;
  std::vector<DataTypeSpec> inputs;
  std::vector<DataTypeSpec> outputs;

  bool declares_input(std::string_view type_label) const;
  bool declares_output(std::string_view type_label) const;

  friend bool operator==(const TransformationSpec&,
                         const TransformationSpec&) = default;
};

struct DataflowLink {
  std::string producer;
  std::string type_label;
  std::string consumer;

  friend bool operator==(const DataflowLink&, const DataflowLink&) = default;
};

// Prospective provenance: the static structure of a workflow.
struct WorkflowSpec {
  std::string name;
  std::int64_t version = 0;
  std::vector<TransformationSpec> transformations;
  std::vector<DataflowLink> dataflow;

  const TransformationSpec* find_transformation(std::string_view name) const;
  // Identifying attribute declared for `type_label` anywhere in the spec.
  const AttributeSpec* identifying_attribute(std::string_view type_label) const;

  friend bool operator==(const WorkflowSpec&, const WorkflowSpec&) = default;
};

struct DataItemValue {
  std::string type_label;
  std::string identity;
  AttributeMap attributes;

  friend bool operator==(const DataItemValue&, const DataItemValue&) = default;
};

// (type_label, identity) reference to an entity.
struct EntityRef {
  std::string type_label;
  std::string identity;

  friend auto operator<=>(const EntityRef&, const EntityRef&) = default;
};

// Explicit entity-to-entity derivation carried by an envelope.
struct DerivedLink {
  EntityRef from;
  EntityRef to;

  friend bool operator==(const DerivedLink&, const DerivedLink&) = default;
};

// Retrospective record of one task execution.
struct IngestEnvelope {
  std::string workflow_execution_id;
  std::string workflow_name;
  std::string task_id;
  std::string transformation;
  Timestamp started_at{};
  Timestamp ended_at{};
  std::vector<DataItemValue> used;
  std::vector<DataItemValue> generated;
  std::vector<DerivedLink> derived;
  // Set when a loader filled in missing timestamps.
  bool synthetic_time = false;

  friend bool operator==(const IngestEnvelope&, const IngestEnvelope&) = default;
};

enum class NodeKind { kEntity, kActivity };
enum class EdgeKind { kUsed, kGenerated, kDerived };

std::string_view to_string(NodeKind kind);
std::string_view to_string(EdgeKind kind);
std::string_view to_string(ValueKind kind);
std::optional<NodeKind> parse_node_kind(std::string_view text);
std::optional<EdgeKind> parse_edge_kind(std::string_view text);
std::optional<ValueKind> parse_value_kind(std::string_view text);

// Endpoint kinds an edge of `kind` must connect.
NodeKind required_source_kind(EdgeKind kind);
NodeKind required_destination_kind(EdgeKind kind);

struct ProvNode {
  std::string node_id;
  NodeKind kind = NodeKind::kEntity;
  std::string type_label;
  std::string identity;
  AttributeMap attributes;

  friend bool operator==(const ProvNode&, const ProvNode&) = default;
};

struct ProvEdge {
  std::string edge_id;
  EdgeKind kind = EdgeKind::kUsed;
  std::string src;
  std::string dst;

  friend bool operator==(const ProvEdge&, const ProvEdge&) = default;
};

// Nodes and edges to upsert into the graph in one batch.
struct GraphDelta {
  std::vector<ProvNode> nodes;
  std::vector<ProvEdge> edges;

  bool empty() const { return nodes.empty() && edges.empty(); }
  // Appends `other`, keeping its order after ours.
  void append(GraphDelta other);

  friend bool operator==(const GraphDelta&, const GraphDelta&) = default;
};

// Stable node/edge keys. Entity ids depend only on (type_label, identity) so
// the same data item referenced by many tasks collapses to one node.
std::string entity_node_id(std::string_view type_label,
                           std::string_view identity);
std::string activity_node_id(std::string_view workflow_execution_id,
                             std::string_view task_id);
std::string edge_id(EdgeKind kind, std::string_view src, std::string_view dst);

// Violation codes.
namespace codes {
inline constexpr std::string_view kEmptyName = "empty-name";
inline constexpr std::string_view kDuplicateName = "duplicate-name";
inline constexpr std::string_view kDanglingDataflow = "dangling-dataflow";
inline constexpr std::string_view kCyclicDataflow = "cyclic-dataflow";
inline constexpr std::string_view kDuplicateIdentifyingAttribute =
    "duplicate-identifying-attribute";
inline constexpr std::string_view kUnknownWorkflow = "unknown-workflow";
inline constexpr std::string_view kUnknownTransformation =
    "unknown-transformation";
inline constexpr std::string_view kUndeclaredType = "undeclared-type";
inline constexpr std::string_view kMissingIdentity = "missing-identity";
inline constexpr std::string_view kInvalidTimestamps = "invalid-timestamps";
inline constexpr std::string_view kMissingField = "missing-field";
}  // namespace codes

struct Violation {
  std::string code;
  std::string message;

  friend bool operator==(const Violation&, const Violation&) = default;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  bool contains(std::string_view code) const;
  void add(std::string_view code, std::string message);
  // "code: message; code: message"
  std::string summary() const;
};

ValidationReport validate_spec(const WorkflowSpec& spec);

// Checks that `env` conforms to the prospective structure in `spec`.
// Assumes validate_spec(spec) is clean.
ValidationReport validate_envelope(const IngestEnvelope& env,
                                   const WorkflowSpec& spec);

class MissingIdentity : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Expands a validated envelope into the nodes and edges it contributes:
// one Activity per (execution, task), one Entity per distinct data item,
// Used/Generated edges for the task's inputs/outputs and any explicit
// Derived links. Pure: equal inputs give equal deltas.
//
// An item with an empty identity gets a surrogate derived from its
// attributes; an item with neither throws MissingIdentity.
GraphDelta expand_envelope(const IngestEnvelope& env, const WorkflowSpec& spec);

// RFC 3339 UTC ("2019-03-01T12:00:00Z", optional fractional seconds).
std::string format_timestamp(Timestamp t);
std::optional<Timestamp> parse_timestamp(std::string_view text);

}  // namespace provgraph

#endif  // PROVGRAPH_PROV_MODEL_H_
