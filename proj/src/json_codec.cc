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

#include "provgraph/json_codec.h"

namespace provgraph {
namespace {

const Json& field(const Json& j, const char* name) {
  if (!j.is_object()) throw DecodeError("expected a JSON object");
  auto it = j.find(name);
  if (it == j.end()) throw DecodeError(std::string("missing field '") + name + "'");
  return *it;
}

std::string string_field(const Json& j, const char* name) {
  const Json& v = field(j, name);
  if (!v.is_string()) {
    throw DecodeError(std::string("field '") + name + "' must be a string");
  }
  return v.get<std::string>();
}

template <class T>
std::vector<T> list_field(const Json& j, const char* name, bool required) {
  if (!j.is_object()) throw DecodeError("expected a JSON object");
  auto it = j.find(name);
  if (it == j.end()) {
    if (required) throw DecodeError(std::string("missing field '") + name + "'");
    return {};
  }
  if (!it->is_array()) {
    throw DecodeError(std::string("field '") + name + "' must be an array");
  }
  std::vector<T> out;
  out.reserve(it->size());
  for (const auto& item : *it) out.push_back(item.get<T>());
  return out;
}

AttributeMap attribute_map(const Json& j, const char* name) {
  AttributeMap out;
  auto it = j.find(name);
  if (it == j.end()) return out;
  if (!it->is_object()) {
    throw DecodeError(std::string("field '") + name + "' must be an object");
  }
  for (const auto& [key, value] : it->items()) out.emplace(key, value.get<Scalar>());
  return out;
}

Timestamp timestamp_field(const Json& j, const char* name) {
  auto text = string_field(j, name);
  auto t = parse_timestamp(text);
  if (!t) {
    throw DecodeError(std::string("field '") + name +
                      "' is not an RFC 3339 UTC timestamp: " + text);
  }
  return *t;
}

}  // namespace

}  // namespace provgraph

void nlohmann::adl_serializer<provgraph::Scalar>::to_json(
    json& j, const provgraph::Scalar& value) {
  std::visit([&](const auto& v) { j = v; }, value);
}

void nlohmann::adl_serializer<provgraph::Scalar>::from_json(
    const json& j, provgraph::Scalar& value) {
  using provgraph::DecodeError;
  if (j.is_string()) {
    value = j.get<std::string>();
  } else if (j.is_boolean()) {
    value = j.get<bool>();
  } else if (j.is_number()) {
    value = j.get<double>();
  } else {
    throw DecodeError("attribute values must be text, number or boolean");
  }
}

namespace provgraph {

void to_json(Json& j, const AttributeSpec& value) {
  j = Json{{"name", value.name},
           {"value_kind", to_string(value.value_kind)},
           {"identifying", value.identifying}};
}

void from_json(const Json& j, AttributeSpec& value) {
  value.name = string_field(j, "name");
  auto kind_text = string_field(j, "value_kind");
  auto kind = parse_value_kind(kind_text);
  if (!kind) throw DecodeError("unknown value_kind '" + kind_text + "'");
  value.value_kind = *kind;
  auto it = j.find("identifying");
  if (it != j.end()) {
    if (!it->is_boolean()) throw DecodeError("field 'identifying' must be a boolean");
    value.identifying = it->get<bool>();
  } else {
    value.identifying = false;
  }
}

void to_json(Json& j, const DataTypeSpec& value) {
  j = Json{{"type_label", value.type_label}, {"attributes", value.attributes}};
}

void from_json(const Json& j, DataTypeSpec& value) {
  value.type_label = string_field(j, "type_label");
  value.attributes = list_field<AttributeSpec>(j, "attributes", false);
}

void to_json(Json& j, const TransformationSpec& value) {
  j = Json{{"name", value.name},
           {"inputs", value.inputs},
           {"outputs", value.outputs}};
}

void from_json(const Json& j, TransformationSpec& value) {
  value.name = string_field(j, "name");
  value.inputs = list_field<DataTypeSpec>(j, "inputs", false);
  value.outputs = list_field<DataTypeSpec>(j, "outputs", false);
}

void to_json(Json& j, const DataflowLink& value) {
  j = Json{{"producer_transformation", value.producer},
           {"type_label", value.type_label},
           {"consumer_transformation", value.consumer}};
}

void from_json(const Json& j, DataflowLink& value) {
  value.producer = string_field(j, "producer_transformation");
  value.type_label = string_field(j, "type_label");
  value.consumer = string_field(j, "consumer_transformation");
}

void to_json(Json& j, const WorkflowSpec& value) {
  j = Json{{"name", value.name},
           {"version", value.version},
           {"transformations", value.transformations},
           {"dataflow", value.dataflow}};
}

void from_json(const Json& j, WorkflowSpec& value) {
  value.name = string_field(j, "name");
  auto it = j.find("version");
  if (it != j.end()) {
    if (!it->is_number_integer()) throw DecodeError("field 'version' must be an integer");
    value.version = it->get<std::int64_t>();
  } else {
    value.version = 0;
  }
  value.transformations = list_field<TransformationSpec>(j, "transformations", true);
  value.dataflow = list_field<DataflowLink>(j, "dataflow", false);
}

void to_json(Json& j, const DataItemValue& value) {
  j = Json{{"type_label", value.type_label},
           {"identity", value.identity},
           {"attributes", Json::object()}};
  for (const auto& [key, v] : value.attributes) j["attributes"][key] = v;
}

void from_json(const Json& j, DataItemValue& value) {
  value.type_label = string_field(j, "type_label");
  auto it = j.find("identity");
  if (it != j.end() && !it->is_string()) {
    throw DecodeError("field 'identity' must be a string");
  }
  value.identity = it != j.end() ? it->get<std::string>() : std::string();
  value.attributes = attribute_map(j, "attributes");
}

void to_json(Json& j, const EntityRef& value) {
  j = Json{{"type_label", value.type_label}, {"identity", value.identity}};
}

void from_json(const Json& j, EntityRef& value) {
  value.type_label = string_field(j, "type_label");
  value.identity = string_field(j, "identity");
}

void to_json(Json& j, const DerivedLink& value) {
  j = Json{{"from", value.from}, {"to", value.to}};
}

void from_json(const Json& j, DerivedLink& value) {
  value.from = field(j, "from").get<EntityRef>();
  value.to = field(j, "to").get<EntityRef>();
}

void to_json(Json& j, const IngestEnvelope& value) {
  j = Json{{"workflow_execution_id", value.workflow_execution_id},
           {"workflow_name", value.workflow_name},
           {"task_id", value.task_id},
           {"transformation", value.transformation},
           {"started_at", format_timestamp(value.started_at)},
           {"ended_at", format_timestamp(value.ended_at)},
           {"used", value.used},
           {"generated", value.generated}};
  if (!value.derived.empty()) j["derived"] = value.derived;
  if (value.synthetic_time) j["synthetic_time"] = true;
}

void from_json(const Json& j, IngestEnvelope& value) {
  value = envelope_from_json(j);
}

IngestEnvelope envelope_from_json(const Json& j, EnvelopeDecodeOptions options) {
  if (!j.is_object()) throw DecodeError("envelope must be a JSON object");
  IngestEnvelope env;
  env.workflow_execution_id = string_field(j, "workflow_execution_id");
  env.workflow_name = string_field(j, "workflow_name");
  env.task_id = string_field(j, "task_id");
  env.transformation = string_field(j, "transformation");

  const bool has_start = j.contains("started_at");
  const bool has_end = j.contains("ended_at");
  if (options.allow_missing_timestamps && !has_start && !has_end) {
    env.synthetic_time = true;
  } else {
    env.started_at = timestamp_field(j, "started_at");
    env.ended_at = timestamp_field(j, "ended_at");
    auto it = j.find("synthetic_time");
    if (it != j.end()) {
      if (!it->is_boolean()) throw DecodeError("field 'synthetic_time' must be a boolean");
      env.synthetic_time = it->get<bool>();
    }
  }
  env.used = list_field<DataItemValue>(j, "used", true);
  env.generated = list_field<DataItemValue>(j, "generated", true);
  env.derived = list_field<DerivedLink>(j, "derived", false);
  return env;
}

void to_json(Json& j, const ProvNode& value) {
  j = Json{{"node_id", value.node_id},
           {"kind", to_string(value.kind)},
           {"type_label", value.type_label},
           {"identity", value.identity},
           {"attributes", Json::object()}};
  for (const auto& [key, v] : value.attributes) j["attributes"][key] = v;
}

void from_json(const Json& j, ProvNode& value) {
  value.node_id = string_field(j, "node_id");
  auto kind_text = string_field(j, "kind");
  auto kind = parse_node_kind(kind_text);
  if (!kind) throw DecodeError("unknown node kind '" + kind_text + "'");
  value.kind = *kind;
  value.type_label = string_field(j, "type_label");
  value.identity = string_field(j, "identity");
  value.attributes = attribute_map(j, "attributes");
}

void to_json(Json& j, const ProvEdge& value) {
  j = Json{{"edge_id", value.edge_id},
           {"kind", to_string(value.kind)},
           {"src", value.src},
           {"dst", value.dst}};
}

void from_json(const Json& j, ProvEdge& value) {
  value.edge_id = string_field(j, "edge_id");
  auto kind_text = string_field(j, "kind");
  auto kind = parse_edge_kind(kind_text);
  if (!kind) throw DecodeError("unknown edge kind '" + kind_text + "'");
  value.kind = *kind;
  value.src = string_field(j, "src");
  value.dst = string_field(j, "dst");
}

void to_json(Json& j, const GraphDelta& value) {
  j = Json{{"nodes", value.nodes}, {"edges", value.edges}};
}

void from_json(const Json& j, GraphDelta& value) {
  value.nodes = list_field<ProvNode>(j, "nodes", true);
  value.edges = list_field<ProvEdge>(j, "edges", true);
}

void to_json(Json& j, const Violation& value) {
  j = Json{{"code", value.code}, {"message", value.message}};
}

void to_json(Json& j, const ValidationReport& value) {
  j = Json{{"ok", value.ok()}, {"violations", value.violations}};
}

}  // namespace provgraph
