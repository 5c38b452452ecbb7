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

#include "provgraph/prov_model.h"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <map>
#include <queue>
#include <set>
#include <unordered_map>

namespace provgraph {
namespace {

// FNV-1a over length-prefixed fields, so ("ab","c") and ("a","bc") differ.
class KeyHasher {
 public:
  KeyHasher& add(std::string_view field) {
    const std::uint64_t n = field.size();
    for (int i = 0; i < 8; ++i) mix(static_cast<unsigned char>(n >> (8 * i)));
    for (unsigned char c : field) mix(c);
    return *this;
  }

  std::string hex() const {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(state_));
    return buf;
  }

 private:
  void mix(unsigned char byte) {
    state_ ^= byte;
    state_ *= 0x100000001b3ULL;
  }

  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

std::string scalar_text(const Scalar& value) {
  if (const auto* s = std::get_if<std::string>(&value)) return *s;
  if (const auto* b = std::get_if<bool>(&value)) return *b ? "true" : "false";
  const double d = std::get<double>(value);
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), d);
  return std::string(buf, res.ptr);
}

const DataTypeSpec* find_port(const std::vector<DataTypeSpec>& ports,
                              std::string_view type_label) {
  for (const auto& port : ports) {
    if (port.type_label == type_label) return &port;
  }
  return nullptr;
}

void check_ports(const TransformationSpec& t,
                 const std::vector<DataTypeSpec>& ports, std::string_view side,
                 ValidationReport& report) {
  std::set<std::string_view> labels;
  for (const auto& port : ports) {
    if (port.type_label.empty()) {
      report.add(codes::kEmptyName, "transformation '" + t.name + "' has an " +
                                        std::string(side) +
                                        " with an empty type label");
    } else if (!labels.insert(port.type_label).second) {
      report.add(codes::kDuplicateName,
                 "transformation '" + t.name + "' declares " +
                     std::string(side) + " type '" + port.type_label +
                     "' twice");
    }
    std::set<std::string_view> names;
    int identifying = 0;
    for (const auto& attr : port.attributes) {
      if (attr.name.empty()) {
        report.add(codes::kEmptyName, "type '" + port.type_label + "' in '" +
                                          t.name +
                                          "' has an unnamed attribute");
      } else if (!names.insert(attr.name).second) {
        report.add(codes::kDuplicateName, "attribute '" + attr.name +
                                              "' repeated on type '" +
                                              port.type_label + "' in '" +
                                              t.name + "'");
      }
      if (attr.identifying) ++identifying;
    }
    if (identifying > 1) {
      report.add(codes::kDuplicateIdentifyingAttribute,
                 "type '" + port.type_label + "' in '" + t.name + "' marks " +
                     std::to_string(identifying) +
                     " attributes as identifying");
    }
  }
}

// Identity to key an item on: the explicit identity, else the identifying
// attribute's value, else a surrogate over all attributes.
std::string resolve_identity(const DataItemValue& item,
                             const WorkflowSpec& spec) {
  if (!item.identity.empty()) return item.identity;
  if (const auto* id_attr = spec.identifying_attribute(item.type_label)) {
    auto it = item.attributes.find(id_attr->name);
    if (it != item.attributes.end()) {
      std::string text = scalar_text(it->second);
      if (!text.empty()) return text;
    }
  }
  if (item.attributes.empty()) {
    throw MissingIdentity("data item of type '" + item.type_label +
                          "' has no identity and no attributes");
  }
  KeyHasher h;
  for (const auto& [key, value] : item.attributes) {
    h.add(key).add(std::to_string(value.index())).add(scalar_text(value));
  }
  return "~" + h.hex();
}

bool has_identity(const DataItemValue& item, const WorkflowSpec& spec) {
  if (!item.identity.empty()) return true;
  const auto* id_attr = spec.identifying_attribute(item.type_label);
  if (id_attr == nullptr) return true;  // surrogate allowed
  auto it = item.attributes.find(id_attr->name);
  return it != item.attributes.end() && !scalar_text(it->second).empty();
}

void merge_attributes(AttributeMap& into, const AttributeMap& from) {
  for (const auto& [key, value] : from) into.insert_or_assign(key, value);
}

}  // namespace

const AttributeSpec* DataTypeSpec::identifying_attribute() const {
  for (const auto& attr : attributes) {
    if (attr.identifying) return &attr;
  }
  return nullptr;
}

bool TransformationSpec::declares_input(std::string_view type_label) const {
  return find_port(inputs, type_label) != nullptr;
}

bool TransformationSpec::declares_output(std::string_view type_label) const {
  return find_port(outputs, type_label) != nullptr;
}

const TransformationSpec* WorkflowSpec::find_transformation(
    std::string_view name) const {
  for (const auto& t : transformations) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

const AttributeSpec* WorkflowSpec::identifying_attribute(
    std::string_view type_label) const {
  for (const auto& t : transformations) {
    for (const auto* ports : {&t.inputs, &t.outputs}) {
      if (const auto* port = find_port(*ports, type_label)) {
        if (const auto* attr = port->identifying_attribute()) return attr;
      }
    }
  }
  return nullptr;
}

void GraphDelta::append(GraphDelta other) {
  nodes.insert(nodes.end(), std::make_move_iterator(other.nodes.begin()),
               std::make_move_iterator(other.nodes.end()));
  edges.insert(edges.end(), std::make_move_iterator(other.edges.begin()),
               std::make_move_iterator(other.edges.end()));
}

std::string_view to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::kEntity:
      return "Entity";
    case NodeKind::kActivity:
      return "Activity";
  }
  return "";
}

std::string_view to_string(EdgeKind kind) {
  switch (kind) {
    case EdgeKind::kUsed:
      return "Used";
    case EdgeKind::kGenerated:
      return "Generated";
    case EdgeKind::kDerived:
      return "Derived";
  }
  return "";
}

std::string_view to_string(ValueKind kind) {
  switch (kind) {
    case ValueKind::kText:
      return "text";
    case ValueKind::kNumber:
      return "number";
    case ValueKind::kBoolean:
      return "boolean";
    case ValueKind::kReference:
      return "reference";
  }
  return "";
}

std::optional<NodeKind> parse_node_kind(std::string_view text) {
  if (text == "Entity") return NodeKind::kEntity;
  if (text == "Activity") return NodeKind::kActivity;
  return std::nullopt;
}

std::optional<EdgeKind> parse_edge_kind(std::string_view text) {
  if (text == "Used") return EdgeKind::kUsed;
  if (text == "Generated") return EdgeKind::kGenerated;
  if (text == "Derived") return EdgeKind::kDerived;
  return std::nullopt;
}

std::optional<ValueKind> parse_value_kind(std::string_view text) {
  if (text == "text") return ValueKind::kText;
  if (text == "number") return ValueKind::kNumber;
  if (text == "boolean") return ValueKind::kBoolean;
  if (text == "reference") return ValueKind::kReference;
  return std::nullopt;
}

NodeKind required_source_kind(EdgeKind kind) {
  return kind == EdgeKind::kGenerated ? NodeKind::kActivity : NodeKind::kEntity;
}

NodeKind required_destination_kind(EdgeKind kind) {
  return kind == EdgeKind::kUsed ? NodeKind::kActivity : NodeKind::kEntity;
}

std::string entity_node_id(std::string_view type_label,
                           std::string_view identity) {
  return "ent-" + KeyHasher().add("Entity").add(type_label).add(identity).hex();
}

std::string activity_node_id(std::string_view workflow_execution_id,
                             std::string_view task_id) {
  return "act-" + KeyHasher().add(workflow_execution_id).add(task_id).hex();
}

std::string edge_id(EdgeKind kind, std::string_view src, std::string_view dst) {
  return "edge-" + KeyHasher().add(to_string(kind)).add(src).add(dst).hex();
}

bool ValidationReport::contains(std::string_view code) const {
  return std::any_of(violations.begin(), violations.end(),
                     [&](const Violation& v) { return v.code == code; });
}

void ValidationReport::add(std::string_view code, std::string message) {
  violations.push_back({std::string(code), std::move(message)});
}

std::string ValidationReport::summary() const {
  std::string out;
  for (const auto& v : violations) {
    if (!out.empty()) out += "; ";
    out += v.code + ": " + v.message;
  }
  return out;
}

ValidationReport validate_spec(const WorkflowSpec& spec) {
  ValidationReport report;
  if (spec.name.empty()) report.add(codes::kEmptyName, "workflow has no name");

  std::map<std::string_view, std::size_t> index;
  for (const auto& t : spec.transformations) {
    if (t.name.empty()) {
      report.add(codes::kEmptyName, "transformation with an empty name");
    } else if (!index.emplace(t.name, index.size()).second) {
      report.add(codes::kDuplicateName,
                 "transformation '" + t.name + "' declared twice");
    }
    check_ports(t, t.inputs, "input", report);
    check_ports(t, t.outputs, "output", report);
  }

  // A shared type label must agree on its identifying attribute.
  std::map<std::string_view, std::string_view> identifying_by_type;
  for (const auto& t : spec.transformations) {
    for (const auto* ports : {&t.inputs, &t.outputs}) {
      for (const auto& port : *ports) {
        const auto* attr = port.identifying_attribute();
        if (attr == nullptr) continue;
        auto [it, inserted] =
            identifying_by_type.emplace(port.type_label, attr->name);
        if (!inserted && it->second != attr->name) {
          report.add(codes::kDuplicateIdentifyingAttribute,
                     "type '" + port.type_label + "' is identified by both '" +
                         std::string(it->second) + "' and '" + attr->name +
                         "'");
        }
      }
    }
  }

  // Kahn's algorithm over well-formed dataflow links.
  const std::size_t n = index.size();
  std::vector<std::set<std::size_t>> successors(n);
  for (const auto& link : spec.dataflow) {
    auto p = index.find(link.producer);
    auto c = index.find(link.consumer);
    if (p == index.end() || c == index.end()) {
      report.add(codes::kDanglingDataflow,
                 "dataflow " + link.producer + " -[" + link.type_label +
                     "]-> " + link.consumer +
                     " references an undeclared transformation");
      continue;
    }
    const auto& producer = *spec.find_transformation(link.producer);
    const auto& consumer = *spec.find_transformation(link.consumer);
    if (!producer.declares_output(link.type_label) ||
        !consumer.declares_input(link.type_label)) {
      report.add(codes::kDanglingDataflow,
                 "dataflow " + link.producer + " -[" + link.type_label +
                     "]-> " + link.consumer +
                     " carries a type not declared on both ends");
      continue;
    }
    successors[p->second].insert(c->second);
  }
  std::vector<int> in_degree(n, 0);
  for (const auto& succ : successors) {
    for (auto s : succ) ++in_degree[s];
  }
  std::queue<std::size_t> ready;
  for (std::size_t i = 0; i < n; ++i) {
    if (in_degree[i] == 0) ready.push(i);
  }
  std::size_t ordered = 0;
  while (!ready.empty()) {
    auto i = ready.front();
    ready.pop();
    ++ordered;
    for (auto s : successors[i]) {
      if (--in_degree[s] == 0) ready.push(s);
    }
  }
  if (ordered != n) {
    std::string members;
    for (const auto& [name, i] : index) {
      if (in_degree[i] > 0) {
        if (!members.empty()) members += ", ";
        members += name;
      }
    }
    report.add(codes::kCyclicDataflow,
               "dataflow contains a cycle through: " + members);
  }
  return report;
}

ValidationReport validate_envelope(const IngestEnvelope& env,
                                   const WorkflowSpec& spec) {
  ValidationReport report;
  if (env.workflow_name != spec.name) {
    report.add(codes::kUnknownWorkflow, "envelope targets workflow '" +
                                            env.workflow_name +
                                            "', spec is '" + spec.name + "'");
  }
  if (env.workflow_execution_id.empty()) {
    report.add(codes::kMissingField, "workflow_execution_id is empty");
  }
  if (env.task_id.empty()) report.add(codes::kMissingField, "task_id is empty");
  if (env.started_at > env.ended_at) {
    report.add(codes::kInvalidTimestamps, "started_at is after ended_at");
  }

  const auto* t = spec.find_transformation(env.transformation);
  if (t == nullptr) {
    report.add(codes::kUnknownTransformation,
               "transformation '" + env.transformation +
                   "' is not declared in workflow '" + spec.name + "' v" +
                   std::to_string(spec.version));
    return report;
  }

  auto check_items = [&](const std::vector<DataItemValue>& items, bool input) {
    for (const auto& item : items) {
      const bool declared = input ? t->declares_input(item.type_label)
                                  : t->declares_output(item.type_label);
      if (!declared) {
        report.add(codes::kUndeclaredType,
                   std::string(input ? "used" : "generated") + " type '" +
                       item.type_label + "' is not declared as an " +
                       (input ? "input" : "output") + " of '" + t->name + "'");
      }
      if (!has_identity(item, spec)) {
        report.add(codes::kMissingIdentity,
                   "item of type '" + item.type_label +
                       "' lacks its identifying attribute");
      }
    }
  };
  check_items(env.used, true);
  check_items(env.generated, false);

  for (const auto& link : env.derived) {
    for (const auto* ref : {&link.from, &link.to}) {
      if (ref->type_label.empty() || ref->identity.empty()) {
        report.add(codes::kMissingIdentity,
                   "derived link endpoint needs a type label and identity");
      }
    }
  }
  return report;
}

GraphDelta expand_envelope(const IngestEnvelope& env,
                           const WorkflowSpec& spec) {
  GraphDelta delta;

  ProvNode activity;
  activity.node_id = activity_node_id(env.workflow_execution_id, env.task_id);
  activity.kind = NodeKind::kActivity;
  activity.type_label = env.transformation;
  activity.identity = env.task_id;
  activity.attributes = {
      {"workflow_execution_id", env.workflow_execution_id},
      {"workflow_name", env.workflow_name},
      {"task_id", env.task_id},
      {"transformation", env.transformation},
      {"started_at", format_timestamp(env.started_at)},
      {"ended_at", format_timestamp(env.ended_at)},
  };
  if (env.synthetic_time) activity.attributes.emplace("synthetic_time", true);
  // A copy: delta.nodes reallocates as entities are appended.
  const std::string activity_id = activity.node_id;
  delta.nodes.push_back(std::move(activity));

  // Entities keyed by node id; position preserves first-seen order.
  std::unordered_map<std::string, std::size_t> position;
  auto upsert_entity = [&](const std::string& type_label,
                           const std::string& identity,
                           const AttributeMap& attributes) -> std::string {
    std::string id = entity_node_id(type_label, identity);
    auto [it, inserted] = position.emplace(id, delta.nodes.size());
    if (inserted) {
      delta.nodes.push_back(
          {id, NodeKind::kEntity, type_label, identity, attributes});
    } else {
      merge_attributes(delta.nodes[it->second].attributes, attributes);
    }
    return id;
  };

  std::set<std::string> seen_edges;
  auto add_edge = [&](EdgeKind kind, const std::string& src,
                      const std::string& dst) {
    std::string id = edge_id(kind, src, dst);
    if (seen_edges.insert(id).second) {
      delta.edges.push_back({std::move(id), kind, src, dst});
    }
  };

  for (const auto& item : env.used) {
    auto id = upsert_entity(item.type_label, resolve_identity(item, spec),
                            item.attributes);
    add_edge(EdgeKind::kUsed, id, activity_id);
  }
  for (const auto& item : env.generated) {
    auto id = upsert_entity(item.type_label, resolve_identity(item, spec),
                            item.attributes);
    add_edge(EdgeKind::kGenerated, activity_id, id);
  }
  for (const auto& link : env.derived) {
    if (link.from.identity.empty() || link.to.identity.empty()) {
      throw MissingIdentity("derived link endpoint without identity");
    }
    auto from = upsert_entity(link.from.type_label, link.from.identity, {});
    auto to = upsert_entity(link.to.type_label, link.to.identity, {});
    add_edge(EdgeKind::kDerived, from, to);
  }
  return delta;
}

std::string format_timestamp(Timestamp t) {
  using namespace std::chrono;
  const auto day = floor<days>(t);
  const year_month_day ymd{day};
  const hh_mm_ss<microseconds> tod{t - day};
  char buf[40];
  int n = std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:%02d:%02d",
                        static_cast<int>(ymd.year()),
                        static_cast<unsigned>(ymd.month()),
                        static_cast<unsigned>(ymd.day()),
                        static_cast<int>(tod.hours().count()),
                        static_cast<int>(tod.minutes().count()),
                        static_cast<int>(tod.seconds().count()));
  std::string out(buf, n);
  if (auto us = tod.subseconds().count(); us != 0) {
    std::snprintf(buf, sizeof(buf), ".%06lld", static_cast<long long>(us));
    out += buf;
  }
  out += 'Z';
  return out;
}

std::optional<Timestamp> parse_timestamp(std::string_view text) {
  using namespace std::chrono;
  auto digits = [&](std::size_t pos, std::size_t len) -> std::optional<int> {
    if (pos + len > text.size()) return std::nullopt;
    int value = 0;
    auto res = std::from_chars(text.data() + pos, text.data() + pos + len,
                               value);
    if (res.ec != std::errc() || res.ptr != text.data() + pos + len) {
      return std::nullopt;
    }
    return value;
  };
  if (text.size() < 20 || text[4] != '-' || text[7] != '-' ||
      (text[10] != 'T' && text[10] != 't') || text[13] != ':' ||
      text[16] != ':') {
    return std::nullopt;
  }
  auto y = digits(0, 4), mo = digits(5, 2), d = digits(8, 2);
  auto h = digits(11, 2), mi = digits(14, 2), s = digits(17, 2);
  if (!y || !mo || !d || !h || !mi || !s) return std::nullopt;
  if (*h > 23 || *mi > 59 || *s > 59) return std::nullopt;
  const year_month_day ymd{year{*y}, month{static_cast<unsigned>(*mo)},
                           day{static_cast<unsigned>(*d)}};
  if (!ymd.ok()) return std::nullopt;

  std::size_t pos = 19;
  long long micros = 0;
  if (text[pos] == '.') {
    ++pos;
    int ndigits = 0;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
      if (ndigits < 6) micros = micros * 10 + (text[pos] - '0');
      ++ndigits;
      ++pos;
    }
    if (ndigits == 0) return std::nullopt;
    for (int i = ndigits; i < 6; ++i) micros *= 10;
  }
  if (pos + 1 != text.size() || (text[pos] != 'Z' && text[pos] != 'z')) {
    return std::nullopt;
  }
  return Timestamp{sys_days{ymd}} + hours{*h} + minutes{*mi} + seconds{*s} +
         microseconds{micros};
}

}  // namespace provgraph
