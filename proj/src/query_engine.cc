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

#include "provgraph/query_engine.h"

#include <algorithm>
#include <deque>
#include <set>
#include <unordered_map>

namespace provgraph {
namespace {

constexpr std::string_view kPathShape =
    "/provenance/seeds/{TYPE}/values/{V1,...}/direction/{forward|backward}/"
    "targets/{T1,...}";

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    auto pos = text.find(sep, start);
    out.push_back(text.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<std::string> decode_list(std::string_view segment,
                                     std::string_view what) {
  std::vector<std::string> out;
  for (auto item : split(segment, ',')) {
    auto decoded = percent_decode(item);
    if (decoded.empty()) {
      throw MalformedPath("empty entry in " + std::string(what) + " list");
    }
    out.push_back(std::move(decoded));
  }
  return out;
}

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

std::optional<double> numeric_attribute(const AttributeMap& attributes,
                                        const std::string& name) {
  auto it = attributes.find(name);
  if (it == attributes.end()) return std::nullopt;
  if (const auto* d = std::get_if<double>(&it->second)) return *d;
  return std::nullopt;
}

bool matches_target(const ProvNode& node,
                    const std::vector<std::string>& target_types) {
  for (const auto& t : target_types) {
    if (t == node.type_label) return true;
    if (t == kAnyEntity && node.kind == NodeKind::kEntity) return true;
    if (t == kAnyActivity && node.kind == NodeKind::kActivity) return true;
  }
  return false;
}

std::string dot_escape(std::string_view text) {
  std::string out;
  for (char c : text) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

}  // namespace

std::string percent_decode(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '%') {
      out += text[i];
      continue;
    }
    if (i + 2 >= text.size()) {
      throw MalformedPath("truncated percent escape");
    }
    const int hi = hex_value(text[i + 1]);
    const int lo = hex_value(text[i + 2]);
    if (hi < 0 || lo < 0) throw MalformedPath("invalid percent escape");
    out += static_cast<char>(hi * 16 + lo);
    i += 2;
  }
  return out;
}

std::string percent_encode(std::string_view text) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : text) {
    const bool unreserved = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') ||
                            (c >= '0' && c <= '9') || c == '-' || c == '.' ||
                            c == '_' || c == '~';
    if (unreserved) {
      out += static_cast<char>(c);
    } else {
      out += '%';
      out += kHex[c >> 4];
      out += kHex[c & 0xF];
    }
  }
  return out;
}

QueryRequest parse_query_path(std::string_view path) {
  if (auto q = path.find_first_of("?#"); q != std::string_view::npos) {
    path = path.substr(0, q);
  }
  if (path.empty() || path.front() != '/') {
    throw MalformedPath("query path must start with '/': expected " +
                        std::string(kPathShape));
  }
  auto segments = split(path.substr(1), '/');
  if (segments.size() != 9) {
    throw MalformedPath("expected 9 path segments, got " +
                        std::to_string(segments.size()) + ": expected " +
                        std::string(kPathShape));
  }
  static constexpr std::pair<std::size_t, std::string_view> kKeywords[] = {
      {0, "provenance"}, {1, "seeds"},   {3, "values"},
      {5, "direction"},  {7, "targets"},
  };
  for (const auto& [index, keyword] : kKeywords) {
    if (segments[index] != keyword) {
      throw MalformedPath("segment " + std::to_string(index + 1) +
                          " must be '" + std::string(keyword) + "', got '" +
                          std::string(segments[index]) + "'");
    }
  }

  QueryRequest request;
  request.seed_type = percent_decode(segments[2]);
  if (request.seed_type.empty()) throw MalformedPath("empty seed type");
  if (segments[4].empty()) throw MalformedPath("empty seed value list");
  request.seed_values = decode_list(segments[4], "value");

  const auto direction_text = percent_decode(segments[6]);
  auto direction = parse_direction(direction_text);
  if (!direction) {
    throw InvalidDirection("direction must be 'forward' or 'backward', got '" +
                           direction_text + "'");
  }
  request.direction = *direction;

  if (segments[8].empty()) throw MalformedPath("empty target type list");
  request.target_types = decode_list(segments[8], "target");
  return request;
}

std::string format_query_path(const QueryRequest& request) {
  auto join = [](const std::vector<std::string>& items) {
    std::string out;
    for (const auto& item : items) {
      if (!out.empty()) out += ',';
      out += percent_encode(item);
    }
    return out;
  };
  return "/provenance/seeds/" + percent_encode(request.seed_type) +
         "/values/" + join(request.seed_values) + "/direction/" +
         std::string(to_string(request.direction)) + "/targets/" +
         join(request.target_types);
}

QueryResult traverse(const Snapshot& snapshot, const QueryRequest& request) {
  QueryResult result;
  result.snapshot_epoch = snapshot.epoch();

  std::set<std::string> seeds;
  for (const auto& value : request.seed_values) {
    for (auto& id : snapshot.find_by_type_value(request.seed_type, value)) {
      seeds.insert(std::move(id));
    }
  }

  // BFS from all seeds at once; the first discovery gives a shortest path.
  struct Visit {
    std::string parent;  // empty for seeds
    int depth = 0;
  };
  std::unordered_map<std::string, Visit> visited;
  std::deque<std::string> frontier;
  std::vector<std::string> reached_targets;
  for (const auto& id : seeds) {
    visited.emplace(id, Visit{});
    frontier.push_back(id);
  }
  while (!frontier.empty()) {
    std::string id = std::move(frontier.front());
    frontier.pop_front();
    const ProvNode* node = snapshot.find_node(id);
    const int depth = visited.at(id).depth;
    if (matches_target(*node, request.target_types)) reached_targets.push_back(id);
    if (request.max_depth && depth >= *request.max_depth) continue;
    for (const auto& next : snapshot.neighbors(id, request.direction)) {
      if (visited.emplace(next.node_id, Visit{id, depth + 1}).second) {
        frontier.push_back(next.node_id);
      }
    }
  }
  result.visited_count = visited.size();

  struct Ranked {
    const ProvNode* node;
    std::vector<std::string> path;
    std::optional<double> key;
  };
  std::vector<Ranked> ranked;
  ranked.reserve(reached_targets.size());
  for (const auto& id : reached_targets) {
    Ranked r{snapshot.find_node(id), {}, std::nullopt};
    for (std::string cur = id; !cur.empty(); cur = visited.at(cur).parent) {
      r.path.push_back(cur);
    }
    std::reverse(r.path.begin(), r.path.end());
    if (request.order_by_attribute) {
      r.key = numeric_attribute(r.node->attributes,
                                request.order_by_attribute->attribute);
    }
    ranked.push_back(std::move(r));
  }

  auto by_distance = [](const Ranked& a, const Ranked& b) {
    if (a.path.size() != b.path.size()) return a.path.size() < b.path.size();
    return a.node->node_id < b.node->node_id;
  };
  if (request.order_by_attribute) {
    const bool descending =
        request.order_by_attribute->order == SortOrder::kDescending;
    std::sort(ranked.begin(), ranked.end(),
              [&](const Ranked& a, const Ranked& b) {
                if (a.key.has_value() != b.key.has_value()) {
                  return a.key.has_value();  // missing attribute sorts last
                }
                if (a.key && *a.key != *b.key) {
                  return descending ? *a.key > *b.key : *a.key < *b.key;
                }
                return by_distance(a, b);
              });
  } else {
    std::sort(ranked.begin(), ranked.end(), by_distance);
  }

  for (auto& r : ranked) {
    result.targets.push_back({r.node->node_id, r.node->type_label,
                              r.node->identity, r.node->attributes});
    result.paths.push_back(std::move(r.path));
  }
  return result;
}

void to_json(Json& j, const TargetSummary& target) {
  j = Json{{"node_id", target.node_id},
           {"type_label", target.type_label},
           {"identity", target.identity},
           {"attributes", Json::object()}};
  for (const auto& [key, v] : target.attributes) j["attributes"][key] = v;
}

void from_json(const Json& j, TargetSummary& target) {
  target.node_id = j.at("node_id").get<std::string>();
  target.type_label = j.at("type_label").get<std::string>();
  target.identity = j.at("identity").get<std::string>();
  target.attributes.clear();
  for (const auto& [key, v] : j.at("attributes").items()) {
    target.attributes.emplace(key, v.get<Scalar>());
  }
}

void to_json(Json& j, const QueryResult& result) {
  j = Json{{"targets", result.targets},
           {"paths", result.paths},
           {"visited_count", result.visited_count},
           {"snapshot_epoch", result.snapshot_epoch}};
}

void from_json(const Json& j, QueryResult& result) {
  result.targets = j.at("targets").get<std::vector<TargetSummary>>();
  result.paths.clear();
  if (auto it = j.find("paths"); it != j.end()) {
    result.paths = it->get<std::vector<std::vector<std::string>>>();
  }
  result.visited_count = j.at("visited_count").get<std::size_t>();
  result.snapshot_epoch = j.at("snapshot_epoch").get<std::uint64_t>();
}

std::string to_dot(const QueryResult& result, const Snapshot* snapshot) {
  std::unordered_map<std::string, const TargetSummary*> targets;
  for (const auto& t : result.targets) targets.emplace(t.node_id, &t);
  std::set<std::string> nodes;
  std::set<std::pair<std::string, std::string>> edges;
  for (const auto& path : result.paths) {
    for (std::size_t i = 0; i < path.size(); ++i) {
      nodes.insert(path[i]);
      if (i > 0) edges.emplace(path[i - 1], path[i]);
    }
  }
  std::string out = "digraph lineage {\n";
  for (const auto& id : nodes) {
    std::string label = dot_escape(id);
    std::string shape = "ellipse";
    const ProvNode* node = snapshot ? snapshot->find_node(id) : nullptr;
    if (node != nullptr) {
      label = dot_escape(node->type_label);
      if (!node->identity.empty()) label += "\\n" + dot_escape(node->identity);
      if (node->kind == NodeKind::kActivity) shape = "box";
    } else if (auto it = targets.find(id); it != targets.end()) {
      label = dot_escape(it->second->type_label) + "\\n" +
              dot_escape(it->second->identity);
    }
    out += "  \"" + dot_escape(id) + "\" [label=\"" + label +
           "\", shape=" + shape + "];\n";
  }
  for (const auto& [from, to] : edges) {
    out += "  \"" + dot_escape(from) + "\" -> \"" + dot_escape(to) + "\";\n";
  }
  out += "}\n";
  return out;
}

}  // namespace provgraph
