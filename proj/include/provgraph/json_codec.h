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

// Canonical JSON for the provenance model.
//
// Field names are the snake_case names of the C++ members. Objects are
// emitted with sorted keys and no insignificant whitespace, so equal values
// serialize to identical bytes. Decoding is strict about types and reports
// the offending field through DecodeError.

#ifndef PROVGRAPH_JSON_CODEC_H_
#define PROVGRAPH_JSON_CODEC_H_

#include <stdexcept>
#include <string>
#include <string_view>

#include "json.hpp"
#include "provgraph/prov_model.h"

// Scalar is a std::variant, so it needs a serializer specialization rather
// than ADL to_json/from_json.
template <>
struct nlohmann::adl_serializer<provgraph::Scalar> {
  static void to_json(json& j, const provgraph::Scalar& value);
  static void from_json(const json& j, provgraph::Scalar& value);
};

namespace provgraph {

using Json = nlohmann::json;

class DecodeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void to_json(Json& j, const AttributeSpec& value);
void from_json(const Json& j, AttributeSpec& value);
void to_json(Json& j, const DataTypeSpec& value);
void from_json(const Json& j, DataTypeSpec& value);
void to_json(Json& j, const TransformationSpec& value);
void from_json(const Json& j, TransformationSpec& value);
void to_json(Json& j, const DataflowLink& value);
void from_json(const Json& j, DataflowLink& value);
void to_json(Json& j, const WorkflowSpec& value);
void from_json(const Json& j, WorkflowSpec& value);

void to_json(Json& j, const DataItemValue& value);
void from_json(const Json& j, DataItemValue& value);
void to_json(Json& j, const EntityRef& value);
void from_json(const Json& j, EntityRef& value);
void to_json(Json& j, const DerivedLink& value);
void from_json(const Json& j, DerivedLink& value);
void to_json(Json& j, const IngestEnvelope& value);
void from_json(const Json& j, IngestEnvelope& value);

void to_json(Json& j, const ProvNode& value);
void from_json(const Json& j, ProvNode& value);
void to_json(Json& j, const ProvEdge& value);
void from_json(const Json& j, ProvEdge& value);
void to_json(Json& j, const GraphDelta& value);
void from_json(const Json& j, GraphDelta& value);

void to_json(Json& j, const Violation& value);
void to_json(Json& j, const ValidationReport& value);

struct EnvelopeDecodeOptions {
  // Historical records may omit timestamps; the result then has
  // synthetic_time set and zero timestamps for the loader to fill in.
  bool allow_missing_timestamps = false;
};

IngestEnvelope envelope_from_json(const Json& j,
                                  EnvelopeDecodeOptions options = {});

// Parses `text` and decodes it as T. Throws DecodeError on syntax or
// schema errors.
template <class T>
T decode(std::string_view text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw DecodeError(std::string("malformed JSON: ") + e.what());
  }
  try {
    return j.get<T>();
  } catch (const Json::exception& e) {
    throw DecodeError(e.what());
  }
}

template <class T>
std::string canonical_json(const T& value) {
  return Json(value).dump();
}

}  // namespace provgraph

#endif  // PROVGRAPH_JSON_CODEC_H_
