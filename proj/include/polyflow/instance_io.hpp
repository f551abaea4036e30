#pragma once

#include <string>

#include "json.hpp"
#include "polyflow/solvers_types.hpp"

namespace polyflow {

using Json = nlohmann::json;

// Oracle specification sub-schema. Kinds: uniform, partition, graphic,
// transversal, laminar, coverage, table, scale, direct-sum, contract,
// restrict.
OraclePtr parse_oracle(const Json& spec);

// Instance documents. A SAP document has fields {ground, oracle, values,
// costs, parts}; an OSWM document has {agents: [{oracle, weight}], items}.
SapInstance parse_sap(const Json& doc);
OswmInstance parse_oswm(const Json& doc);
bool is_oswm_doc(const Json& doc);

// Canonical serialization: objects with sorted keys, two-space indentation,
// floats printed with 17 significant digits. parse -> dump is byte-stable.
std::string canonical_dump(const Json& doc);

Json load_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace polyflow
