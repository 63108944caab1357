#pragma once

// Internal: JSON form of a function schema, shared by the registry and
// dataset file readers/writers.

#include "callmask/schema.hpp"
#include "json.hpp"

namespace callmask::detail {

FunctionSchema schema_from_json_object(const nlohmann::json& obj);
nlohmann::ordered_json schema_json(const FunctionSchema& schema);

}  // namespace callmask::detail
