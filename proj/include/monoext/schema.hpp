#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "monoext/errors.hpp"

namespace monoext {

struct SchemaIssue {
  std::string pointer;  // JSON pointer into the instance, "" for the root
  std::string message;
};

class SchemaError : public Error {
 public:
  explicit SchemaError(SchemaIssue issue)
      : Error("SchemaError: " + (issue.pointer.empty() ? std::string("/") : issue.pointer) + ": " + issue.message),
        issue_(std::move(issue)) {}
  const SchemaIssue& issue() const { return issue_; }

 private:
  SchemaIssue issue_;
};

// The shipped scenario schema (schemas/scenario.v1.schema.json), compiled in.
const nlohmann::json& scenario_schema();
inline constexpr int kScenarioSchemaVersion = 1;

// Validates against the subset of JSON Schema the shipped schemas use: $ref to
// local definitions, type, enum, const, properties, required,
// additionalProperties (boolean), items, minItems, maxItems, minimum, maximum,
// exclusiveMinimum, exclusiveMaximum and oneOf. Annotations are ignored.
std::vector<SchemaIssue> validate_json(const nlohmann::json& instance, const nlohmann::json& schema);

// Throws SchemaError carrying the first issue.
void validate_scenario(const nlohmann::json& scenario);

}  // namespace monoext
