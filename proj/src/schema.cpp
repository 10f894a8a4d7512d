#include "monoext/schema.hpp"

#include <cmath>

namespace monoext {

extern const char* const kScenarioSchemaText;

namespace {

using nlohmann::json;

std::string escape_token(const std::string& key) {
  std::string out;
  for (char c : key) {
    if (c == '~') out += "~0";
    else if (c == '/') out += "~1";
    else out += c;
  }
  return out;
}

std::string type_name(const json& v) {
  switch (v.type()) {
    case json::value_t::null: return "null";
    case json::value_t::boolean: return "boolean";
    case json::value_t::number_integer:
    case json::value_t::number_unsigned: return "integer";
    case json::value_t::number_float: return "number";
    case json::value_t::string: return "string";
    case json::value_t::array: return "array";
    case json::value_t::object: return "object";
    default: return "unknown";
  }
}

bool has_type(const json& v, const std::string& t) {
  if (t == "number") return v.is_number();
  if (t == "integer") {
    if (v.is_number_integer()) return true;
    return v.is_number_float() && std::isfinite(v.get<double>()) && std::floor(v.get<double>()) == v.get<double>();
  }
  if (t == "string") return v.is_string();
  if (t == "boolean") return v.is_boolean();
  if (t == "object") return v.is_object();
  if (t == "array") return v.is_array();
  if (t == "null") return v.is_null();
  return false;
}

class Validator {
 public:
  explicit Validator(const json& root) : root_(root) {}

  void run(const json& v, const json& s, const std::string& ptr, std::vector<SchemaIssue>& out) const {
    if (s.is_boolean()) {
      if (!s.get<bool>()) out.push_back({ptr, "no value is allowed here"});
      return;
    }
    if (auto it = s.find("$ref"); it != s.end()) {
      run(v, resolve(it->get<std::string>()), ptr, out);
      return;
    }
    if (auto it = s.find("type"); it != s.end()) {
      bool ok = false;
      std::string want;
      if (it->is_array()) {
        for (const auto& t : *it) {
          ok = ok || has_type(v, t.get<std::string>());
          want += (want.empty() ? "" : " or ") + t.get<std::string>();
        }
      } else {
        want = it->get<std::string>();
        ok = has_type(v, want);
      }
      if (!ok) {
        out.push_back({ptr, "expected " + want + ", got " + type_name(v)});
        return;
      }
    }
    if (auto it = s.find("const"); it != s.end() && v != *it) {
      out.push_back({ptr, "must equal " + it->dump()});
      return;
    }
    if (auto it = s.find("enum"); it != s.end()) {
      bool found = false;
      for (const auto& e : *it) found = found || v == e;
      if (!found) {
        out.push_back({ptr, "must be one of " + it->dump()});
        return;
      }
    }
    if (v.is_number()) numeric(v.get<double>(), s, ptr, out);
    if (v.is_object()) object(v, s, ptr, out);
    if (v.is_array()) array(v, s, ptr, out);
    if (auto it = s.find("oneOf"); it != s.end()) one_of(v, *it, ptr, out);
  }

 private:
  const json& resolve(const std::string& ref) const {
    if (ref.rfind("#", 0) != 0) throw InvalidArgument("only local schema references are supported: " + ref);
    return root_.at(json::json_pointer(ref.substr(1)));
  }

  static void numeric(double x, const json& s, const std::string& ptr, std::vector<SchemaIssue>& out) {
    if (auto it = s.find("minimum"); it != s.end() && x < it->get<double>())
      out.push_back({ptr, "must be >= " + it->dump()});
    if (auto it = s.find("maximum"); it != s.end() && x > it->get<double>())
      out.push_back({ptr, "must be <= " + it->dump()});
    if (auto it = s.find("exclusiveMinimum"); it != s.end() && x <= it->get<double>())
      out.push_back({ptr, "must be > " + it->dump()});
    if (auto it = s.find("exclusiveMaximum"); it != s.end() && x >= it->get<double>())
      out.push_back({ptr, "must be < " + it->dump()});
  }

  void object(const json& v, const json& s, const std::string& ptr, std::vector<SchemaIssue>& out) const {
    if (auto it = s.find("required"); it != s.end()) {
      for (const auto& key : *it) {
        if (!v.contains(key.get<std::string>()))
          out.push_back({ptr + "/" + escape_token(key.get<std::string>()), "required field is missing"});
      }
    }
    const auto props = s.find("properties");
    const auto extra = s.find("additionalProperties");
    for (const auto& [key, val] : v.items()) {
      const std::string child = ptr + "/" + escape_token(key);
      if (props != s.end() && props->contains(key)) {
        run(val, (*props)[key], child, out);
      } else if (extra != s.end() && extra->is_boolean()) {
        if (!extra->get<bool>()) out.push_back({child, "unknown field"});
      } else if (extra != s.end()) {
        run(val, *extra, child, out);
      }
    }
  }

  void array(const json& v, const json& s, const std::string& ptr, std::vector<SchemaIssue>& out) const {
    if (auto it = s.find("minItems"); it != s.end() && v.size() < it->get<std::size_t>())
      out.push_back({ptr, "needs at least " + it->dump() + " items"});
    if (auto it = s.find("maxItems"); it != s.end() && v.size() > it->get<std::size_t>())
      out.push_back({ptr, "allows at most " + it->dump() + " items"});
    if (auto it = s.find("items"); it != s.end()) {
      for (std::size_t k = 0; k < v.size(); ++k) run(v[k], *it, ptr + "/" + std::to_string(k), out);
    }
  }

  // Branches keyed by a "kind" constant report the matching branch's errors;
  // otherwise the first branch of the right type is reported.
  void one_of(const json& v, const json& branches, const std::string& ptr, std::vector<SchemaIssue>& out) const {
    std::vector<std::vector<SchemaIssue>> issues(branches.size());
    std::size_t matches = 0;
    for (std::size_t b = 0; b < branches.size(); ++b) {
      run(v, branches[b], ptr, issues[b]);
      if (issues[b].empty()) ++matches;
    }
    if (matches == 1) return;
    if (matches > 1) {
      out.push_back({ptr, "matches more than one allowed form"});
      return;
    }
    if (v.is_object() && v.contains("kind")) {
      for (std::size_t b = 0; b < branches.size(); ++b) {
        const json& branch = deref(branches[b]);
        const auto kind = branch.find("properties");
        if (kind == branch.end() || !kind->contains("kind")) continue;
        const json& k = (*kind)["kind"];
        if (k.contains("const") && k["const"] == v["kind"] && !issues[b].empty()) {
          // other branches with the same kind may still explain it better; take the fewest issues
          std::size_t best = b;
          for (std::size_t c = b + 1; c < branches.size(); ++c) {
            const json& other = deref(branches[c]);
            const auto ok = other.find("properties");
            if (ok == other.end() || !ok->contains("kind")) continue;
            const json& kk = (*ok)["kind"];
            if (kk.contains("const") && kk["const"] == v["kind"] && issues[c].size() < issues[best].size()) best = c;
          }
          out.insert(out.end(), issues[best].begin(), issues[best].end());
          return;
        }
      }
    }
    for (std::size_t b = 0; b < branches.size(); ++b) {
      const json& branch = deref(branches[b]);
      if (branch.contains("type") && branch["type"].is_string() && has_type(v, branch["type"].get<std::string>())) {
        out.insert(out.end(), issues[b].begin(), issues[b].end());
        return;
      }
    }
    out.push_back({ptr, "does not match any allowed form"});
  }

  const json& deref(const json& s) const {
    if (s.is_object() && s.contains("$ref")) return deref(resolve(s["$ref"].get<std::string>()));
    return s;
  }

  const json& root_;
};

}  // namespace

const nlohmann::json& scenario_schema() {
  static const json schema = json::parse(kScenarioSchemaText);
  return schema;
}

std::vector<SchemaIssue> validate_json(const nlohmann::json& instance, const nlohmann::json& schema) {
  std::vector<SchemaIssue> out;
  Validator(schema).run(instance, schema, "", out);
  return out;
}

void validate_scenario(const nlohmann::json& scenario) {
  const json& schema = scenario_schema();
  if (!scenario.is_object()) throw SchemaError({"", "expected object, got " + type_name(scenario)});
  if (!scenario.contains("kind")) throw SchemaError({"/kind", "required field is missing"});
  std::vector<SchemaIssue> issues;
  // Check the kind first so that an unknown kind gets a direct message.
  Validator(schema).run(scenario["kind"], schema["properties"]["kind"], "/kind", issues);
  if (issues.empty()) issues = validate_json(scenario, schema);
  if (!issues.empty()) throw SchemaError(issues.front());
}

}  // namespace monoext
