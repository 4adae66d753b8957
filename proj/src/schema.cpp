#include "classmind/schema.hpp"

#include "classmind/error.hpp"
#include "schemas_builtin.hpp"

namespace classmind {

namespace {

using Json = nlohmann::json;

bool type_matches(const std::string& type, const Json& v) {
  if (type == "object") return v.is_object();
  if (type == "array") return v.is_array();
  if (type == "string") return v.is_string();
  if (type == "integer") return v.is_number_integer();
  if (type == "number") return v.is_number();
  if (type == "boolean") return v.is_boolean();
  if (type == "null") return v.is_null();
  return false;
}

void check(const Json& schema, const Json& v, const std::string& path,
           std::vector<std::string>& errors) {
  if (schema.contains("type")) {
    const auto& t = schema["type"];
    bool ok = false;
    if (t.is_string()) {
      ok = type_matches(t.get<std::string>(), v);
    } else {
      for (const auto& alt : t) ok = ok || type_matches(alt.get<std::string>(), v);
    }
    if (!ok) {
      errors.push_back(path + ": expected type " + t.dump());
      return;
    }
  }
  if (schema.contains("enum")) {
    bool found = false;
    for (const auto& e : schema["enum"]) found = found || e == v;
    if (!found) errors.push_back(path + ": value " + v.dump() + " not in enum");
  }
  if (v.is_string() && schema.contains("minLength") &&
      v.get<std::string>().size() < schema["minLength"].get<std::size_t>()) {
    errors.push_back(path + ": string shorter than minLength");
  }
  if (v.is_number()) {
    if (schema.contains("minimum") && v.get<double>() < schema["minimum"].get<double>()) {
      errors.push_back(path + ": below minimum");
    }
    if (schema.contains("maximum") && v.get<double>() > schema["maximum"].get<double>()) {
      errors.push_back(path + ": above maximum");
    }
  }
  if (v.is_array()) {
    if (schema.contains("minItems") && v.size() < schema["minItems"].get<std::size_t>()) {
      errors.push_back(path + ": fewer than minItems");
    }
    if (schema.contains("maxItems") && v.size() > schema["maxItems"].get<std::size_t>()) {
      errors.push_back(path + ": more than maxItems");
    }
    if (schema.contains("items")) {
      for (std::size_t i = 0; i < v.size(); ++i) {
        check(schema["items"], v[i], path + "[" + std::to_string(i) + "]", errors);
      }
    }
  }
  if (v.is_object()) {
    if (schema.contains("required")) {
      for (const auto& key : schema["required"]) {
        if (!v.contains(key.get<std::string>())) {
          errors.push_back(path + ": missing required field '" + key.get<std::string>() + "'");
        }
      }
    }
    const Json empty = Json::object();
    const Json& props = schema.contains("properties") ? schema["properties"] : empty;
    const bool closed = schema.contains("additionalProperties") &&
                        schema["additionalProperties"].is_boolean() &&
                        !schema["additionalProperties"].get<bool>();
    for (const auto& [key, value] : v.items()) {
      if (props.contains(key)) {
        check(props[key], value, path + "." + key, errors);
      } else if (closed) {
        errors.push_back(path + ": unexpected field '" + key + "'");
      }
    }
  }
}

}  // namespace

std::vector<std::string> validate_against(const Json& schema, const Json& value) {
  std::vector<std::string> errors;
  check(schema, value, "$", errors);
  return errors;
}

SchemaRegistry& SchemaRegistry::builtin() {
  static SchemaRegistry* registry = [] {
    auto* r = new SchemaRegistry();
    const auto doc = Json::parse(detail::kBuiltinSchemas);
    for (const auto& [id, schema] : doc.items()) r->add(id, schema);
    return r;
  }();
  return *registry;
}

void SchemaRegistry::add(const std::string& id, Json schema) {
  std::lock_guard lock(mu_);
  schemas_[id] = std::move(schema);
}

bool SchemaRegistry::contains(const std::string& id) const {
  std::lock_guard lock(mu_);
  return schemas_.count(id) != 0;
}

const Json& SchemaRegistry::get(const std::string& id) const {
  std::lock_guard lock(mu_);
  const auto it = schemas_.find(id);
  if (it == schemas_.end()) throw SchemaViolation("unregistered schema '" + id + "'", 0);
  return it->second;
}

std::vector<std::string> SchemaRegistry::validate(const std::string& id, const Json& value) const {
  return validate_against(get(id), value);
}

std::vector<std::string> SchemaRegistry::ids() const {
  std::lock_guard lock(mu_);
  std::vector<std::string> out;
  for (const auto& [id, _] : schemas_) out.push_back(id);
  return out;
}

}  // namespace classmind
