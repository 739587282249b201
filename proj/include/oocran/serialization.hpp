#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "oocran/model.hpp"

namespace oocran {

using json = nlohmann::json;

// Field names match the domain types one-to-one.
void to_json(json& j, const Flavor& v);
void from_json(const json& j, Flavor& v);
void to_json(json& j, const RadioRequirements& v);
void from_json(const json& j, RadioRequirements& v);
void to_json(json& j, const VnfDescriptor& v);
void from_json(const json& j, VnfDescriptor& v);
void to_json(json& j, const NetworkSpec& v);
void from_json(const json& j, NetworkSpec& v);
void to_json(json& j, const ActuatorBinding& v);
void from_json(const json& j, ActuatorBinding& v);
void to_json(json& j, const NsDescriptor& v);
void from_json(const json& j, NsDescriptor& v);
void to_json(json& j, const Violation& v);
void to_json(json& j, const NetworkService& v);
void to_json(json& j, const VnfInstance& v);
void to_json(json& j, const Actuator& v);
void from_json(const json& j, Actuator& v);
void to_json(json& j, const Alarm& v);
void from_json(const json& j, Alarm& v);

/// Parses the human-readable descriptor/scenario text format. The format is
/// YAML; since YAML is a superset of JSON, JSON documents parse as well.
json parse_structured_text(const std::string& text);
json load_structured_file(const std::filesystem::path& path);

/// Renders a JSON value as block-style structured text.
std::string to_structured_text(const json& j);

NsDescriptor load_descriptor(const std::filesystem::path& path);

}  // namespace oocran
