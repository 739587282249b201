#include "oocran/serialization.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace oocran {

namespace {

json scalar_to_json(const YAML::Node& node) {
    const std::string& s = node.Scalar();
    if (node.Tag() == "!") return s;  // quoted scalar stays a string
    if (s == "null" || s == "~" || s.empty()) return nullptr;
    if (s == "true" || s == "True") return true;
    if (s == "false" || s == "False") return false;

    std::int64_t i = 0;
    auto [iend, iec] = std::from_chars(s.data(), s.data() + s.size(), i);
    if (iec == std::errc() && iend == s.data() + s.size()) return i;

    // from_chars for double is unavailable on some toolchains; strtod is fine here.
    char* end = nullptr;
    const double d = std::strtod(s.c_str(), &end);
    if (end == s.c_str() + s.size()) return d;
    return s;
}

json yaml_to_json(const YAML::Node& node) {
    switch (node.Type()) {
        case YAML::NodeType::Null:
        case YAML::NodeType::Undefined: return nullptr;
        case YAML::NodeType::Scalar: return scalar_to_json(node);
        case YAML::NodeType::Sequence: {
            json arr = json::array();
            for (const auto& item : node) arr.push_back(yaml_to_json(item));
            return arr;
        }
        case YAML::NodeType::Map: {
            json obj = json::object();
            for (const auto& kv : node) obj[kv.first.as<std::string>()] = yaml_to_json(kv.second);
            return obj;
        }
    }
    return nullptr;
}

void emit(YAML::Emitter& out, const json& j) {
    if (j.is_object()) {
        out << YAML::BeginMap;
        for (const auto& [k, v] : j.items()) {
            out << YAML::Key << k << YAML::Value;
            emit(out, v);
        }
        out << YAML::EndMap;
    } else if (j.is_array()) {
        // Short scalar lists such as coordinates stay on one line.
        const bool flat = !j.empty() && j.size() <= 4 &&
                          std::all_of(j.begin(), j.end(), [](const json& v) { return v.is_primitive(); });
        if (flat) out << YAML::Flow;
        out << YAML::BeginSeq;
        for (const auto& v : j) emit(out, v);
        out << YAML::EndSeq;
    } else if (j.is_string()) {
        const auto& s = j.get_ref<const std::string&>();
        // Keep strings that would re-parse as another type quoted.
        const json probe = [&] {
            try {
                return parse_structured_text(s);
            } catch (const Error&) {
                return json(s);
            }
        }();
        if (probe.is_string() && probe.get<std::string>() == s) {
            out << s;
        } else {
            out << YAML::DoubleQuoted << s;
        }
    } else if (j.is_boolean()) {
        out << (j.get<bool>() ? "true" : "false");
    } else if (j.is_number_integer()) {
        out << j.get<std::int64_t>();
    } else if (j.is_number()) {
        out << YAML::Precision(17) << j.get<double>();
    } else {
        out << YAML::Null;
    }
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return fallback;
    return it->get<T>();
}

json params_to_json(const Params& p) {
    json j = json::object();
    for (const auto& [k, v] : p) j[k] = v;
    return j;
}

Params params_from_json(const json& j) {
    Params p;
    if (!j.is_object()) return p;
    for (const auto& [k, v] : j.items()) p[k] = v.is_string() ? v.get<std::string>() : v.dump();
    return p;
}

}  // namespace

void to_json(json& j, const Flavor& v) { j = json{{"vcpus", v.vcpus}, {"ram_mb", v.ram_mb}}; }

void from_json(const json& j, Flavor& v) {
    v.vcpus = j.at("vcpus").get<int>();
    v.ram_mb = j.at("ram_mb").get<int>();
}

void to_json(json& j, const RadioRequirements& v) {
    j = json{{"bandwidth_hz", v.bandwidth_hz}, {"tx_power_dbm", v.tx_power_dbm}};
}

void from_json(const json& j, RadioRequirements& v) {
    v.bandwidth_hz = j.at("bandwidth_hz").get<double>();
    v.tx_power_dbm = get_or(j, "tx_power_dbm", 0.0);
}

void to_json(json& j, const VnfDescriptor& v) {
    json nets = json::array();
    for (auto r : v.networks) nets.push_back(std::string(to_string(r)));
    j = json{{"name", v.name}, {"image", v.image},        {"flavor", v.flavor},
             {"role", std::string(to_string(v.role))},    {"networks", nets}};
    if (v.radio_requirements) j["radio_requirements"] = *v.radio_requirements;
}

void from_json(const json& j, VnfDescriptor& v) {
    v.name = j.at("name").get<std::string>();
    v.image = get_or<std::string>(j, "image", "");
    v.flavor = j.at("flavor").get<Flavor>();
    v.role = parse_vnf_role(j.at("role").get<std::string>());
    v.networks.clear();
    if (j.contains("networks")) {
        for (const auto& n : j.at("networks")) v.networks.push_back(parse_network_role(n.get<std::string>()));
    }
    v.radio_requirements.reset();
    if (j.contains("radio_requirements") && !j.at("radio_requirements").is_null()) {
        v.radio_requirements = j.at("radio_requirements").get<RadioRequirements>();
    }
}

void to_json(json& j, const NetworkSpec& v) { j = json{{"role", std::string(to_string(v.role))}, {"cidr", v.cidr}}; }

void from_json(const json& j, NetworkSpec& v) {
    v.role = parse_network_role(j.at("role").get<std::string>());
    v.cidr = j.at("cidr").get<std::string>();
}

void to_json(json& j, const ActuatorBinding& v) { j = json{{"alarm_id", v.alarm_id}, {"actuator", v.actuator}}; }

void from_json(const json& j, ActuatorBinding& v) {
    v.alarm_id = j.at("alarm_id").get<std::string>();
    v.actuator = j.at("actuator").get<std::string>();
}

void to_json(json& j, const NsDescriptor& v) {
    j = json{{"name", v.name}, {"networks", v.networks}, {"vnfs", v.vnfs}, {"actuator_bindings", v.actuator_bindings}};
}

void from_json(const json& j, NsDescriptor& v) {
    v.name = j.at("name").get<std::string>();
    v.networks = get_or(j, "networks", std::vector<NetworkSpec>{});
    v.vnfs = get_or(j, "vnfs", std::vector<VnfDescriptor>{});
    v.actuator_bindings = get_or(j, "actuator_bindings", std::vector<ActuatorBinding>{});
}

void to_json(json& j, const Violation& v) { j = json{{"invariant", v.invariant}, {"field", v.field}}; }

void to_json(json& j, const NetworkService& v) {
    json vnfs = json::array();
    for (auto id : v.vnf_instances) vnfs.push_back(id.str());
    json slices = json::array();
    for (auto id : v.slices) slices.push_back(id.str());
    json nets = json::array();
    for (auto id : v.networks) nets.push_back(id.str());
    json history = json::array();
    for (const auto& e : v.history) {
        history.push_back({{"from", std::string(to_string(e.from))},
                           {"to", std::string(to_string(e.to))},
                           {"at", to_seconds(e.at)}});
    }
    j = json{{"id", v.id.str()},
             {"descriptor", v.descriptor},
             {"state", std::string(to_string(v.state))},
             {"vnf_instances", vnfs},
             {"slices", slices},
             {"networks", nets},
             {"created_at", to_seconds(v.created_at)},
             {"state_changed_at", to_seconds(v.state_changed_at)},
             {"history", history}};
}

void to_json(json& j, const VnfInstance& v) {
    j = json{{"id", v.id.str()},
             {"ns_id", v.ns_id.str()},
             {"descriptor", v.descriptor},
             {"vm_id", v.vm_id ? json(v.vm_id->str()) : json(nullptr)},
             {"state", std::string(to_string(v.state))},
             {"mgmt_ip", v.mgmt_ip},
             {"dataflow_ip", v.dataflow_ip},
             {"slice_id", v.slice_id ? json(v.slice_id->str()) : json(nullptr)},
             {"rrh_id", v.rrh_id ? json(v.rrh_id->str()) : json(nullptr)}};
}

void to_json(json& j, const Actuator& v) {
    j = json{{"name", v.name}, {"action", std::string(to_string(v.action))}, {"parameters", params_to_json(v.parameters)}};
}

void from_json(const json& j, Actuator& v) {
    v.name = j.at("name").get<std::string>();
    v.action = parse_actuator_action(j.at("action").get<std::string>());
    v.parameters = j.contains("parameters") ? params_from_json(j.at("parameters")) : Params{};
}

void to_json(json& j, const Alarm& v) {
    j = json{{"alarm_id", v.alarm_id},
             {"instance_id", v.instance.str()},
             {"rule_id", v.rule_id},
             {"vnf_id", v.vnf_id.str()},
             {"fired_at", v.fired_at.count()},
             {"payload", params_to_json(v.payload)}};
}

void from_json(const json& j, Alarm& v) {
    v.alarm_id = j.at("alarm_id").get<std::string>();
    v.instance = AlarmInstanceId::parse(j.at("instance_id").get<std::string>());
    v.rule_id = j.at("rule_id").get<std::string>();
    v.vnf_id = VnfId::parse(j.at("vnf_id").get<std::string>());
    v.fired_at = Timestamp(j.at("fired_at").get<std::int64_t>());
    v.payload = j.contains("payload") ? params_from_json(j.at("payload")) : Params{};
}

json parse_structured_text(const std::string& text) {
    try {
        return yaml_to_json(YAML::Load(text));
    } catch (const YAML::Exception& e) {
        throw Error(ErrorCode::ParseError, e.what());
    }
}

json load_structured_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_structured_text(ss.str());
}

std::string to_structured_text(const json& j) {
    YAML::Emitter out;
    emit(out, j);
    return std::string(out.c_str()) + "\n";
}

NsDescriptor load_descriptor(const std::filesystem::path& path) {
    try {
        return load_structured_file(path).get<NsDescriptor>();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
    }
}

}  // namespace oocran
