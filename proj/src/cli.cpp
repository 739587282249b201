#include "oocran/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>

#include <CLI11.hpp>

#include "oocran/serialization.hpp"

namespace oocran {

using nlohmann::json;

namespace {

std::string default_url() {
    if (const char* url = std::getenv("OOCRAN_URL")) return url;
    const char* port = std::getenv("OOCRAN_PORT");
    return std::string("http://127.0.0.1:") + (port != nullptr && *port != '\0' ? port : "8000");
}

std::string fmt(double v, int digits = 2) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

struct ApiError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Call {
    int status = 0;
    json body;
};

}  // namespace

CliTransport in_process_transport(Service& service) {
    return [&service](const std::string& method, const std::string& path, const std::string& body,
                      const std::string& key) {
        ApiRequest r;
        r.method = method;
        const auto q = path.find('?');
        r.path = path.substr(0, q);
        if (q != std::string::npos) {
            std::stringstream ss(path.substr(q + 1));
            std::string kv;
            while (std::getline(ss, kv, '&')) {
                const auto eq = kv.find('=');
                r.query[kv.substr(0, eq)] = eq == std::string::npos ? "" : kv.substr(eq + 1);
            }
        }
        r.body = body;
        if (!key.empty()) r.headers["idempotency-key"] = key;
        const auto resp = service.handle(r);
        return HttpResult{resp.status, resp.body.dump()};
    };
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, CliTransport transport) {
    CLI::App app{"OOCRAN orchestrator client", "oocran"};
    app.require_subcommand(1);
    bool as_json = false;
    std::string url = default_url();
    std::string token = std::getenv("OOCRAN_TOKEN") ? std::getenv("OOCRAN_TOKEN") : "";
    std::string idem;
    app.add_flag("--json", as_json, "Machine-readable output");
    app.add_option("--url", url, "Service base URL");
    app.add_option("--token", token, "Bearer token");
    app.add_option("--idempotency-key", idem, "Idempotency key for mutating calls");

    std::string file;
    std::string ns_id;
    auto* deploy = app.add_subcommand("deploy", "Create an NS from a descriptor file");
    deploy->add_option("-f,--file", file, "Descriptor")->required()->check(CLI::ExistingFile);

    auto* del = app.add_subcommand("delete", "Delete an NS");
    del->add_option("ns_id", ns_id)->required();

    auto* list = app.add_subcommand("list", "List NSs");
    auto* status = app.add_subcommand("status", "Show one NS");
    status->add_option("ns_id", ns_id)->required();

    double area = 0.0;
    double radius = 30.0;
    auto* plan = app.add_subcommand("plan", "Plan a VWI for a coverage area");
    plan->add_option("--area", area, "Target area in m2")->required()->check(CLI::PositiveNumber);
    plan->add_option("--radius", radius, "Cell radius in m")->check(CLI::PositiveNumber);
    std::string export_path;
    plan->add_option("--export", export_path, "Write the plan as structured text");

    std::string strategy = "SOFT_HANDOVER";
    auto* swap = app.add_subcommand("swap", "Replace an NS by a new VWI");
    swap->add_option("ns_id", ns_id)->required();
    swap->add_option("--strategy", strategy, "HARD, SOFT_HANDOVER or REPOSITORY");
    swap->add_option("-f,--file", file, "VWI descriptor")->required()->check(CLI::ExistingFile);

    std::string vnf_id;
    std::string metric;
    std::optional<double> start;
    std::optional<double> end;
    auto* metrics = app.add_subcommand("metrics", "Query a metric stream");
    metrics->add_option("vnf_id", vnf_id)->required();
    metrics->add_option("metric", metric)->required();
    metrics->add_option("--start", start);
    metrics->add_option("--end", end);

    std::optional<double> until;
    auto* simulate = app.add_subcommand("simulate", "Run a scenario in virtual time");
    simulate->add_option("-f,--file", file, "Scenario")->required()->check(CLI::ExistingFile);
    simulate->add_option("--until", until, "Virtual seconds to run")->check(CLI::NonNegativeNumber);

    ServiceConfig serve_cfg;
    std::optional<int> port;
    std::optional<std::string> scenario_path;
    std::string host;
    auto* serve = app.add_subcommand("serve", "Run the REST service");
    serve->add_option("--port", port)->check(CLI::Range(0, 65535));
    serve->add_option("--host", host);
    serve->add_option("--scenario", scenario_path);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    if (!transport) {
        transport = [client = HttpClient(url, token)](const std::string& m, const std::string& p, const std::string& b,
                                                      const std::string& k) { return client.request(m, p, b, k); };
    }
    auto call = [&](const std::string& method, const std::string& path, const json& body = nullptr) {
        const auto r = transport(method, path, body.is_null() ? "" : body.dump(), method == "GET" ? "" : idem);
        Call c{r.status, r.body.empty() ? json(nullptr) : json::parse(r.body, nullptr, false)};
        if (c.status >= 400) {
            const auto msg = c.body.is_object() ? c.body.value("message", r.body) : r.body;
            throw ApiError("HTTP " + std::to_string(c.status) + ": " + msg);
        }
        return c;
    };
    auto emit = [&](const json& j, const std::string& text) {
        if (as_json) {
            out << j.dump(2) << "\n";
        } else {
            out << text;
        }
    };

    try {
        if (*deploy) {
            const auto desc = load_descriptor(file);
            const auto c = call("POST", "/nss", json(desc));
            emit(c.body, c.body.at("id").get<std::string>() + " " + c.body.at("state").get<std::string>() + "\n");
        } else if (*del) {
            const auto c = call("DELETE", "/nss/" + ns_id);
            emit(c.body, c.body.at("id").get<std::string>() + " " + c.body.at("state").get<std::string>() + "\n");
        } else if (*list) {
            const auto c = call("GET", "/nss");
            std::string text;
            for (const auto& ns : c.body) {
                text += ns.at("id").get<std::string>() + " " + ns.at("descriptor").at("name").get<std::string>() + " " +
                        ns.at("state").get<std::string>() + " vnfs=" + std::to_string(ns.at("vnfs").size()) + "\n";
            }
            emit(c.body, text);
        } else if (*status) {
            const auto c = call("GET", "/nss/" + ns_id);
            std::string text = c.body.at("id").get<std::string>() + " " + c.body.at("state").get<std::string>() +
                               " since " + fmt(c.body.at("state_changed_at").get<double>(), 3) + " s\n";
            for (const auto& v : c.body.at("vnfs")) {
                text += "  " + v.at("id").get<std::string>() + " " + v.at("descriptor").at("name").get<std::string>() + " " +
                        v.at("state").get<std::string>() + "\n";
            }
            emit(c.body, text);
        } else if (*plan) {
            const auto c = call("POST", "/vwis/plan", {{"target_area_m2", area}, {"cell_radius_m", radius}});
            const auto& p = c.body;
            if (!export_path.empty()) {
                std::ofstream f(export_path);
                f << to_structured_text(p);
                if (!f) throw ApiError("cannot write " + export_path);
            }
            emit(p, "n=" + std::to_string(p.at("n_enodebs").get<int>()) +
                        " covered_area_m2=" + fmt(p.at("covered_area_m2").get<double>()) +
                        " setup_s=" + fmt(p.at("estimated_setup_s").get<double>()) +
                        " linear_setup_s=" + fmt(p.at("linear_estimate_s").get<double>()) + "\n");
        } else if (*swap) {
            const json body{{"strategy", strategy}, {"vwi", load_structured_file(file)}};
            const auto c = call("POST", "/vwis/" + ns_id + "/swap", body);
            const auto new_ns = c.body.at("new_ns").is_null() ? std::string("-") : c.body.at("new_ns").get<std::string>();
            emit(c.body, ns_id + " -> " + new_ns + " " + c.body.at("strategy").get<std::string>() + "\n");
        } else if (*metrics) {
            std::string path = "/metrics/query?vnf_id=" + vnf_id + "&metric=" + metric;
            if (start) path += "&start=" + fmt(*start, 6);
            if (end) path += "&end=" + fmt(*end, 6);
            const auto c = call("GET", path);
            std::string text;
            for (const auto& s : c.body) text += fmt(s.at("ts").get<double>(), 6) + " " + fmt(s.at("value").get<double>(), 3) + "\n";
            emit(c.body, text);
        } else if (*simulate) {
            System system(load_scenario(file));
            const auto result = run_simulation(system, until ? seconds_to_duration(*until) : Timestamp::max());
            json labels = json::object();
            for (const auto& [k, v] : result.labels) labels[k] = v.str();
            emit({{"events", result.events},
                  {"swaps", result.swaps},
                  {"labels", labels},
                  {"ended_at", to_seconds(result.ended_at)}},
                 system.events().render_text());
        } else if (*serve) {
            serve_cfg = service_config_from_env();
            if (port) serve_cfg.port = *port;
            if (!host.empty()) serve_cfg.host = host;
            if (scenario_path) serve_cfg.scenario = *scenario_path;
            Service service(serve_cfg);
            HttpServer server(service);
            server.start();
            err << "listening on " << serve_cfg.host << ":" << server.port() << std::endl;
            server.wait();
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

}  // namespace oocran
