#include "comtrap/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "comtrap/errors.hpp"

namespace comtrap::cli {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& allowed, const char* where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!allowed.count(it.key())) {
            std::ostringstream msg;
            msg << "unknown key \"" << it.key() << "\" in " << where;
            throw ValidationError(msg.str());
        }
    }
}

double need_number(const json& j, const char* key, const char* where) {
    if (!j.contains(key) || !j.at(key).is_number()) {
        std::ostringstream msg;
        msg << where << " requires numeric \"" << key << "\"";
        throw ValidationError(msg.str());
    }
    return j.at(key).get<double>();
}

trap::TrapSpec parse_trap(const json& j) {
    if (!j.is_object()) throw ValidationError("\"trap\" must be an object");
    reject_unknown(j, {"ax", "ay", "az", "euler_deg"}, "trap");
    const double ax = need_number(j, "ax", "trap");
    const double ay = need_number(j, "ay", "trap");
    const double az = need_number(j, "az", "trap");
    Eigen::Matrix3d axes = Eigen::Matrix3d::Identity();
    if (j.contains("euler_deg")) {
        const auto& e = j.at("euler_deg");
        if (!e.is_array() || e.size() != 3)
            throw ValidationError("trap.euler_deg must be [alpha, beta, gamma] in degrees");
        axes = trap::euler_zyz_deg(e.at(0).get<double>(), e.at(1).get<double>(),
                                   e.at(2).get<double>());
    }
    return trap::make_trap(ax, ay, az, axes);
}

trap::RotationSpec parse_rotation(const json& j) {
    if (!j.is_object()) throw ValidationError("\"rotation\" must be an object");
    reject_unknown(j, {"omega"}, "rotation");
    trap::RotationSpec rot;
    if (j.contains("omega")) {
        const auto& o = j.at("omega");
        if (!o.is_array() || o.size() != 3)
            throw ValidationError("rotation.omega must be [x, y, z]");
        rot.omega = Eigen::Vector3d(o.at(0).get<double>(), o.at(1).get<double>(),
                                    o.at(2).get<double>());
    }
    return rot;
}

fewbody::Interaction parse_interaction_string(const std::string& s) {
    // "harmonic:<kappa>" or "gaussian:<g>,<s>"
    const auto colon = s.find(':');
    const std::string kind = s.substr(0, colon);
    const std::string rest = colon == std::string::npos ? "" : s.substr(colon + 1);
    try {
        if (kind == "harmonic") {
            return fewbody::Interaction::harmonic(std::stod(rest));
        }
        if (kind == "gaussian") {
            const auto comma = rest.find(',');
            if (comma == std::string::npos) throw ValidationError("");
            return fewbody::Interaction::gaussian(std::stod(rest.substr(0, comma)),
                                                  std::stod(rest.substr(comma + 1)));
        }
    } catch (const std::exception&) {
        // fall through to the common error below
    }
    throw ValidationError(
        "interaction must be \"harmonic:<kappa>\" or \"gaussian:<g>,<s>\", got \"" + s + "\"");
}

ScenarioParams parse_params(const std::string& scenario, const json& j) {
    if (scenario == "spectrum") {
        SpectrumParams p;
        reject_unknown(j, {"omega_lo", "omega_hi", "omega_step", "out"}, "params");
        if (j.contains("omega_lo")) p.omega_lo = j.at("omega_lo").get<double>();
        if (j.contains("omega_hi")) p.omega_hi = j.at("omega_hi").get<double>();
        if (j.contains("omega_step")) p.omega_step = j.at("omega_step").get<double>();
        if (j.contains("out")) p.out = j.at("out").get<std::string>();
        return p;
    }
    if (scenario == "window") {
        WindowParams p;
        reject_unknown(j, {"out"}, "params");
        if (j.contains("out")) p.out = j.at("out").get<std::string>();
        return p;
    }
    if (scenario == "trajectory") {
        TrajectoryParams p;
        reject_unknown(j, {"r0", "v0", "t_end", "dt", "frame", "force_dt", "out"}, "params");
        auto vec = [](const json& v, const char* key) {
            if (!v.is_array() || v.size() != 3)
                throw ValidationError(std::string(key) + " must be [x, y, z]");
            return Eigen::Vector3d(v.at(0).get<double>(), v.at(1).get<double>(),
                                   v.at(2).get<double>());
        };
        if (j.contains("r0")) p.r0 = vec(j.at("r0"), "r0");
        if (j.contains("v0")) p.v0 = vec(j.at("v0"), "v0");
        if (j.contains("t_end")) p.t_end = j.at("t_end").get<double>();
        if (j.contains("dt")) p.dt = j.at("dt").get<double>();
        if (j.contains("force_dt")) p.force_dt = j.at("force_dt").get<bool>();
        if (j.contains("frame")) {
            const std::string f = j.at("frame").get<std::string>();
            if (f == "lab")
                p.frame = classical::Frame::Lab;
            else if (f == "rot")
                p.frame = classical::Frame::Rotating;
            else
                throw ValidationError("frame must be \"lab\" or \"rot\"");
        }
        if (j.contains("out")) p.out = j.at("out").get<std::string>();
        return p;
    }
    if (scenario == "verify-family") {
        VerifyFamilyParams p;
        reject_unknown(j,
                       {"g", "r0", "t_checks", "dt", "points", "extent", "mod_amp",
                        "mod_freq", "out", "dump_prefix"},
                       "params");
        if (j.contains("g")) p.g = j.at("g").get<double>();
        if (j.contains("r0")) p.r0 = j.at("r0").get<double>();
        if (j.contains("t_checks")) p.t_checks = j.at("t_checks").get<std::vector<double>>();
        if (j.contains("dt")) p.dt = j.at("dt").get<double>();
        if (j.contains("points")) p.points = j.at("points").get<int>();
        if (j.contains("extent")) p.extent = j.at("extent").get<double>();
        if (j.contains("mod_amp")) p.mod_amp = j.at("mod_amp").get<double>();
        if (j.contains("mod_freq")) p.mod_freq = j.at("mod_freq").get<double>();
        if (j.contains("out")) p.out = j.at("out").get<std::string>();
        if (j.contains("dump_prefix")) p.dump_prefix = j.at("dump_prefix").get<std::string>();
        return p;
    }
    if (scenario == "fewbody") {
        FewBodyParams p;
        reject_unknown(j, {"a", "interaction", "points", "extent", "k", "displace_r0", "out"},
                       "params");
        if (j.contains("a")) p.a = j.at("a").get<double>();
        if (j.contains("interaction"))
            p.interaction = parse_interaction_string(j.at("interaction").get<std::string>());
        if (j.contains("points")) p.points = j.at("points").get<int>();
        if (j.contains("extent")) p.extent = j.at("extent").get<double>();
        if (j.contains("k")) p.k = j.at("k").get<int>();
        if (j.contains("displace_r0")) p.displace_r0 = j.at("displace_r0").get<double>();
        if (j.contains("out")) p.out = j.at("out").get<std::string>();
        return p;
    }
    throw ValidationError("unknown scenario \"" + scenario + "\"");
}

}  // namespace

const char* scenario_name(const ScenarioParams& p) {
    struct Visitor {
        const char* operator()(const SpectrumParams&) const { return "spectrum"; }
        const char* operator()(const WindowParams&) const { return "window"; }
        const char* operator()(const TrajectoryParams&) const { return "trajectory"; }
        const char* operator()(const VerifyFamilyParams&) const { return "verify-family"; }
        const char* operator()(const FewBodyParams&) const { return "fewbody"; }
    };
    return std::visit(Visitor{}, p);
}

RunConfig parse_config_string(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ValidationError("config root must be an object");
    reject_unknown(j, {"trap", "rotation", "scenario", "params", "seed", "threads"}, "config");

    RunConfig cfg;
    if (j.contains("trap")) cfg.trap = parse_trap(j.at("trap"));
    if (j.contains("rotation")) cfg.rotation = parse_rotation(j.at("rotation"));
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("threads")) cfg.threads = j.at("threads").get<int>();
    if (j.contains("scenario")) {
        const std::string scenario = j.at("scenario").get<std::string>();
        cfg.params = parse_params(scenario, j.contains("params") ? j.at("params")
                                                                 : json::object());
    } else if (j.contains("params")) {
        throw ValidationError("\"params\" requires \"scenario\"");
    }
    return cfg;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_string(ss.str());
}

}  // namespace comtrap::cli
