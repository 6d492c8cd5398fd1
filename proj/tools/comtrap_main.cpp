#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "comtrap/config.hpp"
#include "comtrap/errors.hpp"

namespace {

using comtrap::ValidationError;

Eigen::Vector3d parse_vec3(const std::string& s, const char* what) {
    Eigen::Vector3d v;
    std::istringstream in(s);
    char c1 = 0, c2 = 0;
    if (!(in >> v(0) >> c1 >> v(1) >> c2 >> v(2)) || c1 != ',' || c2 != ',')
        throw ValidationError(std::string(what) + " must be \"x,y,z\"");
    return v;
}

std::vector<double> parse_list(const std::string& s, const char* what) {
    std::vector<double> out;
    std::istringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) {
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw ValidationError(std::string(what) + " must be a comma-separated list");
        }
    }
    if (out.empty()) throw ValidationError(std::string(what) + " must not be empty");
    return out;
}

void parse_range(const std::string& s, double& lo, double& hi, double& step) {
    std::istringstream in(s);
    char c1 = 0, c2 = 0;
    if (!(in >> lo >> c1 >> hi >> c2 >> step) || c1 != ':' || c2 != ':')
        throw ValidationError("--omega-range must be \"lo:hi:step\"");
}

int fail_validation(const std::string& message) {
    nlohmann::json err;
    err["error"] = {{"type", "validation"}, {"message", message}};
    std::cerr << err.dump() << std::endl;
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    using namespace comtrap::cli;

    CLI::App app{"comtrap: center-of-mass dynamics of trapped gases"};
    app.require_subcommand(1);
    app.fallthrough();  // --config/--threads may follow the subcommand

    std::string config_path;
    int threads = 0;
    app.add_option("--config", config_path, "JSON config file (trap, rotation, defaults)");
    app.add_option("--threads", threads, "cap sweep parallelism (0 = all cores)");

    // spectrum
    auto* sc_spectrum = app.add_subcommand("spectrum", "characteristic frequencies vs Omega");
    std::string omega_range, spectrum_out;
    sc_spectrum->add_option("--omega-range", omega_range, "sweep \"lo:hi:step\"");
    sc_spectrum->add_option("--out", spectrum_out, "output CSV path");

    // window
    auto* sc_window = app.add_subcommand("window", "instability window of rotation speeds");
    std::string window_out;
    sc_window->add_option("--out", window_out, "output path (default: stdout)");

    // trajectory
    auto* sc_traj = app.add_subcommand("trajectory", "classical center-of-mass trajectory");
    std::string r0_str, v0_str, frame_str = "lab", traj_out;
    double t_end = -1, traj_dt = -1;
    bool force_dt = false;
    sc_traj->add_option("--r0", r0_str, "initial position \"x,y,z\"");
    sc_traj->add_option("--v0", v0_str, "initial velocity \"x,y,z\"");
    sc_traj->add_option("--t-end", t_end, "integration time");
    sc_traj->add_option("--dt", traj_dt, "time step");
    sc_traj->add_option("--frame", frame_str, "lab | rot");
    sc_traj->add_flag("--force", force_dt, "bypass the dt safety bound");
    sc_traj->add_option("--out", traj_out, "output CSV path");

    // verify-family
    auto* sc_family = app.add_subcommand("verify-family",
                                         "displacement solution-family check (1D mean field)");
    double g = std::nan(""), family_r0 = std::nan(""), family_dt = -1;
    double mod_amp = std::nan(""), mod_freq = std::nan("");
    int family_points = -1;
    double family_extent = -1;
    std::string t_checks_str, family_out, dump_prefix;
    sc_family->add_option("--g", g, "interaction strength");
    sc_family->add_option("--r0", family_r0, "initial displacement");
    sc_family->add_option("--t-checks", t_checks_str, "comma-separated check times");
    sc_family->add_option("--dt", family_dt, "evolution step");
    sc_family->add_option("--points", family_points, "grid points (power of two)");
    sc_family->add_option("--extent", family_extent, "grid half-width");
    sc_family->add_option("--mod-amp", mod_amp, "trap modulation amplitude");
    sc_family->add_option("--mod-freq", mod_freq, "trap modulation frequency");
    sc_family->add_option("--out", family_out, "output report path");
    sc_family->add_option("--dump-prefix", dump_prefix, "binary wavefunction snapshot prefix");

    // fewbody
    auto* sc_few = app.add_subcommand("fewbody", "two-particle spectrum and ladder fit");
    double few_a = std::nan("");
    std::string interaction_str, grid_str, few_out;
    int few_k = -1;
    double displace_r0 = std::nan("");
    sc_few->add_option("--a", few_a, "trap frequency-squared");
    sc_few->add_option("--interaction", interaction_str, "harmonic:<kappa> | gaussian:<g>,<s>");
    sc_few->add_option("--grid", grid_str, "\"N,L\": points per axis, half-width");
    sc_few->add_option("--k", few_k, "number of eigenpairs");
    sc_few->add_option("--displace", displace_r0, "run the displacement-invariance check");
    sc_few->add_option("--out", few_out, "output JSON path");

    CLI11_PARSE(app, argc, argv);

    try {
        RunConfig cfg;
        if (!config_path.empty()) cfg = parse_config_file(config_path);
        if (threads > 0) cfg.threads = threads;

        const std::string chosen = app.get_subcommands().front()->get_name();
        if (chosen == "spectrum") {
            SpectrumParams p;
            if (auto* q = std::get_if<SpectrumParams>(&cfg.params)) p = *q;
            if (!omega_range.empty()) parse_range(omega_range, p.omega_lo, p.omega_hi, p.omega_step);
            if (!spectrum_out.empty()) p.out = spectrum_out;
            cfg.params = p;
        } else if (chosen == "window") {
            WindowParams p;
            if (auto* q = std::get_if<WindowParams>(&cfg.params)) p = *q;
            if (!window_out.empty()) p.out = window_out;
            cfg.params = p;
        } else if (chosen == "trajectory") {
            TrajectoryParams p;
            if (auto* q = std::get_if<TrajectoryParams>(&cfg.params)) p = *q;
            if (!r0_str.empty()) p.r0 = parse_vec3(r0_str, "--r0");
            if (!v0_str.empty()) p.v0 = parse_vec3(v0_str, "--v0");
            if (t_end >= 0) p.t_end = t_end;
            if (traj_dt > 0) p.dt = traj_dt;
            if (force_dt) p.force_dt = true;
            if (frame_str == "lab")
                p.frame = comtrap::classical::Frame::Lab;
            else if (frame_str == "rot")
                p.frame = comtrap::classical::Frame::Rotating;
            else
                throw ValidationError("--frame must be lab or rot");
            if (!traj_out.empty()) p.out = traj_out;
            cfg.params = p;
        } else if (chosen == "verify-family") {
            VerifyFamilyParams p;
            if (auto* q = std::get_if<VerifyFamilyParams>(&cfg.params)) p = *q;
            if (!std::isnan(g)) p.g = g;
            if (!std::isnan(family_r0)) p.r0 = family_r0;
            if (!t_checks_str.empty()) p.t_checks = parse_list(t_checks_str, "--t-checks");
            if (family_dt > 0) p.dt = family_dt;
            if (family_points > 0) p.points = family_points;
            if (family_extent > 0) p.extent = family_extent;
            if (!std::isnan(mod_amp)) p.mod_amp = mod_amp;
            if (!std::isnan(mod_freq)) p.mod_freq = mod_freq;
            if (!family_out.empty()) p.out = family_out;
            if (!dump_prefix.empty()) p.dump_prefix = dump_prefix;
            cfg.params = p;
        } else if (chosen == "fewbody") {
            FewBodyParams p;
            if (auto* q = std::get_if<FewBodyParams>(&cfg.params)) p = *q;
            if (!std::isnan(few_a)) p.a = few_a;
            if (!interaction_str.empty()) {
                // reuse the config-side parser through a tiny config document
                nlohmann::json probe;
                probe["scenario"] = "fewbody";
                probe["params"] = {{"interaction", interaction_str}};
                const auto parsed = parse_config_string(probe.dump());
                p.interaction = std::get<FewBodyParams>(parsed.params).interaction;
            }
            if (!grid_str.empty()) {
                std::istringstream in(grid_str);
                char c = 0;
                if (!(in >> p.points >> c >> p.extent) || c != ',')
                    throw ValidationError("--grid must be \"N,L\"");
            }
            if (few_k > 0) p.k = few_k;
            if (!std::isnan(displace_r0)) p.displace_r0 = displace_r0;
            if (!few_out.empty()) p.out = few_out;
            cfg.params = p;
        }
        return run(cfg);
    } catch (const ValidationError& e) {
        return fail_validation(e.what());
    } catch (const comtrap::NumericalError& e) {
        nlohmann::json err;
        err["error"] = {{"type", "numerical"}, {"message", e.what()}};
        std::cerr << err.dump() << std::endl;
        return 2;
    }
}
