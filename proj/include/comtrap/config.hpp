#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "comtrap/classical.hpp"
#include "comtrap/fewbody.hpp"
#include "comtrap/trap.hpp"

namespace comtrap::cli {

struct SpectrumParams {
    double omega_lo = 0;
    double omega_hi = 3;
    double omega_step = 0.01;
    std::string out = "spectrum.csv";
};

struct WindowParams {
    std::string out;  // empty: print to stdout
};

struct TrajectoryParams {
    Eigen::Vector3d r0 = Eigen::Vector3d(1, 0, 0);
    Eigen::Vector3d v0 = Eigen::Vector3d::Zero();
    double t_end = 10;
    double dt = 0.01;
    classical::Frame frame = classical::Frame::Lab;
    bool force_dt = false;
    std::string out = "traj.csv";
};

struct VerifyFamilyParams {
    double g = 1.0;
    double r0 = 0.7;
    std::vector<double> t_checks = {1.57, 3.14, 6.28};
    double dt = 1e-3;
    int points = 1024;
    double extent = 12.8;
    double mod_amp = 0;   // a(t) = a (1 + mod_amp sin(mod_freq t))
    double mod_freq = 0;
    std::string out = "report.json";
    std::optional<std::string> dump_prefix;  // binary wavefunction snapshots
};

struct FewBodyParams {
    double a = 1.0;
    fewbody::Interaction interaction = fewbody::Interaction::harmonic(0.5);
    int points = 256;
    double extent = 5.5;
    int k = 12;
    std::optional<double> displace_r0;  // run the displacement-invariance check
    std::string out = "spectrum.json";
};

using ScenarioParams =
    std::variant<SpectrumParams, WindowParams, TrajectoryParams, VerifyFamilyParams,
                 FewBodyParams>;

const char* scenario_name(const ScenarioParams& p);

struct RunConfig {
    trap::TrapSpec trap = trap::make_trap(1, 1, 1);
    trap::RotationSpec rotation;
    ScenarioParams params = SpectrumParams{};
    std::uint64_t seed = 0;  // reserved for randomized sweeps; echoed for reproducibility
    int threads = 0;         // 0 = all hardware threads
};

/// Parse and schema-validate a config file. Unknown keys are rejected.
RunConfig parse_config_file(const std::string& path);
RunConfig parse_config_string(const std::string& text);

/// Execute a scenario, writing its artifacts. Returns the process exit
/// code: 0 success, 1 validation failure, 2 numerical failure. Failure
/// details go to stderr as a single JSON line.
int run(const RunConfig& config);

}  // namespace comtrap::cli
