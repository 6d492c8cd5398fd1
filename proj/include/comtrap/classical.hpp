#pragma once

#include <functional>
#include <vector>

#include "comtrap/trap.hpp"

namespace comtrap::classical {

struct ClassicalState {
    Eigen::Vector3d position = Eigen::Vector3d::Zero();
    Eigen::Vector3d velocity = Eigen::Vector3d::Zero();
    double time = 0;
};

enum class Frame { Lab, Rotating };

/// Time-sampled phase-space path on a uniform step, with the accumulated
/// action f(t) at each sample (zeros in the rotating frame, where the phase
/// formula does not apply).
struct Trajectory {
    Frame frame = Frame::Lab;
    double dt = 0;
    std::vector<ClassicalState> samples;
    std::vector<double> action;

    const ClassicalState& at_time(double t) const;  // nearest sample; t must land on one
    double action_at_time(double t) const;
};

/// Lab-frame trap matrix as a function of time. Covers the static case,
/// rigid rotation of a static trap, and arbitrary schedules for callers
/// that need a custom modulation.
class TrapSchedule {
public:
    static TrapSchedule fixed(const trap::TrapSpec& spec);
    static TrapSchedule rotating(const trap::TrapSpec& spec, const trap::RotationSpec& rot);
    static TrapSchedule custom(std::function<Eigen::Matrix3d(double)> fn, double omega_max);

    Eigen::Matrix3d at(double t) const;
    double omega_max() const { return omega_max_; }
    bool time_dependent() const { return time_dependent_; }

private:
    TrapSchedule() = default;
    Eigen::Matrix3d static_matrix_ = Eigen::Matrix3d::Identity();
    std::function<Eigen::Matrix3d(double)> fn_;
    trap::RotationSpec rot_;
    bool rotating_ = false;
    bool time_dependent_ = false;
    double omega_max_ = 1.0;
};

struct IntegrateOptions {
    bool force_dt = false;        // bypass the dt <= T_min/50 guard
    double blowup_factor = 1e6;   // abort when |R| exceeds this times the initial scale
};

/// dt guard: the largest step accepted without force_dt.
double max_dt(double omega_max);

/// RK4 integration of d2R/dt2 = -A(t) R in the lab frame. t_end is snapped
/// to the nearest whole number of steps. Action is filled via Simpson
/// quadrature along the path.
Trajectory integrate_lab(const TrapSchedule& schedule, const ClassicalState& s0,
                         double t_end, double dt, const IntegrateOptions& opts = {});

/// RK4 integration of d2R/dt2 = -A R - Omega x (2 dR/dt + Omega x R) in the
/// frame co-rotating with the trap. Action entries are zeros.
Trajectory integrate_rotating(const trap::TrapSpec& spec, const trap::RotationSpec& rot,
                              const ClassicalState& s0, double t_end, double dt,
                              const IntegrateOptions& opts = {});

/// Classical action f(t) = 1/2 int_0^t (V.V - R.A(t).R) dt', cumulative
/// Simpson over the stored samples. Lab frame only.
std::vector<double> action(const Trajectory& traj, const TrapSchedule& schedule);

/// Boundary form f(t) = 1/2 V(t).R(t) - 1/2 V(0).R(0); equals the integral
/// form on true solutions.
std::vector<double> action_boundary(const Trajectory& traj);

/// Phase of the displacement transform: theta(r, t) = r.V(t) - f(t).
double phase_field(const Eigen::Vector3d& r, const ClassicalState& state, double f);

/// Map a rotating-frame trajectory to the lab frame, R_lab = Q(t) R_rot.
Trajectory rotating_to_lab(const Trajectory& traj, const trap::RotationSpec& rot);

}  // namespace comtrap::classical
