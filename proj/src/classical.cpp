#include "comtrap/classical.hpp"

#include <cmath>
#include <sstream>

#include "comtrap/errors.hpp"

namespace comtrap::classical {

const ClassicalState& Trajectory::at_time(double t) const {
    if (samples.empty()) throw ValidationError("empty trajectory");
    const long idx = std::lround((t - samples.front().time) / dt);
    if (idx < 0 || idx >= static_cast<long>(samples.size()))
        throw ValidationError("requested time outside trajectory range");
    const ClassicalState& s = samples[static_cast<size_t>(idx)];
    if (std::abs(s.time - t) > 1e-9 * std::max(1.0, std::abs(t)))
        throw ValidationError("requested time does not land on a trajectory sample");
    return s;
}

double Trajectory::action_at_time(double t) const {
    const ClassicalState& s = at_time(t);
    const size_t idx = static_cast<size_t>(&s - samples.data());
    return action.at(idx);
}

TrapSchedule TrapSchedule::fixed(const trap::TrapSpec& spec) {
    TrapSchedule s;
    s.static_matrix_ = spec.matrix;
    s.omega_max_ = spec.omega_max();
    return s;
}

TrapSchedule TrapSchedule::rotating(const trap::TrapSpec& spec, const trap::RotationSpec& rot) {
    TrapSchedule s;
    s.static_matrix_ = spec.matrix;
    s.omega_max_ = spec.omega_max();
    if (rot.is_rotating()) {
        s.rot_ = rot;
        s.rotating_ = true;
        s.time_dependent_ = true;
    }
    return s;
}

TrapSchedule TrapSchedule::custom(std::function<Eigen::Matrix3d(double)> fn, double omega_max) {
    if (!fn) throw ValidationError("custom trap schedule requires a callable");
    if (!(omega_max > 0.0)) throw ValidationError("custom trap schedule requires omega_max > 0");
    TrapSchedule s;
    s.fn_ = std::move(fn);
    s.omega_max_ = omega_max;
    s.time_dependent_ = true;
    return s;
}

Eigen::Matrix3d TrapSchedule::at(double t) const {
    if (fn_) return fn_(t);
    if (!rotating_) return static_matrix_;
    const Eigen::Matrix3d Q =
        Eigen::AngleAxisd(rot_.magnitude() * t, rot_.axis()).toRotationMatrix();
    return Q * static_matrix_ * Q.transpose();
}

double max_dt(double omega_max) { return (2.0 * M_PI / omega_max) / 50.0; }

namespace {

void check_dt(double dt, double omega_max, bool force) {
    if (!(dt > 0.0)) throw ValidationError("dt must be positive");
    const double bound = max_dt(omega_max);
    if (dt > bound * (1.0 + 1e-12) && !force) {
        std::ostringstream msg;
        msg << "dt = " << dt << " exceeds the stability guard " << bound
            << " (1/50 of the shortest trap period); pass force to override";
        throw ValidationError(msg.str());
    }
}

using Accel = std::function<Eigen::Vector3d(double, const Eigen::Vector3d&, const Eigen::Vector3d&)>;

Trajectory run_rk4(const Accel& acc, const ClassicalState& s0, double t_end, double dt,
                   const IntegrateOptions& opts, Frame frame, double omega_max) {
    const long n = std::lround(t_end / dt);
    if (n < 1) throw ValidationError("t_end must cover at least one step");

    Trajectory traj;
    traj.frame = frame;
    traj.dt = dt;
    traj.samples.reserve(static_cast<size_t>(n) + 1);
    traj.samples.push_back(s0);

    const double scale0 =
        std::max({s0.position.norm(), s0.velocity.norm() / omega_max, 1e-30});

    Eigen::Vector3d R = s0.position;
    Eigen::Vector3d V = s0.velocity;
    double t = s0.time;
    for (long i = 0; i < n; ++i) {
        const Eigen::Vector3d k1r = V;
        const Eigen::Vector3d k1v = acc(t, R, V);
        const Eigen::Vector3d k2r = V + 0.5 * dt * k1v;
        const Eigen::Vector3d k2v = acc(t + 0.5 * dt, R + 0.5 * dt * k1r, V + 0.5 * dt * k1v);
        const Eigen::Vector3d k3r = V + 0.5 * dt * k2v;
        const Eigen::Vector3d k3v = acc(t + 0.5 * dt, R + 0.5 * dt * k2r, V + 0.5 * dt * k2v);
        const Eigen::Vector3d k4r = V + dt * k3v;
        const Eigen::Vector3d k4v = acc(t + dt, R + dt * k3r, V + dt * k3v);
        R += dt / 6.0 * (k1r + 2.0 * k2r + 2.0 * k3r + k4r);
        V += dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        t = s0.time + (i + 1) * dt;

        if (R.norm() > opts.blowup_factor * scale0) {
            std::ostringstream msg;
            msg << "trajectory diverged: |R| = " << R.norm() << " exceeded "
                << opts.blowup_factor << " x initial scale " << scale0 << " at t = " << t;
            throw NumericalError(msg.str());
        }
        traj.samples.push_back({R, V, t});
    }
    traj.action.assign(traj.samples.size(), 0.0);
    return traj;
}

}  // namespace

Trajectory integrate_lab(const TrapSchedule& schedule, const ClassicalState& s0,
                         double t_end, double dt, const IntegrateOptions& opts) {
    check_dt(dt, schedule.omega_max(), opts.force_dt);
    const Accel acc = [&schedule](double t, const Eigen::Vector3d& R,
                                  const Eigen::Vector3d&) -> Eigen::Vector3d {
        return -(schedule.at(t) * R);
    };
    Trajectory traj = run_rk4(acc, s0, t_end, dt, opts, Frame::Lab, schedule.omega_max());
    traj.action = action(traj, schedule);
    return traj;
}

Trajectory integrate_rotating(const trap::TrapSpec& spec, const trap::RotationSpec& rot,
                              const ClassicalState& s0, double t_end, double dt,
                              const IntegrateOptions& opts) {
    check_dt(dt, spec.omega_max(), opts.force_dt);
    const Eigen::Matrix3d A = spec.matrix;
    const Eigen::Vector3d Om = rot.omega;
    const Accel acc = [A, Om](double, const Eigen::Vector3d& R,
                              const Eigen::Vector3d& V) -> Eigen::Vector3d {
        return -(A * R) - Om.cross(2.0 * V + Om.cross(R));
    };
    return run_rk4(acc, s0, t_end, dt, opts, Frame::Rotating, spec.omega_max());
}

std::vector<double> action(const Trajectory& traj, const TrapSchedule& schedule) {
    if (traj.frame != Frame::Lab)
        throw ValidationError("action is defined in the lab frame only");
    const size_t n = traj.samples.size();
    std::vector<double> g(n);
    for (size_t i = 0; i < n; ++i) {
        const auto& s = traj.samples[i];
        g[i] = 0.5 * (s.velocity.squaredNorm() -
                      s.position.dot(schedule.at(s.time) * s.position));
    }

    // Cumulative Simpson over interval pairs; odd samples get the 3-point
    // half-interval rule, an unpaired final interval falls back to trapezoid.
    const double dt = traj.dt;
    std::vector<double> f(n, 0.0);
    for (size_t i = 2; i < n; i += 2)
        f[i] = f[i - 2] + dt / 3.0 * (g[i - 2] + 4.0 * g[i - 1] + g[i]);
    for (size_t i = 1; i < n; i += 2) {
        if (i + 1 < n)
            f[i] = f[i - 1] + dt / 12.0 * (5.0 * g[i - 1] + 8.0 * g[i] - g[i + 1]);
        else
            f[i] = f[i - 1] + 0.5 * dt * (g[i - 1] + g[i]);
    }
    return f;
}

std::vector<double> action_boundary(const Trajectory& traj) {
    if (traj.frame != Frame::Lab)
        throw ValidationError("action_boundary is defined in the lab frame only");
    std::vector<double> f(traj.samples.size());
    const double f0 = 0.5 * traj.samples.front().velocity.dot(traj.samples.front().position);
    for (size_t i = 0; i < traj.samples.size(); ++i)
        f[i] = 0.5 * traj.samples[i].velocity.dot(traj.samples[i].position) - f0;
    return f;
}

double phase_field(const Eigen::Vector3d& r, const ClassicalState& state, double f) {
    return r.dot(state.velocity) - f;
}

Trajectory rotating_to_lab(const Trajectory& traj, const trap::RotationSpec& rot) {
    if (traj.frame != Frame::Rotating)
        throw ValidationError("rotating_to_lab expects a rotating-frame trajectory");
    Trajectory out;
    out.frame = Frame::Lab;
    out.dt = traj.dt;
    out.samples.reserve(traj.samples.size());
    const Eigen::Vector3d Om = rot.omega;
    for (const auto& s : traj.samples) {
        Eigen::Matrix3d Q = Eigen::Matrix3d::Identity();
        if (rot.is_rotating())
            Q = Eigen::AngleAxisd(rot.magnitude() * s.time, rot.axis()).toRotationMatrix();
        ClassicalState m;
        m.time = s.time;
        m.position = Q * s.position;
        m.velocity = Q * (s.velocity + Om.cross(s.position));
        out.samples.push_back(m);
    }
    out.action.assign(out.samples.size(), 0.0);
    return out;
}

}  // namespace comtrap::classical
