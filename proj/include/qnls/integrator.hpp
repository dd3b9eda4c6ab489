// Fixed-step time evolution (RK4 and integrating-factor RK4) with conserved-
// quantity monitoring and trajectory serialization.
#ifndef QNLS_INTEGRATOR_HPP
#define QNLS_INTEGRATOR_HPP

#include <filesystem>
#include <functional>

#include "qnls/laxpair.hpp"

namespace qnls {

enum class Scheme { rk4, ifrk4 };

struct EvolutionConfig {
    double dt = 1e-3;
    double t_final = 1.0;
    std::size_t snapshot_stride = 1;
    Scheme scheme = Scheme::ifrk4;
    MeanPolicy mean_policy = MeanPolicy::project;
    bool dealias = true;
    double blowup_threshold = 1e8;
};

struct MonitorRow {
    double t = 0;
    double hamiltonian = 0;
    double mass = 0;          // integral |u|^2
    double v_integral = 0;    // system 2 only
    double removed_mean_comm = 0;
    double removed_mean_v = 0;
};

template <class State>
struct Trajectory {
    PeriodicGrid grid;
    std::vector<double> times;
    std::vector<State> snapshots;
    std::vector<MonitorRow> monitors;
};

namespace detail {

using Stack = std::vector<CVec>;

struct StepperDef {
    std::function<Stack(const Stack&)> nonlinear;
    std::function<void(Stack&, double)> apply_linear;   // multiply by exp(tau L)
    std::function<Stack(const Stack&)> full_rhs;        // for plain rk4
};

inline void axpy(Stack& y, double a, const Stack& x) {
    for (std::size_t c = 0; c < y.size(); ++c)
        for (std::size_t i = 0; i < y[c].size(); ++i) y[c][i] += a * x[c][i];
}
inline Stack lin_comb(const Stack& y, double a, const Stack& x) {
    Stack out = y;
    axpy(out, a, x);
    return out;
}

inline double stack_max(const Stack& s) {
    double m = 0;
    for (const auto& c : s)
        for (const auto& v : c) {
            const double a = std::abs(v);
            if (!std::isfinite(a)) return std::numeric_limits<double>::infinity();
            m = std::max(m, a);
        }
    return m;
}

inline void step_rk4(Stack& y, double dt, const StepperDef& def) {
    Stack k1 = def.full_rhs(y);
    Stack k2 = def.full_rhs(lin_comb(y, 0.5 * dt, k1));
    Stack k3 = def.full_rhs(lin_comb(y, 0.5 * dt, k2));
    Stack k4 = def.full_rhs(lin_comb(y, dt, k3));
    for (std::size_t c = 0; c < y.size(); ++c)
        for (std::size_t i = 0; i < y[c].size(); ++i)
            y[c][i] += dt / 6.0 * (k1[c][i] + 2.0 * (k2[c][i] + k3[c][i]) + k4[c][i]);
}

inline void step_ifrk4(Stack& y, double dt, const StepperDef& def) {
    auto E = [&](Stack s) { def.apply_linear(s, 0.5 * dt); return s; };
    Stack k1 = def.nonlinear(y);
    Stack k2 = def.nonlinear(E(lin_comb(y, 0.5 * dt, k1)));
    Stack Ey = E(y);
    Stack k3 = def.nonlinear(lin_comb(Ey, 0.5 * dt, k2));
    Stack E2y = E(Ey);
    Stack Ek3 = E(k3);
    Stack k4 = def.nonlinear(lin_comb(E2y, dt, Ek3));
    // u_{n+1} = E^2 u + dt/6 (E^2 k1 + 2E(k2+k3) + k4)
    Stack Ek1 = E(E(k1));
    Stack Ek2 = E(k2);
    Stack Ek3b = E(k3);
    y = E2y;
    for (std::size_t c = 0; c < y.size(); ++c)
        for (std::size_t i = 0; i < y[c].size(); ++i)
            y[c][i] += dt / 6.0 * (Ek1[c][i] + 2.0 * (Ek2[c][i] + Ek3b[c][i]) + k4[c][i]);
}

/// right-multiplication by exp(a J) = cos(a) I + sin(a) J on a spinor pair
inline void rotate_pair(cplx& a1, cplx& a2, const Mat2& J, double ang) {
    const double c = std::cos(ang), s = std::sin(ang);
    const cplx b1 = c * a1 + s * (a1 * J(0, 0) + a2 * J(1, 0));
    const cplx b2 = c * a2 + s * (a1 * J(0, 1) + a2 * J(1, 1));
    a1 = b1;
    a2 = b2;
}

template <class State>
void check_health(const PeriodicGrid& g, const Stack& y, double t, double threshold) {
    const double m = stack_max(y);
    if (!std::isfinite(m) || m > threshold) throw BlowupError(t, m);
    for (const auto& c : y) {
        const double tail = spectral_tail_fraction(g, c);
        if (tail > 1e-3) throw ResolutionError(t, tail);
    }
}

inline void require_resolved(const PeriodicGrid& g, const Stack& y) {
    for (const auto& c : y) {
        const double tail = spectral_tail_fraction(g, c);
        if (tail > 1e-8) throw ResolutionError(0.0, tail);
    }
}

} // namespace detail

// ---------------------------------------------------------------------------
// per-system drivers
// ---------------------------------------------------------------------------

inline Trajectory<StateNLS> evolve_nls(const PeriodicGrid& g, StateNLS s0,
                                       const EvolutionConfig& cfg) {
    using detail::Stack;
    EvalOptions opts{cfg.mean_policy, cfg.dealias};
    detail::StepperDef def;
    def.nonlinear = [&](const Stack& y) -> Stack {
        CVec u = y[0], out(g.n);
        for (std::size_t i = 0; i < g.n; ++i)
            out[i] = cplx(0, 0.5) * std::norm(u[i]) * u[i];
        if (cfg.dealias) out = dealias(g, out);
        return {out};
    };
    def.apply_linear = [&](Stack& y, double tau) {
        CVec F = fft(g, y[0]);
        for (std::size_t i = 0; i < g.n; ++i) {
            const double k2 = g.k(i) * g.k(i);
            F[i] *= std::exp(cplx(0, -k2 * tau));
        }
        y[0] = ifft(g, F);
    };
    def.full_rhs = [&](const Stack& y) -> Stack { return {rhs_nls(g, {y[0]}, opts)}; };

    Stack y{cfg.dealias ? dealias(g, s0.u) : s0.u};
    detail::require_resolved(g, y);
    Trajectory<StateNLS> traj;
    traj.grid = g;
    const std::size_t steps = std::size_t(std::llround(cfg.t_final / cfg.dt));
    auto record = [&](double t) {
        StateNLS s{y[0]};
        MonitorRow row;
        row.t = t;
        row.hamiltonian = hamiltonian_nls(g, s);
        RVec m2(g.n);
        for (std::size_t i = 0; i < g.n; ++i) m2[i] = std::norm(y[0][i]);
        row.mass = integrate(g, m2);
        traj.times.push_back(t);
        traj.snapshots.push_back(std::move(s));
        traj.monitors.push_back(row);
    };
    record(0.0);
    for (std::size_t n = 1; n <= steps; ++n) {
        if (cfg.scheme == Scheme::ifrk4) detail::step_ifrk4(y, cfg.dt, def);
        else detail::step_rk4(y, cfg.dt, def);
        const double t = double(n) * cfg.dt;
        detail::check_health<StateNLS>(g, y, t, cfg.blowup_threshold);
        if (n % cfg.snapshot_stride == 0 || n == steps) record(t);
    }
    return traj;
}

inline Trajectory<StateSys1> evolve_sys1(const PeriodicGrid& g, StateSys1 s0,
                                         const SU2Generator& J, const EvolutionConfig& cfg) {
    using detail::Stack;
    EvalOptions opts{cfg.mean_policy, cfg.dealias};
    NonlocalLog log;
    detail::StepperDef def;
    auto nl = [&](const Stack& y) -> Stack {
        StateSys1 s{{y[0], y[1]}};
        SpinorField uxxJ = dx(g, dx(g, s.u));
        SpinorField full = rhs_sys1(g, s, J, opts, &log);
        for (std::size_t i = 0; i < g.n; ++i) {
            const Spinor l = detail::at(uxxJ, i) * J.matrix;
            full.c1[i] -= l(0);
            full.c2[i] -= l(1);
        }
        return {full.c1, full.c2};
    };
    def.nonlinear = nl;
    def.apply_linear = [&](Stack& y, double tau) {
        CVec F1 = fft(g, y[0]), F2 = fft(g, y[1]);
        for (std::size_t i = 0; i < g.n; ++i) {
            const double ang = -g.k(i) * g.k(i) * tau;
            detail::rotate_pair(F1[i], F2[i], J.matrix, ang);
        }
        y[0] = ifft(g, F1);
        y[1] = ifft(g, F2);
    };
    def.full_rhs = [&](const Stack& y) -> Stack {
        StateSys1 s{{y[0], y[1]}};
        SpinorField r = rhs_sys1(g, s, J, opts, &log);
        return {r.c1, r.c2};
    };

    Stack y{s0.u.c1, s0.u.c2};
    if (cfg.dealias) { y[0] = dealias(g, y[0]); y[1] = dealias(g, y[1]); }
    detail::require_resolved(g, y);
    Trajectory<StateSys1> traj;
    traj.grid = g;
    const std::size_t steps = std::size_t(std::llround(cfg.t_final / cfg.dt));
    auto record = [&](double t) {
        StateSys1 s{{y[0], y[1]}};
        MonitorRow row;
        row.t = t;
        row.hamiltonian = hamiltonian_sys1(g, s, J);
        RVec m2(g.n);
        for (std::size_t i = 0; i < g.n; ++i) m2[i] = std::norm(y[0][i]) + std::norm(y[1][i]);
        row.mass = integrate(g, m2);
        row.removed_mean_comm = log.comm_mean;
        traj.times.push_back(t);
        traj.snapshots.push_back(std::move(s));
        traj.monitors.push_back(row);
    };
    record(0.0);
    for (std::size_t n = 1; n <= steps; ++n) {
        if (cfg.scheme == Scheme::ifrk4) detail::step_ifrk4(y, cfg.dt, def);
        else detail::step_rk4(y, cfg.dt, def);
        const double t = double(n) * cfg.dt;
        detail::check_health<StateSys1>(g, y, t, cfg.blowup_threshold);
        if (n % cfg.snapshot_stride == 0 || n == steps) record(t);
    }
    return traj;
}

inline Trajectory<StateSys2> evolve_sys2(const PeriodicGrid& g, StateSys2 s0,
                                         const SU2Generator& J, const EvolutionConfig& cfg) {
    using detail::Stack;
    EvalOptions opts{cfg.mean_policy, cfg.dealias};
    NonlocalLog log;
    detail::StepperDef def;
    auto unpack = [&](const Stack& y) {
        StateSys2 s;
        s.v.resize(g.n);
        for (std::size_t i = 0; i < g.n; ++i) s.v[i] = y[0][i].real();
        s.u = {y[1], y[2]};
        return s;
    };
    def.nonlinear = [&](const Stack& y) -> Stack {
        StateSys2 s = unpack(y);
        RhsSys2 r = rhs_sys2(g, s, J, opts, &log);
        SpinorField uxxJ = dx(g, dx(g, s.u));
        for (std::size_t i = 0; i < g.n; ++i) {
            const Spinor l = detail::at(uxxJ, i) * J.matrix;
            r.u_t.c1[i] -= l(0);
            r.u_t.c2[i] -= l(1);
        }
        CVec vt(r.v_t.begin(), r.v_t.end());
        return {vt, r.u_t.c1, r.u_t.c2};
    };
    def.apply_linear = [&](Stack& y, double tau) {
        CVec F1 = fft(g, y[1]), F2 = fft(g, y[2]);
        for (std::size_t i = 0; i < g.n; ++i) {
            const double ang = -g.k(i) * g.k(i) * tau;
            detail::rotate_pair(F1[i], F2[i], J.matrix, ang);
        }
        y[1] = ifft(g, F1);
        y[2] = ifft(g, F2);
    };
    def.full_rhs = [&](const Stack& y) -> Stack {
        StateSys2 s = unpack(y);
        RhsSys2 r = rhs_sys2(g, s, J, opts, &log);
        CVec vt(r.v_t.begin(), r.v_t.end());
        return {vt, r.u_t.c1, r.u_t.c2};
    };

    CVec v0(s0.v.begin(), s0.v.end());
    Stack y{v0, s0.u.c1, s0.u.c2};
    if (cfg.dealias)
        for (auto& c : y) c = dealias(g, c);
    detail::require_resolved(g, y);
    Trajectory<StateSys2> traj;
    traj.grid = g;
    const std::size_t steps = std::size_t(std::llround(cfg.t_final / cfg.dt));
    auto record = [&](double t) {
        StateSys2 s = unpack(y);
        MonitorRow row;
        row.t = t;
        row.hamiltonian = hamiltonian_sys2(g, s, J);
        RVec m2(g.n);
        for (std::size_t i = 0; i < g.n; ++i) m2[i] = std::norm(s.u.c1[i]) + std::norm(s.u.c2[i]);
        row.mass = integrate(g, m2);
        row.v_integral = integrate(g, s.v);
        row.removed_mean_comm = log.comm_mean;
        row.removed_mean_v = log.v_comm_mean;
        traj.times.push_back(t);
        traj.snapshots.push_back(std::move(s));
        traj.monitors.push_back(row);
    };
    record(0.0);
    for (std::size_t n = 1; n <= steps; ++n) {
        if (cfg.scheme == Scheme::ifrk4) detail::step_ifrk4(y, cfg.dt, def);
        else detail::step_rk4(y, cfg.dt, def);
        const double t = double(n) * cfg.dt;
        detail::check_health<StateSys2>(g, y, t, cfg.blowup_threshold);
        if (n % cfg.snapshot_stride == 0 || n == steps) record(t);
    }
    return traj;
}

// ---------------------------------------------------------------------------
// reports and serialization
// ---------------------------------------------------------------------------

struct ConservationReport {
    double hamiltonian_drift = 0;   // max |H(t) - H(0)| / max(|H(0)|, 1e-30)
    double mass_drift = 0;
    double v_integral_drift = 0;
    double max_removed_mean = 0;
};

template <class State>
ConservationReport conservation_report(const Trajectory<State>& traj) {
    if (traj.monitors.size() < 2) throw std::invalid_argument("need >= 2 snapshots");
    ConservationReport rep;
    const auto& m0 = traj.monitors.front();
    for (const auto& m : traj.monitors) {
        rep.hamiltonian_drift = std::max(rep.hamiltonian_drift,
                                         std::abs(m.hamiltonian - m0.hamiltonian));
        rep.mass_drift = std::max(rep.mass_drift, std::abs(m.mass - m0.mass));
        rep.v_integral_drift = std::max(rep.v_integral_drift,
                                        std::abs(m.v_integral - m0.v_integral));
        rep.max_removed_mean = std::max({rep.max_removed_mean, m.removed_mean_comm,
                                         m.removed_mean_v});
    }
    rep.hamiltonian_drift /= std::max(std::abs(m0.hamiltonian), 1e-30);
    rep.mass_drift /= std::max(std::abs(m0.mass), 1e-30);
    return rep;
}

inline void write_monitors_csv(const std::string& path, const std::vector<MonitorRow>& rows) {
    std::ofstream os(path);
    os.precision(17);
    os << "t,hamiltonian,mass,v_integral,removed_mean_comm,removed_mean_v\n";
    for (const auto& r : rows)
        os << r.t << "," << r.hamiltonian << "," << r.mass << "," << r.v_integral << ","
           << r.removed_mean_comm << "," << r.removed_mean_v << "\n";
}

namespace detail {

inline std::string snap_name(std::size_t i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04zu.bin", i);
    return buf;
}

} // namespace detail

template <class State>
void write_trajectory(const std::string& dir, const Trajectory<State>& traj);

template <>
inline void write_trajectory<StateNLS>(const std::string& dir, const Trajectory<StateNLS>& traj) {
    namespace fs = std::filesystem;
    fs::create_directories(fs::path(dir) / "snapshots");
    write_monitors_csv((fs::path(dir) / "monitors.csv").string(), traj.monitors);
    for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
        FieldData f{traj.grid, 1, {traj.snapshots[i].u}};
        write_field_bin((fs::path(dir) / "snapshots" / detail::snap_name(i)).string(), f);
    }
}

template <>
inline void write_trajectory<StateSys1>(const std::string& dir, const Trajectory<StateSys1>& traj) {
    namespace fs = std::filesystem;
    fs::create_directories(fs::path(dir) / "snapshots");
    write_monitors_csv((fs::path(dir) / "monitors.csv").string(), traj.monitors);
    for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
        FieldData f{traj.grid, 2, {traj.snapshots[i].u.c1, traj.snapshots[i].u.c2}};
        write_field_bin((fs::path(dir) / "snapshots" / detail::snap_name(i)).string(), f);
    }
}

template <>
inline void write_trajectory<StateSys2>(const std::string& dir, const Trajectory<StateSys2>& traj) {
    namespace fs = std::filesystem;
    fs::create_directories(fs::path(dir) / "snapshots");
    write_monitors_csv((fs::path(dir) / "monitors.csv").string(), traj.monitors);
    for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
        const auto& s = traj.snapshots[i];
        CVec vc(s.v.begin(), s.v.end());
        FieldData f{traj.grid, 3, {vc, s.u.c1, s.u.c2}};
        write_field_bin((fs::path(dir) / "snapshots" / detail::snap_name(i)).string(), f);
    }
}

// ---------------------------------------------------------------------------
// Lax-sequence construction from trajectories
// ---------------------------------------------------------------------------

inline LaxSequence build_lax_nls(const Trajectory<StateNLS>& traj, double chi) {
    LaxSequence seq;
    seq.grid = traj.grid;
    seq.tag = AlgebraTag::so4;
    seq.chi = chi;
    seq.dt = traj.times.size() > 1 ? traj.times[1] - traj.times[0] : 0;
    for (const auto& s : traj.snapshots) seq.snaps.push_back(lax_nls(traj.grid, s.u, chi));
    return seq;
}

inline LaxSequence build_lax_sys1(const Trajectory<StateSys1>& traj, const SU2Generator& J,
                                  double chi, MeanPolicy policy = MeanPolicy::project) {
    LaxSequence seq;
    seq.grid = traj.grid;
    seq.tag = AlgebraTag::su4;
    seq.chi = chi;
    seq.dt = traj.times.size() > 1 ? traj.times[1] - traj.times[0] : 0;
    for (const auto& s : traj.snapshots)
        seq.snaps.push_back(lax_sys1(traj.grid, s.u, J, chi, policy));
    return seq;
}

inline LaxSequence build_lax_sys2(const Trajectory<StateSys2>& traj, const SU2Generator& J,
                                  double chi, MeanPolicy policy = MeanPolicy::project) {
    LaxSequence seq;
    seq.grid = traj.grid;
    seq.tag = AlgebraTag::so6;
    seq.chi = chi;
    seq.dt = traj.times.size() > 1 ? traj.times[1] - traj.times[0] : 0;
    for (const auto& s : traj.snapshots)
        seq.snaps.push_back(lax_sys2(traj.grid, s, J, chi, policy));
    return seq;
}

} // namespace qnls

#endif
