#pragma once

#include <Eigen/Dense>
#include <array>
#include <functional>
#include <iomanip>
#include <ostream>
#include <string>
#include <vector>

#include "pisim/commutant.hpp"
#include "pisim/liouvillian.hpp"
#include "pisim/model.hpp"

namespace pisim {

class step_underflow_error : public std::runtime_error {
public:
    explicit step_underflow_error(const std::string& what) : std::runtime_error(what) {}
};

using RhsFn = std::function<void(double, const Eigen::VectorXcd&, Eigen::VectorXcd&)>;

namespace detail {

inline double error_norm(const Eigen::VectorXcd& err, const Eigen::VectorXcd& y0,
                         const Eigen::VectorXcd& y1, double atol, double rtol) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < err.size(); ++i) {
        const double sc = atol + rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
        const double e = std::abs(err[i]) / sc;
        acc += e * e;
    }
    return std::sqrt(acc / static_cast<double>(err.size()));
}

inline void rk4_step(const RhsFn& rhs, double t, double h, const Eigen::VectorXcd& y,
                     Eigen::VectorXcd& out, std::array<Eigen::VectorXcd, 4>& k) {
    rhs(t, y, k[0]);
    rhs(t + h / 2, y + (h / 2) * k[0], k[1]);
    rhs(t + h / 2, y + (h / 2) * k[1], k[2]);
    rhs(t + h, y + h * k[2], k[3]);
    out = y + (h / 6) * (k[0] + 2.0 * k[1] + 2.0 * k[2] + k[3]);
}

// Dormand-Prince 5(4) tableau
struct DP45 {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                            e4 = 125.0 / 192 - 393.0 / 640, e5 = -2187.0 / 6784 + 92097.0 / 339200,
                            e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;
};

} // namespace detail

struct IntegrateOptions {
    std::string method = "rk45";
    double dt = 0.01;          // output spacing; the fixed rk4 step
    double atol = 1e-10;
    double rtol = 1e-8;
    double dt_min = 1e-12;

    static IntegrateOptions from_grid(const GridSpec& g) {
        IntegrateOptions o;
        o.method = g.method;
        o.dt = g.dt;
        o.atol = g.atol;
        o.rtol = g.rtol;
        return o;
    }
};

/// Drive y' = rhs(t, y) from t0 to t1, invoking observe(t, y) at t0 and at
/// every output time t0 + k dt (ending exactly at t1). rk4 uses dt as its
/// fixed step; rk45 adapts between output times.
inline void integrate_ode(const RhsFn& rhs, Eigen::VectorXcd y, double t0, double t1,
                          const IntegrateOptions& opts,
                          const std::function<void(double, const Eigen::VectorXcd&)>& observe) {
    if (t1 <= t0) throw std::invalid_argument("integrate_ode: t1 must exceed t0");
    if (opts.dt <= 0) throw std::invalid_argument("integrate_ode: dt must be positive");
    observe(t0, y);

    std::vector<double> outputs;
    const double span_eps = 1e-12 * std::max(1.0, std::abs(t1));
    for (std::size_t k = 1; t0 + k * opts.dt < t1 - span_eps; ++k)
        outputs.push_back(t0 + k * opts.dt);
    outputs.push_back(t1);

    if (opts.method == "rk4") {
        std::array<Eigen::VectorXcd, 4> k;
        Eigen::VectorXcd next;
        double t = t0;
        for (double tout : outputs) {
            // land on each output time exactly; interior steps use dt
            while (t < tout - 1e-12) {
                const double h = std::min(opts.dt, tout - t);
                detail::rk4_step(rhs, t, h, y, next, k);
                y.swap(next);
                t += h;
            }
            t = tout;
            observe(t, y);
        }
        return;
    }
    if (opts.method != "rk45")
        throw std::invalid_argument("integrate_ode: unknown method " + opts.method);

    using T = detail::DP45;
    Eigen::VectorXcd k1, k2, k3, k4, k5, k6, k7, y5, err;
    double t = t0;
    double h = opts.dt; // initial guess; adapts immediately
    for (double tout : outputs) {
        while (t < tout - 1e-12 * std::max(1.0, std::abs(tout))) {
            h = std::min(h, tout - t);
            if (h < opts.dt_min)
                throw step_underflow_error("integrate_ode: step size underflow at t = " +
                                           std::to_string(t));
            rhs(t, y, k1);
            rhs(t + T::c2 * h, y + h * (T::a21 * k1), k2);
            rhs(t + T::c3 * h, y + h * (T::a31 * k1 + T::a32 * k2), k3);
            rhs(t + T::c4 * h, y + h * (T::a41 * k1 + T::a42 * k2 + T::a43 * k3), k4);
            rhs(t + T::c5 * h, y + h * (T::a51 * k1 + T::a52 * k2 + T::a53 * k3 + T::a54 * k4),
                k5);
            rhs(t + h,
                y + h * (T::a61 * k1 + T::a62 * k2 + T::a63 * k3 + T::a64 * k4 + T::a65 * k5),
                k6);
            y5 = y + h * (T::b1 * k1 + T::b3 * k3 + T::b4 * k4 + T::b5 * k5 + T::b6 * k6);
            rhs(t + h, y5, k7);
            err = h * (T::e1 * k1 + T::e3 * k3 + T::e4 * k4 + T::e5 * k5 + T::e6 * k6 +
                       T::e7 * k7);
            const double en = detail::error_norm(err, y, y5, opts.atol, opts.rtol);
            if (en <= 1.0) {
                t += h;
                y.swap(y5);
            }
            const double factor = (en == 0.0) ? 5.0 : 0.9 * std::pow(en, -0.2);
            h *= std::clamp(factor, 0.2, 5.0);
        }
        t = tout;
        observe(t, y);
    }
}

/// Time series of a commutant-projected evolution: recorded output times
/// with nu-block weights and trace, plus (possibly thinned) component
/// snapshots for observable evaluation.
struct Trajectory {
    IndexPtr index;
    std::vector<double> times;                   // every output time
    Eigen::MatrixXd block_weights;               // times x partitions
    std::vector<double> trace;                   // Re Tr(rho)
    std::vector<double> snapshot_times;
    std::vector<Eigen::VectorXcd> snapshots;
};

/// Integrate the projected master equation. rho0 must be a Hermitian
/// trace-1 component vector; trace drift beyond 1e-6 aborts (it signals an
/// assembly bug, not physics).
inline Trajectory integrate(const LiouvillianMatrix& L, const PIOperator& rho0, double t0,
                            double t1, const IntegrateOptions& opts, int thin = 1) {
    const IndexPtr index = L.index();
    if (std::abs(rho0.trace().real() - 1.0) > 1e-10 || std::abs(rho0.trace().imag()) > 1e-10)
        throw std::invalid_argument("integrate: initial state must have trace 1");
    if (!rho0.hermitian(1e-10))
        throw std::invalid_argument("integrate: initial state components are not Hermitian");

    Trajectory traj;
    traj.index = index;
    const RhsFn rhs = [&L](double t, const Eigen::VectorXcd& y, Eigen::VectorXcd& dy) {
        L.apply_into(y, t, dy);
    };
    std::size_t count = 0;
    std::vector<Eigen::VectorXd> weight_rows;
    Eigen::VectorXcd last_state;
    const auto observe = [&](double t, const Eigen::VectorXcd& y) {
        PIOperator state(index, y);
        const double tr = state.trace().real();
        if (std::abs(tr - 1.0) > 1e-6)
            throw std::runtime_error("integrate: trace drifted to " + std::to_string(tr) +
                                     " at t = " + std::to_string(t) +
                                     " (Liouvillian is not trace preserving)");
        traj.times.push_back(t);
        traj.trace.push_back(tr);
        weight_rows.push_back(state.block_weights());
        if (count % static_cast<std::size_t>(std::max(1, thin)) == 0) {
            traj.snapshot_times.push_back(t);
            traj.snapshots.push_back(y);
        }
        last_state = y;
        ++count;
    };
    integrate_ode(rhs, rho0.components(), t0, t1, opts, observe);
    if (traj.snapshot_times.back() != traj.times.back()) {
        traj.snapshot_times.push_back(traj.times.back());
        traj.snapshots.push_back(last_state);
    }
    traj.block_weights.resize(weight_rows.size(), index->num_partitions());
    for (std::size_t i = 0; i < weight_rows.size(); ++i)
        traj.block_weights.row(i) = weight_rows[i].transpose();
    return traj;
}

inline Trajectory integrate(const LiouvillianMatrix& L, const PIOperator& rho0,
                            const GridSpec& grid) {
    return integrate(L, rho0, grid.t0, grid.t1, IntegrateOptions::from_grid(grid), grid.thin);
}

/// Observable table evaluated on the trajectory snapshots.
struct ObservableTable {
    std::vector<std::string> names;
    std::vector<double> times;
    std::vector<std::vector<cdouble>> values; // per time, per observable
    std::vector<double> purity;
    Eigen::MatrixXd block_weights;            // per snapshot time
};

inline ObservableTable record_observables(const Trajectory& traj,
                                          const std::vector<std::pair<std::string, PIOperator>>&
                                              observables) {
    ObservableTable table;
    for (const auto& [name, op] : observables) table.names.push_back(name);
    table.times = traj.snapshot_times;
    table.block_weights.resize(traj.snapshots.size(), traj.index->num_partitions());
    for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
        PIOperator state(traj.index, traj.snapshots[i]);
        std::vector<cdouble> row;
        row.reserve(observables.size());
        for (const auto& [name, op] : observables) row.push_back(expectation(op, state));
        table.values.push_back(std::move(row));
        table.purity.push_back(purity(state));
        table.block_weights.row(i) = state.block_weights().transpose();
    }
    return table;
}

/// CSV: one row per time; columns t, Re/Im per observable, purity, w_nu per
/// partition (labels like "w[2.1]" for nu = (2,1)).
inline void write_csv(std::ostream& os, const ObservableTable& table, const CommutantIndex& index) {
    os << "t";
    for (const std::string& n : table.names) os << ",Re(" << n << "),Im(" << n << ")";
    os << ",purity";
    for (std::size_t nu = 0; nu < index.num_partitions(); ++nu)
        os << ",w[" << index.partition(nu).label() << "]";
    os << "\n";
    os << std::setprecision(15);
    for (std::size_t i = 0; i < table.times.size(); ++i) {
        os << table.times[i];
        for (const cdouble& v : table.values[i]) os << "," << v.real() << "," << v.imag();
        os << "," << table.purity[i];
        for (Eigen::Index nu = 0; nu < table.block_weights.cols(); ++nu)
            os << "," << table.block_weights(i, nu);
        os << "\n";
    }
}

} // namespace pisim
