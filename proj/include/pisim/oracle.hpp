#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <vector>

#include "pisim/evolve.hpp"
#include "pisim/model.hpp"
#include "pisim/pparticle.hpp"

namespace pisim::oracle {

using SparseOp = Eigen::SparseMatrix<cdouble>;

/// Embed a d^p x d^p operator on the given qudits (1-based, ascending) of an
/// N-qudit register; basis index has qudit 1 as the most significant digit.
inline SparseOp embed(const Eigen::MatrixXcd& X, int N, int d, const std::vector<int>& sites) {
    const int p = static_cast<int>(sites.size());
    const std::size_t dim = static_cast<std::size_t>(std::llround(std::pow(d, N)));
    const int pdim = static_cast<int>(std::llround(std::pow(d, p)));
    if (X.rows() != pdim || X.cols() != pdim)
        throw std::invalid_argument("embed: operator is not d^p square");

    std::vector<Eigen::Triplet<cdouble>> trip;
    std::vector<int> digits(N);
    std::vector<int> weights(N); // weight of each site digit in the flat index
    for (int n = 0; n < N; ++n)
        weights[n] = static_cast<int>(std::llround(std::pow(d, N - 1 - n)));

    for (std::size_t col = 0; col < dim; ++col) {
        std::size_t rem = col;
        for (int n = 0; n < N; ++n) {
            digits[n] = static_cast<int>(rem / weights[n]);
            rem %= weights[n];
        }
        int j = 0;
        for (int k = 0; k < p; ++k) j = j * d + digits[sites[k] - 1];
        for (int i = 0; i < pdim; ++i) {
            if (X(i, j) == cdouble{0.0, 0.0}) continue;
            std::size_t row = col;
            int ii = i;
            for (int k = p - 1; k >= 0; --k) {
                const int digit = ii % d;
                ii /= d;
                row += static_cast<std::size_t>(digit - digits[sites[k] - 1]) *
                       weights[sites[k] - 1];
            }
            trip.emplace_back(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col),
                              X(i, j));
        }
    }
    SparseOp out(dim, dim);
    out.setFromTriplets(trip.begin(), trip.end());
    return out;
}

/// Permutation operator swapping qudits a and b (1-based).
inline SparseOp swap_op(int N, int d, int a, int b) {
    const std::size_t dim = static_cast<std::size_t>(std::llround(std::pow(d, N)));
    std::vector<Eigen::Triplet<cdouble>> trip;
    std::vector<int> digits(N);
    for (std::size_t col = 0; col < dim; ++col) {
        std::size_t rem = col;
        for (int n = N - 1; n >= 0; --n) {
            digits[n] = static_cast<int>(rem % d);
            rem /= d;
        }
        std::swap(digits[a - 1], digits[b - 1]);
        std::size_t row = 0;
        for (int n = 0; n < N; ++n) row = row * d + digits[n];
        trip.emplace_back(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col), 1.0);
    }
    SparseOp out(dim, dim);
    out.setFromTriplets(trip.begin(), trip.end());
    return out;
}

inline std::vector<std::vector<int>> ascending_tuples(int N, int p) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur;
    auto rec = [&](auto&& self, int next) -> void {
        if (static_cast<int>(cur.size()) == p) {
            out.push_back(cur);
            return;
        }
        for (int n = next; n <= N; ++n) {
            cur.push_back(n);
            self(self, n + 1);
            cur.pop_back();
        }
    };
    rec(rec, 1);
    return out;
}

/// Full d^N-space master equation in the computational basis; deliberately
/// simple and independent of the commutant machinery.
struct FullModel {
    int N = 0, d = 0;
    std::size_t dim = 0;
    struct HTerm {
        SparseOp op;
        Schedule coeff;
    };
    struct DTerm {
        std::vector<SparseOp> jumps; // per tuple for local, one sum for collective
        std::vector<SparseOp> jj;    // matching L^dagger L
        Schedule rate;
    };
    std::vector<HTerm> h_terms;
    std::vector<DTerm> channels;
};

inline FullModel build_full(const ModelSpec& spec, std::size_t dim_cap = 4096) {
    FullModel fm;
    fm.N = spec.N;
    fm.d = spec.d;
    const double dimf = std::pow(static_cast<double>(spec.d), spec.N);
    if (dimf > static_cast<double>(dim_cap))
        throw resource_error("build_full: d^N = " + std::to_string(dimf) + " exceeds cap " +
                             std::to_string(dim_cap));
    fm.dim = static_cast<std::size_t>(std::llround(dimf));

    for (const HamiltonianTerm& h : spec.hamiltonian) {
        SparseOp sum(fm.dim, fm.dim);
        for (const auto& tuple : ascending_tuples(spec.N, h.p))
            sum += embed(h.matrix, spec.N, spec.d, tuple);
        fm.h_terms.push_back({std::move(sum), h.coeff});
    }
    for (const Channel& ch : spec.channels) {
        FullModel::DTerm term;
        term.rate = ch.rate;
        if (ch.scope == Channel::Scope::Local) {
            for (const auto& tuple : ascending_tuples(spec.N, ch.p))
                term.jumps.push_back(embed(ch.jump, spec.N, spec.d, tuple));
        } else {
            SparseOp sum(fm.dim, fm.dim);
            for (const auto& tuple : ascending_tuples(spec.N, ch.p))
                sum += embed(ch.jump, spec.N, spec.d, tuple);
            term.jumps.push_back(std::move(sum));
        }
        for (const SparseOp& L : term.jumps)
            term.jj.push_back(SparseOp(L.adjoint()) * L);
        fm.channels.push_back(std::move(term));
    }

    // PI sanity: collective sums commute with adjacent swaps (small dims only)
    if (fm.dim <= 256 && spec.N >= 2) {
        for (int n = 1; n < spec.N; ++n) {
            const SparseOp P = swap_op(spec.N, spec.d, n, n + 1);
            for (const auto& h : fm.h_terms) {
                const double dev =
                    (Eigen::MatrixXcd(P * h.op * P.adjoint()) - Eigen::MatrixXcd(h.op))
                        .cwiseAbs()
                        .maxCoeff();
                if (dev > 1e-10)
                    throw std::logic_error("build_full: embedded Hamiltonian is not PI");
            }
        }
    }
    return fm;
}

/// drho/dt = i [rho, H(t)] + sum_k gamma_k(t) (L rho L^dag - {L^dag L, rho}/2).
inline void full_rhs(const FullModel& fm, double t, const Eigen::MatrixXcd& rho,
                     Eigen::MatrixXcd& drho) {
    drho.setZero(rho.rows(), rho.cols());
    for (const auto& h : fm.h_terms) {
        const double c = h.coeff(t);
        if (c == 0.0) continue;
        drho += cdouble{0.0, c} * (rho * h.op - h.op * rho);
    }
    for (const auto& ch : fm.channels) {
        const double g = ch.rate(t);
        if (g == 0.0) continue;
        for (std::size_t k = 0; k < ch.jumps.size(); ++k) {
            const auto& L = ch.jumps[k];
            const auto& JJ = ch.jj[k];
            drho += g * (Eigen::MatrixXcd(L * rho * L.adjoint()) -
                         0.5 * (JJ * rho + rho * JJ));
        }
    }
}

/// Initial density matrix in the computational basis for the PI-expressible
/// initial state kinds (explicit commutant components have no full-space
/// form without a Schur transform and are rejected).
inline Eigen::MatrixXcd initial_full(const ModelSpec& spec) {
    const std::size_t dim = static_cast<std::size_t>(std::llround(std::pow(spec.d, spec.N)));
    switch (spec.initial_state.kind) {
        case InitialState::Kind::MaximallyMixed:
            return Eigen::MatrixXcd::Identity(dim, dim) / static_cast<double>(dim);
        case InitialState::Kind::PureProduct: {
            Eigen::VectorXcd psi = Eigen::VectorXcd::Ones(1);
            Eigen::VectorXcd site(spec.d);
            for (int k = 0; k < spec.d; ++k) site[k] = spec.initial_state.amplitudes[k];
            for (int n = 0; n < spec.N; ++n) {
                Eigen::VectorXcd next(psi.size() * spec.d);
                for (Eigen::Index i = 0; i < psi.size(); ++i)
                    for (int k = 0; k < spec.d; ++k) next[i * spec.d + k] = psi[i] * site[k];
                psi = std::move(next);
            }
            return psi * psi.adjoint();
        }
        case InitialState::Kind::SymmetricBasis: {
            Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(dim);
            std::vector<int> digits(spec.N);
            std::size_t hits = 0;
            for (std::size_t idx = 0; idx < dim; ++idx) {
                std::size_t rem = idx;
                std::vector<int> counts(spec.d, 0);
                for (int n = spec.N - 1; n >= 0; --n) {
                    counts[rem % spec.d] += 1;
                    rem /= spec.d;
                }
                if (counts == spec.initial_state.content) {
                    psi[idx] = 1.0;
                    ++hits;
                }
            }
            psi /= std::sqrt(static_cast<double>(hits));
            return psi * psi.adjoint();
        }
        case InitialState::Kind::Components:
            throw std::invalid_argument(
                "initial_full: explicit commutant components are not expressible in the "
                "computational basis without a Schur transform");
    }
    throw std::logic_error("initial_full: unreachable");
}

/// Deviation report of a commutant-vs-full-space comparison. Deviations are
/// scale-normalized, |a - b| / max(1, |a|, |b|): plain absolute error for
/// order-one quantities, relative error when a negative-rate model amplifies
/// the state beyond what any absolute double-precision bound could track.
struct CompareReport {
    std::vector<std::string> names; // per observable
    std::vector<double> max_dev;    // per observable, max over time
    double trace_dev = 0.0;
    double purity_dev = 0.0;

    double worst() const {
        double w = std::max(trace_dev, purity_dev);
        for (double v : max_dev) w = std::max(w, v);
        return w;
    }

    static double normalized(cdouble a, cdouble b) {
        return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
    }
};

/// Integrate both representations with the same method and tolerances and
/// compare trace, purity and every collective observable on the output grid.
inline CompareReport full_evolve_compare(const ModelSpec& spec, std::size_t dim_cap = 4096) {
    const IndexPtr index = CommutantIndex::build(spec.N, spec.d);
    const LiouvillianMatrix L = assemble_model(spec, index);
    const PIOperator rho0 = build_initial_state(spec, index);
    const Trajectory traj = integrate(L, rho0, spec.grid.t0, spec.grid.t1,
                                      IntegrateOptions::from_grid(spec.grid), 1);

    const FullModel fm = build_full(spec, dim_cap);
    Eigen::MatrixXcd rho_full = initial_full(spec);

    std::vector<std::pair<std::string, PIOperator>> obs;
    std::vector<SparseOp> obs_full;
    for (const Observable& o : spec.observables) {
        obs.emplace_back(o.name, collective_components(o.local, index));
        SparseOp sum(fm.dim, fm.dim);
        for (int n = 1; n <= spec.N; ++n) sum += embed(o.local, spec.N, spec.d, {n});
        obs_full.push_back(std::move(sum));
    }
    const ObservableTable table = record_observables(traj, obs);

    CompareReport report;
    for (const Observable& o : spec.observables) report.names.push_back(o.name);
    report.max_dev.assign(spec.observables.size(), 0.0);

    Eigen::MatrixXcd scratch;
    std::size_t step = 0;
    const RhsFn rhs = [&](double t, const Eigen::VectorXcd& y, Eigen::VectorXcd& dy) {
        const Eigen::Map<const Eigen::MatrixXcd> rho(y.data(), fm.dim, fm.dim);
        full_rhs(fm, t, rho, scratch);
        dy = Eigen::Map<const Eigen::VectorXcd>(scratch.data(), scratch.size());
    };
    const auto observe = [&](double t, const Eigen::VectorXcd& y) {
        (void)t;
        const Eigen::Map<const Eigen::MatrixXcd> rho(y.data(), fm.dim, fm.dim);
        report.trace_dev = std::max(
            report.trace_dev, CompareReport::normalized(rho.trace(), traj.trace[step]));
        const double purity_full = (rho * rho).trace().real();
        report.purity_dev = std::max(
            report.purity_dev, CompareReport::normalized(purity_full, table.purity[step]));
        for (std::size_t o = 0; o < obs_full.size(); ++o) {
            const cdouble full_val = (Eigen::MatrixXcd(obs_full[o]) * rho).trace();
            report.max_dev[o] = std::max(
                report.max_dev[o], CompareReport::normalized(full_val, table.values[step][o]));
        }
        ++step;
    };
    Eigen::VectorXcd y0 = Eigen::Map<const Eigen::VectorXcd>(rho_full.data(), rho_full.size());
    integrate_ode(rhs, y0, spec.grid.t0, spec.grid.t1, IntegrateOptions::from_grid(spec.grid),
                  observe);
    return report;
}

/// Dimension identity table: per (N, d), sum f^nu(d)^2 vs binom(N+d^2-1, N)
/// and sum f^nu f^nu(d) vs d^N.
struct DimensionAuditRow {
    int N, d;
    uint128 sum_fd_sq, binom_val;
    uint128 sum_f_fd, d_pow_n;
    bool ok() const { return sum_fd_sq == binom_val && sum_f_fd == d_pow_n; }
};

inline std::vector<DimensionAuditRow> dimension_audit(int N_max, int d_max) {
    std::vector<DimensionAuditRow> rows;
    for (int d = 1; d <= d_max; ++d) {
        for (int N = 1; N <= N_max; ++N) {
            DimensionAuditRow row{N, d, 0, 0, 0, 0};
            for (const Partition& nu : partitions_of(N, d)) {
                const uint128 fd = weyl_dim(nu, d);
                row.sum_fd_sq += checked_mul(fd, fd);
                row.sum_f_fd += checked_mul(syt_count(nu), fd);
            }
            row.binom_val = binomial(N + d * d - 1, N);
            row.d_pow_n = 1;
            for (int i = 0; i < N; ++i) row.d_pow_n = checked_mul(row.d_pow_n, d);
            rows.push_back(row);
        }
    }
    return rows;
}

} // namespace pisim::oracle
