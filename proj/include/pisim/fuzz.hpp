#pragma once

#include <random>

#include "pisim/model.hpp"

namespace pisim {

/// Random PI model for oracle cross-validation: random Hermitian local
/// Hamiltonian, random complex local and collective jumps, rates drawn from
/// [-1, 1] (every third model gets a sinusoidal rate), rotating initial
/// state kinds, and a few Hermitian collective observables.
inline ModelSpec make_fuzz_model(int N, int d, std::mt19937_64& rng, int variant = 0) {
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    std::uniform_real_distribution<double> pos(0.5, 2.0);

    const auto random_matrix = [&](int dim) {
        Eigen::MatrixXcd m(dim, dim);
        for (int r = 0; r < dim; ++r)
            for (int c = 0; c < dim; ++c) m(r, c) = cdouble{uni(rng), uni(rng)};
        return m;
    };
    const auto random_hermitian = [&](int dim) {
        const Eigen::MatrixXcd m = random_matrix(dim);
        return Eigen::MatrixXcd((m + m.adjoint()) / 2.0);
    };

    ModelSpec spec;
    spec.N = N;
    spec.d = d;

    HamiltonianTerm h;
    h.matrix = random_hermitian(d);
    h.coeff = Schedule::constant(1.0);
    spec.hamiltonian.push_back(std::move(h));

    // unit Frobenius norm keeps negative-rate growth within double precision
    Channel loc;
    loc.scope = Channel::Scope::Local;
    loc.jump = random_matrix(d);
    loc.jump /= loc.jump.norm();
    loc.rate = (variant % 3 == 1)
                   ? Schedule::sinusoidal(uni(rng), pos(rng), uni(rng), 0.5 * uni(rng))
                   : Schedule::constant(uni(rng));
    spec.channels.push_back(std::move(loc));

    Channel col;
    col.scope = Channel::Scope::Collective;
    col.jump = random_matrix(d);
    col.jump /= col.jump.norm() * std::sqrt(static_cast<double>(N));
    col.rate = (variant % 3 == 2)
                   ? Schedule::sinusoidal(uni(rng), pos(rng), uni(rng), 0.5 * uni(rng))
                   : Schedule::constant(uni(rng));
    spec.channels.push_back(std::move(col));

    switch (variant % 3) {
        case 0:
            spec.initial_state.kind = InitialState::Kind::MaximallyMixed;
            break;
        case 1: {
            spec.initial_state.kind = InitialState::Kind::PureProduct;
            Eigen::VectorXcd phi(d);
            for (int k = 0; k < d; ++k) phi[k] = cdouble{uni(rng), uni(rng)};
            phi.normalize();
            for (int k = 0; k < d; ++k) spec.initial_state.amplitudes.push_back(phi[k]);
            break;
        }
        case 2: {
            spec.initial_state.kind = InitialState::Kind::SymmetricBasis;
            std::vector<int> content(d, 0);
            std::uniform_int_distribution<int> level(0, d - 1);
            for (int n = 0; n < N; ++n) content[level(rng)] += 1;
            spec.initial_state.content = content;
            break;
        }
    }

    for (int o = 0; o < 2; ++o) {
        Observable ob;
        ob.name = "O" + std::to_string(o);
        ob.local = random_hermitian(d);
        spec.observables.push_back(std::move(ob));
    }
    Observable sz;
    sz.name = "Jz";
    sz.local = Eigen::MatrixXcd::Zero(d, d);
    for (int k = 0; k < d; ++k) sz.local(k, k) = k - (d - 1) / 2.0;
    spec.observables.push_back(std::move(sz));

    spec.grid.t0 = 0.0;
    spec.grid.t1 = 1.0;
    spec.grid.dt = 0.1;
    spec.grid.method = "rk45";
    spec.grid.atol = 1e-13;
    spec.grid.rtol = 1e-11;
    return spec;
}

/// Random model with an added p-particle channel pair (used for the
/// Appendix D cross-validation).
inline ModelSpec make_fuzz_model_p(int N, int d, int p, std::mt19937_64& rng, int variant = 0) {
    ModelSpec spec = make_fuzz_model(N, d, rng, variant);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    const int pdim = static_cast<int>(std::llround(std::pow(d, p)));

    // symmetrize a random matrix over factor permutations
    const auto symmetrized = [&](Eigen::MatrixXcd m) {
        Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(pdim, pdim);
        std::vector<int> perm(p);
        for (int k = 0; k < p; ++k) perm[k] = k;
        int count = 0;
        do {
            Eigen::MatrixXcd P = Eigen::MatrixXcd::Zero(pdim, pdim);
            for (int idx = 0; idx < pdim; ++idx) {
                int rem = idx, out = 0;
                std::vector<int> digits(p);
                for (int k = p - 1; k >= 0; --k) {
                    digits[k] = rem % d;
                    rem /= d;
                }
                for (int k = 0; k < p; ++k) out = out * d + digits[perm[k]];
                P(out, idx) = 1.0;
            }
            acc += P * m * P.adjoint();
            ++count;
        } while (std::next_permutation(perm.begin(), perm.end()));
        return Eigen::MatrixXcd(acc / static_cast<double>(count));
    };

    const auto random_p_matrix = [&]() {
        Eigen::MatrixXcd m(pdim, pdim);
        for (int r = 0; r < pdim; ++r)
            for (int c = 0; c < pdim; ++c) m(r, c) = cdouble{uni(rng), uni(rng)};
        return m;
    };

    Channel locp;
    locp.scope = Channel::Scope::Local;
    locp.p = p;
    locp.jump = symmetrized(random_p_matrix());
    locp.rate = Schedule::constant(uni(rng));
    spec.channels.push_back(std::move(locp));

    Channel colp;
    colp.scope = Channel::Scope::Collective;
    colp.p = p;
    colp.jump = symmetrized(random_p_matrix());
    colp.rate = Schedule::constant(uni(rng));
    spec.channels.push_back(std::move(colp));
    return spec;
}

} // namespace pisim
