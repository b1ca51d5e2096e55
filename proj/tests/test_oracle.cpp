#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "pisim/fuzz.hpp"
#include "pisim/oracle.hpp"

using namespace pisim;
using Catch::Matchers::WithinAbs;

namespace {

Eigen::MatrixXcd s_op(int q) {
    Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero(2, 2);
    if (q == 1) s(1, 0) = 1.0;
    if (q == -1) s(0, 1) = 1.0;
    if (q == 0) {
        s(1, 1) = 0.5;
        s(0, 0) = -0.5;
    }
    return s;
}

} // namespace

TEST_CASE("site embedding") {
    SECTION("collective S_z on two qubits") {
        oracle::SparseOp sum(4, 4);
        for (int n = 1; n <= 2; ++n) sum += oracle::embed(s_op(0), 2, 2, {n});
        const Eigen::MatrixXcd m(sum);
        // basis order 00, 01, 10, 11
        CHECK_THAT(m(0, 0).real(), WithinAbs(-1.0, 1e-15));
        CHECK_THAT(m(1, 1).real(), WithinAbs(0.0, 1e-15));
        CHECK_THAT(m(2, 2).real(), WithinAbs(0.0, 1e-15));
        CHECK_THAT(m(3, 3).real(), WithinAbs(1.0, 1e-15));
    }
    SECTION("single qudit is the identity embedding") {
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> uni(-1.0, 1.0);
        Eigen::MatrixXcd x(3, 3);
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) x(r, c) = cdouble{uni(rng), uni(rng)};
        CHECK((Eigen::MatrixXcd(oracle::embed(x, 1, 3, {1})) - x).cwiseAbs().maxCoeff() == 0.0);
    }
    SECTION("two-site embedding respects digit order") {
        // |i1 i2> with qudit 1 most significant; X = |01><10| on sites (1,2)
        Eigen::MatrixXcd x = Eigen::MatrixXcd::Zero(4, 4);
        x(1, 2) = 1.0;
        const Eigen::MatrixXcd m(oracle::embed(x, 3, 2, {1, 3}));
        // acts on qudits 1 and 3: |0 q 1> -> |0 q 1>? no: maps |1 q 0> -> |0 q 1>
        CHECK_THAT(m(0b001, 0b100).real(), WithinAbs(1.0, 1e-15));
        CHECK_THAT(m(0b011, 0b110).real(), WithinAbs(1.0, 1e-15));
        CHECK_THAT(Eigen::MatrixXcd(m).cwiseAbs().sum(), WithinAbs(2.0, 1e-15));
    }
    SECTION("permutation invariance check fires on construction") {
        ModelSpec spec;
        spec.N = 2;
        spec.d = 2;
        HamiltonianTerm h;
        h.matrix = s_op(0);
        spec.hamiltonian.push_back(std::move(h));
        CHECK_NOTHROW(oracle::build_full(spec));
        CHECK_THROWS_AS(oracle::build_full(spec, 2), resource_error);
    }
}

TEST_CASE("dimension audit") {
    const auto rows = oracle::dimension_audit(10, 4);
    for (const auto& row : rows) {
        CHECK(row.sum_fd_sq == row.binom_val);
        CHECK(row.sum_f_fd == row.d_pow_n);
    }
    const auto it22 = std::find_if(rows.begin(), rows.end(),
                                   [](const auto& r) { return r.N == 2 && r.d == 2; });
    REQUIRE(it22 != rows.end());
    CHECK(it22->sum_fd_sq == 10);
    const auto it33 = std::find_if(rows.begin(), rows.end(),
                                   [](const auto& r) { return r.N == 3 && r.d == 3; });
    REQUIRE(it33 != rows.end());
    CHECK(it33->sum_fd_sq == 165);
    const auto it51 = std::find_if(rows.begin(), rows.end(),
                                   [](const auto& r) { return r.N == 5 && r.d == 1; });
    REQUIRE(it51 != rows.end());
    CHECK(it51->sum_fd_sq == 1);
}

TEST_CASE("unitary dynamics agree with the full space") {
    std::mt19937_64 rng(41);
    ModelSpec spec = make_fuzz_model(3, 2, rng, 1);
    spec.channels.clear(); // keep only the Hamiltonian
    const auto report = oracle::full_evolve_compare(spec);
    CHECK(report.worst() < 1e-9);
}

TEST_CASE("local dephasing on qutrits agrees with the full space") {
    ModelSpec spec;
    spec.N = 2;
    spec.d = 3;
    Channel deph;
    deph.scope = Channel::Scope::Local;
    deph.jump = Eigen::MatrixXcd::Zero(3, 3);
    deph.jump(0, 0) = 1.0;
    deph.jump(1, 1) = -0.5;
    deph.jump(2, 2) = -0.5;
    deph.rate = Schedule::constant(0.8);
    spec.channels.push_back(std::move(deph));
    spec.initial_state.kind = InitialState::Kind::PureProduct;
    const double a = 1.0 / std::sqrt(3.0);
    spec.initial_state.amplitudes = {a, a, a};
    Observable o;
    o.name = "n2";
    o.local = Eigen::MatrixXcd::Zero(3, 3);
    o.local(2, 2) = 1.0;
    spec.observables.push_back(std::move(o));
    const auto report = oracle::full_evolve_compare(spec);
    CHECK(report.worst() < 1e-8);
}

TEST_CASE("random PI models agree with the full space") {
    std::mt19937_64 rng(97);
    for (auto [N, d] : {std::pair{3, 2}, {2, 3}}) {
        for (int k = 0; k < 3; ++k) {
            const ModelSpec spec = make_fuzz_model(N, d, rng, k);
            const auto report = oracle::full_evolve_compare(spec);
            INFO("N=" << N << " d=" << d << " variant " << k);
            CHECK(report.worst() < 1e-8);
        }
    }
    // d = 4 exercises multi-element shift sets in the CGC chains
    for (auto [N, d] : {std::pair{2, 4}, {3, 4}}) {
        for (int k = 0; k < 2; ++k) {
            ModelSpec spec = make_fuzz_model(N, d, rng, k);
            spec.grid.atol = 1e-11;
            spec.grid.rtol = 1e-9;
            const auto report = oracle::full_evolve_compare(spec);
            INFO("N=" << N << " d=" << d << " variant " << k);
            CHECK(report.worst() < 1e-8);
        }
    }
}

TEST_CASE("N = 1 reduces to the single-qudit master equation") {
    // exercises the empty-partition end of the corner-removal chains
    std::mt19937_64 rng(59);
    for (int d = 2; d <= 3; ++d) {
        for (int k = 0; k < 3; ++k) {
            const ModelSpec spec = make_fuzz_model(1, d, rng, k);
            const auto report = oracle::full_evolve_compare(spec);
            INFO("d=" << d << " variant " << k);
            CHECK(report.worst() < 1e-9);
        }
    }
}

TEST_CASE("block weights: conserved under collective dynamics, mixed by local") {
    const auto index = CommutantIndex::build(3, 2);

    ModelSpec col;
    col.N = 3;
    col.d = 2;
    Channel c;
    c.scope = Channel::Scope::Collective;
    c.jump = s_op(-1);
    c.rate = Schedule::constant(1.0);
    col.channels.push_back(std::move(c));
    const Trajectory t_col = integrate(assemble(col, index), maximally_mixed_state(index), 0.0,
                                       1.0, IntegrateOptions{}, 1);
    for (Eigen::Index i = 0; i < t_col.block_weights.rows(); ++i)
        for (Eigen::Index nu = 0; nu < t_col.block_weights.cols(); ++nu)
            CHECK_THAT(t_col.block_weights(i, nu), WithinAbs(t_col.block_weights(0, nu), 1e-9));

    ModelSpec loc;
    loc.N = 3;
    loc.d = 2;
    Channel l;
    l.scope = Channel::Scope::Local;
    l.jump = s_op(0);
    l.rate = Schedule::constant(1.0);
    loc.channels.push_back(std::move(l));
    const PIOperator dicke = symmetric_basis_state({2, 1}, index);
    const Trajectory t_loc =
        integrate(assemble(loc, index), dicke, 0.0, 1.0, IntegrateOptions{}, 1);
    const Eigen::Index last = t_loc.block_weights.rows() - 1;
    CHECK(t_loc.block_weights(0, 1) < 1e-12);      // starts fully symmetric
    CHECK(t_loc.block_weights(last, 1) > 1e-3);    // local noise leaks weight out
}

TEST_CASE("purity cross-check along a trajectory") {
    std::mt19937_64 rng(113);
    const ModelSpec spec = make_fuzz_model(4, 2, rng, 2);
    const auto report = oracle::full_evolve_compare(spec);
    CHECK(report.purity_dev < 1e-8);
    CHECK(report.trace_dev < 1e-9);
}

TEST_CASE("explicit component states are rejected by the oracle") {
    ModelSpec spec;
    spec.N = 2;
    spec.d = 2;
    spec.initial_state.kind = InitialState::Kind::Components;
    CHECK_THROWS_AS(oracle::initial_full(spec), std::invalid_argument);
}
