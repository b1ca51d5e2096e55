#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Eigenvalues>
#include <random>

#include "pisim/fuzz.hpp"
#include "pisim/oracle.hpp"
#include "pisim/pparticle.hpp"

using namespace pisim;
using Catch::Matchers::WithinAbs;

namespace {

Eigen::MatrixXcd random_matrix(int dim, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    Eigen::MatrixXcd m(dim, dim);
    for (int r = 0; r < dim; ++r)
        for (int c = 0; c < dim; ++c) m(r, c) = cdouble{uni(rng), uni(rng)};
    return m;
}

/// All PartitionPaths between nu_L and nu_R for p = 2 (one interior shape
/// on each side is absent; left/right chains have a single removal each,
/// so the path is (nu_c) alone... for p = 2 the path holds left = {mu_l},
/// center, right = {mu_r} with chains nu_L -> mu_l -> nu_c etc.
std::vector<PartitionPath> paths_p2(const Partition& nu_L, const Partition& nu_R) {
    std::vector<PartitionPath> out;
    for (const Partition& ml : remove_corners(nu_L))
        for (const Partition& mr : remove_corners(nu_R))
            for (const Partition& c : remove_corners(ml)) {
                const auto mr_minus = remove_corners(mr);
                if (std::find(mr_minus.begin(), mr_minus.end(), c) == mr_minus.end()) continue;
                PartitionPath path;
                path.left = {ml};
                path.center = c;
                path.right = {mr};
                out.push_back(std::move(path));
            }
    return out;
}

/// Brute-force generalized g operator: sum generalized_threenu over all
/// interior pattern assignments.
Eigen::MatrixXd gen_g_brute(const Partition& nu_L, const GTPattern& W_L,
                            const PartitionPath& path, const Partition& nu_R,
                            const GTPattern& W_R, int d, int p) {
    const int dim = static_cast<int>(std::llround(std::pow(d, p)));
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(dim, dim);
    std::vector<std::vector<GTPattern>> pools;
    for (const Partition& mu : path.left) pools.push_back(swt_enumerate(mu, d));
    pools.push_back(swt_enumerate(path.center, d));
    for (const Partition& mu : path.right) pools.push_back(swt_enumerate(mu, d));

    std::vector<GTPattern> assign;
    auto rec = [&](auto&& self, std::size_t k) -> void {
        if (k == pools.size()) {
            g += generalized_threenu(nu_L, W_L, path, assign, nu_R, W_R, d, p);
            return;
        }
        for (const GTPattern& w : pools[k]) {
            assign.push_back(w);
            self(self, k + 1);
            assign.pop_back();
        }
    };
    rec(rec, 0);
    return g;
}

} // namespace

TEST_CASE("p = 1 reduction of the generalized machinery") {
    std::mt19937_64 rng(31);
    for (auto [N, d] : {std::pair{3, 2}, {2, 3}, {4, 2}}) {
        const auto index = CommutantIndex::build(N, d);
        const KEngine direct(index);
        const GenKEngine gen(index, 1);
        const Eigen::MatrixXcd X = random_matrix(d, rng), Y = random_matrix(d, rng);

        for (std::size_t nu = 0; nu < index->num_partitions(); ++nu) {
            CHECK((gen.k_x(static_cast<int>(nu), X) - direct.k_x(static_cast<int>(nu), X))
                      .cwiseAbs()
                      .maxCoeff() < 1e-12);
            for (int lam : direct.minus_plus_indices(static_cast<int>(nu)))
                CHECK((gen.k_xy(lam, static_cast<int>(nu), X, Y) -
                       direct.k_xy(lam, static_cast<int>(nu), X, Y))
                          .cwiseAbs()
                          .maxCoeff() < 1e-12);
        }
    }
}

TEST_CASE("generalized 3nu reduces to the ordinary symbol at p = 1") {
    const int d = 3;
    for (const Partition& lam : partitions_of(3, d)) {
        for (const Partition& nu : partitions_of(3, d)) {
            for (const Partition& mu : remove_corners(lam)) {
                if (mu.num_parts() > d) continue;
                PartitionPath path;
                path.center = mu;
                for (const auto& wl : swt_enumerate(lam, d))
                    for (const auto& wn : swt_enumerate(nu, d))
                        for (const auto& wm : swt_enumerate(mu, d)) {
                            const auto gen = generalized_threenu(lam, wl, path, {wm}, nu, wn, d, 1);
                            const auto ref = threenu_symbol(lam, wl, mu, wm, nu, wn, d);
                            CHECK((gen - ref).cwiseAbs().maxCoeff() < 1e-14);
                        }
            }
        }
    }
}

TEST_CASE("assemble_p at p = 1 equals the direct assembly") {
    std::mt19937_64 rng(67);
    for (auto [N, d] : {std::pair{3, 2}, {2, 3}}) {
        const auto index = CommutantIndex::build(N, d);
        const ModelSpec spec = make_fuzz_model(N, d, rng, 1);
        const LiouvillianMatrix L1 = assemble(spec, index);
        const LiouvillianMatrix L2 = assemble_p(spec, index);

        PIOperator probe = maximally_mixed_state(index);
        for (double t : {0.0, 0.3, 0.9}) {
            Eigen::VectorXcd a, b;
            L1.apply_into(probe.components(), t, a);
            L2.apply_into(probe.components(), t, b);
            CHECK((a - b).cwiseAbs().maxCoeff() < 1e-12);
        }
        std::uniform_real_distribution<double> uni(-1.0, 1.0);
        for (Eigen::Index i = 0; i < probe.components().size(); ++i)
            probe.components()[i] = cdouble{uni(rng), uni(rng)};
        Eigen::VectorXcd a, b;
        L1.apply_into(probe.components(), 0.5, a);
        L2.apply_into(probe.components(), 0.5, b);
        CHECK((a - b).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("generalized trace rule (p = 2)") {
    for (auto [N, d] : {std::pair{3, 2}, {4, 2}, {3, 3}, {4, 3}}) {
        for (const Partition& nuL : partitions_of(N, d)) {
            for (const Partition& nuR : partitions_of(N, d)) {
                for (const PartitionPath& path : paths_p2(nuL, nuR)) {
                    REQUIRE(generalized_triangular_delta(nuL, path, nuR) == 1);
                    const auto L_swts = swt_enumerate(nuL, d);
                    const auto R_swts = swt_enumerate(nuR, d);
                    for (std::size_t a = 0; a < L_swts.size(); ++a) {
                        for (std::size_t b = 0; b < R_swts.size(); ++b) {
                            const double tr =
                                gen_g_brute(nuL, L_swts[a], path, nuR, R_swts[b], d, 2).trace();
                            const double expect =
                                (nuL == nuR && a == b && path.palindromic()) ? 1.0 : 0.0;
                            CHECK_THAT(tr, WithinAbs(expect, 1e-10));
                        }
                    }
                }
            }
        }
    }
}

TEST_CASE("palindromic-path states are separable density matrices") {
    const int d = 2, N = 4, p = 2;
    for (const Partition& nu : partitions_of(N, d)) {
        for (const PartitionPath& path : paths_p2(nu, nu)) {
            if (!path.palindromic()) continue;
            for (const auto& w : swt_enumerate(nu, d)) {
                const Eigen::MatrixXd rho = gen_g_brute(nu, w, path, nu, w, d, p);
                CHECK_THAT(rho.trace(), WithinAbs(1.0, 1e-12));
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(rho);
                CHECK(es.eigenvalues().minCoeff() > -1e-12);
            }
        }
    }
}

TEST_CASE("p = N paths project onto the coupled states") {
    // N = p = 2: the palindromic path through mu = (1) gives rank-1
    // projectors onto the two-qubit coupled basis states
    const int d = 2;
    for (const Partition& nu : partitions_of(2, d)) {
        for (const PartitionPath& path : paths_p2(nu, nu)) {
            REQUIRE(path.palindromic()); // only one removal chain exists
            for (const auto& w : swt_enumerate(nu, d)) {
                const Eigen::MatrixXd rho = gen_g_brute(nu, w, path, nu, w, d, 2);
                CHECK_THAT(rho.trace(), WithinAbs(1.0, 1e-13));
                CHECK_THAT((rho * rho).trace(), WithinAbs(1.0, 1e-13)); // pure
            }
        }
    }
    // the triplet M = 0 pattern lands on (|01> + |10|)/sqrt(2)
    PartitionPath path;
    path.left = {Partition{1}};
    path.center = Partition{};
    path.right = {Partition{1}};
    const Eigen::MatrixXd rho =
        gen_g_brute(Partition{2}, GTPattern(2, {2, 0, 1}), path, Partition{2},
                    GTPattern(2, {2, 0, 1}), 2, 2);
    Eigen::VectorXd triplet(4);
    triplet << 0, 1 / std::sqrt(2.0), 1 / std::sqrt(2.0), 0;
    CHECK((rho - triplet * triplet.transpose()).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("identity pair gives binom(N, p)") {
    for (auto [N, d, p] : {std::tuple{3, 2, 2}, {4, 2, 2}, {3, 3, 2}, {3, 2, 3}}) {
        const auto index = CommutantIndex::build(N, d);
        const GenKEngine eng(index, p);
        const int pdim = static_cast<int>(std::llround(std::pow(d, p)));
        const Eigen::MatrixXcd one = Eigen::MatrixXcd::Identity(pdim, pdim);
        for (std::size_t nu = 0; nu < index->num_partitions(); ++nu)
            for (int w = 0; w < index->fd(nu); ++w)
                for (int wp = 0; wp < index->fd(nu); ++wp) {
                    const cdouble got = eng.k_coefficient(one, one, static_cast<int>(nu), w, wp,
                                                          static_cast<int>(nu), w, wp);
                    CHECK_THAT(got.real(),
                               WithinAbs(static_cast<double>(binomial(N, p)), 1e-11));
                    CHECK_THAT(got.imag(), WithinAbs(0.0, 1e-12));
                }
    }
}

TEST_CASE("k_x engine trace tables match brute-forced g operators (p = 2)") {
    std::mt19937_64 rng(19);
    const int N = 4, d = 2, p = 2;
    const auto index = CommutantIndex::build(N, d);
    const GenKEngine eng(index, p);
    const Eigen::MatrixXcd X = random_matrix(4, rng);

    for (std::size_t nu = 0; nu < index->num_partitions(); ++nu) {
        for (const auto& lchain : eng.chains(static_cast<int>(nu))) {
            for (const auto& rchain : eng.chains(static_cast<int>(nu))) {
                if (lchain.back() != rchain.back()) continue;
                PartitionPath path;
                path.left = {lchain[1]};
                path.center = lchain[2];
                path.right = {rchain[1]};
                const auto T =
                    eng.trace_table(static_cast<int>(nu), lchain, static_cast<int>(nu), rchain, X);
                const auto& swts = index->swts(nu);
                for (std::size_t a = 0; a < swts.size(); ++a)
                    for (std::size_t b = 0; b < swts.size(); ++b) {
                        const Eigen::MatrixXd g = gen_g_brute(index->partition(nu), swts[a], path,
                                                              index->partition(nu), swts[b], d, p);
                        // Tr[g^dagger X] with real g
                        const cdouble expect = (g.cast<cdouble>().cwiseProduct(X)).sum();
                        CHECK(std::abs(T(a, b) - expect) < 1e-12);
                    }
            }
        }
    }
}

TEST_CASE("p = 2 models agree with the full-space oracle") {
    std::mt19937_64 rng(211);
    const ModelSpec spec = make_fuzz_model_p(3, 2, 2, rng, 0);
    const auto report = oracle::full_evolve_compare(spec);
    CHECK(report.worst() < 1e-8);
}

TEST_CASE("pure p = 2 collective Hamiltonian stays nu-diagonal") {
    const int N = 3, d = 2;
    const auto index = CommutantIndex::build(N, d);
    ModelSpec spec;
    spec.N = N;
    spec.d = d;
    HamiltonianTerm h2;
    h2.p = 2;
    // Ising-type sigma_z x sigma_z (factor-permutation symmetric)
    Eigen::MatrixXcd zz = Eigen::MatrixXcd::Zero(4, 4);
    zz.diagonal() << 1.0, -1.0, -1.0, 1.0;
    h2.matrix = zz;
    spec.hamiltonian.push_back(std::move(h2));
    const LiouvillianMatrix L = assemble_p(spec, index);
    for (const auto& term : L.terms())
        for (const auto& [key, M] : term.blocks) {
            CHECK(key.first == key.second);
            (void)M;
        }
    // and the full oracle agrees
    spec.initial_state.kind = InitialState::Kind::PureProduct;
    const double isq = 1.0 / std::sqrt(2.0);
    spec.initial_state.amplitudes = {isq, cdouble{0.0, isq}};
    Observable o;
    o.name = "Jz";
    o.local = Eigen::MatrixXcd::Zero(2, 2);
    o.local(0, 0) = -0.5;
    o.local(1, 1) = 0.5;
    spec.observables.push_back(std::move(o));
    const auto report = oracle::full_evolve_compare(spec);
    CHECK(report.worst() < 1e-9);
}

TEST_CASE("p-particle guard rails") {
    const auto index = CommutantIndex::build(3, 2);
    ModelSpec spec;
    spec.N = 3;
    spec.d = 2;
    Channel big;
    big.scope = Channel::Scope::Local;
    big.p = 4; // > N
    big.jump = Eigen::MatrixXcd::Identity(16, 16);
    big.rate = Schedule::constant(1.0);
    spec.channels.push_back(std::move(big));
    CHECK_THROWS_AS(assemble_p(spec, index, 4), std::invalid_argument);
    CHECK_THROWS_AS(assemble_p(spec, index), std::invalid_argument); // p cap
    CHECK_THROWS_AS(assemble(spec, index), std::invalid_argument);   // p = 1 only
}
