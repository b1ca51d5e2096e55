// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Tolerances are pinned in code next to each check.

#include <chrono>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

#include "pisim/evolve.hpp"
#include "pisim/fuzz.hpp"
#include "pisim/oracle.hpp"
#include "pisim/pparticle.hpp"
#include "pisim/qubit.hpp"

using namespace pisim;

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

struct Outcome {
    bool pass = true;
    std::string detail;
};

// ---------------------------------------------------------------- criterion 1
Outcome dimension_identities() {
    for (const auto& row : oracle::dimension_audit(10, 4)) {
        if (!row.ok())
            return {false, "mismatch at N=" + std::to_string(row.N) +
                               " d=" + std::to_string(row.d)};
    }
    return {true, "sum f^nu(d)^2 = C(N+d^2-1,N) and sum f^nu f^nu(d) = d^N, N<=10, d<=4, exact"};
}

// ---------------------------------------------------------------- criterion 2
Outcome cgc_orthogonality() {
    double worst = 0.0;
    for (int d = 2; d <= 4; ++d) {
        for (int N = 1; N <= 6; ++N) {
            const auto shapes = partitions_of(N, d);
            // group parents by common child shape; one coefficient matrix per
            // (parent, child), one GEMM per parent pair
            std::map<Partition, std::vector<const Partition*>> by_child;
            for (const Partition& lam : shapes)
                for (const Partition& mu : remove_corners(lam))
                    if (mu.num_parts() <= d) by_child[mu].push_back(&lam);
            for (const auto& [mu, parents] : by_child) {
                const auto mu_swts = swt_enumerate(mu, d);
                std::vector<Eigen::MatrixXd> V;
                for (const Partition* lam : parents) {
                    const auto lam_swts = swt_enumerate(*lam, d);
                    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(mu_swts.size() * d,
                                                              lam_swts.size());
                    for (std::size_t a = 0; a < lam_swts.size(); ++a)
                        for (int j = 0; j < d; ++j)
                            for (std::size_t w = 0; w < mu_swts.size(); ++w)
                                m(w * d + j, a) = cgc(mu, mu_swts[w], j, *lam, lam_swts[a]);
                    V.push_back(std::move(m));
                }
                for (std::size_t i = 0; i < parents.size(); ++i)
                    for (std::size_t k = 0; k < parents.size(); ++k) {
                        Eigen::MatrixXd G = V[i].transpose() * V[k];
                        if (parents[i] == parents[k])
                            G -= Eigen::MatrixXd::Identity(G.rows(), G.cols());
                        worst = std::max(worst, G.cwiseAbs().maxCoeff());
                    }
            }
        }
    }
    std::ostringstream ss;
    ss << "max deviation " << worst << " over all lambda,nu |- (N<=6, d<=4), tol 1e-10";
    return {worst <= 1e-10, ss.str()};
}

// ---------------------------------------------------------------- criterion 3
Outcome qubit_equivalence() {
    double worst_zeta = 0.0, worst_trace = 0.0, worst_id = 0.0;
    for (int N = 1; N <= 8; ++N) {
        const auto index = CommutantIndex::build(N, 2);
        const KEngine eng(index);
        for (std::size_t nu_i = 0; nu_i < index->num_partitions(); ++nu_i) {
            const Partition& nu = index->partition(nu_i);
            const int nu1 = nu.part(1), nu2 = nu.part(2);
            const int dn = nu1 - nu2;

            // (a) CGCs against the four zeta closed forms
            for (int n0 = nu2; n0 <= nu1; ++n0) {
                const GTPattern W_nu(2, {nu1, nu2, n0});
                for (int k = 0; k <= 1; ++k)
                    for (int tau = 1; tau <= 2; ++tau) {
                        const int m1 = tau == 1 ? nu1 - 1 : nu1;
                        const int m2 = tau == 1 ? nu2 : nu2 - 1;
                        const int m0 = n0 + k - 1;
                        double got = 0.0;
                        if (m1 >= m2 && m2 >= 0 && m0 >= m2 && m0 <= m1) {
                            std::vector<int> parts;
                            if (m1 > 0) parts.push_back(m1);
                            if (m2 > 0) parts.push_back(m2);
                            got = cgc(Partition(parts), GTPattern(2, {m1, m2, m0}), k, nu, W_nu);
                        }
                        worst_zeta = std::max(
                            worst_zeta, std::abs(got - qubit::zeta(k, tau, nu1, nu2, n0)));
                    }
            }

            // (b) Table I traces and (c) the qubit identity, all labels
            if (N < 2) continue;
            for (int lam_i : eng.minus_plus_indices(static_cast<int>(nu_i))) {
                const Partition& lam = index->partition(lam_i);
                const int l1 = lam.part(1), l2 = lam.part(2);
                const bool is_nu = lam_i == static_cast<int>(nu_i);
                const bool is_b = (l1 == nu1 - 1 && l2 == nu2 + 1);
                for (const Partition& mu : eng.common_children(lam_i, static_cast<int>(nu_i))) {
                    const bool tau1 = mu.part(1) == nu1 - 1;
                    for (int q = -1; q <= 1; ++q) {
                        const auto T = eng.trace_table(lam_i, static_cast<int>(nu_i), mu, s_op(q));
                        for (int n0 = nu2; n0 <= nu1; ++n0) {
                            const int n0q = n0 - q;
                            if (n0q < l2 || n0q > l1) continue;
                            double expect = 0.0;
                            if (is_nu)
                                expect = tau1 ? qubit::abd(q, qubit::Coeff::A, nu1, nu2, n0) / dn
                                              : -qubit::abd(q, qubit::Coeff::A, nu1, nu2, n0) /
                                                    (dn + 2);
                            else if (is_b)
                                expect = qubit::abd(q, qubit::Coeff::B, nu1, nu2, n0) / dn;
                            else
                                expect = qubit::abd(q, qubit::Coeff::D, nu1, nu2, n0) / (dn + 2);
                            worst_trace = std::max(
                                worst_trace, std::abs(T(n0q - l2, n0 - nu2).real() - expect));
                        }
                    }
                }
                for (int q = -1; q <= 1; ++q)
                    for (int r = -1; r <= 1; ++r)
                        for (int n0 = nu2; n0 <= nu1; ++n0)
                            for (int n0p = nu2; n0p <= nu1; ++n0p) {
                                const auto terms =
                                    qubit::identity_coefficients(q, r, nu1, nu2, n0, n0p);
                                for (int a = 0; a < index->fd(lam_i); ++a)
                                    for (int ap = 0; ap < index->fd(lam_i); ++ap) {
                                        double expect = 0.0;
                                        for (const auto& t : terms)
                                            if (t.lambda1 == l1 && t.lambda2 == l2 &&
                                                t.n0_out == l2 + a && t.n0p_out == l2 + ap)
                                                expect += t.coeff;
                                        const cdouble got = eng.k_coefficient(
                                            s_op(q), s_op(r), lam_i, a, ap,
                                            static_cast<int>(nu_i), n0 - nu2, n0p - nu2);
                                        worst_id = std::max(worst_id,
                                                            std::abs(got - cdouble{expect, 0.0}));
                                    }
                            }
            }
        }
    }
    std::ostringstream ss;
    ss << "N<=8 all labels: |cgc - zeta| " << worst_zeta << ", |trace - Table I| " << worst_trace
       << ", |K - identity coeffs| " << worst_id << ", tol 1e-12";
    return {worst_zeta <= 1e-12 && worst_trace <= 1e-12 && worst_id <= 1e-12, ss.str()};
}

// ---------------------------------------------------------------- criterion 4
Outcome oracle_equivalence() {
    const std::vector<std::pair<int, int>> sizes = {{2, 2}, {3, 2}, {4, 2},
                                                    {5, 2}, {2, 3}, {3, 3}};
    std::mt19937_64 rng(20250811);
    double worst = 0.0;
    int count = 0;
    for (const auto& [N, d] : sizes) {
        for (int k = 0; k < 34; ++k) {
            const ModelSpec spec = make_fuzz_model(N, d, rng, k);
            const auto report = oracle::full_evolve_compare(spec);
            worst = std::max(worst, report.worst());
            ++count;
            if (report.worst() > 1e-8) {
                std::ostringstream ss;
                ss << "model " << count << " at (N,d)=(" << N << "," << d << ") deviates by "
                   << report.worst();
                return {false, ss.str()};
            }
        }
    }
    std::ostringstream ss;
    ss << count << " fuzzed models (incl. sinusoidal rates), worst deviation " << worst
       << ", tol 1e-8";
    return {worst <= 1e-8, ss.str()};
}

// ---------------------------------------------------------------- criterion 5
Outcome p_particle() {
    // p = 1 reduction at tolerance 1e-12
    std::mt19937_64 rng(77);
    double worst_red = 0.0;
    for (auto [N, d] : {std::pair{3, 2}, {2, 3}, {4, 2}}) {
        const auto index = CommutantIndex::build(N, d);
        const KEngine direct(index);
        const GenKEngine gen(index, 1);
        std::uniform_real_distribution<double> uni(-1.0, 1.0);
        Eigen::MatrixXcd X(d, d), Y(d, d);
        for (int r = 0; r < d; ++r)
            for (int c = 0; c < d; ++c) {
                X(r, c) = cdouble{uni(rng), uni(rng)};
                Y(r, c) = cdouble{uni(rng), uni(rng)};
            }
        for (std::size_t nu = 0; nu < index->num_partitions(); ++nu) {
            worst_red = std::max(worst_red,
                                 (gen.k_x(static_cast<int>(nu), X) -
                                  direct.k_x(static_cast<int>(nu), X))
                                     .cwiseAbs()
                                     .maxCoeff());
            for (int lam : direct.minus_plus_indices(static_cast<int>(nu)))
                worst_red = std::max(worst_red, (gen.k_xy(lam, static_cast<int>(nu), X, Y) -
                                                 direct.k_xy(lam, static_cast<int>(nu), X, Y))
                                                    .cwiseAbs()
                                                    .maxCoeff());
        }
    }
    if (worst_red > 1e-12) {
        std::ostringstream ss;
        ss << "p=1 reduction deviates by " << worst_red;
        return {false, ss.str()};
    }

    // p = 2 oracle equivalence at (3,2) and (4,2), tolerance 1e-8
    double worst_p2 = 0.0;
    for (auto [N, d] : {std::pair{3, 2}, {4, 2}}) {
        for (int k = 0; k < 4; ++k) {
            const ModelSpec spec = make_fuzz_model_p(N, d, 2, rng, k);
            const auto report = oracle::full_evolve_compare(spec);
            worst_p2 = std::max(worst_p2, report.worst());
        }
    }
    std::ostringstream ss;
    ss << "p=1 reduction " << worst_red << " (tol 1e-12); p=2 oracle worst " << worst_p2
       << " over 8 models at (3,2),(4,2) (tol 1e-8)";
    return {worst_p2 <= 1e-8, ss.str()};
}

// ---------------------------------------------------------------- criterion 6
Outcome structural_invariants() {
    std::mt19937_64 rng(4242);
    double worst_trace = 0.0, worst_herm = 0.0;
    for (auto [N, d] : {std::pair{3, 2}, {4, 2}, {2, 3}, {3, 3}}) {
        const auto index = CommutantIndex::build(N, d);
        for (int k = 0; k < 5; ++k) {
            const ModelSpec spec = make_fuzz_model(N, d, rng, k);
            const LiouvillianMatrix L = assemble(spec, index);
            worst_trace = std::max(worst_trace, trace_functional_deviation(L, 0.37));

            for (const auto& term : L.terms()) {
                for (const auto& [key, M] : term.blocks) {
                    // selection rule: lambda in {nu^{-+}}
                    const auto mp = remove_add_corners(index->partition(key.second), d);
                    if (std::find(mp.begin(), mp.end(), index->partition(key.first)) == mp.end())
                        return {false, "block outside the {nu^{-+}} selection rule"};
                    const int fl = index->fd(key.first), fn = index->fd(key.second);
                    for (int a = 0; a < fl; ++a)
                        for (int ap = 0; ap < fl; ++ap)
                            for (int b = 0; b < fn; ++b)
                                for (int bp = 0; bp < fn; ++bp)
                                    worst_herm = std::max(
                                        worst_herm,
                                        std::abs(M(ap * fl + a, bp * fn + b) -
                                                 std::conj(M(a * fl + ap, b * fn + bp))));
                }
            }
        }
    }

    // p = 2 gain blocks obey the generalized selection rule
    {
        const auto index = CommutantIndex::build(4, 2);
        const GenKEngine eng(index, 2);
        std::mt19937_64 rng2(5);
        const ModelSpec spec = make_fuzz_model_p(4, 2, 2, rng2, 0);
        const LiouvillianMatrix L = assemble_p(spec, index);
        worst_trace = std::max(worst_trace, trace_functional_deviation(L, 0.0));
        for (const auto& term : L.terms())
            for (const auto& [key, M] : term.blocks) {
                const auto reach = eng.reachable_indices(key.second);
                if (std::find(reach.begin(), reach.end(), key.first) == reach.end())
                    return {false, "p=2 block outside the {nu^{-^p+^p}} selection rule"};
                (void)M;
            }
    }

    // generalized trace rule, p = 2, N <= 4
    double worst_gtr = 0.0;
    for (int N = 2; N <= 4; ++N) {
        for (int d = 2; d <= 3; ++d) {
            const auto index = CommutantIndex::build(N, d);
            const GenKEngine eng(index, 2);
            const int pdim = d * d;
            const Eigen::MatrixXcd one = Eigen::MatrixXcd::Identity(pdim, pdim);
            for (std::size_t nuL = 0; nuL < index->num_partitions(); ++nuL) {
                for (std::size_t nuR = 0; nuR < index->num_partitions(); ++nuR) {
                    for (const auto& lc : eng.chains(static_cast<int>(nuL))) {
                        for (const auto& rc : eng.chains(static_cast<int>(nuR))) {
                            if (lc.back() != rc.back()) continue;
                            // Tr[g^dagger 1] = Tr[g]*: the trace table against the
                            // identity gives the generalized trace rule values
                            const auto T = eng.trace_table(static_cast<int>(nuL), lc,
                                                           static_cast<int>(nuR), rc, one);
                            const bool palindromic = lc == rc;
                            for (int a = 0; a < index->fd(nuL); ++a)
                                for (int b = 0; b < index->fd(nuR); ++b) {
                                    const double expect =
                                        (nuL == nuR && a == b && palindromic) ? 1.0 : 0.0;
                                    worst_gtr = std::max(worst_gtr,
                                                         std::abs(T(a, b) - cdouble{expect, 0.0}));
                                }
                        }
                    }
                }
            }
        }
    }

    std::ostringstream ss;
    ss << "trace-functional " << worst_trace << " (tol 1e-10), Hermiticity symmetry "
       << worst_herm << " (tol 1e-12), selection rules exact, genTrq(p=2) " << worst_gtr
       << " (tol 1e-10)";
    return {worst_trace <= 1e-10 && worst_herm <= 1e-12 && worst_gtr <= 1e-10, ss.str()};
}

// ---------------------------------------------------------------- criterion 7
Outcome superradiance_regression() {
    const auto index = CommutantIndex::build(2, 2);
    ModelSpec spec;
    spec.N = 2;
    spec.d = 2;
    Channel col;
    col.scope = Channel::Scope::Collective;
    col.jump = s_op(-1);
    col.rate = Schedule::constant(1.0);
    spec.channels.push_back(std::move(col));
    spec.initial_state.kind = InitialState::Kind::SymmetricBasis;
    spec.initial_state.content = {1, 1};

    const LiouvillianMatrix L = assemble(spec, index);
    const PIOperator rho0 = build_initial_state(spec, index);
    IntegrateOptions opts;
    opts.method = "rk45";
    opts.dt = 0.1;
    opts.atol = 1e-12;
    opts.rtol = 1e-10;
    const Trajectory traj = integrate(L, rho0, 0.0, 1.0, opts, 1);
    const int nu2 = index->partition_index(Partition{2});

    double worst = 0.0;
    for (double t : {0.1, 0.5, 1.0}) {
        const auto it = std::find_if(traj.snapshot_times.begin(), traj.snapshot_times.end(),
                                     [&](double s) { return std::abs(s - t) < 1e-9; });
        if (it == traj.snapshot_times.end()) return {false, "missing output time"};
        const PIOperator state(index,
                               traj.snapshots[it - traj.snapshot_times.begin()]);
        worst = std::max(worst, std::abs(state(nu2, 1, 1).real() - std::exp(-2.0 * t)));
    }
    std::ostringstream ss;
    ss << "two-atom M=0 population vs exp(-2t) at t in {0.1, 0.5, 1.0}: max |dev| " << worst
       << ", tol 1e-6";
    return {worst <= 1e-6, ss.str()};
}

// ---------------------------------------------------------------- criterion 8
Outcome scaling_demo() {
    using clock = std::chrono::steady_clock;
    const uint128 dim20 = commutant_dim(20, 2);
    if (dim20 != 1771) return {false, "commutant dim at (20,2) is not 1771"};

    const auto t0 = clock::now();
    const auto index = CommutantIndex::build(30, 2);
    ModelSpec spec;
    spec.N = 30;
    spec.d = 2;
    Channel col;
    col.scope = Channel::Scope::Collective;
    col.jump = s_op(-1);
    col.rate = Schedule::constant(1.0);
    spec.channels.push_back(std::move(col));
    const LiouvillianMatrix L = assemble_model(spec, index);
    const PIOperator rho0 = maximally_mixed_state(index);

    IntegrateOptions opts;
    opts.method = "rk4";
    opts.dt = 0.01;
    const Trajectory traj = integrate(L, rho0, 0.0, 0.01, opts, 1); // one rk4 step
    const double secs = std::chrono::duration<double>(clock::now() - t0).count();

    std::ostringstream ss;
    ss << "dim(20,2) = 1771 vs full 4^20 = 1.0995e12; (30,2) dim " << to_string(index->dim())
       << " assembled + stepped in " << std::fixed << std::setprecision(2) << secs
       << " s (limit 60)" << std::defaultfloat << ", |trace - 1| = "
       << std::abs(traj.trace.back() - 1.0);
    return {secs < 60.0 && std::abs(traj.trace.back() - 1.0) < 1e-9, ss.str()};
}

} // namespace

int main() {
    struct Criterion {
        int id;
        const char* label;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria = {
        {1, "dimension identities", dimension_identities},
        {2, "CGC orthogonality", cgc_orthogonality},
        {3, "qubit closed-form equivalence", qubit_equivalence},
        {4, "full-space oracle equivalence", oracle_equivalence},
        {5, "p-particle generalization", p_particle},
        {6, "structural invariants", structural_invariants},
        {7, "superradiance regression", superradiance_regression},
        {8, "polynomial scaling demonstration", scaling_demo},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = c.run();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::cout << (out.pass ? "[PASS]" : "[FAIL]") << " criterion " << c.id << ": " << c.label
                  << ": " << out.detail << " (" << std::fixed << std::setprecision(1) << secs
                  << " s)\n"
                  << std::defaultfloat;
        if (!out.pass) ++failures;
    }
    if (failures) std::cout << failures << " criterion(s) failed\n";
    return failures == 0 ? 0 : 1;
}
