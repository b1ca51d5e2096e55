#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "pisim/partition.hpp"

namespace pisim::qubit {

// Closed-form d = 2 layer. Everything here is a frozen formula acting on
// (nu1, nu2, n0) labels; it deliberately shares no code with the general
// CGC / 3nu-symbol path so cross-checks against it stay independent.

/// Labels valid iff nu is a partition and n0 obeys betweenness nu2<=n0<=nu1.
inline bool labels_valid(int nu1, int nu2, int n0) {
    return nu1 >= nu2 && nu2 >= 0 && n0 >= nu2 && n0 <= nu1;
}

/// CGC zeta_{k,tau}^{nu,n0} = <W_{nu^{-tau}}^{n0+k-1}, k | W_nu^{n0}>,
/// k in {0,1}, tau in {1,2}. Returns 0 for out-of-range labels.
inline double zeta(int k, int tau, int nu1, int nu2, int n0) {
    if (!labels_valid(nu1, nu2, n0)) return 0.0;
    const int dn = nu1 - nu2;
    // child pattern W_{nu^{-tau}}^{n0+k-1} must itself be a valid SWT
    const int m0 = n0 + k - 1;
    const int mu1 = (tau == 1) ? nu1 - 1 : nu1;
    const int mu2 = (tau == 1) ? nu2 : nu2 - 1;
    if (!labels_valid(mu1, mu2, m0)) return 0.0;
    if (k == 0 && tau == 1) return std::sqrt(static_cast<double>(n0 - nu2) / dn);
    if (k == 1 && tau == 1) return std::sqrt(static_cast<double>(nu1 - n0) / dn);
    if (k == 0 && tau == 2) return -std::sqrt(static_cast<double>(nu1 + 1 - n0) / (dn + 2));
    if (k == 1 && tau == 2) return std::sqrt(static_cast<double>(n0 - nu2 + 1) / (dn + 2));
    throw std::invalid_argument("zeta: k must be 0/1 and tau 1/2");
}

enum class Coeff { A, B, D };

/// The A_q, B_q, D_q ladder coefficients, q in {-1,0,+1}. A negative
/// radicand means the ladder label is out of range; the coefficient is 0
/// and the corresponding tableau invalid.
inline double abd(int q, Coeff which, int nu1, int nu2, int n0) {
    if (!labels_valid(nu1, nu2, n0)) return 0.0;
    auto root = [](double x) { return x < 0.0 ? 0.0 : std::sqrt(x); };
    const double v1 = nu1, v2 = nu2, x0 = n0;
    switch (which) {
        case Coeff::A:
            if (q == 1) return root((v1 - x0 + 1) * (x0 - v2));
            if (q == 0) return (v1 + v2 - 2 * x0) / 2.0;
            if (q == -1) return root((v1 - x0) * (x0 + 1 - v2));
            break;
        case Coeff::B:
            if (q == 1) return root((x0 - v2) * (x0 - v2 - 1));
            if (q == 0) return root((v1 - x0) * (x0 - v2));
            if (q == -1) return -root((v1 - x0 - 1) * (v1 - x0));
            break;
        case Coeff::D:
            if (q == 1) return -root((v1 - x0 + 1) * (v1 - x0 + 2));
            if (q == 0) return root((v1 - x0 + 1) * (x0 - v2 + 1));
            if (q == -1) return root((x0 - v2 + 1) * (x0 - v2 + 2));
            break;
    }
    throw std::invalid_argument("abd: q must be -1, 0 or +1");
}

/// f^nu for d = 2 via the closed form (Delta nu + 1)/(nu1 + 1) * C(N, nu2).
inline double syt_count_closed(int nu1, int nu2) {
    const int N = nu1 + nu2;
    return static_cast<double>(nu1 - nu2 + 1) / (nu1 + 1) *
           static_cast<double>(binomial(N, nu2));
}

/// One term of the qubit identity: the target block lambda, the shifted
/// labels n0(q) = n0 - q / n0'(r) = n0' - r, and the scalar coefficient.
struct IdentityTerm {
    int lambda1 = 0, lambda2 = 0;
    int n0_out = 0, n0p_out = 0;
    double coeff = 0.0;
};

/// Coefficients of sum_n s_q^(n) F_nu^{(n0,n0')} s_r^(n)dagger expanded over
/// the blocks nu_a = nu, nu_b = (nu1-1,nu2+1), nu_c = (nu1+1,nu2-1).
/// Invalid target partitions or out-of-range shifted labels drop the term.
inline std::vector<IdentityTerm> identity_coefficients(int q, int r, int nu1, int nu2,
                                                       int n0, int n0p) {
    if (!labels_valid(nu1, nu2, n0) || !labels_valid(nu1, nu2, n0p))
        throw std::invalid_argument("identity_coefficients: invalid labels");
    const int dn = nu1 - nu2;
    std::vector<IdentityTerm> terms;

    auto push = [&](int l1, int l2, double pref, double left, double right, double dimratio) {
        if (l1 < l2 || l2 < 0) return;
        const int a = n0 - q, b = n0p - r;
        if (!labels_valid(l1, l2, a) || !labels_valid(l1, l2, b)) return;
        const double c = pref * left * right * dimratio;
        if (c == 0.0) return;
        terms.push_back(IdentityTerm{l1, l2, a, b, c});
    };

    if (dn > 0) {
        push(nu1, nu2, static_cast<double>(nu1 + nu2 + 2) / (dn * (dn + 2)),
             abd(q, Coeff::A, nu1, nu2, n0), abd(r, Coeff::A, nu1, nu2, n0p), 1.0);
    }
    if (nu1 - 1 >= nu2 + 1) {
        const double ratio = std::sqrt(static_cast<double>((nu2 + 1) * (dn + 1)) /
                                       ((nu1 + 1) * (dn - 1)));
        push(nu1 - 1, nu2 + 1, static_cast<double>(nu1 + 1) / (dn * (dn + 1)),
             abd(q, Coeff::B, nu1, nu2, n0), abd(r, Coeff::B, nu1, nu2, n0p), ratio);
    }
    if (nu2 >= 1) {
        const double ratio = std::sqrt(static_cast<double>((nu1 + 2) * (dn + 1)) /
                                       (nu2 * (dn + 3)));
        push(nu1 + 1, nu2 - 1, static_cast<double>(nu2) / ((dn + 1) * (dn + 2)),
             abd(q, Coeff::D, nu1, nu2, n0), abd(r, Coeff::D, nu1, nu2, n0p), ratio);
    }
    return terms;
}

struct DickeLabels {
    double J = 0.0;
    double M = 0.0;
};

/// (nu, n0) -> (J, M): J = (nu1-nu2)/2, M = N/2 - n0.
inline DickeLabels dicke_map(int nu1, int nu2, int n0, int N) {
    if (nu1 + nu2 != N) throw std::invalid_argument("dicke_map: |nu| != N");
    if (!labels_valid(nu1, nu2, n0)) throw std::invalid_argument("dicke_map: invalid labels");
    return DickeLabels{(nu1 - nu2) / 2.0, N / 2.0 - n0};
}

struct QubitLabels {
    int nu1 = 0, nu2 = 0, n0 = 0;
};

/// (J, M) -> (nu, n0); J and M must be compatible half-integers for N.
inline QubitLabels dicke_inverse(double J, double M, int N) {
    const double nu1 = N / 2.0 + J, nu2 = N / 2.0 - J, n0 = N / 2.0 - M;
    auto near_int = [](double x) { return std::abs(x - std::round(x)) < 1e-9; };
    if (!near_int(nu1) || !near_int(nu2) || !near_int(n0))
        throw std::invalid_argument("dicke_inverse: labels not half-integers compatible with N");
    QubitLabels q{static_cast<int>(std::lround(nu1)), static_cast<int>(std::lround(nu2)),
                  static_cast<int>(std::lround(n0))};
    if (!labels_valid(q.nu1, q.nu2, q.n0))
        throw std::invalid_argument("dicke_inverse: |M| > J or J > N/2");
    return q;
}

/// Dicke degeneracy d_N^J = C(N, N/2 - J)(2J+1)/(J+1+N/2) (equals f^nu).
inline double dicke_degeneracy(double J, int N) {
    const QubitLabels q = dicke_inverse(J, J, N);
    return syt_count_closed(q.nu1, q.nu2);
}

} // namespace pisim::qubit
