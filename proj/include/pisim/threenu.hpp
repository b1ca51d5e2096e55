#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <optional>
#include <vector>

#include "pisim/cgc.hpp"
#include "pisim/gt.hpp"
#include "pisim/partition.hpp"

namespace pisim {

/// Partition triangular delta {nu_L, nu, nu_R}: 1 iff nu is a corner removal
/// of both nu_L and nu_R.
inline int triangular_delta(const Partition& nu_L, const Partition& nu, const Partition& nu_R) {
    const auto in = [&](const Partition& parent) {
        const auto minus = remove_corners(parent);
        return std::find(minus.begin(), minus.end(), nu) != minus.end();
    };
    return (in(nu_L) && in(nu_R)) ? 1 : 0;
}

namespace detail {

/// Label i such that content(W_parent) = content(W_child) + e_i; nullopt if
/// the contents do not differ by exactly one box.
inline std::optional<int> box_label(const GTPattern& W_parent, const GTPattern& W_child) {
    const auto cp = W_parent.content();
    const auto cc = W_child.content();
    int label = -1;
    for (std::size_t k = 0; k < cp.size(); ++k) {
        const int diff = cp[k] - cc[k];
        if (diff == 0) continue;
        if (diff != 1 || label != -1) return std::nullopt;
        label = static_cast<int>(k);
    }
    if (label == -1) return std::nullopt;
    return label;
}

} // namespace detail

/// 3nu-symbol matrix: entries (i,j) = <W_nu,i|W_L><W_nu,j|W_R>. Invalid
/// tableaux (wrong shape, broken betweenness) follow the null-matrix
/// convention. Real and d x d.
inline Eigen::MatrixXd threenu_symbol(const Partition& nu_L, const GTPattern& W_L,
                                      const Partition& nu, const GTPattern& W,
                                      const Partition& nu_R, const GTPattern& W_R, int d) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(d, d);
    if (!triangular_delta(nu_L, nu, nu_R)) return m;
    if (W_L.shape() != nu_L || W.shape() != nu || W_R.shape() != nu_R) return m;
    if (!W_L.valid() || !W.valid() || !W_R.valid()) return m;

    const auto i = detail::box_label(W_L, W);
    const auto j = detail::box_label(W_R, W);
    if (!i || !j) return m;
    m(*i, *j) = cgc(nu, W, *i, nu_L, W_L) * cgc(nu, W, *j, nu_R, W_R);
    return m;
}

/// Single-qudit operator g_mu^{(lambda,W_lambda; nu,W_nu)}: the 3nu symbol
/// summed over all W_mu. Vanishes when {lambda, mu, nu} = 0; each summand is
/// zero or a multiple of a single dyad |i><j|.
inline Eigen::MatrixXd g_operator(const Partition& mu, const Partition& lambda,
                                  const GTPattern& W_lambda, const Partition& nu,
                                  const GTPattern& W_nu, int d) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(d, d);
    if (!triangular_delta(lambda, mu, nu)) return m;
    if (W_lambda.shape() != lambda || W_nu.shape() != nu) return m;
    if (!W_lambda.valid() || !W_nu.valid()) return m;

    // Candidate W_mu must be shift-compatible with W_lambda; scanning the
    // shift sets of W_lambda is far cheaper than all of W_mu.
    for (int i = 0; i < d; ++i) {
        for (const GTPattern& W_mu : shift_set_minus(mu, i, W_lambda)) {
            const double ci = cgc(mu, W_mu, i, lambda, W_lambda);
            if (ci == 0.0) continue;
            const auto j = detail::box_label(W_nu, W_mu);
            if (!j) continue;
            const double cj = cgc(mu, W_mu, *j, nu, W_nu);
            if (cj == 0.0) continue;
            m(i, *j) += ci * cj;
        }
    }
    return m;
}

/// Single-qudit mixed state rho_mu^{(nu,W_nu)} = g_mu^{(nu,W_nu; nu,W_nu)};
/// trace-1 positive semidefinite sum of projectors.
inline Eigen::MatrixXd rho_state(const Partition& mu, const Partition& nu,
                                 const GTPattern& W_nu, int d) {
    const auto minus = remove_corners(nu);
    if (std::find(minus.begin(), minus.end(), mu) == minus.end())
        throw std::invalid_argument("rho_state: mu is not a corner removal of nu");
    return g_operator(mu, nu, W_nu, nu, W_nu, d);
}

} // namespace pisim
