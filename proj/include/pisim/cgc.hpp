#pragma once

#include <cmath>
#include <map>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "pisim/gt.hpp"
#include "pisim/partition.hpp"

namespace pisim {

namespace detail {

inline double sgn_nonneg(int x) { return x < 0 ? -1.0 : 1.0; } // sgn(0) = 1

} // namespace detail

/// Clebsch-Gordan coefficient <W_mu, j | W_lambda> of the Pieri coupling
/// U^mu(d) x U^(1)(d) in the Gel'fand-Tsetlin basis. Zero unless mu is a
/// corner removal of lambda and G(W_lambda) - G(W_mu) is a shift pattern
/// with lowest row j+1 whose top-row unit sits at the row where the shapes
/// differ. All coefficients are real.
///
/// A vanishing denominator cannot occur for valid pattern pairs; it is
/// reported as a logic error rather than propagated as NaN.
inline double cgc(const Partition& mu, const GTPattern& W_mu, int j,
                  const Partition& lambda, const GTPattern& W_lambda) {
    const int d = W_mu.levels();
    if (W_lambda.levels() != d)
        throw std::invalid_argument("cgc: mixed d");
    if (j < 0 || j >= d) return 0.0;
    if (W_mu.shape() != mu || W_lambda.shape() != lambda) return 0.0;
    if (!W_mu.valid() || !W_lambda.valid()) return 0.0;

    const auto tau_top = corner_row(lambda, mu);
    if (!tau_top) return 0.0;
    const auto sp = pattern_difference(W_lambda, W_mu);
    if (!sp || sp->i != j + 1) return 0.0;
    if (sp->tau_at(d) != *tau_top) return 0.0;

    // p_{i,k} = m_{i,k} + k - i evaluated on the lower pattern W_mu
    auto p = [&](int i, int k) { return W_mu.entry(i, k) + k - i; };

    const int t1 = sp->tau_at(j + 1);
    double ratio = 1.0;
    for (int k = 1; k <= j; ++k) ratio *= static_cast<double>(p(t1, j + 1) - p(k, j));
    for (int k = 1; k <= j + 1; ++k) {
        if (k == t1) continue;
        const int den = p(t1, j + 1) - p(k, j + 1);
        if (den == 0) throw std::logic_error("cgc: zero denominator (invalid pattern pair)");
        ratio /= static_cast<double>(den);
    }
    if (ratio < 0.0) throw std::logic_error("cgc: negative radicand (invalid pattern pair)");
    double value = std::sqrt(ratio);

    for (int l = j + 2; l <= d; ++l) {
        const int tl = sp->tau_at(l);
        const int tl1 = sp->tau_at(l - 1);
        double rad = 1.0;
        for (int k = 1; k <= l; ++k) {
            if (k == tl) continue;
            const int den = p(tl, l) - p(k, l);
            if (den == 0) throw std::logic_error("cgc: zero denominator (invalid pattern pair)");
            rad *= static_cast<double>(p(tl1, l - 1) - p(k, l) + 1) / den;
        }
        for (int k = 1; k <= l - 1; ++k) {
            if (k == tl1) continue;
            const int den = p(tl1, l - 1) - p(k, l - 1) + 1;
            if (den == 0) throw std::logic_error("cgc: zero denominator (invalid pattern pair)");
            rad *= static_cast<double>(p(tl, l) - p(k, l - 1)) / den;
        }
        if (rad < 0.0) throw std::logic_error("cgc: negative radicand (invalid pattern pair)");
        value *= detail::sgn_nonneg(tl1 - tl) * std::sqrt(rad);
    }
    return value;
}

/// Sparse table of all nonzero CGCs for a fixed parent shape lambda:
/// (mu-index within {lambda^-}, W_mu, j, W_lambda) -> value.
class CgcTable {
public:
    struct Entry {
        int mu_index;       // position in minus_shapes()
        int w_mu;           // position in swt list of mu
        int j;              // removed box label
        int w_lambda;       // position in swt list of lambda
        double value;
    };

    CgcTable(const Partition& lambda, int d) : lambda_(lambda), d_(d) {
        minus_ = remove_corners(lambda);
        std::sort(minus_.begin(), minus_.end());
        lambda_swts_ = swt_enumerate(lambda, d);
        for (const Partition& mu : minus_) mu_swts_.push_back(swt_enumerate(mu, d));

        for (std::size_t mi = 0; mi < minus_.size(); ++mi) {
            std::map<GTPattern, int> mu_pos;
            for (std::size_t w = 0; w < mu_swts_[mi].size(); ++w)
                mu_pos.emplace(mu_swts_[mi][w], static_cast<int>(w));
            for (std::size_t wl = 0; wl < lambda_swts_.size(); ++wl) {
                for (int j = 0; j < d; ++j) {
                    for (const GTPattern& W_mu : shift_set_minus(minus_[mi], j, lambda_swts_[wl])) {
                        const double v = cgc(minus_[mi], W_mu, j, lambda_, lambda_swts_[wl]);
                        if (v != 0.0)
                            entries_.push_back(Entry{static_cast<int>(mi), mu_pos.at(W_mu), j,
                                                     static_cast<int>(wl), v});
                    }
                }
            }
        }
    }

    const Partition& lambda() const { return lambda_; }
    int levels() const { return d_; }
    const std::vector<Partition>& minus_shapes() const { return minus_; }
    const std::vector<GTPattern>& lambda_swts() const { return lambda_swts_; }
    const std::vector<GTPattern>& mu_swts(int mu_index) const { return mu_swts_[mu_index]; }
    const std::vector<Entry>& entries() const { return entries_; }

private:
    Partition lambda_;
    int d_;
    std::vector<Partition> minus_;
    std::vector<GTPattern> lambda_swts_;
    std::vector<std::vector<GTPattern>> mu_swts_;
    std::vector<Entry> entries_;
};

/// Max deviation of sum_{j, W_mu} <W_mu,j|W_lambda><W_mu,j|W_nu> from
/// delta_{lambda,nu} delta_{W_lambda,W_nu}, over all pattern pairs, for a
/// fixed child shape mu in {lambda^-} and {nu^-}. Vacuously zero when mu is
/// not a common corner removal.
inline double verify_orthogonality(const Partition& lambda, const Partition& nu,
                                   const Partition& mu, int d) {
    const auto in = [](const std::vector<Partition>& v, const Partition& p) {
        return std::find(v.begin(), v.end(), p) != v.end();
    };
    if (!in(remove_corners(lambda), mu) || !in(remove_corners(nu), mu)) return 0.0;

    const auto lam_swts = swt_enumerate(lambda, d);
    const auto nu_swts = swt_enumerate(nu, d);
    const auto mu_swts = swt_enumerate(mu, d);

    double worst = 0.0;
    for (std::size_t a = 0; a < lam_swts.size(); ++a) {
        for (std::size_t b = 0; b < nu_swts.size(); ++b) {
            double sum = 0.0;
            for (int j = 0; j < d; ++j)
                for (const GTPattern& W_mu : mu_swts)
                    sum += cgc(mu, W_mu, j, lambda, lam_swts[a]) *
                           cgc(mu, W_mu, j, nu, nu_swts[b]);
            const double expect = (lambda == nu && a == b) ? 1.0 : 0.0;
            worst = std::max(worst, std::abs(sum - expect));
        }
    }
    return worst;
}

} // namespace pisim
