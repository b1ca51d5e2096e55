#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "pisim/partition.hpp"

namespace pisim {

/// Gel'fand-Tsetlin pattern: d rows, row k holding k entries m_{1,k}..m_{k,k}
/// (k = d on top down to k = 1), subject to the betweenness condition
/// m_{i+1,k} <= m_{i,k-1} <= m_{i,k}. Bijective with semistandard Weyl
/// tableaux of shape = top row, entries in 0..d-1.
class GTPattern {
public:
    GTPattern(int d, std::vector<int> rows_top_down)
        : d_(d), m_(std::move(rows_top_down)) {
        if (d_ < 1 || m_.size() != static_cast<std::size_t>(d_ * (d_ + 1) / 2))
            throw std::invalid_argument("GTPattern: wrong entry count for d");
    }

    /// Minimal pattern of the given shape: every row equals the shape
    /// truncated to its length (all boxes as low as possible).
    static GTPattern lowest(const Partition& shape, int d) {
        if (shape.num_parts() > d)
            throw std::invalid_argument("GTPattern::lowest: shape has more than d parts");
        std::vector<int> rows;
        rows.reserve(d * (d + 1) / 2);
        for (int k = d; k >= 1; --k)
            for (int i = 1; i <= k; ++i) rows.push_back(shape.part(i));
        return GTPattern(d, std::move(rows));
    }

    int levels() const { return d_; }

    /// Entry m_{i,k}, 1 <= i <= k <= d.
    int entry(int i, int k) const { return m_[offset(k) + i - 1]; }
    int& entry(int i, int k) { return m_[offset(k) + i - 1]; }

    /// Flattened entries, top row first (the canonical comparison key).
    const std::vector<int>& flat() const { return m_; }

    Partition shape() const { return row_partition(d_); }

    /// Row k as a partition (trailing zeros stripped).
    Partition row_partition(int k) const {
        std::vector<int> p;
        for (int i = 1; i <= k; ++i) p.push_back(entry(i, k));
        while (!p.empty() && p.back() == 0) p.pop_back();
        return Partition(std::move(p));
    }

    bool valid() const {
        for (int k = d_; k >= 1; --k) {
            for (int i = 1; i < k; ++i)
                if (entry(i, k) < entry(i + 1, k)) return false;
            if (entry(k, k) < 0) return false;
        }
        for (int k = 2; k <= d_; ++k)
            for (int i = 1; i < k; ++i)
                if (entry(i, k - 1) > entry(i, k) || entry(i, k - 1) < entry(i + 1, k))
                    return false;
        return true;
    }

    /// Content counts n_0..n_{d-1}: n_{k-1} = |m_k| - |m_{k-1}|.
    std::vector<int> content() const {
        std::vector<int> n(d_, 0);
        int prev = 0;
        for (int k = 1; k <= d_; ++k) {
            int sum = 0;
            for (int i = 1; i <= k; ++i) sum += entry(i, k);
            n[k - 1] = sum - prev;
            prev = sum;
        }
        return n;
    }

    friend bool operator==(const GTPattern& a, const GTPattern& b) {
        return a.d_ == b.d_ && a.m_ == b.m_;
    }
    friend bool operator!=(const GTPattern& a, const GTPattern& b) { return !(a == b); }
    friend bool operator<(const GTPattern& a, const GTPattern& b) { return a.m_ < b.m_; }

private:
    std::size_t offset(int k) const {
        // rows stored k = d first; row with k entries starts after rows d..k+1
        return static_cast<std::size_t>((d_ * (d_ + 1) - k * (k + 1)) / 2);
    }

    int d_;
    std::vector<int> m_;
};

/// All GT patterns with top row nu (padded to d), ordered lexicographically
/// on the flattened rows. The count equals weyl_dim(nu, d).
inline std::vector<GTPattern> swt_enumerate(const Partition& nu, int d) {
    if (nu.num_parts() > d)
        throw std::invalid_argument("swt_enumerate: shape has more than d parts");
    std::vector<GTPattern> out;
    GTPattern pat = GTPattern::lowest(nu, d);
    // fill rows k = d-1 .. 1; within a row sweep entries left to right
    auto rec = [&](auto&& self, int k) -> void {
        if (k == 0) {
            out.push_back(pat);
            return;
        }
        std::function<void(int)> fill = [&](int i) {
            if (i > k) {
                self(self, k - 1);
                return;
            }
            const int lo = pat.entry(i + 1, k + 1);
            const int hi = pat.entry(i, k + 1);
            for (int v = lo; v <= hi; ++v) {
                // row must stay weakly decreasing
                if (i > 1 && v > pat.entry(i - 1, k)) break;
                pat.entry(i, k) = v;
                fill(i + 1);
            }
            pat.entry(i, k) = lo;
        };
        fill(1);
    };
    rec(rec, d - 1);
    std::sort(out.begin(), out.end());
    return out;
}

/// Triangular shift pattern: rows k = i..d hold a unit vector e_{tau_k},
/// rows below i are zero. tau[k - i] stores tau_k.
struct ShiftPattern {
    int d = 0;
    int i = 1;               // lowest nonzero row (box label j = i - 1)
    std::vector<int> tau;    // tau_i .. tau_d

    int tau_at(int k) const { return tau[k - i]; }
};

/// All shift patterns in Delta_i(tau_top): tau_d = tau_top fixed, the lower
/// taus free. Cardinality (d-1)!/(i-1)!.
inline std::vector<ShiftPattern> shift_patterns(int d, int i, int tau_top) {
    if (i < 1 || i > d || tau_top < 1 || tau_top > d)
        throw std::invalid_argument("shift_patterns: bad row/position index");
    std::vector<ShiftPattern> out;
    std::vector<int> tau(d - i + 1);
    tau.back() = tau_top;
    auto rec = [&](auto&& self, int k) -> void {
        if (k < i) {
            out.push_back(ShiftPattern{d, i, tau});
            return;
        }
        for (int t = 1; t <= k; ++t) {
            tau[k - i] = t;
            self(self, k - 1);
        }
    };
    rec(rec, d - 1);
    return out;
}

/// Classify the entrywise difference hi - lo of two GT patterns as a shift
/// pattern; nullopt if it is not one.
inline std::optional<ShiftPattern> pattern_difference(const GTPattern& hi, const GTPattern& lo) {
    const int d = hi.levels();
    if (lo.levels() != d) return std::nullopt;
    ShiftPattern sp;
    sp.d = d;
    int lowest_nonzero = d + 1;
    std::vector<int> tau(d + 1, 0);
    for (int k = d; k >= 1; --k) {
        int ones = 0, pos = 0;
        for (int i = 1; i <= k; ++i) {
            const int diff = hi.entry(i, k) - lo.entry(i, k);
            if (diff == 0) continue;
            if (diff != 1) return std::nullopt;
            ++ones;
            pos = i;
        }
        if (ones > 1) return std::nullopt;
        if (ones == 1) {
            if (lowest_nonzero != d + 1) return std::nullopt; // zero row above a unit row
            tau[k] = pos;
        } else {
            if (k == d) return std::nullopt; // top row must differ
            if (lowest_nonzero == d + 1) lowest_nonzero = k + 1;
        }
    }
    if (lowest_nonzero == d + 1) lowest_nonzero = 1;
    sp.i = lowest_nonzero;
    sp.tau.assign(tau.begin() + sp.i, tau.begin() + d + 1);
    return sp;
}

/// Row at which adding one box turns mu into nu; nullopt unless nu covers mu.
inline std::optional<int> corner_row(const Partition& nu, const Partition& mu) {
    if (nu.weight() != mu.weight() + 1) return std::nullopt;
    int row = 0;
    const int n = std::max(nu.num_parts(), mu.num_parts());
    for (int i = 1; i <= n; ++i) {
        const int diff = nu.part(i) - mu.part(i);
        if (diff == 0) continue;
        if (diff != 1 || row != 0) return std::nullopt;
        row = i;
    }
    return row == 0 ? std::nullopt : std::optional<int>(row);
}

/// The set W_mu^{(-j)}(W_nu): patterns of shape mu whose difference with
/// W_nu is a shift pattern with lowest row j+1 and top-row unit at the row
/// where the shapes differ. Empty when W_nu has no box j to give up.
inline std::vector<GTPattern> shift_set_minus(const Partition& mu, int j, const GTPattern& W_nu) {
    const int d = W_nu.levels();
    const auto tau_top = corner_row(W_nu.shape(), mu);
    if (!tau_top)
        throw std::invalid_argument("shift_set_minus: mu is not a corner removal of shape(W_nu)");
    std::vector<GTPattern> out;
    for (const ShiftPattern& sp : shift_patterns(d, j + 1, *tau_top)) {
        std::vector<int> rows = W_nu.flat();
        GTPattern cand(d, rows);
        bool ok = true;
        for (int k = d; k >= sp.i && ok; --k) {
            int& e = cand.entry(sp.tau_at(k), k);
            e -= 1;
            if (e < 0) ok = false;
        }
        if (ok && cand.valid()) out.push_back(std::move(cand));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

/// The set W_nu^{(+j)}(W_mu): patterns of shape nu (= mu plus one corner box)
/// whose difference with W_mu is a shift pattern with lowest row j+1.
inline std::vector<GTPattern> shift_set_plus(const Partition& nu, int j, const GTPattern& W_mu) {
    const int d = W_mu.levels();
    const auto tau_top = corner_row(nu, W_mu.shape());
    if (!tau_top)
        throw std::invalid_argument("shift_set_plus: nu is not a corner addition of shape(W_mu)");
    std::vector<GTPattern> out;
    for (const ShiftPattern& sp : shift_patterns(d, j + 1, *tau_top)) {
        std::vector<int> rows = W_mu.flat();
        GTPattern cand(d, rows);
        for (int k = d; k >= sp.i; --k) cand.entry(sp.tau_at(k), k) += 1;
        if (cand.valid()) out.push_back(std::move(cand));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

} // namespace pisim
