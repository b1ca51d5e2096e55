#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace pisim {

using uint128 = unsigned __int128;

class overflow_error : public std::runtime_error {
public:
    explicit overflow_error(const std::string& what) : std::runtime_error(what) {}
};

inline uint128 checked_mul(uint128 a, uint128 b) {
    if (a != 0 && b > static_cast<uint128>(-1) / a)
        throw overflow_error("128-bit integer overflow in multiplication");
    return a * b;
}

inline std::string to_string(uint128 v) {
    if (v == 0) return "0";
    std::string s;
    while (v > 0) {
        s.push_back(static_cast<char>('0' + static_cast<int>(v % 10)));
        v /= 10;
    }
    std::reverse(s.begin(), s.end());
    return s;
}

/// Integer partition with weakly decreasing positive parts. The empty
/// partition (weight 0) is a valid value; it shows up as the endpoint of
/// corner-removal chains at N = 1.
class Partition {
public:
    Partition() = default;

    explicit Partition(std::vector<int> parts) : parts_(std::move(parts)) {
        while (!parts_.empty() && parts_.back() == 0) parts_.pop_back();
        for (std::size_t i = 0; i < parts_.size(); ++i) {
            if (parts_[i] <= 0)
                throw std::invalid_argument("partition parts must be positive");
            if (i + 1 < parts_.size() && parts_[i] < parts_[i + 1])
                throw std::invalid_argument("partition parts must be weakly decreasing");
        }
    }

    Partition(std::initializer_list<int> parts) : Partition(std::vector<int>(parts)) {}

    int num_parts() const { return static_cast<int>(parts_.size()); }
    int weight() const { return std::accumulate(parts_.begin(), parts_.end(), 0); }
    bool empty() const { return parts_.empty(); }

    /// Part at 1-based row index; zero beyond the stored length.
    int part(int i) const {
        return (i >= 1 && i <= num_parts()) ? parts_[i - 1] : 0;
    }

    const std::vector<int>& parts() const { return parts_; }

    /// Conjugate (transposed) partition.
    Partition conjugate() const {
        if (parts_.empty()) return {};
        std::vector<int> c(parts_[0], 0);
        for (int p : parts_)
            for (int j = 0; j < p; ++j) c[j] += 1;
        return Partition(std::move(c));
    }

    /// Dotted form used in file headers, e.g. (2,1) -> "2.1"; empty -> "0".
    std::string label() const {
        if (parts_.empty()) return "0";
        std::string s;
        for (std::size_t i = 0; i < parts_.size(); ++i) {
            if (i) s += '.';
            s += std::to_string(parts_[i]);
        }
        return s;
    }

    friend bool operator==(const Partition& a, const Partition& b) { return a.parts_ == b.parts_; }
    friend bool operator!=(const Partition& a, const Partition& b) { return !(a == b); }
    /// Reverse-lexicographic: (4) < (3,1) < (2,2) < (2,1,1); used as the
    /// canonical enumeration order everywhere.
    friend bool operator<(const Partition& a, const Partition& b) {
        const int n = std::max(a.num_parts(), b.num_parts());
        for (int i = 1; i <= n; ++i) {
            if (a.part(i) != b.part(i)) return a.part(i) > b.part(i);
        }
        return false;
    }

private:
    std::vector<int> parts_;
};

/// All partitions of N with at most max_parts parts, in reverse-lexicographic
/// order. N = 0 yields the singleton list {empty partition}.
inline std::vector<Partition> partitions_of(int N, int max_parts) {
    if (N < 0) throw std::invalid_argument("partitions_of: N must be >= 0");
    if (max_parts < 1) throw std::invalid_argument("partitions_of: need at least one part");
    std::vector<Partition> out;
    std::vector<int> cur;
    auto rec = [&](auto&& self, int remaining, int max_part, int slots) -> void {
        if (remaining == 0) {
            out.emplace_back(cur);
            return;
        }
        if (slots == 0) return;
        // smallest admissible first part so the remaining slots can absorb the rest
        for (int p = std::min(remaining, max_part); p >= 1; --p) {
            if (static_cast<long long>(p) * slots < remaining) break;
            cur.push_back(p);
            self(self, remaining - p, p, slots - 1);
            cur.pop_back();
        }
    };
    rec(rec, N, N, max_parts);
    return out;
}

/// Partitions obtained by removing one inner corner, {nu^-}.
inline std::vector<Partition> remove_corners(const Partition& nu) {
    std::vector<Partition> out;
    const int n = nu.num_parts();
    for (int i = 1; i <= n; ++i) {
        if (nu.part(i) > nu.part(i + 1)) {
            std::vector<int> p = nu.parts();
            p[i - 1] -= 1;
            out.emplace_back(std::move(p));
        }
    }
    return out;
}

/// Partitions obtained by adding one outer corner while keeping at most
/// max_parts parts, {nu^+}.
inline std::vector<Partition> add_corners(const Partition& nu, int max_parts) {
    std::vector<Partition> out;
    const int n = nu.num_parts();
    for (int i = 1; i <= std::min(n + 1, max_parts); ++i) {
        if (i == 1 || nu.part(i) < nu.part(i - 1)) {
            std::vector<int> p = nu.parts();
            if (i <= n)
                p[i - 1] += 1;
            else
                p.push_back(1);
            out.emplace_back(std::move(p));
        }
    }
    return out;
}

/// {nu^{-+}}: remove an inner corner then add an outer corner, deduplicated,
/// in canonical order. Always contains nu itself (for nonempty nu).
inline std::vector<Partition> remove_add_corners(const Partition& nu, int max_parts) {
    std::vector<Partition> out;
    for (const Partition& mu : remove_corners(nu))
        for (Partition& lam : add_corners(mu, max_parts))
            out.push_back(std::move(lam));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

namespace detail {

// Exact products of small-integer ratios via prime exponents; keeps the hook
// length and Weyl dimension formulas overflow-safe up to the 128-bit result.
class FactorExponents {
public:
    void mul(int v) { add_factor(v, +1); }
    void div(int v) { add_factor(v, -1); }

    void mul_factorial(int n) {
        for (int k = 2; k <= n; ++k) add_factor(k, +1);
    }

    uint128 value() const {
        uint128 r = 1;
        for (std::size_t p = 2; p < exps_.size(); ++p) {
            if (exps_[p] < 0)
                throw std::logic_error("FactorExponents: non-integer result");
            for (int e = 0; e < exps_[p]; ++e) r = checked_mul(r, p);
        }
        return r;
    }

private:
    void add_factor(int v, int sign) {
        if (v <= 0) throw std::invalid_argument("FactorExponents: factors must be positive");
        for (int p = 2; p * p <= v; ++p) {
            while (v % p == 0) {
                bump(p, sign);
                v /= p;
            }
        }
        if (v > 1) bump(v, sign);
    }

    void bump(int p, int sign) {
        if (exps_.size() <= static_cast<std::size_t>(p)) exps_.resize(p + 1, 0);
        exps_[p] += sign;
    }

    std::vector<int> exps_;
};

} // namespace detail

/// Number of standard Young tableaux of shape nu (hook length formula).
/// Exact; throws overflow_error if the count exceeds 128 bits.
inline uint128 syt_count(const Partition& nu) {
    const int N = nu.weight();
    if (N == 0) return 1;
    detail::FactorExponents f;
    f.mul_factorial(N);
    const Partition conj = nu.conjugate();
    for (int i = 1; i <= nu.num_parts(); ++i)
        for (int j = 1; j <= nu.part(i); ++j)
            f.div(nu.part(i) - j + conj.part(j) - i + 1);
    return f.value();
}

/// Dimension f^nu(d) of the U(d) irrep of shape nu (Weyl dimension formula).
inline uint128 weyl_dim(const Partition& nu, int d) {
    if (nu.num_parts() > d) return 0;
    detail::FactorExponents f;
    for (int i = 1; i <= d; ++i) {
        for (int j = i + 1; j <= d; ++j) {
            f.mul(nu.part(i) - nu.part(j) + j - i);
            f.div(j - i);
        }
    }
    return f.value();
}

inline uint128 binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    k = std::min(k, n - k);
    detail::FactorExponents f;
    for (int i = 0; i < k; ++i) {
        f.mul(n - i);
        f.div(i + 1);
    }
    return f.value();
}

/// Dimension of the commutant for N qudits with d levels: sum over
/// partitions of f^nu(d)^2, equal to binom(N + d^2 - 1, N).
inline uint128 commutant_dim(int N, int d) {
    uint128 total = 0;
    for (const Partition& nu : partitions_of(N, d)) {
        const uint128 fd = weyl_dim(nu, d);
        total += checked_mul(fd, fd);
    }
    return total;
}

} // namespace pisim
