#pragma once

#include <Eigen/Dense>
#include <functional>
#include <map>
#include <vector>

#include "pisim/liouvillian.hpp"

namespace pisim {

/// Partition path for a p-particle coupling: the 2p-1 interior partitions
/// (nu_{l,p-1}, ..., nu_{l,1}, nu_c, nu_{r,1}, ..., nu_{r,p-1}) between the
/// endpoint shapes. Valid iff every left/right step removes one corner.
struct PartitionPath {
    std::vector<Partition> left;   // nu_{l,p-1} .. nu_{l,1} (empty for p = 1)
    Partition center;              // nu_c
    std::vector<Partition> right;  // nu_{r,1} .. nu_{r,p-1}

    bool palindromic() const {
        if (left.size() != right.size()) return false;
        for (std::size_t k = 0; k < left.size(); ++k)
            if (left[k] != right[right.size() - 1 - k]) return false;
        return true;
    }

    /// Descending shape chain nu_L, nu_{l,p-1}, ..., nu_{l,1}, nu_c.
    std::vector<Partition> left_chain(const Partition& nu_L) const {
        std::vector<Partition> c{nu_L};
        for (const Partition& m : left) c.push_back(m);
        c.push_back(center);
        return c;
    }

    /// Descending shape chain nu_R, nu_{r,p-1}, ..., nu_{r,1}, nu_c (the
    /// stored right shapes run outward, so descent reverses them).
    std::vector<Partition> right_chain(const Partition& nu_R) const {
        std::vector<Partition> c{nu_R};
        for (auto it = right.rbegin(); it != right.rend(); ++it) c.push_back(*it);
        c.push_back(center);
        return c;
    }
};

inline int generalized_triangular_delta(const Partition& nu_L, const PartitionPath& path,
                                        const Partition& nu_R) {
    const auto covers = [](const Partition& parent, const Partition& child) {
        const auto minus = remove_corners(parent);
        return std::find(minus.begin(), minus.end(), child) != minus.end();
    };
    const auto lc = path.left_chain(nu_L);
    const auto rc = path.right_chain(nu_R);
    for (std::size_t k = 0; k + 1 < lc.size(); ++k)
        if (!covers(lc[k], lc[k + 1])) return 0;
    for (std::size_t k = 0; k + 1 < rc.size(); ++k)
        if (!covers(rc[k], rc[k + 1])) return 0;
    return 1;
}

namespace detail {

/// Single CGC chain amplitude: descending from (shape, W) through the given
/// patterns. Returns (flat index over removed boxes, amplitude); the box of
/// step t (t = 0 removes from the top) contributes with weight d^t, so the
/// first removed box is the least significant digit.
inline bool chain_amplitude(const std::vector<Partition>& shapes,
                            const std::vector<GTPattern>& patterns, int d, int& flat,
                            double& amp) {
    flat = 0;
    amp = 1.0;
    int weight = 1;
    for (std::size_t t = 0; t + 1 < shapes.size(); ++t) {
        const auto box = pisim::detail::box_label(patterns[t], patterns[t + 1]);
        if (!box) return false;
        const double c = cgc(shapes[t + 1], patterns[t + 1], *box, shapes[t], patterns[t]);
        if (c == 0.0) return false;
        flat += *box * weight;
        amp *= c;
        weight *= d;
    }
    return true;
}

} // namespace detail

/// Generalized 3nu-symbol matrix (d^p x d^p): products of p left-chain and p
/// right-chain CGCs. Null-matrix convention for invalid tableaux; reduces to
/// the ordinary 3nu symbol at p = 1. Flat indices run over (i_1..i_p) with
/// i_1 most significant (tensor factor k addresses qudit N-p+k).
inline Eigen::MatrixXd generalized_threenu(const Partition& nu_L, const GTPattern& W_L,
                                           const PartitionPath& path,
                                           const std::vector<GTPattern>& path_W,
                                           const Partition& nu_R, const GTPattern& W_R, int d,
                                           int p) {
    const int dim = static_cast<int>(std::llround(std::pow(d, p)));
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim, dim);
    if (static_cast<int>(path.left.size()) != p - 1 ||
        static_cast<int>(path.right.size()) != p - 1 ||
        static_cast<int>(path_W.size()) != 2 * p - 1)
        throw std::invalid_argument("generalized_threenu: path of wrong length for p");
    if (!generalized_triangular_delta(nu_L, path, nu_R)) return m;

    auto shapes_ok = [&](const GTPattern& W, const Partition& shape) {
        return W.shape() == shape && W.valid();
    };
    if (!shapes_ok(W_L, nu_L) || !shapes_ok(W_R, nu_R)) return m;
    for (std::size_t k = 0; k < path.left.size(); ++k)
        if (!shapes_ok(path_W[k], path.left[k])) return m;
    if (!shapes_ok(path_W[p - 1], path.center)) return m;
    for (std::size_t k = 0; k < path.right.size(); ++k)
        if (!shapes_ok(path_W[p + k], path.right[k])) return m;

    const std::vector<Partition> lshapes = path.left_chain(nu_L);
    std::vector<GTPattern> lpats;
    lpats.push_back(W_L);
    for (std::size_t k = 0; k < path.left.size(); ++k) lpats.push_back(path_W[k]);
    lpats.push_back(path_W[p - 1]);

    const std::vector<Partition> rdesc = path.right_chain(nu_R);
    std::vector<GTPattern> rpats;
    rpats.push_back(W_R);
    for (int k = p - 2; k >= 0; --k) rpats.push_back(path_W[p + k]);
    rpats.push_back(path_W[p - 1]);

    int fi = 0, fj = 0;
    double ai = 0.0, aj = 0.0;
    if (!detail::chain_amplitude(lshapes, lpats, d, fi, ai)) return m;
    if (!detail::chain_amplitude(rdesc, rpats, d, fj, aj)) return m;
    m(fi, fj) = ai * aj;
    return m;
}

/// Pattern chains (descending from each top SWT of a partition in the index
/// along a fixed shape chain) with their CGC amplitudes and flat box words.
class GenKEngine {
public:
    struct Leaf {
        int w_c;    // SWT index at the chain end
        int flat;   // removed boxes as a base-d word, first removal least significant
        double amp; // product of chain CGCs
    };

    GenKEngine(IndexPtr index, int p) : index_(std::move(index)), p_(p) {
        if (p_ < 1 || p_ > index_->N())
            throw std::invalid_argument("GenKEngine: need 1 <= p <= N");
        for (std::size_t nu = 0; nu < index_->num_partitions(); ++nu) {
            std::vector<Partition> chain{index_->partition(nu)};
            enumerate_chains(static_cast<int>(nu), chain);
        }
    }

    const IndexPtr& index() const { return index_; }
    int p() const { return p_; }

    /// Descending shape chains of length p from partition #nu (each chain
    /// lists p+1 shapes, top first).
    const std::vector<std::vector<Partition>>& chains(int nu) const { return chains_.at(nu); }

    /// binom(N,p) f^mu / f^nu.
    double ratio(const Partition& mu, int nu) const {
        return static_cast<double>(binomial(index_->N(), p_)) *
               static_cast<double>(syt_count(mu)) / static_cast<double>(index_->f(nu));
    }

    /// Per-top-pattern leaves of one shape chain.
    const std::vector<std::vector<Leaf>>& chain_leaves(int nu,
                                                       const std::vector<Partition>& chain) const {
        return leaves_.at({nu, chain});
    }

    /// T(a,b) = Tr[g_path^{(lam,W_a; nu,W_b)\dagger} X_p] for one partition
    /// path given as its left and right shape chains.
    Eigen::MatrixXcd trace_table(int lam, const std::vector<Partition>& lchain, int nu,
                                 const std::vector<Partition>& rchain,
                                 const Eigen::MatrixXcd& X) const {
        const auto& L = chain_leaves(lam, lchain);
        const auto& R = chain_leaves(nu, rchain);
        Eigen::MatrixXcd T = Eigen::MatrixXcd::Zero(index_->fd(lam), index_->fd(nu));
        for (std::size_t a = 0; a < L.size(); ++a)
            for (std::size_t b = 0; b < R.size(); ++b) {
                cdouble sum = 0.0;
                for (const Leaf& l : L[a])
                    for (const Leaf& r : R[b])
                        if (l.w_c == r.w_c) sum += l.amp * r.amp * X(l.flat, r.flat);
                T(a, b) = sum;
            }
        return T;
    }

    /// K_{X_p}^{(nu,W,Wt)} block: palindromic paths only.
    Eigen::MatrixXcd k_x(int nu, const Eigen::MatrixXcd& X) const {
        const int fn = index_->fd(nu);
        Eigen::MatrixXcd K = Eigen::MatrixXcd::Zero(fn, fn);
        for (const auto& chain : chains(nu))
            K += ratio(chain.back(), nu) * trace_table(nu, chain, nu, chain, X);
        return K;
    }

    /// Gain superblock over all admissible paths between lam and nu.
    Eigen::MatrixXcd k_xy(int lam, int nu, const Eigen::MatrixXcd& X,
                          const Eigen::MatrixXcd& Y) const {
        const int fl = index_->fd(lam), fn = index_->fd(nu);
        Eigen::MatrixXcd B = Eigen::MatrixXcd::Zero(fl * fl, fn * fn);
        for (const auto& lchain : chains(lam)) {
            for (const auto& rchain : chains(nu)) {
                if (lchain.back() != rchain.back()) continue;
                const double w = std::sqrt(ratio(lchain.back(), lam) * ratio(rchain.back(), nu));
                const Eigen::MatrixXcd TX = trace_table(lam, lchain, nu, rchain, X);
                const Eigen::MatrixXcd TY = trace_table(lam, lchain, nu, rchain, Y);
                for (int a = 0; a < fl; ++a)
                    for (int ap = 0; ap < fl; ++ap)
                        for (int b = 0; b < fn; ++b)
                            for (int bp = 0; bp < fn; ++bp)
                                B(a * fl + ap, b * fn + bp) +=
                                    w * TX(a, b) * std::conj(TY(ap, bp));
            }
        }
        return B;
    }

    /// Single generalized K coefficient (Appendix D form); for tests.
    cdouble k_coefficient(const Eigen::MatrixXcd& X, const Eigen::MatrixXcd& Y, int lam, int a,
                          int ap, int nu, int b, int bp) const {
        cdouble v = 0.0;
        for (const auto& lchain : chains(lam))
            for (const auto& rchain : chains(nu)) {
                if (lchain.back() != rchain.back()) continue;
                const double w = std::sqrt(ratio(lchain.back(), lam) * ratio(rchain.back(), nu));
                const Eigen::MatrixXcd TX = trace_table(lam, lchain, nu, rchain, X);
                const Eigen::MatrixXcd TY = trace_table(lam, lchain, nu, rchain, Y);
                v += w * TX(a, b) * std::conj(TY(ap, bp));
            }
        return v;
    }

    /// Partition indices lambda with a common p-fold removal with nu
    /// (lambda in {nu^{-^p +^p}}).
    std::vector<int> reachable_indices(int nu) const {
        std::vector<int> out;
        for (std::size_t lam = 0; lam < index_->num_partitions(); ++lam) {
            bool hit = false;
            for (const auto& lchain : chains(static_cast<int>(lam))) {
                for (const auto& rchain : chains(nu))
                    if (lchain.back() == rchain.back()) {
                        hit = true;
                        break;
                    }
                if (hit) break;
            }
            if (hit) out.push_back(static_cast<int>(lam));
        }
        return out;
    }

private:
    void enumerate_chains(int nu, std::vector<Partition>& chain) {
        if (static_cast<int>(chain.size()) == p_ + 1) {
            chains_[nu].push_back(chain);
            build_leaves(nu, chain);
            return;
        }
        auto minus = remove_corners(chain.back());
        std::sort(minus.begin(), minus.end());
        for (const Partition& mu : minus) {
            chain.push_back(mu);
            enumerate_chains(nu, chain);
            chain.pop_back();
        }
    }

    void build_leaves(int nu, const std::vector<Partition>& chain) {
        const int d = index_->d();
        const auto end_swts = swt_enumerate(chain.back(), d);
        std::map<GTPattern, int> end_pos;
        for (std::size_t w = 0; w < end_swts.size(); ++w)
            end_pos.emplace(end_swts[w], static_cast<int>(w));

        const auto& tops = index_->swts(nu);
        std::vector<std::vector<Leaf>> lists(tops.size());
        for (std::size_t a = 0; a < tops.size(); ++a) {
            // depth-first over shift-compatible children along the chain
            std::function<void(const GTPattern&, std::size_t, int, int, double)> descend =
                [&](const GTPattern& W, std::size_t t, int flat, int weight, double amp) {
                    if (t + 1 == chain.size()) {
                        lists[a].push_back(Leaf{end_pos.at(W), flat, amp});
                        return;
                    }
                    for (int box = 0; box < d; ++box) {
                        for (const GTPattern& Wc : shift_set_minus(chain[t + 1], box, W)) {
                            const double c = cgc(chain[t + 1], Wc, box, chain[t], W);
                            if (c != 0.0)
                                descend(Wc, t + 1, flat + box * weight, weight * d, amp * c);
                        }
                    }
                };
            descend(tops[a], 0, 0, 1, 1.0);
        }
        leaves_.emplace(std::make_pair(nu, chain), std::move(lists));
    }

    IndexPtr index_;
    int p_;
    std::map<int, std::vector<std::vector<Partition>>> chains_;
    std::map<std::pair<int, std::vector<Partition>>, std::vector<std::vector<Leaf>>> leaves_;
};

/// Assemble a model through the generalized p-particle path for every term
/// (including p = 1, where it reproduces the single-particle assembly).
/// Practical cap p <= 3 unless explicitly raised.
inline LiouvillianMatrix assemble_p(const ModelSpec& spec, const IndexPtr& index, int p_cap = 3) {
    if (spec.N != index->N() || spec.d != index->d())
        throw std::invalid_argument("assemble_p: model and index disagree on (N,d)");
    if (spec.max_p() > p_cap)
        throw std::invalid_argument("assemble_p: p exceeds cap " + std::to_string(p_cap));
    if (spec.max_p() > spec.N)
        throw std::invalid_argument("assemble_p: p exceeds N");

    std::map<int, std::shared_ptr<GenKEngine>> engines;
    const auto engine = [&](int p) {
        auto& e = engines[p];
        if (!e) e = std::make_shared<GenKEngine>(index, p);
        return e;
    };

    std::vector<LiouvillianTerm> terms;
    const std::size_t nparts = index->num_partitions();

    for (const HamiltonianTerm& h : spec.hamiltonian) {
        const auto eng = engine(h.p);
        LiouvillianTerm term;
        term.schedule = h.coeff;
        for (std::size_t nu = 0; nu < nparts; ++nu) {
            const int fn = index->fd(nu);
            const Eigen::MatrixXcd Kh = eng->k_x(static_cast<int>(nu), h.matrix);
            Eigen::MatrixXcd& B = term.block(static_cast<int>(nu), static_cast<int>(nu), *index);
            const cdouble im{0.0, 1.0};
            for (int a = 0; a < fn; ++a)
                for (int ap = 0; ap < fn; ++ap)
                    for (int b = 0; b < fn; ++b)
                        for (int bp = 0; bp < fn; ++bp) {
                            cdouble v = 0.0;
                            if (a == b) v += Kh(bp, ap);
                            if (ap == bp) v -= Kh(a, b);
                            if (v != cdouble{0.0, 0.0}) B(a * fn + ap, b * fn + bp) += im * v;
                        }
        }
        terms.push_back(std::move(term));
    }

    for (const Channel& ch : spec.channels) {
        const auto eng = engine(ch.p);
        LiouvillianTerm term;
        term.schedule = ch.rate;
        if (ch.scope == Channel::Scope::Local) {
            const Eigen::MatrixXcd jj = ch.jump.adjoint() * ch.jump;
            for (std::size_t nu = 0; nu < nparts; ++nu) {
                const int fn = index->fd(nu);
                for (int lam : eng->reachable_indices(static_cast<int>(nu)))
                    term.block(lam, static_cast<int>(nu), *index) +=
                        eng->k_xy(lam, static_cast<int>(nu), ch.jump, ch.jump);
                const Eigen::MatrixXcd Kd = eng->k_x(static_cast<int>(nu), jj);
                Eigen::MatrixXcd& B =
                    term.block(static_cast<int>(nu), static_cast<int>(nu), *index);
                for (int a = 0; a < fn; ++a)
                    for (int ap = 0; ap < fn; ++ap)
                        for (int b = 0; b < fn; ++b)
                            for (int bp = 0; bp < fn; ++bp) {
                                cdouble v = 0.0;
                                if (a == b) v += Kd(bp, ap);
                                if (ap == bp) v += Kd(a, b);
                                if (v != cdouble{0.0, 0.0})
                                    B(a * fn + ap, b * fn + bp) -= 0.5 * v;
                            }
            }
        } else {
            for (std::size_t nu = 0; nu < nparts; ++nu) {
                const int fn = index->fd(nu);
                const Eigen::MatrixXcd C = eng->k_x(static_cast<int>(nu), ch.jump);
                const Eigen::MatrixXcd S = C.adjoint() * C;
                Eigen::MatrixXcd& B =
                    term.block(static_cast<int>(nu), static_cast<int>(nu), *index);
                for (int a = 0; a < fn; ++a)
                    for (int ap = 0; ap < fn; ++ap)
                        for (int b = 0; b < fn; ++b)
                            for (int bp = 0; bp < fn; ++bp) {
                                cdouble v = C(a, b) * std::conj(C(ap, bp));
                                if (a == b) v -= 0.5 * S(bp, ap);
                                if (ap == bp) v -= 0.5 * S(a, b);
                                if (v != cdouble{0.0, 0.0}) B(a * fn + ap, b * fn + bp) += v;
                            }
            }
        }
        terms.push_back(std::move(term));
    }
    return LiouvillianMatrix(index, std::move(terms));
}

/// Production entry point: single-particle terms go through the direct
/// assembly, p > 1 terms through the generalized path; the results add.
inline LiouvillianMatrix assemble_model(const ModelSpec& spec, const IndexPtr& index,
                                        int p_cap = 3) {
    ModelSpec p1 = spec;
    p1.hamiltonian.clear();
    p1.channels.clear();
    ModelSpec pn = p1;
    for (const auto& h : spec.hamiltonian)
        (h.p == 1 ? p1 : pn).hamiltonian.push_back(h);
    for (const auto& c : spec.channels) (c.p == 1 ? p1 : pn).channels.push_back(c);

    LiouvillianMatrix L = assemble(p1, index);
    if (!pn.hamiltonian.empty() || !pn.channels.empty())
        L.merge(assemble_p(pn, index, p_cap));
    return L;
}

} // namespace pisim
