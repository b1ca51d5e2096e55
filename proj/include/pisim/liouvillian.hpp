#pragma once

#include <Eigen/Dense>
#include <map>
#include <tuple>
#include <memory>
#include <utility>
#include <vector>

#include "pisim/cgc.hpp"
#include "pisim/commutant.hpp"
#include "pisim/model.hpp"
#include "pisim/schedule.hpp"

namespace pisim {

/// One nonzero CGC <W_mu[w_mu], box | W_parent[a]> of a parent/child shape
/// pair; the per-parent-pattern lists drive every g-operator trace.
struct BranchEntry {
    int w_mu;
    int box;
    double coeff;
};

/// Precomputed CGC branch tables and K-coefficient blocks for one
/// CommutantIndex. All tables are built eagerly so const access is safe to
/// share across threads.
class KEngine {
public:
    explicit KEngine(IndexPtr index) : index_(std::move(index)) {
        const int d = index_->d();
        for (std::size_t nu = 0; nu < index_->num_partitions(); ++nu) {
            auto minus = remove_corners(index_->partition(nu));
            std::sort(minus.begin(), minus.end());
            for (const Partition& mu : minus) {
                register_child(mu, d);
                build_branches(static_cast<int>(nu), mu);
            }
        }
    }

    const IndexPtr& index() const { return index_; }

    double child_f(const Partition& mu) const { return children_.at(mu).f; }
    const std::vector<GTPattern>& child_swts(const Partition& mu) const {
        return children_.at(mu).swts;
    }

    /// Branch lists of parent partition #nu toward child shape mu, one list
    /// per parent SWT, sorted by child SWT index.
    const std::vector<std::vector<BranchEntry>>& branches(int nu, const Partition& mu) const {
        return branches_.at({nu, mu});
    }

    /// r^mu_nu = N f^mu / f^nu.
    double ratio(const Partition& mu, int nu) const {
        return index_->N() * child_f(mu) / static_cast<double>(index_->f(nu));
    }

    /// Trace table T(a,b) = Tr[g_mu^{(lam,W_a; nu,W_b)\dagger} X], as an
    /// f^lam(d) x f^nu(d) matrix.
    Eigen::MatrixXcd trace_table(int lam, int nu, const Partition& mu,
                                 const Eigen::MatrixXcd& X) const {
        const auto& L = branches(lam, mu);
        const auto& R = branches(nu, mu);
        Eigen::MatrixXcd T = Eigen::MatrixXcd::Zero(index_->fd(lam), index_->fd(nu));
        for (std::size_t a = 0; a < L.size(); ++a) {
            for (std::size_t b = 0; b < R.size(); ++b) {
                cdouble sum = 0.0;
                std::size_t ir = 0;
                for (const BranchEntry& el : L[a]) {
                    while (ir < R[b].size() && R[b][ir].w_mu < el.w_mu) ++ir;
                    for (std::size_t k = ir; k < R[b].size() && R[b][k].w_mu == el.w_mu; ++k)
                        sum += el.coeff * R[b][k].coeff * X(el.box, R[b][k].box);
                }
                T(a, b) = sum;
            }
        }
        return T;
    }

    /// K_X^{(nu,W,Wt)} block: sum_{mu in {nu^-}} r^mu_nu Tr[g^dagger X].
    Eigen::MatrixXcd k_x(int nu, const Eigen::MatrixXcd& X) const {
        Eigen::MatrixXcd K = Eigen::MatrixXcd::Zero(index_->fd(nu), index_->fd(nu));
        for (const Partition& mu : remove_corners(index_->partition(nu)))
            K += ratio(mu, nu) * trace_table(nu, nu, mu, X);
        return K;
    }

    /// Gain superblock K_{X,Y}^{(lam,a,a'; nu,b,b')} of shape
    /// f^lam(d)^2 x f^nu(d)^2; zero matrix when lam is not in {nu^{-+}}.
    Eigen::MatrixXcd k_xy(int lam, int nu, const Eigen::MatrixXcd& X,
                          const Eigen::MatrixXcd& Y) const {
        const int fl = index_->fd(lam), fn = index_->fd(nu);
        Eigen::MatrixXcd B = Eigen::MatrixXcd::Zero(fl * fl, fn * fn);
        for (const Partition& mu : common_children(lam, nu)) {
            const double w = std::sqrt(ratio(mu, lam) * ratio(mu, nu));
            const Eigen::MatrixXcd TX = trace_table(lam, nu, mu, X);
            const Eigen::MatrixXcd TY = trace_table(lam, nu, mu, Y);
            for (int a = 0; a < fl; ++a)
                for (int ap = 0; ap < fl; ++ap)
                    for (int b = 0; b < fn; ++b)
                        for (int bp = 0; bp < fn; ++bp)
                            B(a * fl + ap, b * fn + bp) +=
                                w * TX(a, b) * std::conj(TY(ap, bp));
        }
        return B;
    }

    /// Single k-coefficient (general Identity); mainly for tests, assembly
    /// uses the block form above.
    cdouble k_coefficient(const Eigen::MatrixXcd& X, const Eigen::MatrixXcd& Y, int lam, int a,
                          int ap, int nu, int b, int bp) const {
        cdouble v = 0.0;
        for (const Partition& mu : common_children(lam, nu)) {
            const double w = std::sqrt(ratio(mu, lam) * ratio(mu, nu));
            const Eigen::MatrixXcd TX = trace_table(lam, nu, mu, X);
            const Eigen::MatrixXcd TY = trace_table(lam, nu, mu, Y);
            v += w * TX(a, b) * std::conj(TY(ap, bp));
        }
        return v;
    }

    /// Indices of partitions lambda with lambda in {nu^{-+}}.
    std::vector<int> minus_plus_indices(int nu) const {
        std::vector<int> out;
        for (const Partition& lam : remove_add_corners(index_->partition(nu), index_->d()))
            out.push_back(index_->partition_index(lam));
        return out;
    }

    std::vector<Partition> common_children(int lam, int nu) const {
        const auto a = remove_corners(index_->partition(lam));
        const auto b = remove_corners(index_->partition(nu));
        std::vector<Partition> out;
        for (const Partition& mu : a)
            if (std::find(b.begin(), b.end(), mu) != b.end()) out.push_back(mu);
        std::sort(out.begin(), out.end());
        return out;
    }

private:
    struct ChildRecord {
        std::vector<GTPattern> swts;
        std::map<GTPattern, int> pos;
        double f = 1.0;
    };

    void register_child(const Partition& mu, int d) {
        if (children_.count(mu)) return;
        ChildRecord rec;
        rec.swts = swt_enumerate(mu, d);
        for (std::size_t w = 0; w < rec.swts.size(); ++w)
            rec.pos.emplace(rec.swts[w], static_cast<int>(w));
        rec.f = static_cast<double>(syt_count(mu));
        children_.emplace(mu, std::move(rec));
    }

    void build_branches(int nu, const Partition& mu) {
        if (branches_.count({nu, mu})) return;
        const int d = index_->d();
        const auto& rec = children_.at(mu);
        const auto& swts = index_->swts(nu);
        std::vector<std::vector<BranchEntry>> lists(swts.size());
        for (std::size_t a = 0; a < swts.size(); ++a) {
            for (int j = 0; j < d; ++j) {
                for (const GTPattern& W_mu : shift_set_minus(mu, j, swts[a])) {
                    const double c = cgc(mu, W_mu, j, index_->partition(nu), swts[a]);
                    if (c != 0.0)
                        lists[a].push_back(BranchEntry{rec.pos.at(W_mu), j, c});
                }
            }
            std::sort(lists[a].begin(), lists[a].end(),
                      [](const BranchEntry& x, const BranchEntry& y) { return x.w_mu < y.w_mu; });
        }
        branches_.emplace(std::make_pair(nu, mu), std::move(lists));
    }

    IndexPtr index_;
    std::map<Partition, ChildRecord> children_;
    std::map<std::pair<int, Partition>, std::vector<std::vector<BranchEntry>>> branches_;
};

/// One additive piece of the projected master equation: a time-dependent
/// scalar multiplying a fixed sparse block structure. Blocks are keyed by
/// (lambda-index, nu-index); only lambda in {nu^{-+}} (or its p-fold
/// analogue) ever appears.
struct LiouvillianTerm {
    Schedule schedule = Schedule::constant(1.0);
    std::map<std::pair<int, int>, Eigen::MatrixXcd> blocks;

    Eigen::MatrixXcd& block(int lam, int nu, const CommutantIndex& index) {
        auto it = blocks.find({lam, nu});
        if (it == blocks.end()) {
            it = blocks
                     .emplace(std::make_pair(lam, nu),
                              Eigen::MatrixXcd::Zero(index.block_size(lam), index.block_size(nu)))
                     .first;
        }
        return it->second;
    }
};

class LiouvillianMatrix {
public:
    LiouvillianMatrix(IndexPtr index, std::vector<LiouvillianTerm> terms)
        : index_(std::move(index)), terms_(std::move(terms)) {}

    const IndexPtr& index() const { return index_; }
    const std::vector<LiouvillianTerm>& terms() const { return terms_; }

    /// rhovec -> d(rho)/dt components at time t.
    void apply_into(const Eigen::VectorXcd& x, double t, Eigen::VectorXcd& out) const {
        out.setZero(index_->dim());
        for (const LiouvillianTerm& term : terms_) {
            const double g = term.schedule(t);
            if (g == 0.0) continue;
            for (const auto& [key, M] : term.blocks) {
                const auto [lam, nu] = key;
                out.segment(index_->block_offset(lam), index_->block_size(lam)).noalias() +=
                    g * (M * x.segment(index_->block_offset(nu), index_->block_size(nu)));
            }
        }
    }

    PIOperator apply(const PIOperator& rho, double t) const {
        Eigen::VectorXcd out;
        apply_into(rho.components(), t, out);
        return PIOperator(index_, std::move(out));
    }

    /// Dense matrix entry sum at time t, as a coordinate list
    /// (row, col, value); rows/cols are flat commutant indices.
    std::vector<std::tuple<std::size_t, std::size_t, cdouble>> coo(double t) const {
        std::map<std::pair<std::size_t, std::size_t>, cdouble> acc;
        for (const LiouvillianTerm& term : terms_) {
            const double g = term.schedule(t);
            if (g == 0.0) continue;
            for (const auto& [key, M] : term.blocks) {
                const auto [lam, nu] = key;
                for (Eigen::Index r = 0; r < M.rows(); ++r)
                    for (Eigen::Index c = 0; c < M.cols(); ++c)
                        if (M(r, c) != cdouble{0.0, 0.0})
                            acc[{index_->block_offset(lam) + r, index_->block_offset(nu) + c}] +=
                                g * M(r, c);
            }
        }
        std::vector<std::tuple<std::size_t, std::size_t, cdouble>> out;
        out.reserve(acc.size());
        for (const auto& [rc, v] : acc) out.emplace_back(rc.first, rc.second, v);
        return out;
    }

    LiouvillianMatrix& merge(LiouvillianMatrix&& other) {
        for (LiouvillianTerm& t : other.terms_) terms_.push_back(std::move(t));
        return *this;
    }

private:
    IndexPtr index_;
    std::vector<LiouvillianTerm> terms_;
};

namespace detail {

inline void add_coherent_blocks(LiouvillianTerm& term, const KEngine& eng,
                                const Eigen::MatrixXcd& H) {
    const auto& index = *eng.index();
    for (std::size_t nu = 0; nu < index.num_partitions(); ++nu) {
        const int fn = index.fd(nu);
        const Eigen::MatrixXcd Kh = eng.k_x(static_cast<int>(nu), H);
        Eigen::MatrixXcd& B = term.block(static_cast<int>(nu), static_cast<int>(nu), index);
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
}

inline void add_local_dissipator_blocks(LiouvillianTerm& term, const KEngine& eng,
                                        const Eigen::MatrixXcd& jump) {
    const auto& index = *eng.index();
    const Eigen::MatrixXcd jj = jump.adjoint() * jump;
    for (std::size_t nu = 0; nu < index.num_partitions(); ++nu) {
        const int fn = index.fd(nu);
        // gain part, lambda in {nu^{-+}}
        for (int lam : eng.minus_plus_indices(static_cast<int>(nu)))
            term.block(lam, static_cast<int>(nu), index) +=
                eng.k_xy(lam, static_cast<int>(nu), jump, jump);
        // anticommutator loss, nu-diagonal
        const Eigen::MatrixXcd Kd = eng.k_x(static_cast<int>(nu), jj);
        Eigen::MatrixXcd& B = term.block(static_cast<int>(nu), static_cast<int>(nu), index);
        for (int a = 0; a < fn; ++a)
            for (int ap = 0; ap < fn; ++ap)
                for (int b = 0; b < fn; ++b)
                    for (int bp = 0; bp < fn; ++bp) {
                        cdouble v = 0.0;
                        if (a == b) v += Kd(bp, ap);
                        if (ap == bp) v += Kd(a, b);
                        if (v != cdouble{0.0, 0.0}) B(a * fn + ap, b * fn + bp) -= 0.5 * v;
                    }
    }
}

inline void add_collective_dissipator_blocks(LiouvillianTerm& term, const KEngine& eng,
                                             const Eigen::MatrixXcd& jump) {
    const auto& index = *eng.index();
    for (std::size_t nu = 0; nu < index.num_partitions(); ++nu) {
        const int fn = index.fd(nu);
        const Eigen::MatrixXcd C = eng.k_x(static_cast<int>(nu), jump);
        const Eigen::MatrixXcd S = C.adjoint() * C; // S(x,y) = sum_W conj(C(W,x)) C(W,y)
        Eigen::MatrixXcd& B = term.block(static_cast<int>(nu), static_cast<int>(nu), index);
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

} // namespace detail

/// Assemble the projected master equation for a single-particle model. The
/// sparse block structure is time independent; schedules enter as scalar
/// multipliers at evaluation time.
inline LiouvillianMatrix assemble(const ModelSpec& spec, const IndexPtr& index) {
    if (spec.N != index->N() || spec.d != index->d())
        throw std::invalid_argument("assemble: model and index disagree on (N,d)");
    if (spec.max_p() > 1)
        throw std::invalid_argument("assemble: p > 1 channels need the p-particle assembly");

    KEngine eng(index);
    std::vector<LiouvillianTerm> terms;

    for (const HamiltonianTerm& h : spec.hamiltonian) {
        LiouvillianTerm term;
        term.schedule = h.coeff;
        detail::add_coherent_blocks(term, eng, h.matrix);
        terms.push_back(std::move(term));
    }
    for (const Channel& ch : spec.channels) {
        LiouvillianTerm term;
        term.schedule = ch.rate;
        if (ch.scope == Channel::Scope::Local)
            detail::add_local_dissipator_blocks(term, eng, ch.jump);
        else
            detail::add_collective_dissipator_blocks(term, eng, ch.jump);
        terms.push_back(std::move(term));
    }
    return LiouvillianMatrix(index, std::move(terms));
}

/// Worst trace-functional column sum over all blocks at time t: the map
/// must annihilate the trace, sum_{lam,W} sqrt(f^lam) M[(lam,W,W), col] = 0.
inline double trace_functional_deviation(const LiouvillianMatrix& L, double t) {
    const auto& index = *L.index();
    Eigen::VectorXcd colsum = Eigen::VectorXcd::Zero(index.dim());
    double scale = 1.0;
    for (const LiouvillianTerm& term : L.terms()) {
        const double g = term.schedule(t);
        for (const auto& [key, M] : term.blocks) {
            const auto [lam, nu] = key;
            const int fl = index.fd(lam);
            scale = std::max(scale, M.cwiseAbs().maxCoeff());
            for (Eigen::Index c = 0; c < M.cols(); ++c) {
                cdouble s = 0.0;
                for (int a = 0; a < fl; ++a) s += index.sqrt_f(lam) * M(a * fl + a, c);
                colsum[index.block_offset(nu) + c] += g * s;
            }
        }
    }
    return colsum.cwiseAbs().maxCoeff() / scale;
}

} // namespace pisim
