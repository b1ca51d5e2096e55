#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <stdexcept>
#include <vector>

#include "pisim/gt.hpp"
#include "pisim/partition.hpp"
#include "pisim/threenu.hpp"

namespace pisim {

using cdouble = std::complex<double>;

class resource_error : public std::runtime_error {
public:
    explicit resource_error(const std::string& what) : std::runtime_error(what) {}
};

/// Canonical index of the commutant F-basis for fixed (N, d): partitions in
/// reverse-lexicographic order, SWTs per partition in lexicographic order,
/// flat index (nu, W, W') = offset_nu + w * f^nu(d) + w'. Total dimension
/// binom(N + d^2 - 1, N).
class CommutantIndex {
public:
    static std::shared_ptr<const CommutantIndex> build(int N, int d,
                                                       std::size_t dim_cap = 8'000'000) {
        return std::shared_ptr<const CommutantIndex>(new CommutantIndex(N, d, dim_cap));
    }

    int N() const { return N_; }
    int d() const { return d_; }
    std::size_t dim() const { return dim_; }
    std::size_t num_partitions() const { return partitions_.size(); }

    const std::vector<Partition>& partitions() const { return partitions_; }
    const Partition& partition(int nu) const { return partitions_[nu]; }
    const std::vector<GTPattern>& swts(int nu) const { return swts_[nu]; }
    int fd(int nu) const { return fd_[nu]; }
    uint128 f(int nu) const { return f_[nu]; }
    double sqrt_f(int nu) const { return sqrt_f_[nu]; }
    std::size_t block_offset(int nu) const { return offsets_[nu]; }
    std::size_t block_size(int nu) const {
        return static_cast<std::size_t>(fd_[nu]) * fd_[nu];
    }

    std::size_t flat(int nu, int w, int wp) const {
        return offsets_[nu] + static_cast<std::size_t>(w) * fd_[nu] + wp;
    }

    int partition_index(const Partition& nu) const {
        const auto it = part_index_.find(nu);
        if (it == part_index_.end())
            throw std::invalid_argument("CommutantIndex: partition not in (N,d) family");
        return it->second;
    }

    int swt_index(int nu, const GTPattern& W) const {
        const auto it = swt_index_[nu].find(W);
        if (it == swt_index_[nu].end())
            throw std::invalid_argument("CommutantIndex: pattern not an SWT of its shape");
        return it->second;
    }

private:
    CommutantIndex(int N, int d, std::size_t dim_cap) : N_(N), d_(d) {
        if (N < 0 || d < 1) throw std::invalid_argument("CommutantIndex: need N >= 0, d >= 1");
        const uint128 dim_wide = commutant_dim(N, d);
        if (dim_wide > static_cast<uint128>(dim_cap))
            throw resource_error("CommutantIndex: dimension " + pisim::to_string(dim_wide) +
                                 " exceeds cap " + std::to_string(dim_cap));
        partitions_ = partitions_of(N, d);
        std::size_t off = 0;
        for (std::size_t i = 0; i < partitions_.size(); ++i) {
            part_index_.emplace(partitions_[i], static_cast<int>(i));
            swts_.push_back(swt_enumerate(partitions_[i], d));
            fd_.push_back(static_cast<int>(swts_.back().size()));
            f_.push_back(syt_count(partitions_[i]));
            sqrt_f_.push_back(std::sqrt(static_cast<double>(f_.back())));
            offsets_.push_back(off);
            off += static_cast<std::size_t>(fd_.back()) * fd_.back();
            std::map<GTPattern, int> si;
            for (std::size_t w = 0; w < swts_.back().size(); ++w)
                si.emplace(swts_.back()[w], static_cast<int>(w));
            swt_index_.push_back(std::move(si));
        }
        dim_ = off;
    }

    int N_, d_;
    std::size_t dim_ = 0;
    std::vector<Partition> partitions_;
    std::map<Partition, int> part_index_;
    std::vector<std::vector<GTPattern>> swts_;
    std::vector<int> fd_;
    std::vector<uint128> f_;
    std::vector<double> sqrt_f_;
    std::vector<std::size_t> offsets_;
    std::vector<std::map<GTPattern, int>> swt_index_;
};

using IndexPtr = std::shared_ptr<const CommutantIndex>;

/// PI operator stored as its component vector over the F-basis,
/// A = sum_{nu,W,W'} A_{nu,W,W'} F_nu^{(W,W')}.
class PIOperator {
public:
    explicit PIOperator(IndexPtr index)
        : index_(std::move(index)), comp_(Eigen::VectorXcd::Zero(index_->dim())) {}

    PIOperator(IndexPtr index, Eigen::VectorXcd components)
        : index_(std::move(index)), comp_(std::move(components)) {
        if (comp_.size() != static_cast<Eigen::Index>(index_->dim()))
            throw std::invalid_argument("PIOperator: component vector has wrong length");
    }

    const IndexPtr& index() const { return index_; }
    const Eigen::VectorXcd& components() const { return comp_; }
    Eigen::VectorXcd& components() { return comp_; }

    cdouble operator()(int nu, int w, int wp) const { return comp_[index_->flat(nu, w, wp)]; }
    cdouble& operator()(int nu, int w, int wp) { return comp_[index_->flat(nu, w, wp)]; }

    /// View of the nu-block as an f^nu(d) x f^nu(d) matrix (row index W).
    Eigen::Map<const Eigen::Matrix<cdouble, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
    block(int nu) const {
        return {comp_.data() + index_->block_offset(nu), index_->fd(nu), index_->fd(nu)};
    }
    Eigen::Map<Eigen::Matrix<cdouble, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
    block(int nu) {
        return {comp_.data() + index_->block_offset(nu), index_->fd(nu), index_->fd(nu)};
    }

    PIOperator adjoint() const {
        PIOperator out(index_);
        for (std::size_t nu = 0; nu < index_->num_partitions(); ++nu)
            out.block(nu) = block(nu).adjoint();
        return out;
    }

    /// Operator product via the commutant multiplication rule:
    /// (AB)_{nu,W,W'} = f^nu^{-1/2} sum_{Wt} A_{nu,W,Wt} B_{nu,Wt,W'}.
    PIOperator multiply(const PIOperator& rhs) const {
        require_same_index(rhs);
        PIOperator out(index_);
        for (std::size_t nu = 0; nu < index_->num_partitions(); ++nu)
            out.block(nu) = (block(nu) * rhs.block(nu)) / index_->sqrt_f(nu);
        return out;
    }

    cdouble trace() const {
        cdouble t = 0.0;
        for (std::size_t nu = 0; nu < index_->num_partitions(); ++nu)
            t += index_->sqrt_f(nu) * block(nu).trace();
        return t;
    }

    /// Hilbert-Schmidt inner product Tr(A^dagger B); the F-basis is
    /// orthonormal so this is the plain conjugated dot product.
    cdouble hs_inner(const PIOperator& rhs) const {
        require_same_index(rhs);
        return comp_.dot(rhs.comp_);
    }

    /// Tr(A B) without the adjoint (the natural expectation pairing).
    cdouble pair(const PIOperator& rhs) const {
        require_same_index(rhs);
        cdouble t = 0.0;
        for (std::size_t nu = 0; nu < index_->num_partitions(); ++nu)
            t += (block(nu) * rhs.block(nu)).trace();
        return t;
    }

    bool hermitian(double tol = 1e-12) const {
        for (std::size_t nu = 0; nu < index_->num_partitions(); ++nu) {
            const auto b = block(nu);
            if ((Eigen::MatrixXcd(b) - Eigen::MatrixXcd(b).adjoint()).cwiseAbs().maxCoeff() > tol)
                return false;
        }
        return true;
    }

    /// nu-block weights w_nu = sqrt(f^nu) sum_W rho_{nu,W,W}; for a state
    /// these are the Schur-subspace populations and sum to Tr(rho).
    Eigen::VectorXd block_weights() const {
        Eigen::VectorXd w(index_->num_partitions());
        for (std::size_t nu = 0; nu < index_->num_partitions(); ++nu)
            w[nu] = (index_->sqrt_f(nu) * block(nu).trace()).real();
        return w;
    }

    PIOperator& operator+=(const PIOperator& rhs) {
        require_same_index(rhs);
        comp_ += rhs.comp_;
        return *this;
    }
    PIOperator& operator*=(cdouble s) {
        comp_ *= s;
        return *this;
    }
    friend PIOperator operator+(PIOperator a, const PIOperator& b) { return a += b; }
    friend PIOperator operator*(cdouble s, PIOperator a) { return a *= s; }

private:
    void require_same_index(const PIOperator& rhs) const {
        if (index_.get() != rhs.index_.get() &&
            (index_->N() != rhs.index_->N() || index_->d() != rhs.index_->d()))
            throw std::invalid_argument("PIOperator: operands indexed over different (N,d)");
    }

    IndexPtr index_;
    Eigen::VectorXcd comp_;
};

/// Components of the identity operator: sqrt(f^nu) on every diagonal entry
/// (the closure relation).
inline PIOperator identity_components(const IndexPtr& index) {
    PIOperator out(index);
    for (std::size_t nu = 0; nu < index->num_partitions(); ++nu)
        for (int w = 0; w < index->fd(nu); ++w)
            out(nu, w, w) = index->sqrt_f(nu);
    return out;
}

/// K_X^{(nu,W,Wt)} = sum_{mu in {nu^-}} r^mu_nu Tr[g_mu^{(nu,W;nu,Wt)\dagger} X]
/// for a single nu, as an f^nu(d) x f^nu(d) matrix (row index W).
inline Eigen::MatrixXcd k_x_block(const Eigen::MatrixXcd& X, const CommutantIndex& index, int nu) {
    const int d = index.d();
    const auto& swts = index.swts(nu);
    const int fd = index.fd(nu);
    Eigen::MatrixXcd K = Eigen::MatrixXcd::Zero(fd, fd);
    const double f_nu = static_cast<double>(index.f(nu));
    for (const Partition& mu : remove_corners(index.partition(nu))) {
        const double r = index.N() * static_cast<double>(syt_count(mu)) / f_nu;
        for (int w = 0; w < fd; ++w) {
            for (int wt = 0; wt < fd; ++wt) {
                const Eigen::MatrixXd g =
                    g_operator(mu, index.partition(nu), swts[w], index.partition(nu), swts[wt], d);
                // Tr[g^dagger X] with real g
                K(w, wt) += r * (g.cast<cdouble>().cwiseProduct(X)).sum();
            }
        }
    }
    return K;
}

/// Components of the collective operator X_c = sum_n X^(n):
/// sqrt(f^nu) K_X^{(nu,W,W')}.
inline PIOperator collective_components(const Eigen::MatrixXcd& X, const IndexPtr& index) {
    if (X.rows() != index->d() || X.cols() != index->d())
        throw std::invalid_argument("collective_components: matrix is not d x d");
    PIOperator out(index);
    for (std::size_t nu = 0; nu < index->num_partitions(); ++nu)
        out.block(nu) = index->sqrt_f(nu) * k_x_block(X, *index, nu);
    return out;
}

/// Tr(X rho) for PI X and rho sharing an index.
inline cdouble expectation(const PIOperator& X, const PIOperator& rho) {
    return X.pair(rho);
}

/// Purity Tr(rho^2) = sum |components|^2 for Hermitian rho.
inline double purity(const PIOperator& rho) { return rho.components().squaredNorm(); }

/// Initial-state constructors. Pure product states live entirely in the
/// nu = (N) block with multinomial amplitudes; no Schur transform needed.
inline PIOperator maximally_mixed_state(const IndexPtr& index) {
    PIOperator out = identity_components(index);
    out *= 1.0 / std::pow(static_cast<double>(index->d()), index->N());
    return out;
}

inline PIOperator pure_product_state(const std::vector<cdouble>& amplitudes,
                                     const IndexPtr& index) {
    const int d = index->d();
    if (static_cast<int>(amplitudes.size()) != d)
        throw std::invalid_argument("pure_product_state: need d amplitudes");
    double norm2 = 0.0;
    for (const cdouble& a : amplitudes) norm2 += std::norm(a);
    if (std::abs(norm2 - 1.0) > 1e-10)
        throw std::invalid_argument("pure_product_state: amplitudes not normalized");

    const Partition sym = index->N() > 0 ? Partition{index->N()} : Partition{};
    const int nu = index->partition_index(sym);
    const auto& swts = index->swts(nu);
    Eigen::VectorXcd c(swts.size());
    for (std::size_t w = 0; w < swts.size(); ++w) {
        const auto n = swts[w].content();
        detail::FactorExponents fe;
        fe.mul_factorial(index->N());
        for (int k = 0; k < d; ++k)
            for (int i = 2; i <= n[k]; ++i) fe.div(i);
        cdouble amp = std::sqrt(static_cast<double>(fe.value()));
        for (int k = 0; k < d; ++k)
            for (int i = 0; i < n[k]; ++i) amp *= amplitudes[k];
        c[w] = amp;
    }
    PIOperator out(index);
    out.block(nu) = c * c.adjoint();
    return out;
}

/// Projector onto the symmetric GT basis state with the given content
/// counts (a generalized Dicke state of the nu = (N) block).
inline PIOperator symmetric_basis_state(const std::vector<int>& content, const IndexPtr& index) {
    const int d = index->d();
    if (static_cast<int>(content.size()) != d)
        throw std::invalid_argument("symmetric_basis_state: need d content counts");
    int total = 0;
    for (int n : content) {
        if (n < 0) throw std::invalid_argument("symmetric_basis_state: negative count");
        total += n;
    }
    if (total != index->N())
        throw std::invalid_argument("symmetric_basis_state: counts must sum to N");

    const int nu = index->partition_index(Partition{index->N()});
    const auto& swts = index->swts(nu);
    for (std::size_t w = 0; w < swts.size(); ++w) {
        if (swts[w].content() == content) {
            PIOperator out(index);
            out(nu, static_cast<int>(w), static_cast<int>(w)) = 1.0;
            return out;
        }
    }
    throw std::logic_error("symmetric_basis_state: content not found");
}

} // namespace pisim
