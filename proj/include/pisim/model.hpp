#pragma once

#include <Eigen/Dense>
#include <complex>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pisim/commutant.hpp"
#include "pisim/schedule.hpp"

namespace pisim {

using json = nlohmann::json;

struct HamiltonianTerm {
    Eigen::MatrixXcd matrix; // d^p x d^p, Hermitian
    int p = 1;
    Schedule coeff = Schedule::constant(1.0);
};

struct Channel {
    enum class Scope { Local, Collective };
    Scope scope = Scope::Local;
    int p = 1;
    Eigen::MatrixXcd jump; // d^p x d^p
    Schedule rate = Schedule::constant(0.0);
};

struct InitialState {
    enum class Kind { MaximallyMixed, PureProduct, SymmetricBasis, Components };
    Kind kind = Kind::MaximallyMixed;
    std::vector<cdouble> amplitudes;                    // PureProduct
    std::vector<int> content;                           // SymmetricBasis
    struct ComponentEntry {
        std::vector<int> nu;
        int w = 0, wp = 0;
        cdouble value;
    };
    std::vector<ComponentEntry> components;             // Components
};

struct Observable {
    std::string name;
    Eigen::MatrixXcd local;                             // d x d; collective sum
};

struct GridSpec {
    double t0 = 0.0;
    double t1 = 1.0;
    double dt = 0.01;          // output spacing; the rk4 step
    std::string method = "rk45";
    double atol = 1e-10;
    double rtol = 1e-8;
    int thin = 1;              // keep every thin-th snapshot
};

struct ModelSpec {
    int version = 1;
    int N = 1;
    int d = 2;
    std::vector<HamiltonianTerm> hamiltonian;
    std::vector<Channel> channels;
    InitialState initial_state;
    std::vector<Observable> observables;
    GridSpec grid;
    std::string output_path = "out";

    int max_p() const {
        int p = 1;
        for (const auto& h : hamiltonian) p = std::max(p, h.p);
        for (const auto& c : channels) p = std::max(p, c.p);
        return p;
    }
};

class model_error : public std::runtime_error {
public:
    model_error(std::string what, std::vector<std::string> violations)
        : std::runtime_error(std::move(what)), violations_(std::move(violations)) {}
    const std::vector<std::string>& violations() const { return violations_; }

private:
    std::vector<std::string> violations_;
};

namespace detail {

inline cdouble parse_complex(const json& j, std::vector<std::string>& errs, const std::string& where) {
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
        return {j[0].get<double>(), j[1].get<double>()};
    errs.push_back(where + ": complex entries must be numbers or [re, im] pairs");
    return {0.0, 0.0};
}

inline Eigen::MatrixXcd parse_matrix(const json& j, std::vector<std::string>& errs,
                                     const std::string& where) {
    if (!j.is_array() || j.empty() || !j[0].is_array()) {
        errs.push_back(where + ": matrix must be a nested row-major array");
        return Eigen::MatrixXcd::Zero(1, 1);
    }
    const std::size_t rows = j.size(), cols = j[0].size();
    Eigen::MatrixXcd m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        if (!j[r].is_array() || j[r].size() != cols) {
            errs.push_back(where + ": ragged matrix rows");
            return Eigen::MatrixXcd::Zero(1, 1);
        }
        for (std::size_t c = 0; c < cols; ++c)
            m(r, c) = parse_complex(j[r][c], errs, where);
    }
    return m;
}

inline Schedule parse_schedule(const json& j, std::vector<std::string>& errs,
                               const std::string& where) {
    if (j.is_number()) return Schedule::constant(j.get<double>());
    if (!j.is_object() || !j.contains("kind")) {
        errs.push_back(where + ": schedule must be a number or an object with \"kind\"");
        return Schedule::constant(0.0);
    }
    const std::string kind = j["kind"].get<std::string>();
    try {
        if (kind == "constant") return Schedule::constant(j.at("value").get<double>());
        if (kind == "sinusoidal")
            return Schedule::sinusoidal(j.at("amplitude").get<double>(),
                                        j.at("frequency").get<double>(),
                                        j.value("phase", 0.0), j.value("offset", 0.0));
        if (kind == "tabulated")
            return Schedule::tabulated(j.at("times").get<std::vector<double>>(),
                                       j.at("values").get<std::vector<double>>());
        errs.push_back(where + ": unknown schedule kind \"" + kind + "\"");
    } catch (const std::exception& e) {
        errs.push_back(where + ": " + e.what());
    }
    return Schedule::constant(0.0);
}

/// Permutation matrix swapping tensor factors a and b of a d^p space.
inline Eigen::MatrixXcd factor_swap(int d, int p, int a, int b) {
    const int dim = static_cast<int>(std::pow(d, p));
    Eigen::MatrixXcd P = Eigen::MatrixXcd::Zero(dim, dim);
    std::vector<int> digits(p);
    for (int idx = 0; idx < dim; ++idx) {
        int rem = idx;
        for (int k = p - 1; k >= 0; --k) {
            digits[k] = rem % d;
            rem /= d;
        }
        std::swap(digits[a], digits[b]);
        int out = 0;
        for (int k = 0; k < p; ++k) out = out * d + digits[k];
        P(out, idx) = 1.0;
    }
    return P;
}

} // namespace detail

/// Check that a d^p x d^p operator is invariant under permuting its p
/// tensor factors; returns the worst relative deviation over adjacent swaps.
inline double factor_symmetry_deviation(const Eigen::MatrixXcd& X, int d, int p) {
    if (p < 2) return 0.0;
    const double scale = std::max(1.0, X.cwiseAbs().maxCoeff());
    double worst = 0.0;
    for (int a = 0; a + 1 < p; ++a) {
        const Eigen::MatrixXcd P = detail::factor_swap(d, p, a, a + 1);
        worst = std::max(worst, ((P * X * P.adjoint() - X).cwiseAbs().maxCoeff()) / scale);
    }
    return worst;
}

/// Parse and validate a model file. Collects every violation before
/// throwing, so a bad file reports all its problems at once.
inline ModelSpec load_and_validate(const json& root) {
    std::vector<std::string> errs;
    ModelSpec spec;

    auto require_int = [&](const char* key, int lo) -> int {
        if (!root.contains(key) || !root[key].is_number_integer()) {
            errs.push_back(std::string(key) + ": required integer field");
            return lo;
        }
        const int v = root[key].get<int>();
        if (v < lo) errs.push_back(std::string(key) + ": must be >= " + std::to_string(lo));
        return std::max(v, lo);
    };

    spec.version = root.value("version", 1);
    spec.N = require_int("N", 1);
    spec.d = require_int("d", 2);
    const int d = spec.d;

    auto dim_for_p = [&](int p) { return static_cast<Eigen::Index>(std::llround(std::pow(d, p))); };

    if (root.contains("hamiltonian")) {
        int i = 0;
        for (const json& jh : root["hamiltonian"]) {
            const std::string where = "hamiltonian[" + std::to_string(i++) + "]";
            HamiltonianTerm term;
            term.p = jh.value("p", 1);
            if (term.p < 1 || term.p > spec.N)
                errs.push_back(where + ": p must be in [1, N]");
            term.matrix = detail::parse_matrix(jh.at("matrix"), errs, where);
            if (term.matrix.rows() != dim_for_p(term.p) || term.matrix.cols() != dim_for_p(term.p))
                errs.push_back(where + ": matrix must be d^p x d^p = " +
                               std::to_string(dim_for_p(term.p)) + " square");
            else {
                if ((term.matrix - term.matrix.adjoint()).cwiseAbs().maxCoeff() > 1e-10)
                    errs.push_back(where + ": Hamiltonian matrix is not Hermitian");
                if (factor_symmetry_deviation(term.matrix, d, term.p) > 1e-10)
                    errs.push_back(where + ": matrix is not symmetric under factor permutations");
            }
            if (jh.contains("schedule"))
                term.coeff = detail::parse_schedule(jh["schedule"], errs, where + ".schedule");
            spec.hamiltonian.push_back(std::move(term));
        }
    }

    if (root.contains("channels")) {
        int i = 0;
        for (const json& jc : root["channels"]) {
            const std::string where = "channels[" + std::to_string(i++) + "]";
            Channel ch;
            const std::string scope = jc.value("scope", "local");
            if (scope == "local")
                ch.scope = Channel::Scope::Local;
            else if (scope == "collective")
                ch.scope = Channel::Scope::Collective;
            else
                errs.push_back(where + ": scope must be \"local\" or \"collective\"");
            ch.p = jc.value("p", 1);
            if (ch.p < 1 || ch.p > spec.N) errs.push_back(where + ": p must be in [1, N]");
            ch.jump = detail::parse_matrix(jc.at("matrix"), errs, where);
            if (ch.jump.rows() != dim_for_p(ch.p) || ch.jump.cols() != dim_for_p(ch.p))
                errs.push_back(where + ": jump matrix must be d^p x d^p = " +
                               std::to_string(dim_for_p(ch.p)) + " square");
            else if (factor_symmetry_deviation(ch.jump, d, ch.p) > 1e-10)
                errs.push_back(where + ": jump matrix is not symmetric under factor permutations");
            if (jc.contains("rate"))
                ch.rate = detail::parse_schedule(jc["rate"], errs, where + ".rate");
            else
                errs.push_back(where + ": missing rate schedule");
            spec.channels.push_back(std::move(ch));
        }
    }

    if (root.contains("initial_state")) {
        const json& js = root["initial_state"];
        const std::string kind = js.value("kind", "maximally_mixed");
        if (kind == "maximally_mixed") {
            spec.initial_state.kind = InitialState::Kind::MaximallyMixed;
        } else if (kind == "pure_product") {
            spec.initial_state.kind = InitialState::Kind::PureProduct;
            double norm2 = 0.0;
            for (const json& ja : js.value("amplitudes", json::array())) {
                spec.initial_state.amplitudes.push_back(
                    detail::parse_complex(ja, errs, "initial_state.amplitudes"));
                norm2 += std::norm(spec.initial_state.amplitudes.back());
            }
            if (static_cast<int>(spec.initial_state.amplitudes.size()) != d)
                errs.push_back("initial_state: pure_product needs d amplitudes");
            else if (std::abs(norm2 - 1.0) > 1e-10)
                errs.push_back("initial_state: amplitudes are not normalized");
        } else if (kind == "symmetric_basis") {
            spec.initial_state.kind = InitialState::Kind::SymmetricBasis;
            spec.initial_state.content = js.value("content", std::vector<int>{});
            int total = 0;
            for (int n : spec.initial_state.content) total += n;
            if (static_cast<int>(spec.initial_state.content.size()) != d || total != spec.N)
                errs.push_back("initial_state: content must have d entries summing to N");
        } else if (kind == "components") {
            spec.initial_state.kind = InitialState::Kind::Components;
            for (const json& je : js.value("entries", json::array())) {
                InitialState::ComponentEntry e;
                e.nu = je.value("nu", std::vector<int>{});
                e.w = je.value("w", 0);
                e.wp = je.value("wp", 0);
                e.value = detail::parse_complex(je.at("value"), errs, "initial_state.entries");
                spec.initial_state.components.push_back(std::move(e));
            }
        } else {
            errs.push_back("initial_state: unknown kind \"" + kind + "\"");
        }
    }

    if (root.contains("observables")) {
        int i = 0;
        for (const json& jo : root["observables"]) {
            const std::string where = "observables[" + std::to_string(i++) + "]";
            Observable ob;
            ob.name = jo.value("name", "obs" + std::to_string(i));
            ob.local = detail::parse_matrix(jo.at("matrix"), errs, where);
            if (ob.local.rows() != d || ob.local.cols() != d)
                errs.push_back(where + ": observable matrix must be d x d");
            spec.observables.push_back(std::move(ob));
        }
    }

    if (root.contains("grid")) {
        const json& jg = root["grid"];
        spec.grid.t0 = jg.value("t0", 0.0);
        spec.grid.t1 = jg.value("t1", 1.0);
        spec.grid.dt = jg.value("dt", 0.01);
        spec.grid.method = jg.value("method", "rk45");
        spec.grid.atol = jg.value("atol", 1e-10);
        spec.grid.rtol = jg.value("rtol", 1e-8);
        spec.grid.thin = jg.value("thin", 1);
        if (spec.grid.t1 <= spec.grid.t0) errs.push_back("grid: t1 must exceed t0");
        if (spec.grid.dt <= 0) errs.push_back("grid: dt must be positive");
        if (spec.grid.method != "rk4" && spec.grid.method != "rk45")
            errs.push_back("grid: method must be rk4 or rk45");
        if (spec.grid.thin < 1) errs.push_back("grid: thin must be >= 1");
    }

    if (root.contains("output")) {
        spec.output_path = root["output"].value("path", spec.output_path);
        spec.grid.thin = root["output"].value("thinning", spec.grid.thin);
    }

    if (!errs.empty()) {
        std::string summary = "model has " + std::to_string(errs.size()) + " violation(s)";
        throw model_error(std::move(summary), std::move(errs));
    }
    return spec;
}

inline ModelSpec load_and_validate(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw model_error("cannot open model file: " + path, {"cannot open " + path});
    json root;
    try {
        in >> root;
    } catch (const std::exception& e) {
        throw model_error("model file is not valid JSON", {e.what()});
    }
    return load_and_validate(root);
}

/// Build the initial PI state described by the model.
inline PIOperator build_initial_state(const ModelSpec& spec, const IndexPtr& index) {
    switch (spec.initial_state.kind) {
        case InitialState::Kind::MaximallyMixed:
            return maximally_mixed_state(index);
        case InitialState::Kind::PureProduct:
            return pure_product_state(spec.initial_state.amplitudes, index);
        case InitialState::Kind::SymmetricBasis:
            return symmetric_basis_state(spec.initial_state.content, index);
        case InitialState::Kind::Components: {
            PIOperator rho(index);
            for (const auto& e : spec.initial_state.components) {
                const int nu = index->partition_index(Partition(e.nu));
                if (e.w < 0 || e.w >= index->fd(nu) || e.wp < 0 || e.wp >= index->fd(nu))
                    throw std::invalid_argument("initial_state: SWT index out of range");
                rho(nu, e.w, e.wp) = e.value;
            }
            return rho;
        }
    }
    throw std::logic_error("build_initial_state: unreachable");
}

} // namespace pisim
