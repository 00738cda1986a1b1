#pragma once
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>
#include <Eigen/Dense>
#include <sgmc/errors.hpp>

namespace sgmc {

using matrix_t = Eigen::MatrixXd;
using vector_t = Eigen::VectorXd;
using index_t = Eigen::Index;
using index_set_t = std::vector<index_t>;

/**
 * Extended solution vector w = [x; z] of length 2n.
 * Entries 0..n-1 hold the primal part x, entries n..2n-1 the dual part z.
 * Everything in-process is 0-based; serialized artifacts use 1-based indices.
 */
using extended_vector_t = vector_t;

inline auto primal_part(const extended_vector_t& w) { return w.head(w.size() / 2); }
inline auto dual_part(const extended_vector_t& w) { return w.tail(w.size() / 2); }

inline extended_vector_t make_extended(const vector_t& x, const vector_t& z)
{
    if (x.size() != z.size()) {
        throw input_error("primal and dual parts must have equal length");
    }
    extended_vector_t w(2 * x.size());
    w << x, z;
    return w;
}

/**
 * Problem data (A, rho, y, r, lambda). The stacked observation b = [y; r]
 * is derived on demand so it can never drift from y and r.
 */
struct ProblemInstance
{
    matrix_t A;
    double rho = 0.0;
    vector_t y;
    vector_t r;
    double lambda = 1.0;

    ProblemInstance() = default;

    ProblemInstance(matrix_t A_, double rho_, vector_t y_, vector_t r_, double lambda_)
        : A(std::move(A_)), rho(rho_), y(std::move(y_)), r(std::move(r_)), lambda(lambda_)
    {
        if (r.size() == 0 && y.size() > 0) r = vector_t::Zero(y.size());
        validate();
    }

    /// Convenience constructor with r = 0.
    ProblemInstance(matrix_t A_, double rho_, vector_t y_, double lambda_)
        : ProblemInstance(std::move(A_), rho_, std::move(y_), vector_t(), lambda_) {}

    index_t m() const { return A.rows(); }
    index_t n() const { return A.cols(); }

    vector_t b() const
    {
        vector_t out(2 * m());
        out << y, r;
        return out;
    }

    void validate() const
    {
        if (!(rho >= 0.0 && rho < 1.0)) {
            throw input_error("rho must lie in [0, 1), got " + std::to_string(rho));
        }
        if (!(lambda > 0.0) || !std::isfinite(lambda)) {
            throw input_error("lambda must be a positive finite number");
        }
        if (A.rows() == 0 || A.cols() == 0) {
            throw input_error("A must be non-empty");
        }
        if (y.size() != A.rows()) {
            throw input_error("y has length " + std::to_string(y.size()) +
                              " but A has " + std::to_string(A.rows()) + " rows");
        }
        if (r.size() != A.rows()) {
            throw input_error("r has length " + std::to_string(r.size()) +
                              " but A has " + std::to_string(A.rows()) + " rows");
        }
        if (!A.allFinite() || !y.allFinite() || !r.allFinite()) {
            throw input_error("non-finite entry in problem data");
        }
    }
};

/**
 * C = blkdiag(A, sqrt(rho) A) and the coupling matrix
 * D = [(1-rho) I, sqrt(rho) I; -sqrt(rho) I, I].
 * Only depends on (A, rho); every (b, lambda) computation reuses one instance.
 */
struct ModelMatrices
{
    matrix_t C;
    matrix_t D;
    double rho = 0.0;

    index_t m() const { return C.rows() / 2; }
    index_t n() const { return C.cols() / 2; }

    auto column(index_t i) const { return C.col(i); }

    /// D * V (vector or matrix) without a dense product; costs O(m * cols).
    template <class Derived>
    typename Derived::PlainObject apply_D(const Eigen::MatrixBase<Derived>& V) const
    {
        const index_t mm = m();
        const double sr = std::sqrt(rho);
        typename Derived::PlainObject out(V.rows(), V.cols());
        out.topRows(mm) = (1.0 - rho) * V.topRows(mm) + sr * V.bottomRows(mm);
        out.bottomRows(mm) = -sr * V.topRows(mm) + V.bottomRows(mm);
        return out;
    }
};

inline ModelMatrices build_model_matrices(const matrix_t& A, double rho)
{
    if (!(rho >= 0.0 && rho < 1.0)) {
        throw input_error("rho must lie in [0, 1)");
    }
    const index_t m = A.rows();
    const index_t n = A.cols();
    const double sr = std::sqrt(rho);

    ModelMatrices out;
    out.rho = rho;
    out.C = matrix_t::Zero(2 * m, 2 * n);
    out.C.topLeftCorner(m, n) = A;
    out.C.bottomRightCorner(m, n) = sr * A;

    out.D = matrix_t::Zero(2 * m, 2 * m);
    out.D.topLeftCorner(m, m).diagonal().setConstant(1.0 - rho);
    out.D.topRightCorner(m, m).diagonal().setConstant(sr);
    out.D.bottomLeftCorner(m, m).diagonal().setConstant(-sr);
    out.D.bottomRightCorner(m, m).diagonal().setConstant(1.0);
    return out;
}

inline ModelMatrices build_model_matrices(const ProblemInstance& inst)
{
    return build_model_matrices(inst.A, inst.rho);
}

/// One parameter value (b, lambda) with b = [y; r].
struct ParameterPoint
{
    vector_t b;
    double lambda = 1.0;
};

/**
 * Columns of C listed in `I` (ascending, 0-based). An empty index set yields
 * a single zero column so that products such as C_I * w_I stay well-defined.
 */
inline matrix_t slice_columns(const matrix_t& C, const index_set_t& I)
{
    if (I.empty()) return matrix_t::Zero(C.rows(), 1);
    matrix_t out(C.rows(), static_cast<index_t>(I.size()));
    for (size_t k = 0; k < I.size(); ++k) {
        if (I[k] < 0 || I[k] >= C.cols()) {
            throw input_error("column index " + std::to_string(I[k]) + " out of range");
        }
        out.col(static_cast<index_t>(k)) = C.col(I[k]);
    }
    return out;
}

/// Signed sparsity pattern s in {+1, 0, -1}^{2n}.
class Indicator
{
public:
    Indicator() = default;

    explicit Indicator(index_t size) : signs_(static_cast<size_t>(size), 0) {}

    explicit Indicator(std::vector<std::int8_t> signs) : signs_(std::move(signs))
    {
        for (auto v : signs_) {
            if (v < -1 || v > 1) throw input_error("indicator entries must be -1, 0 or +1");
        }
    }

    static Indicator zeros(index_t n) { return Indicator(2 * n); }

    /// Sign pattern of a vector: entries with |v_i| <= threshold map to 0.
    static Indicator sign_of(const vector_t& v, double threshold = 0.0)
    {
        Indicator s(v.size());
        for (index_t i = 0; i < v.size(); ++i) {
            if (v[i] > threshold) s.signs_[i] = 1;
            else if (v[i] < -threshold) s.signs_[i] = -1;
        }
        return s;
    }

    /// Parses the "+-0" string form (primal block, then dual block).
    static Indicator from_string(std::string_view text)
    {
        std::vector<std::int8_t> signs;
        signs.reserve(text.size());
        for (char ch : text) {
            switch (ch) {
                case '+': signs.push_back(1); break;
                case '-': signs.push_back(-1); break;
                case '0': signs.push_back(0); break;
                default:
                    throw input_error(std::string("invalid indicator character '") + ch + "'");
            }
        }
        if (signs.size() % 2 != 0) {
            throw input_error("indicator string must have even length 2n");
        }
        return Indicator(std::move(signs));
    }

    std::string to_string() const
    {
        std::string out;
        out.reserve(signs_.size());
        for (auto v : signs_) out.push_back(v > 0 ? '+' : (v < 0 ? '-' : '0'));
        return out;
    }

    index_t size() const { return static_cast<index_t>(signs_.size()); }
    int operator[](index_t i) const { return signs_[static_cast<size_t>(i)]; }

    void set(index_t i, int value)
    {
        if (value < -1 || value > 1) throw input_error("indicator entries must be -1, 0 or +1");
        signs_[static_cast<size_t>(i)] = static_cast<std::int8_t>(value);
    }

    /// E = supp(s), ascending.
    index_set_t support() const
    {
        index_set_t E;
        for (size_t i = 0; i < signs_.size(); ++i) {
            if (signs_[i] != 0) E.push_back(static_cast<index_t>(i));
        }
        return E;
    }

    /// Complement of the support, ascending.
    index_set_t complement() const
    {
        index_set_t out;
        for (size_t i = 0; i < signs_.size(); ++i) {
            if (signs_[i] == 0) out.push_back(static_cast<index_t>(i));
        }
        return out;
    }

    bool is_zero() const
    {
        return std::all_of(signs_.begin(), signs_.end(), [](auto v) { return v == 0; });
    }

    /// [s]_E as a real vector.
    vector_t restricted(const index_set_t& E) const
    {
        vector_t out(static_cast<index_t>(E.size()));
        for (size_t k = 0; k < E.size(); ++k) out[static_cast<index_t>(k)] = (*this)[E[k]];
        return out;
    }

    vector_t as_vector() const
    {
        vector_t out(size());
        for (index_t i = 0; i < size(); ++i) out[i] = (*this)[i];
        return out;
    }

    const std::vector<std::int8_t>& signs() const { return signs_; }

    friend bool operator==(const Indicator&, const Indicator&) = default;
    friend auto operator<=>(const Indicator& a, const Indicator& b)
    {
        return a.signs_ <=> b.signs_;
    }

private:
    std::vector<std::int8_t> signs_;
};

/// Base-3 decoding (digit 0 -> 0, 1 -> +1, 2 -> -1, last entry least significant).
/// Iterating `index` over [0, 3^len) visits every candidate indicator once.
inline Indicator indicator_from_ordinal(std::uint64_t index, index_t len)
{
    Indicator s(len);
    for (index_t i = len - 1; i >= 0; --i) {
        const int digit = static_cast<int>(index % 3);
        index /= 3;
        s.set(i, digit == 0 ? 0 : (digit == 1 ? 1 : -1));
    }
    return s;
}

/**
 * Saddle function G(x, z) of the min-max form:
 *   1/2 ||y - A x||^2 + lambda ||x||_1 - lambda ||z||_1
 *   - rho/2 ||A x - A z||^2 + sqrt(rho) r^T A z.
 */
inline double saddle_objective(const ProblemInstance& inst, const vector_t& x, const vector_t& z)
{
    if (x.size() != inst.n() || z.size() != inst.n()) {
        throw input_error("x and z must have length n");
    }
    const vector_t Ax = inst.A * x;
    const vector_t Az = inst.A * z;
    return 0.5 * (inst.y - Ax).squaredNorm()
         + inst.lambda * x.lpNorm<1>()
         - inst.lambda * z.lpNorm<1>()
         - 0.5 * inst.rho * (Ax - Az).squaredNorm()
         + std::sqrt(inst.rho) * inst.r.dot(Az);
}

} // namespace sgmc

template <>
struct std::hash<sgmc::Indicator>
{
    size_t operator()(const sgmc::Indicator& s) const noexcept
    {
        return std::hash<std::string>{}(s.to_string());
    }
};
