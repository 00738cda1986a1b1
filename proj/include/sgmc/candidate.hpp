#pragma once
#include <algorithm>
#include <cmath>
#include <limits>
#include <sgmc/detail/linalg.hpp>
#include <sgmc/model.hpp>
#include <sgmc/optimality.hpp>

namespace sgmc {

/// Slack margin that operationalizes "strictly inside a zone".
inline constexpr double interior_slack = 1e-6;

/// Absolute residual scale of the compatibility test [s]_E in Col(C_E^T).
inline constexpr double compatibility_tol = 1e-8;

/**
 * True iff the least-squares residual of C_E^T u = [s]_E is at most
 * 1e-8 sqrt(|E|) in the infinity norm. The empty indicator is compatible.
 */
inline bool is_compatible(const ModelMatrices& mm, const Indicator& s)
{
    const auto E = s.support();
    if (E.empty()) return true;
    const matrix_t CEt = slice_columns(mm.C, E).transpose();
    const vector_t sE = s.restricted(E);
    const vector_t u = detail::pinv(CEt) * sE;
    const double residual = (CEt * u - sE).lpNorm<Eigen::Infinity>();
    return residual <= compatibility_tol * std::sqrt(static_cast<double>(E.size()));
}

/**
 * Affine candidate solution map of one indicator.
 * On E the map is R [b; lambda] with R = (C_E^T D C_E)^+ [C_E^T, -[s]_E];
 * off E it is zero. R depends on (A, rho, s) only.
 */
struct CandidatePiece
{
    Indicator s;
    index_set_t E;
    matrix_t R;          // |E| x (2m+1), or 1 x (2m+1) zeros when E is empty
    bool compatible = true;
    index_t n = 0;
    index_t m = 0;
};

inline CandidatePiece candidate_slope(const ModelMatrices& mm, const Indicator& s)
{
    if (s.size() != 2 * mm.n()) throw input_error("indicator length must be 2n");
    CandidatePiece piece;
    piece.s = s;
    piece.E = s.support();
    piece.n = mm.n();
    piece.m = mm.m();
    const index_t cols = 2 * mm.m() + 1;
    if (piece.E.empty()) {
        piece.R = matrix_t::Zero(1, cols);
        piece.compatible = true;
        return piece;
    }
    const matrix_t CE = slice_columns(mm.C, piece.E);
    const matrix_t DCE = mm.apply_D(CE);
    const matrix_t M = CE.transpose() * DCE;
    matrix_t rhs(CE.cols(), cols);
    rhs << CE.transpose(), -s.restricted(piece.E);
    piece.R = detail::pinv(M) * rhs;
    piece.compatible = is_compatible(mm, s);
    return piece;
}

/// Candidate solution map evaluated at (b, lambda).
inline extended_vector_t eval_weq(const CandidatePiece& piece, const vector_t& b, double lambda)
{
    if (b.size() != 2 * piece.m) throw input_error("eval_weq: b must have length 2m");
    extended_vector_t w = vector_t::Zero(2 * piece.n);
    if (piece.E.empty()) return w;
    vector_t bl(b.size() + 1);
    bl << b, lambda;
    const vector_t wE = piece.R * bl;
    for (size_t k = 0; k < piece.E.size(); ++k) w[piece.E[k]] = wE[static_cast<index_t>(k)];
    return w;
}

/**
 * Membership of w in the candidate solution set of s at (b, lambda):
 * equalities c_i^T(b - DCw) = lambda s_i on E and w_i = 0 off E,
 * inequalities s_i w_i >= 0 on E and |c_i^T(b - DCw)| <= lambda off E,
 * all to within tol (1 + lambda).
 */
inline bool eqnq_membership(
    const ModelMatrices& mm,
    const Indicator& s,
    const vector_t& b,
    double lambda,
    const extended_vector_t& w,
    double tol = default_equality_tol
)
{
    if (!(tol > 0)) throw input_error("eqnq_membership: tol must be positive");
    const double slack = tol * (1.0 + lambda);
    const vector_t xi = correlation(mm, b, w);
    for (index_t i = 0; i < w.size(); ++i) {
        if (s[i] != 0) {
            if (std::abs(xi[i] - lambda * s[i]) > slack) return false;
            if (s[i] * w[i] < -slack) return false;
        } else {
            if (std::abs(w[i]) > slack) return false;
            if (std::abs(xi[i]) > lambda + slack) return false;
        }
    }
    return true;
}

/**
 * Smallest slack of the zone inequalities at (b, lambda):
 * min over s_i w_i (i in E) and lambda - |xi_i(w)| (i off E), with w the
 * candidate map. Returns -inf for incompatible pieces or lambda <= 0.
 */
inline double zone_slack(const ModelMatrices& mm, const CandidatePiece& piece, const vector_t& b, double lambda)
{
    if (!piece.compatible || !(lambda > 0)) return -std::numeric_limits<double>::infinity();
    const extended_vector_t w = eval_weq(piece, b, lambda);
    const vector_t xi = correlation(mm, b, w);
    double slack = std::numeric_limits<double>::infinity();
    for (index_t i = 0; i < w.size(); ++i) {
        const int si = piece.s[i];
        slack = std::min(slack, si != 0 ? si * w[i] : lambda - std::abs(xi[i]));
    }
    return slack;
}

inline bool zone_membership(
    const ModelMatrices& mm,
    const CandidatePiece& piece,
    const vector_t& b,
    double lambda,
    double tol = default_equality_tol
)
{
    if (!piece.compatible || !(lambda > 0)) return false;
    const extended_vector_t w = eval_weq(piece, b, lambda);
    const vector_t xi = correlation(mm, b, w);
    for (index_t i = 0; i < w.size(); ++i) {
        const int si = piece.s[i];
        if (si != 0) {
            if (si * w[i] < -tol) return false;
        } else if (std::abs(xi[i]) > lambda + tol * (1.0 + lambda)) {
            return false;
        }
    }
    return true;
}

/// (b, lambda) in the candidate zone of s, with EN inequalities relaxed by tol.
inline bool zone_membership(
    const ModelMatrices& mm,
    const Indicator& s,
    const vector_t& b,
    double lambda,
    double tol = default_equality_tol
)
{
    return zone_membership(mm, candidate_slope(mm, s), b, lambda, tol);
}

/// All zone inequalities hold with slack at least 1e-6 (1 + lambda).
inline bool strictly_inside(const ModelMatrices& mm, const CandidatePiece& piece, const vector_t& b, double lambda)
{
    return zone_slack(mm, piece, b, lambda) >= interior_slack * (1.0 + lambda);
}

} // namespace sgmc
