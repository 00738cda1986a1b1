#pragma once
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <vector>
#include <Eigen/QR>
#include <sgmc/candidate.hpp>
#include <sgmc/detail/parallel.hpp>
#include <sgmc/optimality.hpp>

namespace sgmc {

struct OracleConfig
{
    int max_iters = 200000;
    double tol = 1e-10;
    double step_scale = 0.9;
    /// Try an exact least-squares solve on the current support every `polish_every` iterations.
    bool polish = true;
    int polish_every = 25;

    void validate() const
    {
        if (!(tol > 0)) throw input_error("oracle: tol must be positive");
        if (!(step_scale > 0 && step_scale <= 1)) throw input_error("oracle: step_scale must lie in (0, 1]");
        if (max_iters < 1) throw input_error("oracle: max_iters must be positive");
    }
};

struct SaddleResult
{
    extended_vector_t w;
    bool converged = false;
    double worst_violation = 0.0;
    int iterations = 0;
};

namespace detail {

inline vector_t soft_threshold(const vector_t& v, double tau)
{
    return v.unaryExpr([tau](double x) { return x > tau ? x - tau : (x < -tau ? x + tau : 0.0); });
}

/// Largest singular value of a small dense matrix by power iteration on M^T M.
inline double spectral_norm(const matrix_t& M, int iters = 200)
{
    if (M.size() == 0) return 0.0;
    vector_t v = vector_t::LinSpaced(M.cols(), 1.0, 2.0);
    v.normalize();
    double sigma = 0.0;
    for (int k = 0; k < iters; ++k) {
        vector_t next = M.transpose() * (M * v);
        const double nrm = next.norm();
        if (nrm == 0.0) return 0.0;
        v = next / nrm;
        sigma = std::sqrt(nrm);
    }
    return sigma;
}

/// Minimum-norm least-squares solution of M x = g.
inline vector_t min_norm_solve(const matrix_t& M, const vector_t& g)
{
    if (M.cols() == 0) return vector_t();
    Eigen::CompleteOrthogonalDecomposition<matrix_t> cod(M);
    cod.setThreshold(1e-12);
    return cod.solve(g);
}

/// Exact solve of the equality system on supp(sign(w)); returns nullopt when the support is empty.
inline std::optional<extended_vector_t> polish_on_support(
    const ModelMatrices& mm, const vector_t& b, double lambda, const extended_vector_t& w)
{
    const Indicator s = Indicator::sign_of(w);
    const auto E = s.support();
    if (E.empty()) return std::nullopt;
    const matrix_t CE = slice_columns(mm.C, E);
    const matrix_t M = CE.transpose() * mm.apply_D(CE);
    const vector_t g = CE.transpose() * b - lambda * s.restricted(E);
    const vector_t wE = min_norm_solve(M, g);
    extended_vector_t out = vector_t::Zero(w.size());
    for (size_t k = 0; k < E.size(); ++k) out[E[k]] = wE[static_cast<index_t>(k)];
    return out;
}

} // namespace detail

/**
 * Extended solution of C^T(b - D C w) in lambda d||w||_1 by Tseng's
 * forward-backward-forward splitting on F(w) = C^T(D C w - b); F is
 * monotone but not symmetric for rho > 0. Converged means check_opt
 * passes at config.tol.
 */
inline SaddleResult solve_saddle(
    const ModelMatrices& mm,
    const vector_t& b,
    double lambda,
    const OracleConfig& config = {},
    const std::optional<extended_vector_t>& warm_start = std::nullopt
)
{
    config.validate();
    if (!(lambda > 0)) throw input_error("solve_saddle: lambda must be positive");
    if (b.size() != mm.C.rows()) throw input_error("solve_saddle: b must have length 2m");
    const index_t n2 = mm.C.cols();
    const matrix_t K = mm.C.transpose() * mm.apply_D(mm.C);
    const vector_t Ctb = mm.C.transpose() * b;
    const double L = detail::spectral_norm(K) * 1.01;

    SaddleResult result;
    result.w = warm_start ? *warm_start : vector_t::Zero(n2);
    if (result.w.size() != n2) throw input_error("solve_saddle: warm start must have length 2n");

    const auto accept = [&](const extended_vector_t& candidate) {
        const auto report = check_opt(mm, b, lambda, candidate, config.tol);
        if (report.satisfied) {
            result.w = candidate;
            result.converged = true;
            result.worst_violation = 0.0;
        }
        return report;
    };
    if (L == 0.0) {
        // K = 0 makes xi = C^T b independent of w; w = 0 is optimal iff any w is.
        const auto report = accept(vector_t::Zero(n2));
        if (!result.converged) result.worst_violation = report.worst_violation;
        return result;
    }
    const double gamma = config.step_scale / L;

    vector_t w = result.w;
    double last_violation = std::numeric_limits<double>::infinity();
    for (int it = 1; it <= config.max_iters; ++it) {
        const vector_t Fw = K * w - Ctb;
        const vector_t xbar = detail::soft_threshold(w - gamma * Fw, gamma * lambda);
        const vector_t Fx = K * xbar - Ctb;
        w = xbar - gamma * (Fx - Fw);
        result.iterations = it;

        if (it % 10 == 0 || it == 1) {
            const auto report = accept(xbar);
            if (result.converged) return result;
            last_violation = report.worst_violation;
        }
        if (config.polish && it % config.polish_every == 0) {
            if (auto polished = detail::polish_on_support(mm, b, lambda, xbar)) {
                accept(*polished);
                if (result.converged) return result;
            }
        }
    }
    result.w = w;
    result.worst_violation = last_violation;
    return result;
}

inline SaddleResult solve_saddle(const ProblemInstance& inst, const OracleConfig& config = {})
{
    return solve_saddle(build_model_matrices(inst), inst.b(), inst.lambda, config);
}

/// Result of the min-norm program over the candidate solution set.
struct MinNormResult
{
    extended_vector_t w;
    double kkt_residual = 0.0;
    int dykstra_sweeps = 0;
    int active_set_steps = 0;
};

/**
 * argmin ||w||_2 over the candidate solution set of s at (b, lambda).
 * Dykstra's alternating projections between the equality affine set and
 * each inequality halfspace give a starting active set, which a primal
 * active-set loop then refines to an exact KKT point.
 */
inline MinNormResult min_norm_over_eqnq(
    const ModelMatrices& mm,
    const Indicator& s,
    const vector_t& b,
    double lambda,
    int max_sweeps = 20000
)
{
    if (s.size() != mm.C.cols()) throw input_error("min_norm_over_eqnq: indicator length must be 2n");
    if (b.size() != mm.C.rows()) throw input_error("min_norm_over_eqnq: b must have length 2m");
    if (!is_compatible(mm, s)) {
        throw incompatible_indicator("indicator " + s.to_string() + " is incompatible");
    }
    const index_t n2 = mm.C.cols();
    const auto E = s.support();
    const auto off = s.complement();
    MinNormResult out;
    out.w = vector_t::Zero(n2);

    const matrix_t CE = slice_columns(mm.C, E);
    const matrix_t DCE = mm.apply_D(CE);
    const index_t k = E.empty() ? 0 : CE.cols();

    // Inequalities G z <= h in the reduced variable z = w_E.
    std::vector<vector_t> G_rows;
    std::vector<double> h;
    for (size_t j = 0; j < E.size(); ++j) {
        vector_t row = vector_t::Zero(k);
        row[static_cast<index_t>(j)] = -s[E[j]];
        G_rows.push_back(row);
        h.push_back(0.0);
    }
    for (const auto i : off) {
        const double cb = mm.C.col(i).dot(b);
        vector_t hrow = k ? vector_t(DCE.transpose() * mm.C.col(i)) : vector_t();
        G_rows.push_back(-hrow);
        h.push_back(lambda - cb);
        G_rows.push_back(hrow);
        h.push_back(lambda + cb);
    }
    const double scale = 1.0 + b.lpNorm<Eigen::Infinity>() + lambda;

    if (k == 0) {
        double worst = 0.0;
        for (size_t c = 0; c < h.size(); ++c) worst = std::max(worst, -h[c]);
        if (worst > 1e-9 * scale) throw precondition_error("min_norm_over_eqnq: inequalities infeasible at w = 0");
        return out;
    }

    const matrix_t M = CE.transpose() * DCE;
    const vector_t g = CE.transpose() * b - lambda * s.restricted(E);
    Eigen::CompleteOrthogonalDecomposition<matrix_t> cod(M);
    cod.setThreshold(1e-12);
    const vector_t z0 = cod.solve(g);
    if ((M * z0 - g).lpNorm<Eigen::Infinity>() > 1e-9 * (1.0 + g.lpNorm<Eigen::Infinity>())) {
        throw precondition_error("min_norm_over_eqnq: equality system is infeasible");
    }
    const auto project_affine = [&](const vector_t& x) -> vector_t { return x - cod.solve(M * x - g); };
    const auto violation = [&](const vector_t& z, size_t c) { return G_rows[c].dot(z) - h[c]; };

    // Dykstra.
    const size_t nh = G_rows.size();
    vector_t z = project_affine(vector_t::Zero(k));
    std::vector<vector_t> incr(nh, vector_t::Zero(k));
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        const vector_t before = z;
        for (size_t c = 0; c < nh; ++c) {
            const vector_t tmp = z + incr[c];
            const double nn = G_rows[c].squaredNorm();
            const double excess = G_rows[c].dot(tmp) - h[c];
            z = (excess > 0 && nn > 0) ? vector_t(tmp - (excess / nn) * G_rows[c]) : tmp;
            incr[c] = tmp - z;
        }
        z = project_affine(z);
        out.dykstra_sweeps = sweep + 1;
        if ((z - before).lpNorm<Eigen::Infinity>() <= 1e-15 * scale) break;
    }

    // Active-set refinement.
    std::vector<bool> active(nh, false);
    for (size_t c = 0; c < nh; ++c) {
        active[c] = incr[c].lpNorm<Eigen::Infinity>() > 1e-12 * scale || std::abs(violation(z, c)) <= 1e-10 * scale;
    }
    const auto solve_active = [&](const std::vector<bool>& act, vector_t& zz, vector_t& nu, std::vector<size_t>& ids) {
        ids.clear();
        for (size_t c = 0; c < nh; ++c) if (act[c]) ids.push_back(c);
        matrix_t A_eq(M.rows() + static_cast<index_t>(ids.size()), k);
        vector_t rhs(A_eq.rows());
        A_eq.topRows(M.rows()) = M;
        rhs.head(M.rows()) = g;
        for (size_t a = 0; a < ids.size(); ++a) {
            A_eq.row(M.rows() + static_cast<index_t>(a)) = G_rows[ids[a]].transpose();
            rhs[M.rows() + static_cast<index_t>(a)] = h[ids[a]];
        }
        zz = detail::min_norm_solve(A_eq, rhs);
        const double eq_res = (A_eq * zz - rhs).lpNorm<Eigen::Infinity>();
        const vector_t mult = detail::min_norm_solve(A_eq.transpose(), -zz);
        nu = mult.tail(static_cast<index_t>(ids.size()));
        const double stationarity = (A_eq.transpose() * mult + zz).lpNorm<Eigen::Infinity>();
        return std::max(eq_res, stationarity);
    };

    vector_t best = z;
    double best_residual = std::numeric_limits<double>::infinity();
    for (int step = 0; step < 200; ++step) {
        vector_t zz, nu;
        std::vector<size_t> ids;
        const double res = solve_active(active, zz, nu, ids);
        out.active_set_steps = step + 1;
        size_t worst_c = nh;
        double worst_v = 1e-12 * scale;
        for (size_t c = 0; c < nh; ++c) {
            if (active[c]) continue;
            const double v = violation(zz, c);
            if (v > worst_v) { worst_v = v; worst_c = c; }
        }
        double primal = 0.0;
        for (size_t c = 0; c < nh; ++c) primal = std::max(primal, violation(zz, c));
        double dual = 0.0;
        index_t worst_nu = -1;
        for (index_t a = 0; a < nu.size(); ++a) {
            if (-nu[a] > dual) { dual = -nu[a]; worst_nu = a; }
        }
        const double kkt = std::max({res, primal, dual});
        if (kkt < best_residual) {
            best_residual = kkt;
            best = zz;
        }
        if (worst_c != nh) {
            active[worst_c] = true;
        } else if (worst_nu >= 0 && dual > 1e-12 * scale) {
            active[ids[static_cast<size_t>(worst_nu)]] = false;
        } else {
            break;
        }
    }
    double dykstra_primal = 0.0;
    for (size_t c = 0; c < nh; ++c) dykstra_primal = std::max(dykstra_primal, violation(z, c));
    if (best_residual > 1e-9 * scale && dykstra_primal <= 1e-9 * scale) {
        best = z;
        best_residual = dykstra_primal;
    }
    double final_primal = 0.0;
    for (size_t c = 0; c < nh; ++c) final_primal = std::max(final_primal, violation(best, c));
    if (final_primal > 1e-7 * scale) {
        throw precondition_error("min_norm_over_eqnq: inequality system appears infeasible");
    }
    for (size_t j = 0; j < E.size(); ++j) out.w[E[j]] = best[static_cast<index_t>(j)];
    out.kkt_residual = best_residual;
    return out;
}

struct LassoResult
{
    vector_t x;
    bool converged = false;
    double kkt_residual = 0.0;
    int iterations = 0;
};

/// Largest violation of the LASSO KKT conditions A^T(y - A x) in lambda d||x||_1.
inline double lasso_kkt_residual(const matrix_t& A, const vector_t& y, double lambda, const vector_t& x)
{
    const vector_t g = A.transpose() * (y - A * x);
    double worst = 0.0;
    for (index_t i = 0; i < x.size(); ++i) {
        if (x[i] != 0.0) worst = std::max(worst, std::abs(g[i] - (x[i] > 0 ? lambda : -lambda)));
        else worst = std::max(worst, std::abs(g[i]) - lambda);
    }
    return worst;
}

/// Cyclic coordinate descent for 1/2 ||y - A x||^2 + lambda ||x||_1, with least-squares polishing on the support.
inline LassoResult lasso_reference(const matrix_t& A, const vector_t& y, double lambda, const OracleConfig& config = {})
{
    config.validate();
    if (y.size() != A.rows()) throw input_error("lasso_reference: y length must match rows of A");
    if (!(lambda > 0)) throw input_error("lasso_reference: lambda must be positive");
    const index_t n = A.cols();
    const vector_t col_sq = A.colwise().squaredNorm().transpose();
    LassoResult out;
    out.x = vector_t::Zero(n);
    vector_t resid = y;
    const double target = config.tol * (1.0 + lambda);

    const auto try_polish = [&]() {
        const Indicator s = Indicator::sign_of(out.x);
        const auto E = s.support();
        if (E.empty()) return false;
        const matrix_t AE = slice_columns(A, E);
        const vector_t xE = detail::min_norm_solve(AE.transpose() * AE, AE.transpose() * y - lambda * s.restricted(E));
        vector_t cand = vector_t::Zero(n);
        for (size_t k = 0; k < E.size(); ++k) cand[E[k]] = xE[static_cast<index_t>(k)];
        if (Indicator::sign_of(cand) != s) return false;
        if (lasso_kkt_residual(A, y, lambda, cand) > target) return false;
        out.x = cand;
        return true;
    };

    for (int it = 1; it <= config.max_iters; ++it) {
        out.iterations = it;
        for (index_t j = 0; j < n; ++j) {
            if (col_sq[j] == 0.0) continue;
            const double old = out.x[j];
            const double rho_j = A.col(j).dot(resid) + col_sq[j] * old;
            const double next = (rho_j > lambda ? rho_j - lambda : (rho_j < -lambda ? rho_j + lambda : 0.0)) / col_sq[j];
            if (next != old) {
                resid -= A.col(j) * (next - old);
                out.x[j] = next;
            }
        }
        out.kkt_residual = lasso_kkt_residual(A, y, lambda, out.x);
        if (out.kkt_residual <= target) {
            out.converged = true;
            return out;
        }
        if (config.polish && it % config.polish_every == 0 && try_polish()) {
            out.kkt_residual = lasso_kkt_residual(A, y, lambda, out.x);
            out.converged = true;
            return out;
        }
    }
    return out;
}

/// Exhaustive enumeration over all 3^(2n) indicators at a list of parameter points.
struct BruteForceResult
{
    /// Zone indicators: the distinct min-norm assignments, sorted.
    std::vector<Indicator> indicators;
    /// matches[k]: every indicator whose candidate zone contains samples[k] with an optimal candidate map.
    std::vector<std::vector<Indicator>> matches;
    /// Match with the smallest ||w_EQ||_2 per sample; empty when nothing matched.
    std::vector<std::optional<Indicator>> assignment;
};

inline constexpr index_t brute_force_max_columns = 10;

inline BruteForceResult brute_force_indicators(
    const ModelMatrices& mm,
    const std::vector<ParameterPoint>& samples,
    double tol = default_equality_tol,
    double opt_tol = 1e-7
)
{
    const index_t n2 = mm.C.cols();
    if (n2 > brute_force_max_columns) {
        throw input_error("brute_force_indicators: 2n must be at most " + std::to_string(brute_force_max_columns));
    }
    std::uint64_t total = 1;
    for (index_t i = 0; i < n2; ++i) total *= 3;

    struct Hit
    {
        size_t sample;
        double norm;
    };
    std::vector<std::vector<Hit>> hits(total);
    detail::parallel_for(static_cast<size_t>(total), [&](size_t ordinal) {
        const Indicator s = indicator_from_ordinal(ordinal, n2);
        const CandidatePiece piece = candidate_slope(mm, s);
        if (!piece.compatible) return;
        for (size_t k = 0; k < samples.size(); ++k) {
            const auto& pt = samples[k];
            if (!zone_membership(mm, piece, pt.b, pt.lambda, tol)) continue;
            const extended_vector_t w = eval_weq(piece, pt.b, pt.lambda);
            if (!check_opt(mm, pt.b, pt.lambda, w, opt_tol).satisfied) continue;
            hits[ordinal].push_back({k, w.norm()});
        }
    });

    BruteForceResult out;
    out.matches.resize(samples.size());
    out.assignment.resize(samples.size());
    std::vector<double> best(samples.size(), std::numeric_limits<double>::infinity());
    for (std::uint64_t ordinal = 0; ordinal < total; ++ordinal) {
        if (hits[ordinal].empty()) continue;
        const Indicator s = indicator_from_ordinal(ordinal, n2);
        for (const auto& hit : hits[ordinal]) {
            out.matches[hit.sample].push_back(s);
            if (hit.norm < best[hit.sample]) {
                best[hit.sample] = hit.norm;
                out.assignment[hit.sample] = s;
            }
        }
    }
    for (const auto& a : out.assignment) {
        if (a) out.indicators.push_back(*a);
    }
    std::sort(out.indicators.begin(), out.indicators.end());
    out.indicators.erase(std::unique(out.indicators.begin(), out.indicators.end()), out.indicators.end());
    return out;
}

} // namespace sgmc
