#pragma once
#include <algorithm>
#include <cmath>
#include <vector>
#include <sgmc/model.hpp>

namespace sgmc {

/// Default tolerance for equality detection |xi_i| = lambda.
inline constexpr double default_equality_tol = 1e-9;

/// xi(w) = C^T (b - D C w).
inline vector_t correlation(const ModelMatrices& mm, const vector_t& b, const extended_vector_t& w)
{
    if (w.size() != mm.C.cols() || b.size() != mm.C.rows()) {
        throw input_error("correlation: dimension mismatch");
    }
    return mm.C.transpose() * (b - mm.apply_D(mm.C * w));
}

inline vector_t correlation(const ProblemInstance& inst, const extended_vector_t& w)
{
    return correlation(build_model_matrices(inst), inst.b(), w);
}

struct OptViolation
{
    index_t index;
    double excess;
};

/// Diagnostic result of the saddle-point optimality test.
struct OptReport
{
    bool satisfied = true;
    double worst_violation = 0.0;
    std::vector<OptViolation> violations;
};

/**
 * Tests c_i^T (b - D C w) in lambda * subdiff|w_i| for every i.
 * Entries with |w_i| <= tol count as zero. Both cases use the
 * scale-aware slack tol * (1 + lambda).
 */
inline OptReport check_opt(
    const ModelMatrices& mm,
    const vector_t& b,
    double lambda,
    const extended_vector_t& w,
    double tol = default_equality_tol
)
{
    if (!(tol > 0)) throw input_error("check_opt: tol must be positive");
    const vector_t xi = correlation(mm, b, w);
    const double slack = tol * (1.0 + lambda);

    OptReport report;
    for (index_t i = 0; i < w.size(); ++i) {
        double excess;
        if (std::abs(w[i]) > tol) {
            const double target = w[i] > 0 ? lambda : -lambda;
            excess = std::abs(xi[i] - target) - slack;
        } else {
            excess = std::abs(xi[i]) - lambda - slack;
        }
        if (excess > 0 || !std::isfinite(excess)) {
            report.satisfied = false;
            report.violations.push_back({i, excess});
            report.worst_violation = std::max(report.worst_violation, excess);
        }
    }
    return report;
}

inline OptReport check_opt(const ProblemInstance& inst, const extended_vector_t& w, double tol = default_equality_tol)
{
    return check_opt(build_model_matrices(inst), inst.b(), inst.lambda, w, tol);
}

/// Equicorrelation signs: sign(xi_i) where |xi_i| attains lambda, 0 elsewhere.
inline Indicator encode_sopt(
    const ModelMatrices& mm,
    const vector_t& b,
    double lambda,
    const extended_vector_t& w,
    double tol = default_equality_tol
)
{
    if (!(tol > 0)) throw input_error("encode_sopt: tol must be positive");
    const vector_t xi = correlation(mm, b, w);
    Indicator s(xi.size());
    for (index_t i = 0; i < xi.size(); ++i) {
        if (std::abs(std::abs(xi[i]) - lambda) <= tol * (1.0 + lambda)) {
            s.set(i, xi[i] > 0 ? 1 : (xi[i] < 0 ? -1 : 0));
        }
    }
    return s;
}

inline Indicator encode_sopt(const ProblemInstance& inst, const extended_vector_t& w, double tol = default_equality_tol)
{
    return encode_sopt(build_model_matrices(inst), inst.b(), inst.lambda, w, tol);
}

/// Linear fits and l1 norm shared by every extended solution of one instance.
struct SolutionSummary
{
    vector_t beta_p;   // A x
    vector_t beta_d;   // A z
    vector_t beta_e;   // C w = [A x; sqrt(rho) A z]
    double gamma_e = 0.0;  // ||w||_1
};

inline SolutionSummary summarize(const ModelMatrices& mm, const extended_vector_t& w)
{
    const index_t m = mm.m();
    const index_t n = mm.n();
    if (w.size() != 2 * n) throw input_error("summarize: w must have length 2n");
    SolutionSummary out;
    out.beta_p = mm.C.topLeftCorner(m, n) * w.head(n);
    out.beta_d = mm.C.topLeftCorner(m, n) * w.tail(n);
    out.beta_e.resize(2 * m);
    out.beta_e << out.beta_p, std::sqrt(mm.rho) * out.beta_d;
    out.gamma_e = w.lpNorm<1>();
    return out;
}

inline SolutionSummary summarize(const ProblemInstance& inst, const extended_vector_t& w)
{
    return summarize(build_model_matrices(inst), w);
}

/// max(||x||_1, ||z||_1) <= ||y||^2 / (2 lambda (1 - rho)) + ||r||^2 / (2 lambda).
inline bool l1_bound_holds(const ProblemInstance& inst, const extended_vector_t& w)
{
    if (w.size() != 2 * inst.n()) throw input_error("l1_bound_holds: w must have length 2n");
    const double bound = inst.y.squaredNorm() / (2.0 * inst.lambda * (1.0 - inst.rho))
                       + inst.r.squaredNorm() / (2.0 * inst.lambda);
    const double lhs = std::max(primal_part(w).lpNorm<1>(), dual_part(w).lpNorm<1>());
    return lhs <= bound;
}

} // namespace sgmc
