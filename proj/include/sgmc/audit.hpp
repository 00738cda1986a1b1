#pragma once
#include <algorithm>
#include <cmath>
#include <vector>
#include <sgmc/candidate.hpp>
#include <sgmc/elars.hpp>
#include <sgmc/optimality.hpp>

namespace sgmc {

/// `count` evenly spaced interior times of a segment; an unbounded segment is probed over [t_start, t_start + 1 + |t_start|].
inline std::vector<double> interior_times(const PathSegment& seg, int count = 5)
{
    const double t1 = std::isfinite(seg.t_end) ? seg.t_end : seg.t_start + 1.0 + std::abs(seg.t_start);
    std::vector<double> out;
    for (int k = 1; k <= count; ++k) out.push_back(seg.t_start + (t1 - seg.t_start) * k / (count + 1));
    return out;
}

/// Worst-case numbers of a path re-checked against the optimality certificate.
struct PathAudit
{
    /// Largest check_opt excess over all interior samples (0 when all pass).
    double worst_opt_violation = 0.0;
    bool opt_ok = true;
    bool eqnq_ok = true;
    /// Largest ||w_k(t) - w_{k+1}(t)||_inf at shared breakpoints.
    double max_breakpoint_jump = 0.0;
    bool ordered = true;
    size_t samples = 0;
};

inline PathAudit audit_path(
    const ModelMatrices& mm,
    const PathResult& path,
    double opt_tol = 1e-7,
    int samples_per_segment = 5
)
{
    PathAudit out;
    const auto& segs = path.segments;
    for (size_t k = 0; k < segs.size(); ++k) {
        const auto& seg = segs[k];
        if (!(seg.t_start < seg.t_end)) out.ordered = false;
        if (k > 0 && std::abs(segs[k - 1].t_end - seg.t_start) > tie_tolerance(seg.t_start)) out.ordered = false;
        for (const double t : interior_times(seg, samples_per_segment)) {
            const vector_t b = path.line.b_at(t);
            const double lambda = path.line.lambda_at(t);
            const extended_vector_t w = seg.w_at(t);
            const auto report = check_opt(mm, b, lambda, w, opt_tol);
            if (!report.satisfied) {
                out.opt_ok = false;
                out.worst_opt_violation = std::max(out.worst_opt_violation, report.worst_violation);
            }
            if (!eqnq_membership(mm, seg.s, b, lambda, w, opt_tol)) out.eqnq_ok = false;
            ++out.samples;
        }
        if (k > 0 && std::isfinite(seg.t_start)) {
            const double jump = (segs[k - 1].w_at(seg.t_start) - seg.w_at(seg.t_start)).lpNorm<Eigen::Infinity>();
            out.max_breakpoint_jump = std::max(out.max_breakpoint_jump, jump);
        }
    }
    return out;
}

} // namespace sgmc
