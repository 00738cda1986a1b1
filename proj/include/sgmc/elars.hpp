#pragma once
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>
#include <sgmc/candidate.hpp>
#include <sgmc/oracle.hpp>
#include <sgmc/sweep.hpp>

namespace sgmc {

/// Two event times count as simultaneous when they differ by at most 1e-9 (1 + |t|).
inline double tie_tolerance(double t)
{
    return 1e-9 * (1.0 + (std::isfinite(t) ? std::abs(t) : 0.0));
}

/// Output of one deletion-insertion step.
struct IterationResult
{
    double t_plus = pos_inf;
    Indicator s_plus;
    index_set_t deleted;
    index_set_t inserted;
    bool one_at_a_time = false;
    /// The binding exit is lambda(t) -> 0.
    bool terminus = false;
    /// The line never leaves the zone.
    bool unbounded = false;
    ZoneExitTimes exits;
    LineRestrictedPiece restricted;
};

/**
 * One E-LARS step from zone s along a line: exit time, the tied sign
 * constraints (deleted), the tied correlation bounds (inserted) and the
 * successor indicator. Inserted entries take sign(c_i^T(v + u t_plus));
 * correlations that vanish at t_plus (zero columns of C reaching
 * lambda = 0) are not inserted.
 */
inline IterationResult elars_iterate(const ModelMatrices& mm, const CandidatePiece& piece, const ParameterLine& line)
{
    IterationResult out;
    out.restricted = restrict_to_line(mm, piece, line);
    out.exits = zone_exit_times(mm, piece, line, out.restricted);
    out.t_plus = out.exits.t_sup;
    out.s_plus = piece.s;

    if (out.t_plus == pos_inf) {
        out.unbounded = true;
        return out;
    }
    if (out.t_plus == neg_inf) return out;

    const double tie = tie_tolerance(out.t_plus);
    const auto ties = [&](double t) { return std::isfinite(t) && std::abs(t - out.t_plus) <= tie; };
    for (const auto& [i, t] : out.exits.t_a) {
        if (ties(t)) {
            out.deleted.push_back(i);
            out.s_plus.set(i, 0);
        }
    }
    const vector_t xi = mm.C.transpose() * (out.restricted.v + out.restricted.u * out.t_plus);
    for (const auto& [i, t] : out.exits.t_b) {
        if (!ties(t)) continue;
        const double scale = (1.0 + line.scale()) * (1.0 + mm.C.col(i).lpNorm<Eigen::Infinity>());
        if (std::abs(xi[i]) <= detail::exit_coefficient_floor * scale) continue;
        out.inserted.push_back(i);
        out.s_plus.set(i, xi[i] > 0 ? 1 : -1);
    }
    out.terminus = ties(out.exits.t_c);
    out.one_at_a_time = out.deleted.size() + out.inserted.size() == 1;
    return out;
}

inline IterationResult elars_iterate(const ModelMatrices& mm, const Indicator& s, const ParameterLine& line)
{
    return elars_iterate(mm, candidate_slope(mm, s), line);
}

struct AssumptionReport
{
    bool one_at_a_time = false;
    /// Every index that changed in the step, when more than one did.
    index_set_t multi_event_indices;
};

inline AssumptionReport diagnose_assumptions(const IterationResult& step)
{
    AssumptionReport out;
    out.one_at_a_time = step.one_at_a_time;
    if (!step.one_at_a_time) {
        out.multi_event_indices = step.deleted;
        out.multi_event_indices.insert(out.multi_event_indices.end(), step.inserted.begin(), step.inserted.end());
        std::sort(out.multi_event_indices.begin(), out.multi_event_indices.end());
    }
    return out;
}

/// One linear piece of the solution path: w(t) = q - p t for t in [t_start, t_end].
struct PathSegment
{
    Indicator s;
    double t_start = 0.0;
    double t_end = pos_inf;
    vector_t p;
    vector_t q;
    /// Transition into the next segment.
    index_set_t deleted;
    index_set_t inserted;
    bool one_at_a_time = false;

    extended_vector_t w_at(double t) const { return q - p * t; }
};

enum class StopReason
{
    terminus,     // lambda(t) reached 0
    unbounded,    // the last zone contains the rest of the ray
    reached_end,  // t_end reached inside a zone
    truncated,    // max_segments exhausted
    unverified,   // successor indicator failed its zone check
    cycle,        // same (indicator, t) seen twice
};

inline const char* to_string(StopReason r)
{
    switch (r) {
        case StopReason::terminus: return "terminus";
        case StopReason::unbounded: return "unbounded";
        case StopReason::reached_end: return "reached_end";
        case StopReason::truncated: return "truncated";
        case StopReason::unverified: return "unverified";
        case StopReason::cycle: return "cycle";
    }
    return "unknown";
}

struct PathResult
{
    ParameterLine line;
    std::vector<PathSegment> segments;
    StopReason stop_reason = StopReason::terminus;
    bool truncated() const { return stop_reason == StopReason::truncated; }
    /// Successor that failed verification (only for StopReason::unverified).
    std::optional<Indicator> rejected_successor;
    double stop_time = pos_inf;
};

/// Tolerance used when checking that a sweep starts inside its initial zone.
inline constexpr double start_membership_tol = 1e-7;

/**
 * Follows the solution map along `line` from t_start, crossing one zone
 * boundary per step. Zero-length pieces are merged into their neighbours.
 * Each successor indicator is checked with zone_membership just past the
 * breakpoint before the sweep continues.
 */
inline PathResult path_sweep(
    const ModelMatrices& mm,
    const ParameterLine& line,
    const Indicator& s_init,
    double t_start,
    int max_segments,
    double t_end = pos_inf
)
{
    if (max_segments < 1) throw input_error("path_sweep: max_segments must be positive");
    if (!(t_end > t_start)) throw input_error("path_sweep: t_end must exceed t_start");
    CandidatePiece piece = candidate_slope(mm, s_init);
    if (!zone_membership(mm, piece, line.b_at(t_start), line.lambda_at(t_start), start_membership_tol)) {
        throw precondition_error("path_sweep: (b, lambda) at t_start is not in the zone of " + s_init.to_string());
    }

    PathResult out;
    out.line = line;
    std::set<std::pair<std::string, double>> seen;
    double t = t_start;
    index_set_t pending_deleted, pending_inserted;

    const auto merge_into_last = [&](const index_set_t& del, const index_set_t& ins) {
        if (out.segments.empty()) return;
        auto& last = out.segments.back();
        last.deleted.insert(last.deleted.end(), del.begin(), del.end());
        last.inserted.insert(last.inserted.end(), ins.begin(), ins.end());
        std::sort(last.deleted.begin(), last.deleted.end());
        std::sort(last.inserted.begin(), last.inserted.end());
        last.one_at_a_time = last.deleted.size() + last.inserted.size() == 1;
    };

    for (;;) {
        const IterationResult step = elars_iterate(mm, piece, line);
        const double exit = std::max(step.t_plus, t);
        const double seg_end = std::min(exit, t_end);
        if (seg_end > t + tie_tolerance(t)) {
            if (static_cast<int>(out.segments.size()) >= max_segments) {
                out.stop_reason = StopReason::truncated;
                out.stop_time = t;
                return out;
            }
            PathSegment seg;
            seg.s = piece.s;
            seg.t_start = t;
            seg.t_end = seg_end;
            seg.p = step.restricted.p;
            seg.q = step.restricted.q;
            out.segments.push_back(std::move(seg));
        }
        if (std::isfinite(t_end) && t_end <= exit) {
            out.stop_reason = StopReason::reached_end;
            out.stop_time = t_end;
            return out;
        }
        if (step.unbounded) {
            out.stop_reason = StopReason::unbounded;
            out.stop_time = pos_inf;
            return out;
        }
        if (step.terminus) {
            out.stop_reason = StopReason::terminus;
            out.stop_time = exit;
            return out;
        }

        // Verify the successor just past the breakpoint.
        const CandidatePiece next = candidate_slope(mm, step.s_plus);
        bool verified = next.compatible && step.t_plus != neg_inf;
        double next_exit = neg_inf;
        if (verified) {
            next_exit = zone_exit_times(mm, next, line).t_sup;
            verified = next_exit > exit + tie_tolerance(exit);
        }
        if (verified) {
            double eps = 1e-6 * (1.0 + std::abs(exit));
            if (std::isfinite(next_exit)) eps = std::min(eps, 0.5 * (next_exit - exit));
            verified = zone_membership(mm, next, line.b_at(exit + eps), line.lambda_at(exit + eps));
        }
        merge_into_last(step.deleted, step.inserted);
        if (!verified) {
            out.stop_reason = StopReason::unverified;
            out.rejected_successor = step.s_plus;
            out.stop_time = exit;
            return out;
        }
        if (!seen.insert({step.s_plus.to_string(), exit}).second) {
            out.stop_reason = StopReason::cycle;
            out.stop_time = exit;
            return out;
        }
        piece = next;
        t = exit;
    }
}

inline PathResult path_sweep(
    const ProblemInstance& inst,
    const ParameterLine& line,
    const Indicator& s_init,
    double t_start,
    int max_segments,
    double t_end = pos_inf
)
{
    return path_sweep(build_model_matrices(inst), line, s_init, t_start, max_segments, t_end);
}

enum class InitStrategy
{
    zero,
    from_oracle,
};

/// max_i |c_i^T b|: the smallest lambda at which the zero indicator is a zone.
inline double lambda_max(const ModelMatrices& mm, const vector_t& b)
{
    return (mm.C.transpose() * b).lpNorm<Eigen::Infinity>();
}

/// Tolerance used to read an indicator off an oracle solution.
inline constexpr double oracle_encode_tol = 1e-7;

/**
 * Indicator of a zone containing (b, lambda). The zero strategy requires
 * lambda >= max_i |c_i^T b|; the oracle strategy encodes the equicorrelation
 * signs of an iterative solution and rejects points on a zone boundary.
 */
inline Indicator initialize_indicator(
    const ModelMatrices& mm,
    const vector_t& b,
    double lambda,
    InitStrategy strategy,
    const OracleConfig& config = {}
)
{
    if (!(lambda > 0)) throw input_error("initialize_indicator: lambda must be positive");
    if (strategy == InitStrategy::zero) {
        if (lambda_max(mm, b) > lambda + default_equality_tol * (1.0 + lambda)) {
            throw precondition_error("initialize_indicator: lambda below max_i |c_i^T b|; zero indicator does not apply");
        }
        return Indicator::zeros(mm.n());
    }
    const SaddleResult sol = solve_saddle(mm, b, lambda, config);
    if (!sol.converged) {
        throw convergence_error("initialize_indicator: oracle did not converge", sol.worst_violation);
    }
    const Indicator s = encode_sopt(mm, b, lambda, sol.w, oracle_encode_tol);
    const CandidatePiece piece = candidate_slope(mm, s);
    if (!(zone_slack(mm, piece, b, lambda) > default_equality_tol * (1.0 + lambda))) {
        throw precondition_error("initialize_indicator: (b, lambda) lies on a zone boundary of " + s.to_string() +
                                 "; perturb lambda");
    }
    return s;
}

struct EnumerateConfig
{
    double R_y = 1.0;
    double delta_lambda_min = 0.1;
    int max_nodes = 1000;
    int n_cov = 64;
    std::uint64_t seed = 0;
    /// b-coordinates used as ray directions; empty means every y coordinate.
    index_set_t coords;
    int max_segments_per_ray = 256;
    /// After the axis-ray search, sweep from the zero zone straight to each uncovered sample.
    bool targeted_sweeps = true;

    void validate() const
    {
        if (!(delta_lambda_min > 0)) throw input_error("enumerate: delta_lambda_min must be positive");
        if (!(R_y >= 0)) throw input_error("enumerate: R_y must be non-negative");
        if (max_nodes < 1) throw input_error("enumerate: max_nodes must be positive");
        if (n_cov < 0) throw input_error("enumerate: n_cov must be non-negative");
        if (max_segments_per_ray < 1) throw input_error("enumerate: max_segments_per_ray must be positive");
    }
};

struct ZoneNode
{
    Indicator s;
    /// Point of the zone (in the r = 0 subspace) from which rays are cast.
    ParameterPoint anchor;
    double anchor_slack = 0.0;
};

struct ZoneEdge
{
    Indicator from;
    Indicator to;
    /// Breakpoint shared by both closed zones.
    ParameterPoint witness;
};

struct CoverageReport
{
    size_t required = 0;
    size_t covered = 0;
};

struct ZoneGraph
{
    std::vector<ZoneNode> nodes;
    std::vector<ZoneEdge> edges;
    /// Zones discovered but not yet expanded when the search stopped.
    std::vector<Indicator> frontier;
    std::vector<ParameterPoint> samples;
    /// Index into nodes of the first zone found to contain each sample, or -1.
    std::vector<long> sample_zone;
    CoverageReport coverage;
    bool incomplete = false;

    bool contains(const Indicator& s) const
    {
        return std::any_of(nodes.begin(), nodes.end(), [&](const ZoneNode& nd) { return nd.s == s; });
    }

    std::vector<Indicator> indicators() const
    {
        std::vector<Indicator> out;
        for (const auto& nd : nodes) out.push_back(nd.s);
        std::sort(out.begin(), out.end());
        return out;
    }
};

/// Samples of {||y|| <= R_y, r = 0, lambda = delta}: uniform in the ball.
inline std::vector<ParameterPoint> sample_coverage_set(index_t m, double R_y, double delta, int count, std::mt19937_64& rng)
{
    std::normal_distribution<double> gauss;
    std::uniform_real_distribution<double> unif;
    std::vector<ParameterPoint> out;
    out.reserve(static_cast<size_t>(count));
    for (int k = 0; k < count; ++k) {
        vector_t dir(m);
        for (index_t i = 0; i < m; ++i) dir[i] = gauss(rng);
        const double nrm = dir.norm();
        if (nrm > 0) dir /= nrm;
        const double radius = R_y * std::pow(unif(rng), 1.0 / static_cast<double>(m));
        ParameterPoint pt;
        pt.b = vector_t::Zero(2 * m);
        pt.b.head(m) = radius * dir;
        pt.lambda = delta;
        out.push_back(std::move(pt));
    }
    return out;
}

namespace detail {

/// Zone slack divided by the point's magnitude; invariant under positive scaling.
inline double normalized_slack(const ModelMatrices& mm, const CandidatePiece& piece, const vector_t& b, double lambda)
{
    return zone_slack(mm, piece, b, lambda) / (b.lpNorm<Eigen::Infinity>() + std::abs(lambda) + 1e-300);
}

/**
 * Random-search hill climb on the normalized zone slack, moving only
 * the listed b-coordinates and lambda, to push a seed point away from
 * the zone boundary.
 */
inline std::pair<ParameterPoint, double> improve_anchor(
    const ModelMatrices& mm,
    const CandidatePiece& piece,
    ParameterPoint seed,
    const index_set_t& coords,
    std::mt19937_64& rng,
    int iters = 80
)
{
    std::normal_distribution<double> gauss;
    double best = normalized_slack(mm, piece, seed.b, seed.lambda);
    double sigma = 0.1;
    for (int it = 0; it < iters && sigma > 1e-4; ++it) {
        const double mag = seed.b.lpNorm<Eigen::Infinity>() + seed.lambda;
        vector_t step_b = vector_t::Zero(seed.b.size());
        double step_l = gauss(rng);
        double nrm = step_l * step_l;
        for (const auto j : coords) {
            step_b[j] = gauss(rng);
            nrm += step_b[j] * step_b[j];
        }
        nrm = std::sqrt(nrm);
        if (nrm == 0) continue;
        ParameterPoint cand{seed.b + (sigma * mag / nrm) * step_b, seed.lambda + sigma * mag * step_l / nrm};
        const double val = normalized_slack(mm, piece, cand.b, cand.lambda);
        if (val > best) {
            best = val;
            seed = std::move(cand);
            sigma *= 1.5;
        } else {
            sigma *= 0.7;
        }
    }
    return {seed, best};
}

/// Midpoint of a segment, or a point one unit past its start when it is unbounded.
inline double segment_probe(const PathSegment& seg)
{
    if (std::isfinite(seg.t_end)) return 0.5 * (seg.t_start + seg.t_end);
    return seg.t_start + 1.0 + std::abs(seg.t_start);
}

} // namespace detail

/**
 * Breadth-first discovery of zones. Starting from the zero zone, every
 * zone is expanded by sweeping rays through an interior anchor along
 * +-lambda and +-e_j for the configured b-coordinates. The search stops
 * once every sample of the coverage set lies in a discovered zone, or
 * when max_nodes would be exceeded (incomplete).
 */
inline ZoneGraph enumerate_zones(const ModelMatrices& mm, const EnumerateConfig& config)
{
    config.validate();
    const index_t m = mm.m();
    index_set_t coords = config.coords;
    if (coords.empty()) {
        for (index_t j = 0; j < m; ++j) coords.push_back(j);
    }
    for (const auto j : coords) {
        if (j < 0 || j >= 2 * m) throw input_error("enumerate: ray coordinate out of range");
    }

    std::mt19937_64 rng(config.seed);
    ZoneGraph graph;
    graph.samples = sample_coverage_set(m, config.R_y, config.delta_lambda_min, config.n_cov, rng);
    graph.sample_zone.assign(graph.samples.size(), -1);
    graph.coverage.required = graph.samples.size();

    std::unordered_map<Indicator, size_t> index_of;
    std::vector<CandidatePiece> pieces;
    std::set<std::pair<std::string, std::string>> edge_keys;
    std::deque<size_t> queue;

    const auto all_covered = [&] { return graph.coverage.covered == graph.coverage.required; };
    const auto update_coverage = [&](size_t node) {
        for (size_t k = 0; k < graph.samples.size(); ++k) {
            if (graph.sample_zone[k] >= 0) continue;
            if (zone_membership(mm, pieces[node], graph.samples[k].b, graph.samples[k].lambda)) {
                graph.sample_zone[k] = static_cast<long>(node);
                ++graph.coverage.covered;
            }
        }
    };
    // Returns false when the node budget is exhausted.
    const auto add_node = [&](const Indicator& s, const ParameterPoint& seed, size_t& id) {
        if (auto it = index_of.find(s); it != index_of.end()) {
            id = it->second;
            return true;
        }
        if (static_cast<int>(graph.nodes.size()) >= config.max_nodes) {
            graph.incomplete = true;
            return false;
        }
        CandidatePiece piece = candidate_slope(mm, s);
        auto [anchor, slack] = detail::improve_anchor(mm, piece, seed, coords, rng);
        id = graph.nodes.size();
        index_of.emplace(s, id);
        graph.nodes.push_back({s, anchor, slack});
        pieces.push_back(std::move(piece));
        queue.push_back(id);
        update_coverage(id);
        return true;
    };
    const auto add_edge = [&](const Indicator& a, const Indicator& b, const ParameterPoint& witness) {
        auto key = std::minmax(a.to_string(), b.to_string());
        if (edge_keys.insert(key).second) graph.edges.push_back({a, b, witness});
    };
    // Registers every zone of a sweep; false when the budget ran out.
    const auto absorb = [&](const PathResult& path) {
        for (size_t k = 0; k < path.segments.size(); ++k) {
            const auto& seg = path.segments[k];
            const double probe = detail::segment_probe(seg);
            size_t id;
            if (!add_node(seg.s, {path.line.b_at(probe), path.line.lambda_at(probe)}, id)) return false;
            if (k > 0) {
                const double tb = path.segments[k - 1].t_end;
                add_edge(path.segments[k - 1].s, seg.s, {path.line.b_at(tb), path.line.lambda_at(tb)});
            }
        }
        return true;
    };

    size_t root;
    add_node(Indicator::zeros(mm.n()), {vector_t::Zero(2 * m), config.delta_lambda_min}, root);
    graph.nodes[root].anchor = {vector_t::Zero(2 * m), config.delta_lambda_min};
    graph.nodes[root].anchor_slack = 1.0;

    bool budget_ok = true;
    while (budget_ok && !queue.empty() && !all_covered()) {
        const size_t id = queue.front();
        queue.pop_front();
        const ParameterPoint anchor = graph.nodes[id].anchor;
        const Indicator s = graph.nodes[id].s;

        std::vector<std::pair<vector_t, double>> directions;
        directions.emplace_back(vector_t::Zero(2 * m), 1.0);
        directions.emplace_back(vector_t::Zero(2 * m), -1.0);
        for (const auto j : coords) {
            vector_t e = vector_t::Zero(2 * m);
            e[j] = 1.0;
            directions.emplace_back(e, 0.0);
            directions.emplace_back(-e, 0.0);
        }
        for (const auto& [db, dl] : directions) {
            const ParameterLine line(anchor.b, anchor.lambda, db, dl);
            PathResult path;
            try {
                path = path_sweep(mm, line, s, 0.0, config.max_segments_per_ray);
            } catch (const precondition_error&) {
                continue;
            }
            budget_ok = absorb(path);
            if (!budget_ok || all_covered()) break;
        }
    }

    if (budget_ok && config.targeted_sweeps && !all_covered()) {
        const ParameterPoint origin = graph.nodes[root].anchor;
        for (size_t k = 0; k < graph.samples.size() && budget_ok; ++k) {
            if (graph.sample_zone[k] >= 0) continue;
            const auto& target = graph.samples[k];
            const ParameterLine line(origin.b, origin.lambda, target.b - origin.b, target.lambda - origin.lambda);
            try {
                const PathResult path = path_sweep(mm, line, graph.nodes[root].s, 0.0, config.max_segments_per_ray, 1.0);
                budget_ok = absorb(path);
            } catch (const precondition_error&) {
            }
        }
    }

    for (const auto id : queue) graph.frontier.push_back(graph.nodes[id].s);
    return graph;
}

inline ZoneGraph enumerate_zones(const ProblemInstance& inst, const EnumerateConfig& config)
{
    return enumerate_zones(build_model_matrices(inst), config);
}

} // namespace sgmc
