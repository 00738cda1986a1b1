// Acceptance runner: one PASS/FAIL line per criterion, exit status 0 only if all pass.
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>
#include "test_support.hpp"

using namespace sgmc;
using sgmc::testing::b_of;
using sgmc::testing::duplicated_pair;
using sgmc::testing::gaussian_instance;

namespace {

struct Outcome
{
    bool passed = false;
    std::string detail;
};

struct Criterion
{
    int id;
    std::string name;
    double budget_seconds;  // <= 0: no runtime limit
    std::function<Outcome()> run;
};

std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

/// Segment of a path whose closed t-range contains t.
const PathSegment* segment_at(const PathResult& path, double t)
{
    for (const auto& seg : path.segments) {
        if (seg.t_start <= t && t <= seg.t_end) return &seg;
    }
    return nullptr;
}

/// Randomly perturbed points around (b, lambda) that lie strictly inside the zone of `piece`.
std::vector<ParameterPoint> interior_points(
    const ModelMatrices& mm, const CandidatePiece& piece, const vector_t& b, double lambda, int count, std::mt19937_64& rng)
{
    std::normal_distribution<double> g;
    std::vector<ParameterPoint> out;
    for (int tries = 0; tries < 4000 && static_cast<int>(out.size()) < count; ++tries) {
        const double scale = tries < 2000 ? 0.02 : 0.002;
        vector_t bb = b;
        for (index_t i = 0; i < bb.size(); ++i) bb[i] += scale * g(rng) * (1 + std::abs(b[i]));
        const double ll = lambda * (1 + scale * g(rng));
        if (strictly_inside(mm, piece, bb, ll)) out.push_back({bb, ll});
    }
    return out;
}

/// Largest raw deviation from the optimality inclusion, with no tolerance subtracted.
double opt_residual(const ModelMatrices& mm, const vector_t& b, double lambda, const extended_vector_t& w)
{
    const vector_t xi = correlation(mm, b, w);
    double worst = 0.0;
    for (index_t i = 0; i < w.size(); ++i) {
        const double r = w[i] != 0.0 ? std::abs(xi[i] - (w[i] > 0 ? lambda : -lambda)) : std::max(0.0, std::abs(xi[i]) - lambda);
        worst = std::max(worst, r);
    }
    return worst;
}

// ---------------------------------------------------------------------------

Outcome duplicated_column_zones()
{
    const auto inst = duplicated_pair(0.0, 1.0);
    EnumerateConfig cfg;
    cfg.R_y = 3.0;
    const auto graph = enumerate_zones(inst, cfg);
    std::vector<std::string> found;
    for (const auto& s : graph.indicators()) found.push_back(s.to_string());
    const std::vector<std::string> expected{"--00", "0000", "++00"};
    std::vector<std::string> sorted_expected = expected;
    std::sort(sorted_expected.begin(), sorted_expected.end());
    std::sort(found.begin(), found.end());
    if (found != sorted_expected || graph.incomplete) {
        std::string got;
        for (const auto& f : found) got += f + " ";
        return {false, "indicators " + got};
    }

    const auto mm = build_model_matrices(inst);
    const auto zero = candidate_slope(mm, Indicator::from_string("0000"));
    const auto plus = candidate_slope(mm, Indicator::from_string("++00"));
    const auto minus = candidate_slope(mm, Indicator::from_string("--00"));
    int checked = 0, wrong = 0;
    for (int i = 0; i < 10; ++i) {
        for (int j = 0; j < 10; ++j) {
            const double y = -3.0 + 6.0 * i / 9.0;
            const double lambda = 0.15 + 0.2 * j;
            if (std::abs(std::abs(y) - lambda) <= 1e-6) continue;
            ++checked;
            const vector_t b = b_of(y);
            const bool in_zero = zone_membership(mm, zero, b, lambda);
            const bool in_plus = zone_membership(mm, plus, b, lambda);
            const bool in_minus = zone_membership(mm, minus, b, lambda);
            if (in_zero != (std::abs(y) <= lambda) || in_plus != (y >= lambda) || in_minus != (y <= -lambda)) ++wrong;
        }
    }
    return {wrong == 0 && checked == 100,
            "3 zones, coverage " + std::to_string(graph.coverage.covered) + "/" + std::to_string(graph.coverage.required) +
                ", " + std::to_string(wrong) + " misclassified of " + std::to_string(checked)};
}

Outcome two_column_line()
{
    const auto mm = build_model_matrices(duplicated_pair(1.0, 2.0));
    const ParameterLine line(b_of(1.0), 2.0, vector_t::Zero(2), -1.0);
    const auto path = path_sweep(mm, line, Indicator::zeros(2), 0.0, 100);
    if (path.segments.size() != 2) return {false, std::to_string(path.segments.size()) + " segments"};
    const auto& first = path.segments[0];
    const auto& last = path.segments[1];
    const bool ok = std::abs(first.t_end - 1.0) <= 1e-9 && std::abs(last.t_start - 1.0) <= 1e-9 &&
                    std::abs(last.t_end - 2.0) <= 1e-9 && first.inserted == index_set_t{0, 1} && first.deleted.empty() &&
                    !first.one_at_a_time && last.s == Indicator::from_string("++00") &&
                    path.stop_reason == StopReason::terminus;
    return {ok, "breakpoint " + fmt(first.t_end) + ", end " + fmt(last.t_end) + ", inserted {1,2}, one_at_a_time=" +
                    (first.one_at_a_time ? "true" : "false")};
}

Outcome lasso_reduction()
{
    double worst_fit = 0.0, worst_l1 = 0.0;
    int compared = 0;
    for (int inst_id = 0; inst_id < 20; ++inst_id) {
        const auto inst = gaussian_instance(5, 10, 0.0, 1000 + inst_id);
        const auto mm = build_model_matrices(inst);
        const vector_t b = inst.b();
        const double lmax = lambda_max(mm, b);
        const auto path = path_sweep(mm, sgmc::testing::lambda_descent(mm, b), Indicator::zeros(10), 0.0, 1000);
        if (path.stop_reason != StopReason::terminus) return {false, "instance " + std::to_string(inst_id) + " stopped: " + to_string(path.stop_reason)};
        std::mt19937_64 rng(inst_id);
        std::uniform_real_distribution<double> frac(0.01, 0.99);
        for (int k = 0; k < 20; ++k) {
            const double lambda = frac(rng) * lmax;
            const double t = lmax - lambda;
            const auto* seg = segment_at(path, t);
            if (!seg) return {false, "no segment at t=" + fmt(t)};
            const vector_t x = primal_part(seg->w_at(t));
            const auto ref = lasso_reference(inst.A, inst.y, lambda);
            worst_fit = std::max(worst_fit, (inst.A * x - inst.A * ref.x).lpNorm<Eigen::Infinity>());
            worst_l1 = std::max(worst_l1, std::abs(x.lpNorm<1>() - ref.x.lpNorm<1>()));
            ++compared;
        }
    }
    return {worst_fit <= 1e-5 && worst_l1 <= 1e-5 && compared == 400,
            std::to_string(compared) + " lambdas, max |Ax| gap " + fmt(worst_fit) + ", max l1 gap " + fmt(worst_l1)};
}

Outcome optimality_certification()
{
    double worst_violation = 0.0, worst_residual = 0.0, worst_gap = 0.0;
    int samples = 0, segments = 0, failed = 0;
    const double rhos[] = {0.0, 0.3, 0.8};
    for (int inst_id = 0; inst_id < 20; ++inst_id) {
        const double rho = rhos[inst_id % 3];
        const auto inst = gaussian_instance(5, 10, rho, 2000 + inst_id, 0.3, inst_id % 2 == 1);
        const auto mm = build_model_matrices(inst);
        const auto path = path_sweep(mm, sgmc::testing::lambda_descent(mm, inst.b()), Indicator::zeros(10), 0.0, 1000);
        if (path.stop_reason != StopReason::terminus) return {false, "instance " + std::to_string(inst_id) + " stopped: " + to_string(path.stop_reason)};
        for (const auto& seg : path.segments) {
            ++segments;
            const auto times = interior_times(seg, 5);
            for (const double t : times) {
                const vector_t b = path.line.b_at(t);
                const double lambda = path.line.lambda_at(t);
                const auto report = check_opt(mm, b, lambda, seg.w_at(t), 1e-7);
                failed += !report.satisfied;
                worst_violation = std::max(worst_violation, report.worst_violation);
                worst_residual = std::max(worst_residual, opt_residual(mm, b, lambda, seg.w_at(t)));
                ++samples;
            }
            const double t = times[2];
            const auto sol = solve_saddle(mm, path.line.b_at(t), path.line.lambda_at(t));
            if (!sol.converged) return {false, "oracle did not converge"};
            const auto a = summarize(mm, sol.w);
            const auto e = summarize(mm, seg.w_at(t));
            worst_gap = std::max({worst_gap, (a.beta_e - e.beta_e).lpNorm<Eigen::Infinity>(), std::abs(a.gamma_e - e.gamma_e)});
        }
    }
    return {failed == 0 && worst_violation <= 1e-7 && worst_gap <= 1e-5,
            std::to_string(segments) + " segments, " + std::to_string(samples) + " samples, " + std::to_string(failed) +
                " failing, max residual " + fmt(worst_residual) + ", oracle gap " + fmt(worst_gap)};
}

Outcome min_norm_property()
{
    std::mt19937_64 rng(3001);
    std::uniform_real_distribution<double> unif(0.0, 0.9);
    int samples = 0, failures = 0;
    double worst_gap = 0.0;
    for (int inst_id = 0; samples < 50 && inst_id < 200; ++inst_id) {
        const auto inst = gaussian_instance(4, 6, unif(rng), 3000 + inst_id, 0.2 + 0.5 * unif(rng), inst_id % 2 == 0);
        const auto mm = build_model_matrices(inst);
        const auto s = initialize_indicator(mm, inst.b(), inst.lambda, InitStrategy::from_oracle);
        const auto piece = candidate_slope(mm, s);
        for (const auto& p : interior_points(mm, piece, inst.b(), inst.lambda, 2, rng)) {
            if (samples == 50) break;
            const auto weq = eval_weq(piece, p.b, p.lambda);
            const auto mn = min_norm_over_eqnq(mm, s, p.b, p.lambda);
            const double gap = (weq - mn.w).lpNorm<Eigen::Infinity>();
            worst_gap = std::max(worst_gap, gap);
            if (weq.norm() > mn.w.norm() + 1e-8 || gap > 1e-6) ++failures;
            ++samples;
        }
    }
    return {samples == 50 && failures == 0,
            std::to_string(samples) + " samples, " + std::to_string(failures) + " failures, max gap " + fmt(worst_gap)};
}

Outcome geometry_invariants()
{
    std::mt19937_64 rng(4001);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::uniform_int_distribution<int> dim(2, 6);
    std::normal_distribution<double> gauss;
    std::map<std::string, int> failures;
    double worst_jump = 0.0;
    const int trials = 200;
    for (int trial = 0; trial < trials; ++trial) {
        const index_t m = dim(rng), n = dim(rng);
        const double rho = 0.9 * unif(rng);
        const auto inst = gaussian_instance(m, n, rho, 4000 + trial, 0.1 + 0.8 * unif(rng), trial % 2 == 0);
        const auto mm = build_model_matrices(inst);
        const vector_t b = inst.b();

        const auto sol = solve_saddle(mm, b, inst.lambda);
        if (!sol.converged) {
            ++failures["oracle"];
            continue;
        }
        const Indicator s = encode_sopt(mm, b, inst.lambda, sol.w, oracle_encode_tol);
        const auto piece = candidate_slope(mm, s);

        // Cone scaling and midpoint convexity on strictly interior points.
        const auto pts = interior_points(mm, piece, b, inst.lambda, 2, rng);
        if (pts.size() < 2) {
            ++failures["interior"];
        } else {
            for (const double theta : {0.5, 2.0, 10.0}) {
                if (!zone_membership(mm, piece, theta * pts[0].b, theta * pts[0].lambda)) ++failures["cone"];
            }
            if (!zone_membership(mm, piece, 0.5 * (pts[0].b + pts[1].b), 0.5 * (pts[0].lambda + pts[1].lambda))) {
                ++failures["midpoint"];
            }
        }

        // Indicator invariance across solver initializations.
        vector_t w0(2 * n);
        for (index_t i = 0; i < w0.size(); ++i) w0[i] = 3.0 * gauss(rng);
        const auto other = solve_saddle(mm, b, inst.lambda, OracleConfig{}, w0);
        if (!other.converged || encode_sopt(mm, b, inst.lambda, other.w, oracle_encode_tol) != s) ++failures["invariance"];

        // Path continuity, l1 bound and sparsity along a lambda-descent path.
        const auto path = path_sweep(mm, sgmc::testing::lambda_descent(mm, b), Indicator::zeros(n), 0.0, 1000);
        if (path.stop_reason != StopReason::terminus) ++failures["path"];
        const auto audit = audit_path(mm, path);
        worst_jump = std::max(worst_jump, audit.max_breakpoint_jump);
        if (audit.max_breakpoint_jump > 1e-8) ++failures["continuity"];

        std::vector<std::pair<double, extended_vector_t>> points{{inst.lambda, sol.w}};
        for (const auto& seg : path.segments) {
            for (const double t : interior_times(seg, 2)) points.emplace_back(path.line.lambda_at(t), seg.w_at(t));
        }
        const auto limit = std::min(m, n);
        for (const auto& [lambda, w] : points) {
            ProblemInstance at = inst;
            at.lambda = lambda;
            if (!l1_bound_holds(at, w)) ++failures["l1_bound"];
        }
        for (const auto& seg : path.segments) {
            const Indicator& si = seg.s;
            index_t primal = 0, dual = 0;
            for (index_t i = 0; i < n; ++i) {
                primal += si[i] != 0;
                dual += si[n + i] != 0;
            }
            if (primal > limit || dual > limit) ++failures["sparsity"];
        }
    }
    int total = 0;
    std::string detail;
    for (const auto& [name, count] : failures) {
        total += count;
        detail += " " + name + "=" + std::to_string(count);
    }
    return {total == 0, std::to_string(trials) + " trials, " + std::to_string(total) + " failures" + detail +
                            ", max jump " + fmt(worst_jump)};
}

Outcome brute_force_equivalence()
{
    struct Case
    {
        index_t m;
        double rho;
    };
    const Case cases[] = {{1, 0.0}, {1, 0.5}, {2, 0.0}, {2, 0.5}, {2, 0.5}};
    std::string detail;
    bool all = true;
    for (int k = 0; k < 5; ++k) {
        const auto inst = gaussian_instance(cases[k].m, 2, cases[k].rho, 5000 + k);
        const auto mm = build_model_matrices(inst);
        EnumerateConfig cfg;
        cfg.R_y = 3.0;
        cfg.delta_lambda_min = 0.2;
        cfg.n_cov = 200;
        cfg.seed = 11 + k;
        const auto graph = enumerate_zones(mm, cfg);
        const auto brute = brute_force_indicators(mm, graph.samples);

        std::set<Indicator> meeting;
        for (const auto& nd : graph.nodes) {
            const auto piece = candidate_slope(mm, nd.s);
            for (const auto& p : graph.samples) {
                if (zone_membership(mm, piece, p.b, p.lambda)) {
                    meeting.insert(nd.s);
                    break;
                }
            }
        }
        const std::set<Indicator> expected(brute.indicators.begin(), brute.indicators.end());
        const bool covered = graph.coverage.covered == graph.coverage.required && graph.coverage.required == graph.samples.size();
        const bool ok = meeting == expected && covered && !graph.incomplete;
        all = all && ok;
        detail += (k ? ", " : "") + std::to_string(meeting.size()) + "/" + std::to_string(expected.size()) +
                  (covered ? "" : " uncovered");
    }
    return {all, "zones meeting samples (graph/brute): " + detail};
}

Outcome iteration_cost_scaling()
{
    const index_t m = 100, n = 48;
    const auto inst = gaussian_instance(m, n, 0.5, 6001);
    const auto mm = build_model_matrices(inst);
    const ParameterLine line = sgmc::testing::lambda_descent(mm, inst.b());
    std::vector<double> log_e, log_t;
    std::string detail;
    for (const index_t e : {5, 10, 20, 40}) {
        Indicator s = Indicator::zeros(n);
        for (index_t i = 0; i < e; ++i) s.set(i, i % 2 == 0 ? 1 : -1);
        std::vector<double> times;
        const int reps = 41;
        for (int r = 0; r < reps; ++r) {
            const auto t0 = std::chrono::steady_clock::now();
            const auto step = elars_iterate(mm, s, line);
            times.push_back(seconds_since(t0));
            if (step.restricted.p.size() != 2 * n) return {false, "unexpected result size"};
        }
        std::nth_element(times.begin(), times.begin() + reps / 2, times.end());
        const double median = times[reps / 2];
        log_e.push_back(std::log(static_cast<double>(e)));
        log_t.push_back(std::log(median));
        detail += " |E|=" + std::to_string(e) + ":" + fmt(median * 1e6) + "us";
    }
    const double mx = std::accumulate(log_e.begin(), log_e.end(), 0.0) / log_e.size();
    const double my = std::accumulate(log_t.begin(), log_t.end(), 0.0) / log_t.size();
    double sxy = 0.0, sxx = 0.0;
    for (size_t i = 0; i < log_e.size(); ++i) {
        sxy += (log_e[i] - mx) * (log_t[i] - my);
        sxx += (log_e[i] - mx) * (log_e[i] - mx);
    }
    const double slope = sxy / sxx;
    return {slope <= 3.5, "log-log slope " + fmt(slope) + detail};
}

} // namespace

int main()
{
    const std::vector<Criterion> criteria{
        {1, "three zones of the duplicated-column model", 1.0, duplicated_column_zones},
        {2, "two-segment sweep with simultaneous insertion", 0.1, two_column_line},
        {3, "reduction to the LASSO path", 10.0, lasso_reduction},
        {4, "optimality certificate along paths", 30.0, optimality_certification},
        {5, "candidate map is the minimum-norm solution", 20.0, min_norm_property},
        {6, "geometry invariants over random trials", 60.0, geometry_invariants},
        {7, "zone graph equals brute-force enumeration", 30.0, brute_force_equivalence},
        {8, "per-iteration cost scaling", 0.0, iteration_cost_scaling},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = c.run();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        const double elapsed = seconds_since(t0);
        const bool in_time = c.budget_seconds <= 0 || elapsed < c.budget_seconds;
        const bool passed = out.passed && in_time;
        failed += !passed;
        std::ostringstream timing;
        timing << fmt(elapsed) << "s";
        if (c.budget_seconds > 0) timing << " < " << c.budget_seconds << "s" << (in_time ? "" : " EXCEEDED");
        std::printf("%s [%d] %s (%s): %s\n", passed ? "PASS" : "FAIL", c.id, c.name.c_str(), timing.str().c_str(),
                    out.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
