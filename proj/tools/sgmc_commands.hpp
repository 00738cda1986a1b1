#pragma once
#include <cstdint>
#include <iomanip>
#include <iostream>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>
#include <sgmc/sgmc.hpp>

namespace sgmc::cli {

enum exit_code : int
{
    exit_ok = 0,
    exit_input = 1,
    exit_numerical = 2,
    exit_incomplete = 3,
};

struct RunConfig
{
    std::string command;
    std::string instance_path;
    /// Empty writes the JSON result to stdout.
    std::string out_path;
    /// Plot samples of a path (path command only).
    std::string plot_csv_path;
    /// Path file re-checked by verify.
    std::string segments_path;

    // Data overrides; required when the instance is a CSV matrix.
    std::optional<std::string> y_list;
    std::optional<std::string> r_list;
    std::optional<double> lambda;
    std::optional<double> rho;

    std::optional<std::string> delta_b;
    std::optional<double> delta_lambda;
    double t_start = 0.0;
    double t_end = std::numeric_limits<double>::infinity();
    int max_segments = 1000;
    bool from_lambda_max = false;
    /// auto | zero | oracle
    std::string init = "auto";

    int max_nodes = 1000;
    double r_y = 1.0;
    double delta_lambda_min = 0.1;
    int n_cov = 64;

    double tol = 1e-10;
    std::uint64_t seed = 0;
};

inline bool ends_with(const std::string& s, const std::string& suffix)
{
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

inline ProblemInstance load_instance(const RunConfig& cfg)
{
    if (cfg.instance_path.empty()) throw input_error("--instance is required");
    const std::string text = io::read_text_file(cfg.instance_path);
    if (ends_with(cfg.instance_path, ".csv")) {
        if (!cfg.y_list || !cfg.lambda) throw input_error("a CSV instance needs --y and --lambda");
        matrix_t A = io::matrix_from_csv(text);
        vector_t y = io::parse_number_list(*cfg.y_list);
        vector_t r = cfg.r_list ? io::parse_number_list(*cfg.r_list) : vector_t::Zero(y.size());
        return ProblemInstance(std::move(A), cfg.rho.value_or(0.0), std::move(y), std::move(r), *cfg.lambda);
    }
    ProblemInstance inst = io::instance_from_json(io::parse_json_text(text, cfg.instance_path));
    if (cfg.y_list) inst.y = io::parse_number_list(*cfg.y_list);
    if (cfg.r_list) inst.r = io::parse_number_list(*cfg.r_list);
    if (cfg.lambda) inst.lambda = *cfg.lambda;
    if (cfg.rho) inst.rho = *cfg.rho;
    inst.validate();
    return inst;
}

inline void emit_json(const RunConfig& cfg, const io::json& j)
{
    const std::string text = j.dump(2) + "\n";
    if (cfg.out_path.empty()) std::cout << text;
    else io::write_text(cfg.out_path, text);
}

inline OracleConfig oracle_config(const RunConfig& cfg)
{
    OracleConfig oc;
    oc.tol = cfg.tol;
    return oc;
}

inline int cmd_solve(const RunConfig& cfg)
{
    const ProblemInstance inst = load_instance(cfg);
    const ModelMatrices mm = build_model_matrices(inst);
    const vector_t b = inst.b();
    const SaddleResult res = solve_saddle(mm, b, inst.lambda, oracle_config(cfg));
    const SolutionSummary sum = summarize(mm, res.w);
    io::json out{{"format", io::format_version},
                 {"w", io::vector_json(res.w)},
                 {"indicator", encode_sopt(mm, b, inst.lambda, res.w, oracle_encode_tol).to_string()},
                 {"beta_e", io::vector_json(sum.beta_e)},
                 {"gamma_e", io::number(sum.gamma_e)},
                 {"opt_report", io::report_json(check_opt(mm, b, inst.lambda, res.w, cfg.tol))},
                 {"converged", res.converged},
                 {"iterations", res.iterations}};
    emit_json(cfg, out);
    if (!res.converged) {
        std::cerr << "solve: no convergence after " << res.iterations << " iterations (worst violation "
                  << res.worst_violation << ")\n";
        return exit_numerical;
    }
    return exit_ok;
}

/// Line through the instance's (b, lambda): the default velocity is pure lambda-descent.
inline ParameterLine line_from_config(const RunConfig& cfg, const ProblemInstance& inst, const ModelMatrices& mm)
{
    const index_t m = inst.m();
    vector_t db = vector_t::Zero(2 * m);
    if (cfg.delta_b) {
        const vector_t given = io::parse_number_list(*cfg.delta_b);
        if (given.size() == m) db.head(m) = given;
        else if (given.size() == 2 * m) db = given;
        else throw input_error("--delta-b must have m or 2m entries");
    }
    double dl = cfg.delta_lambda.value_or(cfg.delta_b ? 0.0 : -1.0);
    const vector_t b = inst.b();
    const double lambda0 = cfg.from_lambda_max ? lambda_max(mm, b) : inst.lambda;
    return ParameterLine(b, lambda0, db, dl);
}

inline Indicator initial_indicator(const RunConfig& cfg, const ModelMatrices& mm, const vector_t& b, double lambda)
{
    if (!(lambda > 0)) throw input_error("lambda(t_start) must be positive");
    if (cfg.init == "zero") return initialize_indicator(mm, b, lambda, InitStrategy::zero);
    if (cfg.init == "oracle") return initialize_indicator(mm, b, lambda, InitStrategy::from_oracle, oracle_config(cfg));
    if (cfg.init != "auto") throw input_error("--init must be auto, zero or oracle");
    const auto strategy = lambda_max(mm, b) <= lambda ? InitStrategy::zero : InitStrategy::from_oracle;
    return initialize_indicator(mm, b, lambda, strategy, oracle_config(cfg));
}

inline int cmd_path(const RunConfig& cfg)
{
    const ProblemInstance inst = load_instance(cfg);
    const ModelMatrices mm = build_model_matrices(inst);
    const ParameterLine line = line_from_config(cfg, inst, mm);
    if (cfg.max_segments < 1) throw input_error("--max-segments must be positive");
    const Indicator s0 = initial_indicator(cfg, mm, line.b_at(cfg.t_start), line.lambda_at(cfg.t_start));
    const PathResult path = path_sweep(mm, line, s0, cfg.t_start, cfg.max_segments, cfg.t_end);
    emit_json(cfg, io::path_json(path));
    if (!cfg.plot_csv_path.empty()) io::write_text(cfg.plot_csv_path, io::path_csv(path));
    switch (path.stop_reason) {
        case StopReason::truncated:
            std::cerr << "path: truncated after " << path.segments.size() << " segments\n";
            return exit_incomplete;
        case StopReason::unverified:
        case StopReason::cycle:
            std::cerr << "path: stopped at t = " << path.stop_time << " (" << to_string(path.stop_reason) << ")\n";
            return exit_numerical;
        default:
            return exit_ok;
    }
}

inline int cmd_enumerate(const RunConfig& cfg)
{
    const ProblemInstance inst = load_instance(cfg);
    EnumerateConfig ec;
    ec.R_y = cfg.r_y;
    ec.delta_lambda_min = cfg.delta_lambda_min;
    ec.max_nodes = cfg.max_nodes;
    ec.n_cov = cfg.n_cov;
    ec.seed = cfg.seed;
    ec.max_segments_per_ray = std::min(cfg.max_segments, 256);
    const ZoneGraph graph = enumerate_zones(inst, ec);
    emit_json(cfg, io::graph_json(graph));
    if (graph.incomplete || graph.coverage.covered < graph.coverage.required) {
        std::cerr << "enumerate: incomplete (" << graph.nodes.size() << " nodes, coverage "
                  << graph.coverage.covered << "/" << graph.coverage.required << ")\n";
        return exit_incomplete;
    }
    return exit_ok;
}

struct CheckRow
{
    std::string name;
    bool passed = true;
    std::string detail;
};

inline std::string fmt(double v)
{
    std::ostringstream ss;
    ss << std::setprecision(3) << v;
    return ss.str();
}

/// Cross-checks of one instance between the oracles, the candidate map and the path driver.
inline std::vector<CheckRow> verify_instance(const RunConfig& cfg, const ProblemInstance& inst)
{
    std::vector<CheckRow> rows;
    const ModelMatrices mm = build_model_matrices(inst);
    const vector_t b = inst.b();
    const double lambda = inst.lambda;
    const OracleConfig oc = oracle_config(cfg);

    const SaddleResult sol = solve_saddle(mm, b, lambda, oc);
    rows.push_back({"oracle_converged", sol.converged, std::to_string(sol.iterations) + " iterations"});
    const auto report = check_opt(mm, b, lambda, sol.w, 1e-7);
    rows.push_back({"oracle_opt", report.satisfied, "worst violation " + fmt(report.worst_violation)});
    rows.push_back({"l1_bound", l1_bound_holds(inst, sol.w), ""});

    const Indicator s = encode_sopt(mm, b, lambda, sol.w, oracle_encode_tol);
    const CandidatePiece piece = candidate_slope(mm, s);
    rows.push_back({"oracle_indicator_in_zone", zone_membership(mm, piece, b, lambda), s.to_string()});

    const extended_vector_t weq = eval_weq(piece, b, lambda);
    const SolutionSummary s_or = summarize(mm, sol.w);
    const SolutionSummary s_eq = summarize(mm, weq);
    const double fit_gap = std::max((s_or.beta_e - s_eq.beta_e).lpNorm<Eigen::Infinity>(), std::abs(s_or.gamma_e - s_eq.gamma_e));
    rows.push_back({"candidate_map_matches_oracle", fit_gap <= 1e-5, "gap " + fmt(fit_gap)});

    if (strictly_inside(mm, piece, b, lambda)) {
        const MinNormResult mn = min_norm_over_eqnq(mm, s, b, lambda);
        const double gap = (mn.w - weq).lpNorm<Eigen::Infinity>();
        rows.push_back({"min_norm_matches_candidate_map", gap <= 1e-6 && weq.norm() <= mn.w.norm() + 1e-8, "gap " + fmt(gap)});
    } else {
        rows.push_back({"min_norm_matches_candidate_map", true, "skipped: point on a zone boundary"});
    }

    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> gauss;
    bool invariant = true;
    for (int k = 0; k < 3; ++k) {
        vector_t w0(2 * inst.n());
        for (index_t i = 0; i < w0.size(); ++i) w0[i] = gauss(rng);
        const SaddleResult other = solve_saddle(mm, b, lambda, oc, w0);
        if (!other.converged || encode_sopt(mm, b, lambda, other.w, oracle_encode_tol) != s) invariant = false;
    }
    rows.push_back({"indicator_invariant_to_start", invariant, "3 random starts"});

    PathResult path;
    if (!cfg.segments_path.empty()) {
        path = io::path_from_json(io::parse_json_text(io::read_text_file(cfg.segments_path), cfg.segments_path));
        if (path.line.b0.size() != b.size()) throw input_error("segments file does not match the instance dimensions");
    } else {
        const double lmax = lambda_max(mm, b);
        if (lmax > 0) {
            const ParameterLine line(b, lmax, vector_t::Zero(b.size()), -1.0);
            path = path_sweep(mm, line, Indicator::zeros(inst.n()), 0.0, cfg.max_segments);
            rows.push_back({"path_complete", path.stop_reason == StopReason::terminus, to_string(path.stop_reason)});
        }
    }
    if (!path.segments.empty()) {
        const PathAudit audit = audit_path(mm, path);
        rows.push_back({"segments_ordered", audit.ordered, std::to_string(path.segments.size()) + " segments"});
        rows.push_back({"segments_opt", audit.opt_ok, "worst violation " + fmt(audit.worst_opt_violation)});
        rows.push_back({"segments_eqnq", audit.eqnq_ok, std::to_string(audit.samples) + " samples"});
        rows.push_back({"breakpoint_continuity", audit.max_breakpoint_jump <= 1e-8, "max jump " + fmt(audit.max_breakpoint_jump)});

        const bool lasso_case = inst.rho == 0.0 && inst.r.isZero(0.0) && path.line.delta_b.isZero(0.0) && path.line.delta_lambda != 0.0;
        if (lasso_case) {
            double worst = 0.0;
            int compared = 0;
            for (const auto& seg : path.segments) {
                for (const double t : interior_times(seg, 2)) {
                    const double lam = path.line.lambda_at(t);
                    if (!(lam > 0)) continue;
                    const LassoResult ref = lasso_reference(inst.A, inst.y, lam, oc);
                    const vector_t x = primal_part(seg.w_at(t));
                    worst = std::max({worst, (inst.A * (x - ref.x)).lpNorm<Eigen::Infinity>(),
                                      std::abs(x.lpNorm<1>() - ref.x.lpNorm<1>())});
                    ++compared;
                }
            }
            rows.push_back({"lasso_reduction", worst <= 1e-5, std::to_string(compared) + " lambdas, gap " + fmt(worst)});
        }
    }
    return rows;
}

inline int cmd_verify(const RunConfig& cfg)
{
    const ProblemInstance inst = load_instance(cfg);
    const auto rows = verify_instance(cfg, inst);
    bool all = true;
    io::json j_rows = io::json::array();
    for (const auto& row : rows) {
        std::cout << std::left << std::setw(34) << row.name << (row.passed ? "PASS  " : "FAIL  ") << row.detail << '\n';
        all = all && row.passed;
        j_rows.push_back({{"check", row.name}, {"passed", row.passed}, {"detail", row.detail}});
    }
    if (!cfg.out_path.empty()) {
        io::write_text(cfg.out_path, io::json{{"format", io::format_version}, {"passed", all}, {"checks", j_rows}}.dump(2) + "\n");
    }
    return all ? exit_ok : exit_numerical;
}

/// Runs one command, mapping library exceptions to exit codes.
inline int run(const RunConfig& cfg)
{
    try {
        if (cfg.command == "solve") return cmd_solve(cfg);
        if (cfg.command == "path") return cmd_path(cfg);
        if (cfg.command == "enumerate") return cmd_enumerate(cfg);
        if (cfg.command == "verify") return cmd_verify(cfg);
        throw input_error("unknown command '" + cfg.command + "'");
    } catch (const convergence_error& e) {
        std::cerr << "error: " << e.what() << " (achieved " << e.achieved() << ")\n";
        return exit_numerical;
    } catch (const sgmc_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_input;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: malformed input: " << e.what() << '\n';
        return exit_input;
    }
}

} // namespace sgmc::cli
