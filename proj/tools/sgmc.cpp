#include <CLI11.hpp>
#include "sgmc_commands.hpp"

int main(int argc, char** argv)
{
    using sgmc::cli::RunConfig;
    CLI::App app{"Piecewise-linear solution paths and linear zones of the sGMC sparse regression model"};
    app.require_subcommand(1);
    RunConfig cfg;

    const auto common = [&](CLI::App* sub) {
        sub->add_option("--instance", cfg.instance_path, "Instance JSON, or CSV matrix A (then --y and --lambda are required)")
            ->required();
        sub->add_option("--out", cfg.out_path, "Output JSON file (default: stdout)");
        sub->add_option("--y", cfg.y_list, "Observation y as a comma separated list");
        sub->add_option("--r", cfg.r_list, "Dual observation r as a comma separated list");
        sub->add_option("--lambda", cfg.lambda, "Regularization weight");
        sub->add_option("--rho", cfg.rho, "Nonconvexity parameter in [0, 1)");
        sub->add_option("--tol", cfg.tol, "Oracle tolerance")->capture_default_str();
        sub->add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
    };
    const auto line_opts = [&](CLI::App* sub) {
        sub->add_option("--delta-b", cfg.delta_b, "Velocity of b (m or 2m comma separated entries)");
        sub->add_option("--delta-lambda", cfg.delta_lambda, "Velocity of lambda (default -1 without --delta-b, else 0)");
        sub->add_option("--t-start", cfg.t_start, "Start of the sweep")->capture_default_str();
        sub->add_option("--t-end", cfg.t_end, "End of the sweep");
        sub->add_option("--max-segments", cfg.max_segments, "Segment budget")->capture_default_str();
        sub->add_flag("--from-lambda-max", cfg.from_lambda_max, "Start lambda at max_i |c_i^T b|");
        sub->add_option("--init", cfg.init, "Initial indicator: auto, zero or oracle")->capture_default_str();
    };

    auto* solve = app.add_subcommand("solve", "Extended solution by the iterative oracle");
    common(solve);

    auto* path = app.add_subcommand("path", "Solution path along a straight line in (b, lambda)");
    common(path);
    line_opts(path);
    path->add_option("--plot-csv", cfg.plot_csv_path, "Write sampled (t, lambda, w) rows for plotting");

    auto* enumerate = app.add_subcommand("enumerate", "Breadth-first discovery of linear zones");
    common(enumerate);
    enumerate->add_option("--max-nodes", cfg.max_nodes, "Zone budget")->capture_default_str();
    enumerate->add_option("--r-y", cfg.r_y, "Radius of the y-ball to cover")->capture_default_str();
    enumerate->add_option("--delta-lambda-min", cfg.delta_lambda_min, "lambda of the coverage set")->capture_default_str();
    enumerate->add_option("--n-cov", cfg.n_cov, "Number of coverage samples")->capture_default_str();
    enumerate->add_option("--max-segments", cfg.max_segments, "Segment budget per ray")->capture_default_str();

    auto* verify = app.add_subcommand("verify", "Cross-check oracles, candidate map and path on one instance");
    common(verify);
    verify->add_option("--segments", cfg.segments_path, "Path JSON to re-check instead of a fresh lambda-descent");
    verify->add_option("--max-segments", cfg.max_segments, "Segment budget")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : sgmc::cli::exit_input;
    }
    cfg.command = app.get_subcommands().front()->get_name();
    return sgmc::cli::run(cfg);
}
