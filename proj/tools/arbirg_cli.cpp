#include "arbirg/config.hpp"
#include "arbirg/harness.hpp"
#include "arbirg/report.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

namespace fs = std::filesystem;
using namespace arbirg;

namespace {

int cmd_run(const std::string& config_path, const std::string& out_override, std::size_t workers, bool svg)
{
    auto config = load_config(config_path);
    if (workers > 0) config.workers = workers;
    if (svg) config.svg = true;
    const fs::path out = out_override.empty() ? fs::path(config.output_dir) : fs::path(out_override);
    const auto problem = build_problem(config.problem);
    std::cout << "problem " << problem.id << " (n = " << problem.dim() << ", d = " << problem.num_blocks() << ")\n";
    const auto result = run_experiment(config, problem);
    write_outputs(config, result, out);

    std::size_t aborted = 0;
    for (const auto& run : result.runs) aborted += run.trace.aborted ? 1 : 0;
    for (const auto& c : result.curves) {
        if (c.points.empty()) {
            std::cout << c.cell << " " << c.solver << ": no records\n";
            continue;
        }
        const auto& last = c.points.back();
        std::cout << c.cell << " " << c.solver << ": evals " << last.evals << ", mean f " << format_value(last.mean[1])
                  << ", mean gap " << format_value(last.mean[2]) << ", mean residual " << format_value(last.mean[3])
                  << "\n";
    }
    std::cout << result.runs.size() << " runs written to " << out.string() << ", " << aborted << " aborted\n";
    return aborted == 0 ? 0 : 1;
}

int cmd_compare(const std::string& dir, bool svg)
{
    const auto curves = read_aggregate_csv(fs::path(dir) / "aggregate.csv");
    const auto rows = compare_report(curves);
    if (rows.empty()) throw std::invalid_argument("compare: need an sr curve and at least one arbirg curve per cell");
    print_compare(std::cout, rows);
    if (svg) {
        for (const auto& row : rows) {
            std::vector<const Curve*> members;
            for (const auto& c : curves) {
                if (c.cell == row.cell) members.push_back(&c);
            }
            const auto column = *members.front()->column(row.metric);
            std::ofstream out(fs::path(dir) / (row.cell + "_compare.svg"));
            out << svg_chart(row.cell, "mean " + row.metric, members, column);
        }
    }
    return 0;
}

int cmd_bounds(const std::string& dir, const std::string& config_path)
{
    const auto config = load_config(config_path);
    const auto problem = build_problem(config.problem);
    const auto curves = read_aggregate_csv(fs::path(dir) / "aggregate.csv");
    const auto rows = bound_check_report(curves, problem, config);
    print_bounds(std::cout, rows);
    std::size_t violations = 0;
    for (const auto& r : rows) violations += (r.subopt_violation ? 1 : 0) + (r.gap_violation ? 1 : 0);
    std::cout << rows.size() << " rows, " << violations << " violations\n";
    return violations == 0 ? 0 : 1;
}

int cmd_diag(std::uint64_t seed, std::size_t draws)
{
    bool ok = true;
    for (const auto& d : run_diagnostics(seed, draws)) {
        std::cout << (d.passed ? "PASS " : "FAIL ") << d.name << " (" << d.detail << ")\n";
        ok = ok && d.passed;
    }
    return ok ? 0 : 1;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"aRB-IRG experiments"};
    app.require_subcommand(1);

    std::string config_path, out_dir, dir;
    std::size_t workers = 0;
    bool svg = false;
    std::uint64_t seed = 2024;
    std::size_t draws = 100000;

    auto* run = app.add_subcommand("run", "run a replicated experiment");
    run->add_option("config", config_path, "experiment config file")->required()->check(CLI::ExistingFile);
    run->add_option("--out", out_dir, "output directory (overrides output_dir)");
    run->add_option("--workers", workers, "worker threads (overrides workers)");
    run->add_flag("--svg", svg, "also write SVG charts");

    auto* compare = app.add_subcommand("compare", "compare aRB-IRG against SR from an output directory");
    compare->add_option("dir", dir, "output directory of a run")->required()->check(CLI::ExistingDirectory);
    compare->add_flag("--svg", svg, "write one comparison chart per cell");

    auto* bounds = app.add_subcommand("bounds", "check recorded means against the rate bounds");
    bounds->add_option("dir", dir, "output directory of a run")->required()->check(CLI::ExistingDirectory);
    bounds->add_option("config", config_path, "config the run was made with")->required()->check(CLI::ExistingFile);

    auto* diag = app.add_subcommand("diag", "run the diagnostic suites");
    diag->add_option("--seed", seed, "instance and sampling seed");
    diag->add_option("--draws", draws, "block draws per point");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) return cmd_run(config_path, out_dir, workers, svg);
        if (*compare) return cmd_compare(dir, svg);
        if (*bounds) return cmd_bounds(dir, config_path);
        if (*diag) return cmd_diag(seed, draws);
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 2;
    }
    return 0;
}
