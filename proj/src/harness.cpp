#include "arbirg/harness.hpp"

#include "arbirg/metrics.hpp"
#include "arbirg/problems.hpp"
#include "arbirg/report.hpp"
#include "arbirg/solvers.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace arbirg {

namespace {

// Reads typed values out of the [problem] section and rejects leftovers.
class ParamReader {
public:
    explicit ParamReader(const ProblemConfig& c) : c_(c) {}

    double number(const std::string& key, double fallback)
    {
        const auto* v = find(key);
        if (!v) return fallback;
        std::size_t used = 0;
        double out = 0.0;
        try {
            out = std::stod(*v, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != v->size()) throw std::invalid_argument("[problem] " + key + ": expected a number, got '" + *v + "'");
        return out;
    }

    std::uint64_t integer(const std::string& key, std::uint64_t fallback)
    {
        const auto* v = find(key);
        if (!v) return fallback;
        std::size_t used = 0;
        std::uint64_t out = 0;
        try {
            out = std::stoull(*v, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != v->size() || v->find('-') != std::string::npos) {
            throw std::invalid_argument("[problem] " + key + ": expected a nonnegative integer, got '" + *v + "'");
        }
        return out;
    }

    void finish() const
    {
        for (const auto& [key, value] : c_.params) {
            if (!used_.count(key)) {
                throw std::invalid_argument("[problem] unknown key '" + key + "' for type " + c_.type);
            }
        }
    }

private:
    const std::string* find(const std::string& key)
    {
        used_.insert(key);
        const auto it = c_.params.find(key);
        return it == c_.params.end() ? nullptr : &it->second;
    }

    const ProblemConfig& c_;
    std::set<std::string> used_;
};

struct Job {
    std::size_t cell;
    std::optional<double> r; // absent for SR
    std::size_t replication;
};

RunResult execute(const ExperimentConfig& config, const ProblemSpec& problem, const Job& job,
                  const std::vector<std::uint64_t>& ticks)
{
    const auto& cell = config.cells[job.cell];
    RunResult out;
    out.cell = cell.id;
    out.replication = job.replication;
    out.seed = replication_seed(config.master_seed, cell.id, job.replication);
    out.solver = job.r ? arbirg_label(*job.r) : "sr";

    RunOptions opts;
    opts.seed = out.seed;
    opts.budget.max_full_evals = config.full_evals;
    opts.budget.max_wall_seconds = config.wall_seconds;
    opts.metrics.gap = problem.bounded() ? config.gap : std::nullopt;
    opts.metrics.residual = config.residual;
    opts.metrics.record_wall_time = config.record_wall_time;
    try {
        if (job.r) {
            const auto d = static_cast<std::uint64_t>(problem.num_blocks());
            for (auto t : ticks) opts.checkpoints.push_back(t * d);
            out.trace = run_arbirg(problem, cell_schedule(config, cell, *job.r), opts);
        } else {
            opts.checkpoints = ticks;
            SrOptions sr = config.sr.options;
            sr.eta0 = cell.eta0;
            out.trace = run_sr(problem, sr, opts);
        }
    } catch (const std::exception& err) {
        out.trace = RunTrace{};
        out.trace.aborted = true;
        out.trace.diagnostic = err.what();
    }
    out.trace.set_meta("cell", cell.id);
    out.trace.set_meta("replication", std::to_string(job.replication));
    return out;
}

double sample_stderr(double sum, double sum_sq, std::size_t n)
{
    if (n < 2) return 0.0;
    const double m = sum / static_cast<double>(n);
    const double var = std::max(0.0, (sum_sq - static_cast<double>(n) * m * m) / static_cast<double>(n - 1));
    return std::sqrt(var / static_cast<double>(n));
}

} // namespace

ProblemSpec build_problem(const ProblemConfig& config)
{
    ParamReader p(config);
    ProblemSpec prob;
    if (config.type == "cournot_benchmark") {
        prob = benchmark_cournot_instance(p.integer("instance_seed", 2024));
    } else if (config.type == "cournot") {
        const auto d = p.integer("firms", 4);
        const auto J = p.integer("nodes", 3);
        const double lo = p.number("cost_min", 10.0);
        const double hi = p.number("cost_max", 50.0);
        if (!(lo <= hi)) throw std::invalid_argument("[problem] cost_min must not exceed cost_max");
        CournotParams cp;
        cp.firms = d;
        cp.nodes = J;
        cp.alpha = Vector::Constant(static_cast<Index>(J), p.number("alpha", 50.0));
        cp.beta = Vector::Constant(static_cast<Index>(J), p.number("beta", 0.05));
        cp.caps = Matrix::Constant(static_cast<Index>(d), static_cast<Index>(J), p.number("cap", 120.0));
        cp.sigma = p.number("sigma", 1.01);
        Rng rng(p.integer("instance_seed", 2024));
        std::uniform_real_distribution<double> unif(lo, hi);
        cp.cost_slopes.resize(static_cast<Index>(d), static_cast<Index>(J));
        for (Index i = 0; i < cp.cost_slopes.rows(); ++i)
            for (Index j = 0; j < cp.cost_slopes.cols(); ++j) cp.cost_slopes(i, j) = unif(rng);
        prob = build_cournot(cp);
    } else if (config.type == "l1_affine_box") {
        SyntheticL1Params sp;
        sp.n = static_cast<Index>(p.integer("n", 8));
        sp.m = static_cast<Index>(p.integer("m", 3));
        sp.blocks = p.integer("blocks", 4);
        sp.box = p.number("box", 1.0);
        sp.target_scale = p.number("target_scale", 0.5);
        sp.seed = p.integer("instance_seed", 7);
        prob = synthetic_l1_instance(sp);
    } else if (config.type == "strongly_convex_unbounded") {
        SyntheticUnboundedParams sp;
        sp.n = static_cast<Index>(p.integer("n", 6));
        sp.blocks = p.integer("blocks", 3);
        sp.coupling = p.number("coupling", 0.5);
        sp.seed = p.integer("instance_seed", 3);
        prob = synthetic_unbounded_instance(sp);
    } else {
        throw std::invalid_argument("[problem] unknown type '" + config.type +
                                    "' (cournot_benchmark, cournot, l1_affine_box, strongly_convex_unbounded)");
    }
    p.finish();
    return prob;
}

std::uint64_t replication_seed(std::uint64_t master, const std::string& cell, std::size_t replication)
{
    return derive_seed(master, hash_string(cell), replication);
}

std::array<std::optional<double>, kMetricCount> metric_values(const TraceRecord& rec)
{
    return {rec.wall_ms, rec.f_value, rec.gap_estimate, rec.natural_residual, rec.dist_to_solution};
}

std::optional<std::size_t> Curve::column(const std::string& metric) const
{
    for (std::size_t c = 0; c < kMetricCount; ++c) {
        if (metric == kMetricColumns[c]) return c;
    }
    return std::nullopt;
}

ExperimentResult run_experiment(const ExperimentConfig& config, const ProblemSpec& problem)
{
    validate(config);
    problem.validate();
    const auto ticks = checkpoints(config.cadence, static_cast<std::uint64_t>(std::ceil(config.full_evals)));

    std::vector<Job> jobs;
    for (std::size_t c = 0; c < config.cells.size(); ++c) {
        if (config.arbirg.enabled) {
            for (double r : config.arbirg.r) {
                for (std::size_t j = 0; j < config.replications; ++j) jobs.push_back({c, r, j});
            }
        }
        if (config.sr.enabled) {
            for (std::size_t j = 0; j < config.replications; ++j) jobs.push_back({c, std::nullopt, j});
        }
    }

    ExperimentResult result;
    result.runs.resize(jobs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t t = next++; t < jobs.size(); t = next++) {
            result.runs[t] = execute(config, problem, jobs[t], ticks);
        }
    };
    const std::size_t n_threads = std::min(config.workers, jobs.size());
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    result.curves = aggregate(result.runs);
    return result;
}

std::vector<Curve> aggregate(const std::vector<RunResult>& runs)
{
    std::vector<Curve> curves;
    std::map<std::pair<std::string, std::string>, std::vector<const RunResult*>> groups;
    for (const auto& run : runs) {
        auto& g = groups[{run.solver, run.cell}];
        if (g.empty()) curves.push_back(Curve{run.solver, run.cell, {}});
        g.push_back(&run);
    }
    for (auto& curve : curves) {
        const auto& members = groups[{curve.solver, curve.cell}];
        std::size_t length = 0;
        for (const auto* m : members) length = std::max(length, m->trace.records.size());
        for (std::size_t t = 0; t < length; ++t) {
            CurvePoint pt;
            std::array<double, kMetricCount> sum{}, sum_sq{};
            std::array<std::size_t, kMetricCount> n{};
            for (const auto* m : members) {
                if (t >= m->trace.records.size()) continue;
                const auto& rec = m->trace.records[t];
                if (pt.count == 0) {
                    pt.k = rec.k;
                    pt.evals = rec.evals_full;
                }
                ++pt.count;
                const auto values = metric_values(rec);
                for (std::size_t c = 0; c < kMetricCount; ++c) {
                    if (!values[c]) continue;
                    sum[c] += *values[c];
                    sum_sq[c] += *values[c] * *values[c];
                    ++n[c];
                }
            }
            for (std::size_t c = 0; c < kMetricCount; ++c) {
                if (n[c] == 0) continue;
                pt.mean[c] = sum[c] / static_cast<double>(n[c]);
                pt.stderr_[c] = sample_stderr(sum[c], sum_sq[c], n[c]);
            }
            curve.points.push_back(pt);
        }
    }
    return curves;
}

void write_outputs(const ExperimentConfig& config, const ExperimentResult& result, const std::filesystem::path& dir)
{
    namespace fs = std::filesystem;
    fs::create_directories(dir / "runs");
    auto open = [](const fs::path& path) {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + path.string());
        return out;
    };
    for (const auto& run : result.runs) {
        auto out = open(dir / "runs" / run_csv_name(run));
        write_run_csv(out, run);
    }
    {
        auto out = open(dir / "aggregate.csv");
        write_aggregate_csv(out, result.curves);
    }
    {
        auto out = open(dir / "aborts.csv");
        out << "solver,cell,replication,diagnostic\n";
        for (const auto& run : result.runs) {
            if (!run.trace.aborted) continue;
            std::string diag = run.trace.diagnostic;
            for (auto& ch : diag) {
                if (ch == '"') ch = '\'';
                if (ch == '\n') ch = ' ';
            }
            out << run.solver << ',' << run.cell << ',' << run.replication << ",\"" << diag << "\"\n";
        }
    }
    {
        auto out = open(dir / "manifest.txt");
        out << "name = " << config.name << "\n";
        out << "replications = " << config.replications << "\n";
        out << "master_seed = " << config.master_seed << "\n";
        out << "full_evals = " << format_value(config.full_evals) << "\n";
        out << "seed_rule = derive_seed(master_seed, fnv1a(cell), replication)\n";
        for (const auto& run : result.runs) {
            out << "\n[run " << run_csv_name(run) << "]\n";
            out << "seed = " << run.seed << "\n";
            out << "aborted = " << (run.trace.aborted ? "true" : "false") << "\n";
            for (const auto& [key, value] : run.trace.metadata) out << key << " = " << value << "\n";
        }
    }
    if (config.svg) {
        std::vector<std::string> cells;
        for (const auto& c : result.curves) {
            if (std::find(cells.begin(), cells.end(), c.cell) == cells.end()) cells.push_back(c.cell);
        }
        for (const auto& cell : cells) {
            std::vector<const Curve*> members;
            for (const auto& c : result.curves) {
                if (c.cell == cell) members.push_back(&c);
            }
            for (const char* metric : {"gap_estimate", "f_value", "natural_residual"}) {
                const auto column = members.front()->column(metric);
                bool any = false;
                for (const auto* m : members) {
                    for (const auto& pt : m->points) any = any || pt.mean[*column].has_value();
                }
                if (!any) continue;
                auto out = open(dir / (cell + "_" + metric + ".svg"));
                out << svg_chart(config.name + " / " + cell, std::string("mean ") + metric, members, *column);
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Diagnostics
// ---------------------------------------------------------------------------

std::vector<DiagnosticResult> run_diagnostics(std::uint64_t seed, std::size_t draws)
{
    std::vector<DiagnosticResult> out;

    {
        const auto prob = benchmark_cournot_instance(seed);
        const double pm = prob.structure->p_min();
        const double cap_F = (1.0 / pm - 1.0) * std::pow(*prob.constants.C_F, 2);
        const double cap_f = (1.0 / pm - 1.0) * std::pow(*prob.constants.C_f, 2);
        Rng rng(derive_seed(seed, 12));
        bool ok = true;
        double worst_z = 0.0;
        for (int t = 0; t < 5; ++t) {
            const Vector x = prob.sample_feasible(rng);
            const auto m = rb_error_moments(prob, x, draws, rng);
            const double zF = m.se_Delta > 0 ? m.mean_Delta.norm() / m.se_Delta : 0.0;
            const double zf = m.se_delta > 0 ? m.mean_delta.norm() / m.se_delta : 0.0;
            worst_z = std::max({worst_z, zF, zf});
            ok = ok && zF <= 3.0 && zf <= 3.0 && m.msq_Delta <= cap_F && m.msq_delta <= cap_f;
        }
        std::ostringstream detail;
        detail << "5 points, " << draws << " draws, worst |mean|/se = " << worst_z;
        out.push_back({"block sampling error moments", ok, detail.str()});
    }

    {
        bool ok = true;
        std::size_t checked = 0;
        for (int a = 0; a <= 9; ++a) {
            const double alpha = 0.1 * a;
            const auto threshold = harmonic_threshold(alpha);
            for (std::uint64_t N : {threshold, std::uint64_t{100}, std::uint64_t{1000}, std::uint64_t{10000}}) {
                if (N < threshold) continue;
                ok = ok && harmonic_bounds_check(alpha, N).ok;
                ++checked;
            }
        }
        out.push_back({"harmonic sum bounds", ok, std::to_string(checked) + " (alpha, N) pairs"});
    }

    {
        // F(x) = x - 1 on R, f = x^2 / 2: x*_eta = 1 / (1 + eta)
        auto st = std::make_shared<const BlockStructure>(BlockStructure::uniform(1, 1));
        const auto prob = build_affine_quadratic(Matrix::Identity(1, 1), Vector::Constant(1, -1.0), Vector::Zero(1), st,
                                                 {SetDescriptor::whole_space(1)});
        std::vector<Vector> path;
        double cbar = 0.0;
        for (int k = 0; k <= 200; ++k) {
            const double eta = std::pow(k + 1.0, -0.3);
            path.push_back(tikhonov_point(prob, eta, 1e-12, 1000, path.empty() ? std::nullopt : std::optional(path.back())));
            cbar = std::max(cbar, prob.subgradient(path.back()).norm());
        }
        bool ok = true;
        for (int k = 1; k <= 200; ++k) {
            const double prev_over_curr = std::pow(static_cast<double>(k), -0.3) / std::pow(k + 1.0, -0.3);
            const double bound = cbar / *prob.constants.mu_f * std::abs(1.0 - prev_over_curr);
            ok = ok && (path[k] - path[k - 1]).norm() <= bound + 1e-10;
        }
        out.push_back({"Tikhonov successive differences", ok, "1-D instance, eta_k = (k+1)^-0.3, k <= 200"});
    }
    return out;
}

} // namespace arbirg
