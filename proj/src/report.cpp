#include "arbirg/report.hpp"

#include "arbirg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace arbirg {

namespace {

std::vector<std::string> split_csv(const std::string& line)
{
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (char ch : line) {
        if (ch == '"') {
            quoted = !quoted;
        } else if (ch == ',' && !quoted) {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

std::optional<double> parse_value(const std::string& text, const std::string& where)
{
    if (text == "NA" || text.empty()) return std::nullopt;
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != text.size()) throw std::invalid_argument(where + ": bad number '" + text + "'");
    return v;
}

bool has_column(const Curve& c, std::size_t column)
{
    return std::any_of(c.points.begin(), c.points.end(), [&](const CurvePoint& p) { return p.mean[column].has_value(); });
}

double log_floor(double v) { return std::log(std::max(v, 1e-300)); }

} // namespace

std::string format_value(std::optional<double> value)
{
    if (!value) return "NA";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", *value);
    return buf;
}

std::string run_csv_name(const RunResult& run)
{
    std::ostringstream name;
    name << run.cell << "__" << run.solver << "__rep" << std::setw(3) << std::setfill('0') << run.replication << ".csv";
    return name.str();
}

void write_run_csv(std::ostream& out, const RunResult& run)
{
    out << "solver,cell,replication,k,evals_full_map_equiv";
    for (const char* m : kMetricColumns) out << ',' << m;
    out << '\n';
    for (const auto& rec : run.trace.records) {
        out << run.solver << ',' << run.cell << ',' << run.replication << ',' << rec.k << ',' << format_value(rec.evals_full);
        for (const auto& v : metric_values(rec)) out << ',' << format_value(v);
        out << '\n';
    }
}

void write_aggregate_csv(std::ostream& out, const std::vector<Curve>& curves)
{
    out << "solver,cell,k,evals_full_map_equiv,runs";
    for (const char* m : kMetricColumns) out << ',' << m << "_mean," << m << "_stderr";
    out << '\n';
    for (const auto& c : curves) {
        for (const auto& p : c.points) {
            out << c.solver << ',' << c.cell << ',' << p.k << ',' << format_value(p.evals) << ',' << p.count;
            for (std::size_t m = 0; m < kMetricCount; ++m) {
                out << ',' << format_value(p.mean[m]) << ',' << format_value(p.stderr_[m]);
            }
            out << '\n';
        }
    }
}

std::vector<Curve> read_aggregate_csv(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot read " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument(path.string() + ": empty file");
    const auto header = split_csv(line);
    auto index_of = [&](const std::string& name) {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw std::invalid_argument(path.string() + ": missing column " + name);
        return static_cast<std::size_t>(it - header.begin());
    };
    const auto i_solver = index_of("solver");
    const auto i_cell = index_of("cell");
    const auto i_k = index_of("k");
    const auto i_evals = index_of("evals_full_map_equiv");
    const auto i_runs = index_of("runs");
    std::array<std::size_t, kMetricCount> i_mean{}, i_se{};
    for (std::size_t m = 0; m < kMetricCount; ++m) {
        i_mean[m] = index_of(std::string(kMetricColumns[m]) + "_mean");
        i_se[m] = index_of(std::string(kMetricColumns[m]) + "_stderr");
    }

    std::vector<Curve> curves;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = split_csv(line);
        const std::string where = path.string() + ":" + std::to_string(line_no);
        if (f.size() != header.size()) throw std::invalid_argument(where + ": wrong number of fields");
        if (curves.empty() || curves.back().solver != f[i_solver] || curves.back().cell != f[i_cell]) {
            curves.push_back(Curve{f[i_solver], f[i_cell], {}});
        }
        CurvePoint p;
        p.k = static_cast<std::uint64_t>(parse_value(f[i_k], where).value_or(0.0));
        p.evals = parse_value(f[i_evals], where).value_or(0.0);
        p.count = static_cast<std::size_t>(parse_value(f[i_runs], where).value_or(0.0));
        for (std::size_t m = 0; m < kMetricCount; ++m) {
            p.mean[m] = parse_value(f[i_mean[m]], where);
            p.stderr_[m] = parse_value(f[i_se[m]], where);
        }
        curves.back().points.push_back(p);
    }
    return curves;
}

std::vector<std::optional<double>> resample(const Curve& curve, std::size_t column, const std::vector<double>& grid)
{
    std::vector<std::pair<double, double>> pts;
    for (const auto& p : curve.points) {
        if (p.mean[column]) pts.emplace_back(p.evals, *p.mean[column]);
    }
    std::vector<std::optional<double>> out;
    out.reserve(grid.size());
    for (double g : grid) {
        if (pts.empty() || g < pts.front().first - 1e-9 || g > pts.back().first + 1e-9) {
            out.emplace_back();
            continue;
        }
        const auto it = std::lower_bound(pts.begin(), pts.end(), g,
                                         [](const std::pair<double, double>& a, double v) { return a.first < v; });
        if (it == pts.end()) {
            out.emplace_back(pts.back().second);
        } else if (it->first == g || it == pts.begin()) {
            out.emplace_back(it->second);
        } else {
            const auto prev = it - 1;
            const double w = (g - prev->first) / (it->first - prev->first);
            out.emplace_back((1.0 - w) * prev->second + w * it->second);
        }
    }
    return out;
}

double relative_oscillation(const Curve& curve, double trailing)
{
    const std::size_t col = 1; // f_value
    std::vector<std::pair<double, double>> pts;
    for (const auto& p : curve.points) {
        if (p.mean[col]) pts.emplace_back(p.evals, *p.mean[col]);
    }
    if (pts.empty()) throw std::invalid_argument("relative_oscillation: curve has no objective values");
    const double cut = (1.0 - trailing) * pts.back().first;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo, sum = 0.0;
    std::size_t n = 0;
    for (const auto& [e, v] : pts) {
        if (e < cut) continue;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        sum += v;
        ++n;
    }
    const double mean = sum / static_cast<double>(n);
    if (mean == 0.0) return hi == lo ? 0.0 : std::numeric_limits<double>::infinity();
    return (hi - lo) / std::abs(mean);
}

std::vector<CompareRow> compare_report(const std::vector<Curve>& curves)
{
    std::vector<CompareRow> rows;
    for (const auto& base : curves) {
        if (base.solver != "sr") continue;
        for (const auto& cur : curves) {
            if (cur.cell != base.cell || cur.solver == "sr") continue;
            const std::size_t gap_col = 2, res_col = 3, f_col = 1;
            const std::size_t col = has_column(cur, gap_col) && has_column(base, gap_col) ? gap_col : res_col;
            if (!has_column(cur, col) || !has_column(base, col)) {
                throw std::invalid_argument("compare: cell " + cur.cell + " has no infeasibility metric");
            }
            // the coarser grid, clipped to the range both curves cover
            const Curve& coarse = cur.points.size() <= base.points.size() ? cur : base;
            const double lo = std::max(cur.points.front().evals, base.points.front().evals);
            const double hi = std::min(cur.points.back().evals, base.points.back().evals);
            std::vector<double> grid;
            for (const auto& p : coarse.points) {
                if (p.evals >= lo - 1e-9 && p.evals <= hi + 1e-9) grid.push_back(p.evals);
            }
            if (grid.size() < 2) throw std::invalid_argument("compare: cell " + cur.cell + " curves do not overlap");
            const auto a = resample(cur, col, grid);
            const auto b = resample(base, col, grid);
            const auto fa = resample(cur, f_col, grid);
            const auto fb = resample(base, f_col, grid);

            CompareRow row;
            row.cell = cur.cell;
            row.solver = cur.solver;
            row.baseline = base.solver;
            row.metric = kMetricColumns[col];
            row.final_metric = a.back().value_or(NAN);
            row.final_metric_baseline = b.back().value_or(NAN);
            row.final_f = fa.back().value_or(NAN);
            row.final_f_baseline = fb.back().value_or(NAN);
            row.ratio = row.final_metric / row.final_metric_baseline;
            const double span = grid.back() - grid.front();
            for (std::size_t t = 1; t < grid.size(); ++t) {
                const double w = (grid[t] - grid[t - 1]) / span;
                row.area_log_metric += 0.5 * w * (log_floor(a[t].value_or(0)) + log_floor(a[t - 1].value_or(0)));
                row.area_log_metric_baseline += 0.5 * w * (log_floor(b[t].value_or(0)) + log_floor(b[t - 1].value_or(0)));
            }
            bool dominates = false;
            const double cut = 0.5 * grid.back();
            for (std::size_t t = 0; t < grid.size(); ++t) {
                if (grid[t] < cut) continue;
                if (!(a[t] && b[t] && *a[t] < *b[t])) {
                    dominates = false;
                    break;
                }
                dominates = true;
            }
            row.dominates = dominates;
            row.oscillation = relative_oscillation(cur);
            rows.push_back(row);
        }
    }
    return rows;
}

void print_compare(std::ostream& out, const std::vector<CompareRow>& rows)
{
    out << std::left << std::setw(16) << "cell" << std::setw(14) << "solver" << std::setw(18) << "metric"
        << std::right << std::setw(13) << "final" << std::setw(13) << "final(sr)" << std::setw(10) << "ratio"
        << std::setw(14) << "mean ln" << std::setw(14) << "mean ln(sr)" << std::setw(14) << "final f"
        << std::setw(14) << "final f(sr)" << std::setw(11) << "osc" << std::setw(11) << "dominates" << '\n';
    for (const auto& r : rows) {
        out << std::left << std::setw(16) << r.cell << std::setw(14) << r.solver << std::setw(18) << r.metric
            << std::right << std::setprecision(4) << std::setw(13) << r.final_metric << std::setw(13)
            << r.final_metric_baseline << std::setw(10) << r.ratio << std::setw(14) << r.area_log_metric << std::setw(14)
            << r.area_log_metric_baseline << std::setw(14) << r.final_f << std::setw(14) << r.final_f_baseline
            << std::setw(11) << r.oscillation << std::setw(11) << (r.dominates ? "yes" : "no") << '\n';
    }
}

std::vector<BoundRow> bound_check_report(const std::vector<Curve>& curves, const ProblemSpec& problem,
                                         const ExperimentConfig& config)
{
    if (config.arbirg.mode != ScheduleMode::BoundedX) {
        throw std::invalid_argument("bounds: the rate bounds need the bounded schedule mode");
    }
    const auto constants = bound_constants(problem);
    const double fstar = reference_value(problem);
    std::vector<BoundRow> rows;
    for (const auto& c : curves) {
        if (c.solver.rfind("arbirg_r", 0) != 0) continue;
        const double r = std::stod(c.solver.substr(8));
        const auto cell = std::find_if(config.cells.begin(), config.cells.end(),
                                       [&](const CellConfig& cc) { return cc.id == c.cell; });
        if (cell == config.cells.end()) throw std::invalid_argument("bounds: cell " + c.cell + " is not in the config");
        const Schedule s = cell_schedule(config, *cell, r);
        const auto threshold = bound_threshold(r);
        for (const auto& p : c.points) {
            if (p.k < threshold || !p.mean[1]) continue;
            const auto b = rate_bounds(constants, s, p.k);
            BoundRow row;
            row.cell = c.cell;
            row.solver = c.solver;
            row.r = r;
            row.N = p.k;
            row.subopt_mean = *p.mean[1] - fstar;
            row.subopt_stderr = p.stderr_[1].value_or(0.0);
            row.subopt_bound = b.subopt_bound;
            row.subopt_violation = row.subopt_mean - 3.0 * row.subopt_stderr > b.subopt_bound;
            row.gap_mean = p.mean[2];
            row.gap_stderr = p.stderr_[2];
            row.gap_bound = b.gap_bound;
            row.gap_violation = p.mean[2] && *p.mean[2] - 3.0 * p.stderr_[2].value_or(0.0) > b.gap_bound;
            rows.push_back(row);
        }
    }
    return rows;
}

void print_bounds(std::ostream& out, const std::vector<BoundRow>& rows)
{
    out << std::left << std::setw(16) << "cell" << std::setw(14) << "solver" << std::right << std::setw(10) << "N"
        << std::setw(13) << "subopt" << std::setw(11) << "se" << std::setw(13) << "bound" << std::setw(6) << "viol"
        << std::setw(13) << "gap" << std::setw(11) << "se" << std::setw(13) << "bound" << std::setw(6) << "viol" << '\n';
    for (const auto& r : rows) {
        out << std::left << std::setw(16) << r.cell << std::setw(14) << r.solver << std::right << std::setw(10) << r.N
            << std::setprecision(4) << std::setw(13) << r.subopt_mean << std::setw(11) << r.subopt_stderr
            << std::setw(13) << r.subopt_bound << std::setw(6) << (r.subopt_violation ? "YES" : "no") << std::setw(13)
            << r.gap_mean.value_or(NAN) << std::setw(11) << r.gap_stderr.value_or(NAN)
            << std::setw(13) << r.gap_bound << std::setw(6) << (r.gap_violation ? "YES" : "no") << '\n';
    }
}

std::string svg_chart(const std::string& title, const std::string& y_label, const std::vector<const Curve*>& curves,
                      std::size_t column)
{
    const double W = 720, H = 440, left = 80, right = 170, top = 40, bottom = 50;
    const double pw = W - left - right, ph = H - top - bottom;
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
    for (const auto* c : curves) {
        for (const auto& p : c->points) {
            if (!p.mean[column] || !(*p.mean[column] > 0.0)) continue;
            xmin = std::min(xmin, p.evals);
            xmax = std::max(xmax, p.evals);
            ymin = std::min(ymin, std::log10(*p.mean[column]));
            ymax = std::max(ymax, std::log10(*p.mean[column]));
        }
    }
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << left << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">" << title << "</text>\n";
    if (!std::isfinite(xmin)) {
        svg << "<text x=\"" << left << "\" y=\"" << top + ph / 2 << "\" font-family=\"sans-serif\">no positive data</text>\n";
        svg << "</svg>\n";
        return svg.str();
    }
    const double lo = std::floor(ymin), hi = std::max(std::ceil(ymax), lo + 1.0);
    if (xmax == xmin) xmax = xmin + 1.0;
    auto X = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
    auto Y = [&](double ly) { return top + (hi - ly) / (hi - lo) * ph; };
    svg << std::setprecision(6);
    svg << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
        << "\" fill=\"none\" stroke=\"#444\"/>\n";
    for (double d = lo; d <= hi + 1e-9; d += 1.0) {
        svg << "<line x1=\"" << left << "\" x2=\"" << left + pw << "\" y1=\"" << Y(d) << "\" y2=\"" << Y(d)
            << "\" stroke=\"#ddd\"/>\n";
        svg << "<text x=\"" << left - 6 << "\" y=\"" << Y(d) + 4
            << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">1e" << d << "</text>\n";
    }
    for (int t = 0; t <= 4; ++t) {
        const double x = xmin + (xmax - xmin) * t / 4.0;
        svg << "<text x=\"" << X(x) << "\" y=\"" << top + ph + 16
            << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">" << x << "</text>\n";
    }
    svg << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 10
        << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">full-map evaluations</text>\n";
    svg << "<text transform=\"translate(18," << top + ph / 2
        << ") rotate(-90)\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">" << y_label << "</text>\n";
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
    for (std::size_t i = 0; i < curves.size(); ++i) {
        const char* color = colors[i % 6];
        svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (const auto& p : curves[i]->points) {
            if (!p.mean[column] || !(*p.mean[column] > 0.0)) continue;
            svg << X(p.evals) << ',' << Y(std::log10(*p.mean[column])) << ' ';
        }
        svg << "\"/>\n";
        const double ly = top + 16 + 18.0 * static_cast<double>(i);
        svg << "<line x1=\"" << left + pw + 12 << "\" x2=\"" << left + pw + 32 << "\" y1=\"" << ly << "\" y2=\"" << ly
            << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        svg << "<text x=\"" << left + pw + 38 << "\" y=\"" << ly + 4 << "\" font-family=\"sans-serif\" font-size=\"11\">"
            << curves[i]->solver << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

} // namespace arbirg
