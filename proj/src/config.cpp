#include "arbirg/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace arbirg {

namespace {

std::string trim(const std::string& s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

struct Entry {
    std::string value;
    int line;
};

std::string where(int line) { return "config line " + std::to_string(line) + ": "; }

double to_double(const Entry& e)
{
    double v = 0.0;
    const char* begin = e.value.data();
    const char* end = begin + e.value.size();
    const auto res = std::from_chars(begin, end, v);
    if (res.ec != std::errc() || res.ptr != end) throw std::invalid_argument(where(e.line) + "expected a number, got '" + e.value + "'");
    return v;
}

std::uint64_t to_uint(const Entry& e)
{
    std::uint64_t v = 0;
    const char* begin = e.value.data();
    const char* end = begin + e.value.size();
    const auto res = std::from_chars(begin, end, v);
    if (res.ec != std::errc() || res.ptr != end) {
        throw std::invalid_argument(where(e.line) + "expected a nonnegative integer, got '" + e.value + "'");
    }
    return v;
}

bool to_bool(const Entry& e)
{
    if (e.value == "true" || e.value == "yes" || e.value == "1") return true;
    if (e.value == "false" || e.value == "no" || e.value == "0") return false;
    throw std::invalid_argument(where(e.line) + "expected true or false, got '" + e.value + "'");
}

std::vector<double> to_list(const Entry& e)
{
    std::vector<double> out;
    std::stringstream in(e.value);
    std::string item;
    while (std::getline(in, item, ',')) out.push_back(to_double({trim(item), e.line}));
    if (out.empty()) throw std::invalid_argument(where(e.line) + "empty list");
    return out;
}

template <class Fn>
void wrap(const Entry& e, Fn&& fn)
{
    try {
        fn();
    } catch (const std::invalid_argument& err) {
        const std::string msg = err.what();
        if (msg.rfind("config line", 0) == 0) throw;
        throw std::invalid_argument(where(e.line) + msg);
    }
}

using Section = std::vector<std::pair<std::string, Entry>>;

void apply_experiment(ExperimentConfig& c, const Section& sec)
{
    for (const auto& [key, e] : sec) {
        if (key == "name") c.name = e.value;
        else if (key == "replications") c.replications = to_uint(e);
        else if (key == "master_seed") c.master_seed = to_uint(e);
        else if (key == "workers") c.workers = to_uint(e);
        else if (key == "output_dir") c.output_dir = e.value;
        else if (key == "record_wall_time") c.record_wall_time = to_bool(e);
        else if (key == "svg") c.svg = to_bool(e);
        else throw std::invalid_argument(where(e.line) + "unknown key '" + key + "' in [experiment]");
    }
}

void apply_problem(ExperimentConfig& c, const Section& sec)
{
    for (const auto& [key, e] : sec) {
        if (key == "type") c.problem.type = e.value;
        else c.problem.params[key] = e.value;
    }
}

void apply_budget(ExperimentConfig& c, const Section& sec)
{
    for (const auto& [key, e] : sec) {
        if (key == "full_evals") c.full_evals = to_double(e);
        else if (key == "wall_seconds") c.wall_seconds = to_double(e);
        else throw std::invalid_argument(where(e.line) + "unknown key '" + key + "' in [budget]");
    }
}

void apply_cadence(ExperimentConfig& c, const Section& sec)
{
    for (const auto& [key, e] : sec) {
        if (key == "spacing") wrap(e, [&] { c.cadence.spacing = parse_spacing(e.value); });
        else if (key == "points") c.cadence.points = to_uint(e);
        else if (key == "interval") c.cadence.interval = to_uint(e);
        else throw std::invalid_argument(where(e.line) + "unknown key '" + key + "' in [cadence]");
    }
}

void apply_metrics(ExperimentConfig& c, const Section& sec)
{
    GapEstimatorConfig g = c.gap.value_or(GapEstimatorConfig{});
    bool enabled = c.gap.has_value();
    for (const auto& [key, e] : sec) {
        if (key == "gap") enabled = to_bool(e);
        else if (key == "residual") c.residual = to_bool(e);
        else if (key == "gap_samples") g.n_samples = to_uint(e);
        else if (key == "gap_restarts") g.n_restarts = to_uint(e);
        else if (key == "gap_ascent_iters") g.ascent_iters = to_uint(e);
        else if (key == "gap_ascent_step") g.ascent_step = to_double(e);
        else if (key == "gap_seed") g.seed = to_uint(e);
        else throw std::invalid_argument(where(e.line) + "unknown key '" + key + "' in [metrics]");
    }
    c.gap = enabled ? std::optional<GapEstimatorConfig>(g) : std::nullopt;
}

void apply_cell(ExperimentConfig& c, const Section& sec)
{
    CellConfig cell;
    bool has_gamma = false, has_eta = false;
    for (const auto& [key, e] : sec) {
        if (key == "id") cell.id = e.value;
        else if (key == "gamma0") { cell.gamma0 = to_double(e); has_gamma = true; }
        else if (key == "eta0") { cell.eta0 = to_double(e); has_eta = true; }
        else throw std::invalid_argument(where(e.line) + "unknown key '" + key + "' in [cell]");
    }
    if (!has_gamma || !has_eta) throw std::invalid_argument("every [cell] needs gamma0 and eta0");
    if (cell.id.empty()) {
        std::ostringstream id;
        id << "g" << cell.gamma0 << "_e" << cell.eta0;
        cell.id = id.str();
    }
    c.cells.push_back(cell);
}

void apply_arbirg(ExperimentConfig& c, const Section& sec)
{
    for (const auto& [key, e] : sec) {
        if (key == "enabled") c.arbirg.enabled = to_bool(e);
        else if (key == "r") c.arbirg.r = to_list(e);
        else if (key == "a") c.arbirg.a = to_double(e);
        else if (key == "b") c.arbirg.b = to_double(e);
        else if (key == "mode") wrap(e, [&] { c.arbirg.mode = parse_schedule_mode(e.value); });
        else throw std::invalid_argument(where(e.line) + "unknown key '" + key + "' in [arbirg]");
    }
}

void apply_sr(ExperimentConfig& c, const Section& sec)
{
    auto& o = c.sr.options;
    for (const auto& [key, e] : sec) {
        if (key == "enabled") c.sr.enabled = to_bool(e);
        else if (key == "rho") o.rho = to_double(e);
        else if (key == "outer_steps") o.outer_steps = to_uint(e);
        else if (key == "regularizer") wrap(e, [&] { o.regularizer = parse_regularizer(e.value); });
        else if (key == "inner_tol_factor") o.inner_tol_factor = to_double(e);
        else if (key == "inner_tol_floor") o.inner_tol_floor = to_double(e);
        else if (key == "inner_max_iters") o.inner_max_iters = to_uint(e);
        else throw std::invalid_argument(where(e.line) + "unknown key '" + key + "' in [sr]");
    }
}

} // namespace

ExperimentConfig parse_config(const std::string& text)
{
    ExperimentConfig config;
    std::vector<std::pair<std::string, Section>> sections;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw std::invalid_argument(where(line_no) + "malformed section header");
            sections.emplace_back(trim(line.substr(1, line.size() - 2)), Section{});
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw std::invalid_argument(where(line_no) + "expected key = value");
        if (sections.empty()) throw std::invalid_argument(where(line_no) + "key outside of a section");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw std::invalid_argument(where(line_no) + "empty key");
        for (const auto& [k, e] : sections.back().second) {
            if (k == key) throw std::invalid_argument(where(line_no) + "duplicate key '" + key + "'");
        }
        sections.back().second.emplace_back(key, Entry{value, line_no});
    }

    for (const auto& [name, sec] : sections) {
        if (name == "experiment") apply_experiment(config, sec);
        else if (name == "problem") apply_problem(config, sec);
        else if (name == "budget") apply_budget(config, sec);
        else if (name == "cadence") apply_cadence(config, sec);
        else if (name == "metrics") apply_metrics(config, sec);
        else if (name == "cell") apply_cell(config, sec);
        else if (name == "arbirg") apply_arbirg(config, sec);
        else if (name == "sr") apply_sr(config, sec);
        else throw std::invalid_argument("unknown config section [" + name + "]");
    }
    validate(config);
    return config;
}

ExperimentConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot read config file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

void validate(const ExperimentConfig& c)
{
    std::vector<std::string> problems;
    if (c.replications < 1) problems.emplace_back("replications must be at least 1");
    if (c.workers < 1) problems.emplace_back("workers must be at least 1");
    if (c.problem.type.empty()) problems.emplace_back("[problem] type is missing");
    if (!(c.full_evals > 0.0)) problems.emplace_back("[budget] full_evals must be positive");
    if (c.wall_seconds && !(*c.wall_seconds > 0.0)) problems.emplace_back("[budget] wall_seconds must be positive");
    if (c.cadence.points < 1) problems.emplace_back("[cadence] points must be at least 1");
    if (c.cadence.interval < 1) problems.emplace_back("[cadence] interval must be at least 1");
    if (c.cells.empty()) problems.emplace_back("at least one [cell] is required");
    if (!c.arbirg.enabled && !c.sr.enabled) problems.emplace_back("no solver enabled");
    if (c.gap) {
        try {
            validate(*c.gap);
        } catch (const std::invalid_argument& e) {
            problems.emplace_back(e.what());
        }
    }
    for (std::size_t i = 0; i < c.cells.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            if (c.cells[i].id == c.cells[j].id) problems.push_back("duplicate cell id '" + c.cells[i].id + "'");
        }
        if (c.cells[i].id.find_first_of(",\n\"/") != std::string::npos) {
            problems.push_back("cell id '" + c.cells[i].id + "' may not contain commas, quotes or slashes");
        }
        if (c.arbirg.enabled) {
            for (double r : c.arbirg.r) {
                const auto report = validate_schedule(cell_schedule(c, c.cells[i], r));
                for (const auto& v : report.violations) {
                    problems.push_back("cell '" + c.cells[i].id + "', r = " + std::to_string(r) + ": " + v);
                }
            }
        }
        if (c.sr.enabled && !(c.cells[i].eta0 > 0.0)) problems.push_back("cell '" + c.cells[i].id + "': eta0 must be positive");
    }
    if (c.sr.enabled && !(c.sr.options.rho > 0.0 && c.sr.options.rho < 1.0)) problems.emplace_back("[sr] rho must lie in (0, 1)");
    if (!problems.empty()) {
        std::ostringstream msg;
        msg << "invalid experiment config:";
        for (const auto& p : problems) msg << "\n  " << p;
        throw std::invalid_argument(msg.str());
    }
}

Schedule cell_schedule(const ExperimentConfig& config, const CellConfig& cell, double r)
{
    return Schedule{cell.gamma0, cell.eta0, config.arbirg.a, config.arbirg.b, r, config.arbirg.mode};
}

std::string arbirg_label(double r)
{
    std::ostringstream out;
    out << "arbirg_r" << r;
    return out.str();
}

} // namespace arbirg
