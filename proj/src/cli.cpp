#include "qpf/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "qpf/errors.hpp"
#include "qpf/graphs.hpp"
#include "qpf/harper.hpp"
#include "qpf/io.hpp"
#include "qpf/rotnum.hpp"
#include "qpf/scan.hpp"

namespace qpf::cli {

namespace fs = std::filesystem;

std::string content_hash(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class NumericalFailure : public Error {
public:
    using Error::Error;
};

// Every option of every command, resolved from flags and the config file.
struct RunConfig {
    std::string command;

    std::string family = "translation";
    std::map<std::string, double> params;
    std::string function = "cos";
    std::string table_file;

    std::size_t n = 100000;
    std::size_t seed_count = 4;
    std::uint64_t seed = 1;
    std::string method = "weighted";
    std::size_t jobs = 1;
    std::string format = "json";
    std::string out;
    std::string cache_dir;

    // probe
    std::vector<double> eps_grid;
    int eps_min_exp = -6;
    int eps_max_exp = -1;

    // deviations
    std::vector<std::size_t> n_list;
    double theta0 = 0.0;
    double x0 = 0.0;

    // sweep
    std::string axis1;
    std::string axis2;
    double min_width = 0.0;
    double tol = 1e-5;
    int qmax = 20;
    int pmax = 20;

    // tongue
    std::string param = "tau";
    std::optional<double> target;
    std::string relation;
    std::vector<double> bracket;
    std::string edge = "right";
    double boundary_tol = 1e-6;

    // strip / annulus
    std::size_t grid = 4096;
    std::size_t candidates = 64;
    std::size_t max_iterate = 200;
    double strict_tol = 1e-9;
    double limit_tol = 1e-10;
    std::size_t limit_max_iter = 100000;
    double pinch_tol = 1e-3;
    std::optional<double> lower_start;
    std::optional<double> upper_start;

    // ids / gap-label
    std::string energies = "-2.5:2.5:101";
    std::size_t ids_n = 2000;
    std::vector<double> energy_range;
    double label_tol = 1e-4;
    long kmax = 20;
};

json canonical(const RunConfig& c) {
    json j{{"command", c.command},
           {"family", c.family},
           {"params", c.params},
           {"function", c.function},
           {"table_file", c.table_file},
           {"n", c.n},
           {"seeds", c.seed_count},
           {"seed", c.seed},
           {"method", c.method},
           {"format", c.format},
           {"out", c.out}};
    const auto& cmd = c.command;
    if (cmd == "probe")
        j["probe"] = {{"eps_grid", c.eps_grid}, {"eps_min_exp", c.eps_min_exp}, {"eps_max_exp", c.eps_max_exp}};
    if (cmd == "deviations")
        j["deviations"] = {{"n_list", c.n_list}, {"theta0", c.theta0}, {"x0", c.x0}};
    if (cmd == "sweep")
        j["sweep"] = {{"axis", c.axis1}, {"axis2", c.axis2}, {"min_width", c.min_width},
                      {"tol", c.tol},    {"qmax", c.qmax},   {"pmax", c.pmax}};
    if (cmd == "tongue")
        j["tongue"] = {{"param", c.param},
                       {"target", c.target ? json(*c.target) : json(nullptr)},
                       {"relation", c.relation},
                       {"bracket", c.bracket},
                       {"edge", c.edge},
                       {"tol", c.boundary_tol}};
    if (cmd == "strip" || cmd == "annulus")
        j["graphs"] = {{"grid", c.grid},
                       {"candidates", c.candidates},
                       {"max_iterate", c.max_iterate},
                       {"strict_tol", c.strict_tol},
                       {"limit_tol", c.limit_tol},
                       {"limit_max_iter", c.limit_max_iter},
                       {"pinch_tol", c.pinch_tol},
                       {"lower", c.lower_start ? json(*c.lower_start) : json(nullptr)},
                       {"upper", c.upper_start ? json(*c.upper_start) : json(nullptr)}};
    if (cmd == "ids" || cmd == "gap-label")
        j["harper"] = {{"energies", c.energies},   {"ids_n", c.ids_n}, {"energy_range", c.energy_range},
                       {"label_tol", c.label_tol}, {"kmax", c.kmax},   {"min_width", c.min_width}};
    return j;
}

struct CommandResult {
    std::string text;                                        // stdout
    std::vector<std::pair<std::string, std::string>> files{};  // path, bytes
};

std::vector<double> read_table(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot read table file '" + path + "'");
    std::vector<double> out;
    std::string tok;
    while (in >> tok) {
        std::replace(tok.begin(), tok.end(), ',', ' ');
        std::istringstream parts(tok);
        double v;
        while (parts >> v)
            out.push_back(v);
    }
    return out;
}

FamilySpec family_of(const RunConfig& c) {
    FamilySpec spec{c.family, c.params, c.function, {}};
    if (c.function == "table") {
        if (c.table_file.empty())
            throw ConfigError("function 'table' needs --table-file");
        spec.table = read_table(c.table_file);
    }
    return spec;
}

EstimatorSettings estimator_of(const RunConfig& c) {
    EstimatorSettings s;
    s.n = c.n;
    s.seeds = make_seeds(c.seed_count, c.seed);
    s.method = parse_estimator_method(c.method);
    s.jobs = c.jobs;
    return s;
}

Axis parse_axis(const std::string& text, const std::string& default_name = "") {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ':'))
        parts.push_back(item);
    if (parts.size() == 3 && !default_name.empty())
        parts.insert(parts.begin(), default_name);
    if (parts.size() != 4)
        throw ConfigError("axis must look like name:lo:hi:count, got '" + text + "'");
    try {
        Axis a{parts[0], std::stod(parts[1]), std::stod(parts[2]), static_cast<std::size_t>(std::stoul(parts[3]))};
        return a;
    } catch (const std::logic_error&) {
        throw ConfigError("cannot parse axis '" + text + "'");
    }
}

bool csv(const RunConfig& c) { return c.format == "csv"; }

std::string line(const json& j) { return dump_json(j) + "\n"; }

CommandResult cmd_rho(const RunConfig& c) {
    const auto spec = family_of(c);
    const auto est = rotation_number(build_family(spec), estimator_of(c));
    if (csv(c))
        return {"value,error_radius,n_used,method\n" + format_double(est.value) + "," +
                format_double(est.error_radius) + "," + std::to_string(est.n_used) + "," + to_string(est.method) +
                "\n"};
    json j = est;
    j["family"] = spec;
    return {line(j)};
}

CommandResult cmd_probe(const RunConfig& c) {
    const auto spec = family_of(c);
    const auto grid = c.eps_grid.empty() ? symmetric_epsilon_grid(c.eps_min_exp, c.eps_max_exp) : c.eps_grid;
    const auto verdict = monotonicity_probe(build_family(spec), grid, estimator_of(c));
    if (csv(c)) {
        std::string s = "eps,rho,err\n";
        for (const auto& g : verdict.epsilon_grid)
            s += format_double(g.eps) + "," + format_double(g.estimate.value) + "," +
                 format_double(g.estimate.error_radius) + "\n";
        s += "# kind=" + to_string(verdict.kind) + "\n";
        return {s};
    }
    json j = verdict;
    j["family"] = spec;
    return {line(j)};
}

CommandResult cmd_deviations(const RunConfig& c) {
    const auto spec = family_of(c);
    const auto lift = build_family(spec);
    const auto est = rotation_number(lift, estimator_of(c));
    std::vector<std::size_t> ns = c.n_list;
    if (ns.empty())
        for (std::size_t m = 1; m <= c.n; m *= 2)
            ns.push_back(m);
    const FiberPoint start{c.theta0, c.x0};
    const auto samples = deviations(lift, est.value, start, ns);
    BoundednessOptions opts;
    opts.start = start;
    opts.rho = est.value;
    const std::size_t n_max = *std::max_element(ns.begin(), ns.end());
    const auto report = boundedness_diagnostic(lift, std::max<std::size_t>(n_max, 2), {}, opts);
    if (csv(c)) {
        std::string s = "n,theta,x,value\n";
        for (const auto& d : samples)
            s += std::to_string(d.n) + "," + format_double(d.theta) + "," + format_double(d.x) + "," +
                 format_double(d.value) + "\n";
        s += "# verdict=" + to_string(report.verdict) + "\n";
        return {s};
    }
    return {line(json{{"rho", est}, {"samples", samples}, {"diagnostic", report}, {"family", spec}})};
}

CommandResult cmd_sweep(const RunConfig& c) {
    if (c.axis1.empty())
        throw ConfigError("sweep needs --axis name:lo:hi:count");
    SweepSpec spec{family_of(c), parse_axis(c.axis1), std::nullopt, estimator_of(c)};
    CommandResult res;
    const json echo{{"family", spec.family},
                    {"axis1", spec.axis1},
                    {"n", c.n},
                    {"seeds", spec.estimator.seeds},
                    {"method", c.method}};
    if (!c.axis2.empty()) {
        spec.axis2 = parse_axis(c.axis2);
        const auto grid = sweep_2d(spec);
        std::ostringstream body;
        if (csv(c)) {
            write_sweep_csv(body, grid);
        } else {
            json j = echo;
            j["axis2"] = grid.axis2;
            j["cells"] = grid.cells;
            body << line(j);
        }
        if (c.out.empty()) {
            res.text = body.str();
            return res;
        }
        std::ostringstream bin;
        write_grid_binary(bin, grid);
        const std::string bin_path = c.out + ".bin";
        res.files.emplace_back(c.out + (csv(c) ? ".csv" : ".json"), body.str());
        res.files.emplace_back(bin_path, bin.str());
        res.files.emplace_back(bin_path + ".json", line(grid_sidecar(grid, fs::path(bin_path).filename().string())));
        res.text = "grid " + grid.axis1.name + "x" + grid.axis2.name + " " + std::to_string(grid.axis1.count) + "x" +
                   std::to_string(grid.axis2.count) + " written to " + bin_path + "\n";
        return res;
    }

    const auto points = sweep_1d(spec);
    PlateauOptions popts{c.min_width, spec.family.param("omega"), c.tol, c.qmax, c.pmax};
    const auto plateaus = detect_plateaus(points, popts);
    std::ostringstream body;
    if (csv(c)) {
        write_sweep_csv(body, spec.axis1.name, points);
    } else {
        json j = echo;
        json pts = json::array();
        for (const auto& p : points)
            pts.push_back({{"param", p.param}, {"estimate", p.estimate}});
        j["points"] = pts;
        j["plateaus"] = plateaus;
        body << line(j);
    }
    std::string summary;
    for (const auto& p : plateaus) {
        summary += "plateau " + spec.axis1.name + "=[" + format_double(p.lo) + "," + format_double(p.hi) +
                   "] rho=" + format_double(p.value);
        if (p.witness)
            summary += " k=" + std::to_string(p.witness->k) + " l=" + std::to_string(p.witness->l) +
                       " p=" + std::to_string(p.witness->p) + " q=" + std::to_string(p.witness->q) +
                       " residual=" + format_double(p.witness->residual);
        else
            summary += " no-witness";
        if (p.unwitnessed)
            summary += " UNWITNESSED";
        summary += "\n";
    }
    if (c.out.empty()) {
        res.text = body.str() + (csv(c) ? "" : summary);
    } else {
        res.files.emplace_back(c.out + (csv(c) ? ".csv" : ".json"), body.str());
        res.text = "sweep " + spec.axis1.name + " " + std::to_string(points.size()) + " points, " +
                   std::to_string(plateaus.size()) + " plateaus\n" + summary;
    }
    return res;
}

RationalRelation parse_relation(const std::string& text) {
    std::vector<long> v;
    std::stringstream ss(text);
    std::string item;
    try {
        while (std::getline(ss, item, ','))
            v.push_back(std::stol(item));
    } catch (const std::logic_error&) {
        throw ConfigError("relation must look like k,l,p,q");
    }
    if (v.size() != 4 || v[2] < 1 || v[3] < 1)
        throw ConfigError("relation must look like k,l,p,q with p,q >= 1");
    return {v[0], v[1], v[2], v[3], 0.0};
}

CommandResult cmd_tongue(const RunConfig& c) {
    if (c.bracket.size() != 2)
        throw ConfigError("tongue needs --bracket lo,hi");
    if (c.target.has_value() == !c.relation.empty())
        throw ConfigError("tongue needs exactly one of --target or --relation");
    if (c.edge != "right" && c.edge != "left")
        throw ConfigError("edge must be 'right' or 'left'");
    const auto spec = family_of(c);
    const Edge edge = c.edge == "right" ? Edge::right : Edge::left;
    const auto settings = estimator_of(c);
    const auto res =
        c.target ? tongue_boundary(spec, c.param, *c.target, c.bracket[0], c.bracket[1], c.boundary_tol, settings, edge)
                 : tongue_boundary(spec, c.param, parse_relation(c.relation), c.bracket[0], c.bracket[1],
                                   c.boundary_tol, settings, edge);
    if (csv(c))
        return {"param,lo,hi,target,iterations\n" + format_double(res.param) + "," + format_double(res.lo) + "," +
                format_double(res.hi) + "," + format_double(res.target) + "," + std::to_string(res.iterations) +
                "\n"};
    json j = res;
    j["edge"] = c.edge;
    j["name"] = c.param;
    j["family"] = spec;
    return {line(j)};
}

json witness_json(const AnnulusWitness& w) {
    return json{{"found", true},
                {"iterate", w.iterate},
                {"gamma_plus_height", w.gamma_plus[0]},
                {"gamma_minus_height", w.gamma_minus[0]},
                {"margin_plus", w.margin_plus},
                {"margin_minus", w.margin_minus},
                {"refined_margin_plus", w.refined_margin_plus},
                {"refined_margin_minus", w.refined_margin_minus},
                {"grid", w.gamma_plus.size()}};
}

AnnulusOptions annulus_options(const RunConfig& c) {
    return {c.candidates, c.grid, c.max_iterate, c.strict_tol};
}

CommandResult cmd_annulus(const RunConfig& c) {
    const auto spec = family_of(c);
    const auto w = annulus_witness(build_family(spec), annulus_options(c));
    json j = w ? witness_json(*w) : json{{"found", false}};
    j["family"] = spec;
    CommandResult res{line(j), {}};
    if (w && !c.out.empty()) {
        std::ostringstream s;
        write_strip_csv(s, Strip(w->gamma_minus, w->gamma_plus));
        res.files.emplace_back(c.out + ".csv", s.str());
    }
    return res;
}

CommandResult cmd_strip(const RunConfig& c) {
    const auto spec = family_of(c);
    const auto lift = build_family(spec);
    double lo, hi;
    json witness = nullptr;
    if (c.lower_start && c.upper_start) {
        lo = *c.lower_start;
        hi = *c.upper_start;
    } else {
        const auto w = annulus_witness(lift, annulus_options(c));
        if (!w)
            throw NumericalFailure("no annulus witness found to start the strip iteration");
        lo = w->gamma_minus[0];
        hi = w->gamma_plus[0];
        witness = witness_json(*w);
    }
    const auto ex = extract_strip(lift, GraphOverTheta::constant(c.grid, lo), GraphOverTheta::constant(c.grid, hi),
                                  c.limit_tol, c.limit_max_iter);
    if (!ex.strip)
        throw NumericalFailure("curve iteration did not produce an ordered pair of limit graphs (lower " +
                               to_string(ex.lower.status) + ", upper " + to_string(ex.upper.status) + ")");
    const auto pinch = pinch_measure(*ex.strip);
    json j{{"lower_start", lo},
           {"upper_start", hi},
           {"lower_steps", ex.lower.steps},
           {"upper_steps", ex.upper.steps},
           {"max_width", ex.strip->max_width()},
           {"pinch", pinch},
           {"pinched", pinch.pinched(c.pinch_tol)},
           {"witness", witness},
           {"family", spec}};
    std::ostringstream body;
    if (csv(c))
        write_strip_csv(body, *ex.strip);
    else
        body << line(json{{"theta_count", ex.strip->size()},
                          {"lower", ex.strip->lower()},
                          {"upper", ex.strip->upper()}});
    CommandResult res;
    if (c.out.empty()) {
        res.text = body.str() + line(j);
    } else {
        res.files.emplace_back(c.out + (csv(c) ? ".csv" : ".json"), body.str());
        res.text = line(j);
    }
    return res;
}

CircleFunction potential_of(const FamilySpec& spec) {
    if (spec.function == "table")
        return CircleFunction::tabulated(spec.table);
    return CircleFunction::preset(spec.function, 2.0 * spec.param("lambda"));
}

CommandResult cmd_ids(const RunConfig& c) {
    if (c.family != "harper")
        throw ConfigError("ids needs --family harper");
    const auto spec = family_of(c);
    const Axis axis = parse_axis(c.energies, "energy");
    if (axis.count < 2 || !(axis.hi > axis.lo))
        throw ConfigError("energy axis needs count >= 2 and lo < hi");
    SweepSpec sweep{spec, axis, std::nullopt, estimator_of(c)};
    sweep.axis1.name = "energy";
    const auto points = sweep_1d(sweep);
    const double omega = spec.param("omega");
    const IntegratedDensity density(potential_of(spec), omega, c.ids_n);

    PlateauOptions popts{c.min_width, omega, c.tol, c.qmax, c.pmax};
    const auto plateaus = detect_plateaus(points, popts);
    std::vector<std::optional<long>> labels(points.size());
    for (const auto& p : plateaus) {
        const auto lab = label_rotation(p.value, omega, c.label_tol, c.kmax);
        if (lab)
            for (std::size_t i = p.first; i <= p.last; ++i)
                labels[i] = lab->k;
    }

    std::ostringstream body;
    if (csv(c)) {
        body << "E,rho,err,ids,gap_label\n";
        for (std::size_t i = 0; i < points.size(); ++i) {
            body << format_double(points[i].param) << ',' << format_double(points[i].estimate.value) << ','
                 << format_double(points[i].estimate.error_radius) << ','
                 << format_double(density(points[i].param).value) << ',';
            if (labels[i])
                body << *labels[i];
            body << '\n';
        }
    } else {
        json rows = json::array();
        for (std::size_t i = 0; i < points.size(); ++i)
            rows.push_back({{"E", points[i].param},
                            {"rho", points[i].estimate.value},
                            {"err", points[i].estimate.error_radius},
                            {"ids", density(points[i].param).value},
                            {"gap_label", labels[i] ? json(*labels[i]) : json(nullptr)}});
        body << line(json{{"rows", rows}, {"ids_n", c.ids_n}, {"family", spec}});
    }
    CommandResult res;
    double worst = 0.0;
    for (const auto& p : points)
        worst = std::max(worst, std::abs(p.estimate.value - density(p.param).value));
    const std::string summary = "ids " + std::to_string(points.size()) + " energies, " +
                                std::to_string(plateaus.size()) + " plateaus, max |rho - ids| = " +
                                format_double(worst) + "\n";
    if (c.out.empty()) {
        res.text = body.str() + (csv(c) ? "" : summary);
    } else {
        res.files.emplace_back(c.out + (csv(c) ? ".csv" : ".json"), body.str());
        res.text = summary;
    }
    return res;
}

CommandResult cmd_gap_label(const RunConfig& c) {
    if (c.family != "harper")
        throw ConfigError("gap-label needs --family harper");
    if (c.energy_range.size() != 2)
        throw ConfigError("gap-label needs --energy-range lo,hi");
    const auto spec = family_of(c);
    const double omega = spec.param("omega");
    const auto lab = gap_label(potential_of(spec), omega, c.energy_range[0], c.energy_range[1], c.label_tol, c.kmax,
                               estimator_of(c));
    json j = lab ? json(*lab) : json{{"k", nullptr}};
    j["energy_range"] = c.energy_range;
    j["family"] = spec;
    return {line(j)};
}

using Handler = std::function<CommandResult(const RunConfig&)>;

void write_file(const std::string& path, const std::string& bytes) {
    const fs::path p(path);
    std::error_code ec;
    if (p.has_parent_path())
        fs::create_directories(p.parent_path(), ec);
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    if (!f)
        throw IoError("cannot write '" + path + "'");
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f)
        throw IoError("failed writing '" + path + "'");
}

std::string read_file(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    if (!f)
        throw IoError("cannot read '" + p.string() + "'");
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

std::optional<CommandResult> cache_load(const fs::path& dir) {
    if (!fs::exists(dir / "manifest.json"))
        return std::nullopt;
    const auto manifest = json::parse(read_file(dir / "manifest.json"));
    CommandResult res;
    res.text = read_file(dir / "stdout");
    std::size_t i = 0;
    for (const auto& path : manifest.at("files"))
        res.files.emplace_back(path.get<std::string>(), read_file(dir / ("artifact" + std::to_string(i++))));
    return res;
}

void cache_store(const fs::path& dir, const json& config, const CommandResult& res) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw IoError("cannot create cache directory '" + dir.string() + "'");
    json files = json::array();
    for (std::size_t i = 0; i < res.files.size(); ++i) {
        write_file((dir / ("artifact" + std::to_string(i))).string(), res.files[i].second);
        files.push_back(res.files[i].first);
    }
    write_file((dir / "stdout").string(), res.text);
    // Manifest last: its presence marks a complete entry.
    write_file((dir / "manifest.json").string(), line(json{{"config", config}, {"files", files}}));
}


}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    RunConfig c;
    std::map<std::string, std::optional<double>> family_slots;
    std::optional<std::uint64_t> seed_flag;

    CLI::App app{"Numerical diagnostics for quasiperiodically forced circle homeomorphisms", "qpf"};
    app.set_config("--config", "", "key = value configuration file; command-line flags take precedence");
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.require_subcommand(1);
    app.fallthrough();

    app.add_option("--family", c.family, "translation | arnold | harper")->capture_default_str();
    for (const auto& [name, help] : std::vector<std::pair<std::string, std::string>>{
             {"rho0", "translation amount"},
             {"alpha", "Arnold nonlinearity in [0,1]"},
             {"tau", "Arnold phase offset"},
             {"beta", "Arnold forcing amplitude"},
             {"omega", "rotation frequency (default golden mean)"},
             {"lambda", "Harper coupling, V = 2 lambda cos(2 pi theta)"},
             {"energy", "Harper energy E"},
             {"eps", "vertical perturbation added to the fiber map"}})
        app.add_option("--" + name, family_slots[name], help);
    app.add_option("--function", c.function, "forcing/potential preset: cos | sin | zero | table")
        ->capture_default_str();
    app.add_option("--table-file", c.table_file, "samples of a tabulated forcing/potential on a uniform grid");
    app.add_option("--n", c.n, "iterates per orbit")->capture_default_str()->check(CLI::PositiveNumber);
    app.add_option("--seeds", c.seed_count, "number of seed orbits")->capture_default_str()->check(CLI::PositiveNumber);
    app.add_option("--seed", seed_flag, "deterministic seed for the seed orbits");
    app.add_option("--method", c.method, "plain | weighted")->capture_default_str();
    app.add_option("--jobs", c.jobs, "worker threads")->capture_default_str()->check(CLI::PositiveNumber);
    app.add_option("--format", c.format, "json | csv")->capture_default_str()->check(CLI::IsMember({"json", "csv"}));
    app.add_option("--out", c.out, "output path prefix for artifacts");
    app.add_option("--cache-dir", c.cache_dir, "result cache directory (default $QPF_CACHE_DIR)");

    app.add_subcommand("rho", "estimate the fibered rotation number");
    auto* probe = app.add_subcommand("probe", "strict monotonicity vs. mode-locking under F + eps");
    probe->add_option("--eps-grid", c.eps_grid, "explicit symmetric epsilon grid")->delimiter(',');
    probe->add_option("--eps-min-exp", c.eps_min_exp, "smallest |eps| = 10^exp")->capture_default_str();
    probe->add_option("--eps-max-exp", c.eps_max_exp, "largest |eps| = 10^exp")->capture_default_str();
    auto* dev = app.add_subcommand("deviations", "deviations from rigid rotation and a boundedness heuristic");
    dev->add_option("--n-list", c.n_list, "iterate counts")->delimiter(',');
    dev->add_option("--theta0", c.theta0, "orbit start phase")->capture_default_str();
    dev->add_option("--x0", c.x0, "orbit start height")->capture_default_str();
    auto* sweep = app.add_subcommand("sweep", "parameter sweep with plateau detection");
    sweep->add_option("--axis", c.axis1, "name:lo:hi:count")->required();
    sweep->add_option("--axis2", c.axis2, "second axis for a 2-D grid");
    auto* tongue = app.add_subcommand("tongue", "bisect for a tongue edge");
    tongue->add_option("--param", c.param, "swept parameter")->capture_default_str();
    tongue->add_option("--target", c.target, "target rotation number (lift value)");
    tongue->add_option("--relation", c.relation, "target as k,l,p,q");
    tongue->add_option("--bracket", c.bracket, "lo,hi")->delimiter(',')->expected(2);
    tongue->add_option("--edge", c.edge, "right | left")->capture_default_str();
    tongue->add_option("--tol", c.boundary_tol, "bracket width at exit")->capture_default_str();
    auto* strip = app.add_subcommand("strip", "invariant strip from monotone curve iteration");
    auto* annulus = app.add_subcommand("annulus", "search for curves bounding an annulus mapped into itself");
    for (auto* sub : {strip, annulus}) {
        sub->add_option("--grid", c.grid, "theta grid size")->capture_default_str();
        sub->add_option("--candidates", c.candidates, "constant start heights")->capture_default_str();
        sub->add_option("--max-iterate", c.max_iterate, "largest iterate N tried")->capture_default_str();
        sub->add_option("--strict-tol", c.strict_tol, "required strictness margin")->capture_default_str();
    }
    strip->add_option("--limit-tol", c.limit_tol, "sup-norm step at convergence")->capture_default_str();
    strip->add_option("--limit-max-iter", c.limit_max_iter, "curve iteration cap")->capture_default_str();
    strip->add_option("--pinch-tol", c.pinch_tol, "width below which the strip counts as pinched")
        ->capture_default_str();
    strip->add_option("--lower", c.lower_start, "constant lower start curve");
    strip->add_option("--upper", c.upper_start, "constant upper start curve");
    auto* ids_cmd = app.add_subcommand("ids", "rho(s_E) against the integrated density of states");
    ids_cmd->add_option("--energies", c.energies, "lo:hi:count")->capture_default_str();
    ids_cmd->add_option("--ids-n", c.ids_n, "truncated operator size")->capture_default_str();
    ids_cmd->add_option("--label-tol", c.label_tol, "gap label tolerance")->capture_default_str();
    ids_cmd->add_option("--kmax", c.kmax, "largest |k| for gap labels")->capture_default_str();
    auto* gap = app.add_subcommand("gap-label", "label a plateau of E -> rho(s_E)");
    gap->add_option("--energy-range", c.energy_range, "lo,hi")->delimiter(',')->expected(2)->required();
    gap->add_option("--label-tol", c.label_tol, "gap label tolerance")->capture_default_str();
    gap->add_option("--kmax", c.kmax, "largest |k|")->capture_default_str();
    for (auto* sub : {sweep, ids_cmd}) {
        sub->add_option("--min-width", c.min_width, "smallest reported plateau width")->capture_default_str();
        sub->add_option("--tol", c.tol, "rational witness tolerance")->capture_default_str();
        sub->add_option("--qmax", c.qmax, "largest q in witnesses")->capture_default_str();
        sub->add_option("--pmax", c.pmax, "largest p in witnesses")->capture_default_str();
    }

    const std::map<std::string, Handler> handlers{
        {"rho", cmd_rho},       {"probe", cmd_probe},     {"deviations", cmd_deviations},
        {"sweep", cmd_sweep},   {"tongue", cmd_tongue},   {"strip", cmd_strip},
        {"annulus", cmd_annulus}, {"ids", cmd_ids},       {"gap-label", cmd_gap_label},
    };

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return ok;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return e.get_exit_code() == 0 ? ok : config;
    }

    for (auto* sub : app.get_subcommands())
        c.command = sub->get_name();
    for (const auto& [name, slot] : family_slots)
        if (slot)
            c.params[name] = *slot;
    if (seed_flag)
        c.seed = *seed_flag;
    if (c.cache_dir.empty())
        if (const char* env = std::getenv("QPF_CACHE_DIR"))
            c.cache_dir = env;

    try {
        for (double t : {c.tol, c.boundary_tol, c.strict_tol, c.limit_tol, c.pinch_tol, c.label_tol})
            if (!(t > 0.0))
                throw ConfigError("all tolerances must be positive");
        if (c.method != "plain" && c.method != "weighted")
            throw ConfigError("method must be 'plain' or 'weighted'");

        const json config = canonical(c);
        std::optional<CommandResult> result;
        fs::path entry;
        if (!c.cache_dir.empty()) {
            entry = fs::path(c.cache_dir) / content_hash(dump_json(config));
            result = cache_load(entry);
            if (result)
                err << "note: cache hit " << entry.filename().string() << " (stored result, config hash "
                    << entry.filename().string() << ")\n";
        }
        if (!result) {
            result = handlers.at(c.command)(c);
            if (!entry.empty())
                cache_store(entry, config, *result);
        }
        for (const auto& [path, bytes] : result->files)
            write_file(path, bytes);
        out << result->text;
        out.flush();
        return ok;
    } catch (const NonFinite& e) {
        err << "error: " << e.what() << "\n";
        return non_finite;
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return io;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return config;
    } catch (const InvalidArgument& e) {
        err << "error: " << e.what() << "\n";
        return config;
    } catch (const AlphaOutOfRange& e) {
        err << "error: " << e.what() << "\n";
        return config;
    } catch (const BracketInvalid& e) {
        err << "error: " << e.what() << "\n";
        return config;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return numerical;
    } catch (const json::exception& e) {
        err << "error: corrupt cache entry: " << e.what() << "\n";
        return io;
    }
}

}  // namespace qpf::cli
