#include "qpf/io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <ostream>

#include "qpf/errors.hpp"

namespace qpf {

std::string format_double(double v) {
    if (!std::isfinite(v))
        throw NonFinite("cannot serialise a non-finite number");
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

void dump_into(std::string& out, const json& j) {
    switch (j.type()) {
    case json::value_t::object: {
        out += '{';
        bool first = true;
        for (const auto& [key, value] : j.items()) {
            if (!first)
                out += ',';
            first = false;
            out += json(key).dump();
            out += ':';
            dump_into(out, value);
        }
        out += '}';
        break;
    }
    case json::value_t::array: {
        out += '[';
        bool first = true;
        for (const auto& value : j) {
            if (!first)
                out += ',';
            first = false;
            dump_into(out, value);
        }
        out += ']';
        break;
    }
    case json::value_t::number_float:
        out += format_double(j.get<double>());
        break;
    default:
        out += j.dump();
        break;
    }
}

}  // namespace

std::string dump_json(const json& j) {
    std::string out;
    dump_into(out, j);
    return out;
}

void to_json(json& j, const FiberPoint& p) { j = json::array({p.theta, p.x}); }

void from_json(const json& j, FiberPoint& p) {
    p.theta = j.at(0).get<double>();
    p.x = j.at(1).get<double>();
}

void to_json(json& j, const RotationEstimate& e) {
    j = json{{"value", e.value},
             {"error_radius", e.error_radius},
             {"n_used", e.n_used},
             {"seeds", e.seeds},
             {"method", to_string(e.method)},
             {"per_seed", e.per_seed}};
}

void from_json(const json& j, RotationEstimate& e) {
    e.value = j.at("value").get<double>();
    e.error_radius = j.at("error_radius").get<double>();
    e.n_used = j.at("n_used").get<std::size_t>();
    e.seeds = j.at("seeds").get<std::vector<FiberPoint>>();
    e.method = parse_estimator_method(j.at("method").get<std::string>());
    e.per_seed = j.at("per_seed").get<std::vector<double>>();
}

void to_json(json& j, const DeviationSample& d) {
    j = json{{"n", d.n}, {"theta", d.theta}, {"x", d.x}, {"value", d.value}};
}

void from_json(const json& j, DeviationSample& d) {
    d.n = j.at("n").get<std::size_t>();
    d.theta = j.at("theta").get<double>();
    d.x = j.at("x").get<double>();
    d.value = j.at("value").get<double>();
}

void to_json(json& j, const RationalRelation& r) {
    j = json{{"k", r.k}, {"l", r.l}, {"p", r.p}, {"q", r.q}, {"residual", r.residual}};
}

void from_json(const json& j, RationalRelation& r) {
    r.k = j.at("k").get<long>();
    r.l = j.at("l").get<long>();
    r.p = j.at("p").get<long>();
    r.q = j.at("q").get<long>();
    r.residual = j.at("residual").get<double>();
}

void to_json(json& j, const EpsilonSample& s) { j = json{{"eps", s.eps}, {"estimate", s.estimate}}; }

void from_json(const json& j, EpsilonSample& s) {
    s.eps = j.at("eps").get<double>();
    s.estimate = j.at("estimate").get<RotationEstimate>();
}

void to_json(json& j, const MonotonicityVerdict& v) {
    j = json{{"kind", to_string(v.kind)}, {"epsilon_grid", v.epsilon_grid}};
    if (v.plateau)
        j["plateau"] = json::array({v.plateau->first, v.plateau->second});
    else
        j["plateau"] = nullptr;
}

void from_json(const json& j, MonotonicityVerdict& v) {
    v.kind = parse_monotonicity_kind(j.at("kind").get<std::string>());
    v.epsilon_grid = j.at("epsilon_grid").get<std::vector<EpsilonSample>>();
    const auto& p = j.at("plateau");
    if (p.is_null())
        v.plateau.reset();
    else
        v.plateau = std::make_pair(p.at(0).get<double>(), p.at(1).get<double>());
}

void to_json(json& j, const BoundednessReport& r) {
    j = json{{"verdict", to_string(r.verdict)},
             {"rho", r.rho},
             {"scales", r.scales},
             {"sup_envelope", r.sup_envelope},
             {"inf_envelope", r.inf_envelope},
             {"abs_envelope", r.abs_envelope},
             {"heuristic", true}};
}

void to_json(json& j, const PlateauReport& r) {
    j = json{{"lo", r.lo},
             {"hi", r.hi},
             {"value", r.value},
             {"first", r.first},
             {"last", r.last},
             {"confidence", r.confidence},
             {"unwitnessed", r.unwitnessed}};
    if (r.witness)
        j["witness"] = *r.witness;
    else
        j["witness"] = nullptr;
}

void to_json(json& j, const FamilySpec& f) {
    j = json{{"family", f.family}, {"params", f.params}, {"function", f.function}, {"table", f.table}};
}

void from_json(const json& j, FamilySpec& f) {
    f.family = j.at("family").get<std::string>();
    f.params = j.at("params").get<std::map<std::string, double>>();
    f.function = j.at("function").get<std::string>();
    f.table = j.at("table").get<std::vector<double>>();
}

void to_json(json& j, const Axis& a) { j = json{{"name", a.name}, {"lo", a.lo}, {"hi", a.hi}, {"count", a.count}}; }

void from_json(const json& j, Axis& a) {
    a.name = j.at("name").get<std::string>();
    a.lo = j.at("lo").get<double>();
    a.hi = j.at("hi").get<double>();
    a.count = j.at("count").get<std::size_t>();
}

void to_json(json& j, const GraphOverTheta& g) {
    j = json::array();
    for (double v : g.values())
        j.push_back(v);
}

void to_json(json& j, const IdsEstimate& e) {
    j = json{{"n", e.n}, {"value", e.value}, {"boundary", e.boundary}, {"phases", e.phases}};
}

void to_json(json& j, const GapLabel& g) { j = json{{"k", g.k}, {"residual", g.residual}, {"rho", g.rho}}; }

void to_json(json& j, const BoundaryResult& b) {
    j = json{{"param", b.param}, {"lo", b.lo}, {"hi", b.hi}, {"target", b.target}, {"iterations", b.iterations}};
}

void to_json(json& j, const PinchMeasure& p) {
    j = json{{"min_width", p.min_width}, {"theta", p.theta}, {"index", p.index}};
}

void write_graph_csv(std::ostream& out, const GraphOverTheta& graph) {
    out << "theta,value\n";
    for (std::size_t i = 0; i < graph.size(); ++i)
        out << format_double(graph.theta(i)) << ',' << format_double(graph[i]) << '\n';
}

void write_strip_csv(std::ostream& out, const Strip& strip) {
    out << "theta,lower,upper\n";
    for (std::size_t i = 0; i < strip.size(); ++i)
        out << format_double(strip.lower().theta(i)) << ',' << format_double(strip.lower()[i]) << ','
            << format_double(strip.upper()[i]) << '\n';
}

void write_sweep_csv(std::ostream& out, const std::string& param, std::span<const SweepPoint> sweep) {
    out << param << ",rho,err\n";
    for (const auto& p : sweep)
        out << format_double(p.param) << ',' << format_double(p.estimate.value) << ','
            << format_double(p.estimate.error_radius) << '\n';
}

void write_sweep_csv(std::ostream& out, const SweepGrid& grid) {
    out << grid.axis1.name << ',' << grid.axis2.name << ",rho,err\n";
    for (std::size_t i = 0; i < grid.axis1.count; ++i)
        for (std::size_t j = 0; j < grid.axis2.count; ++j) {
            const auto& e = grid.at(i, j);
            out << format_double(grid.axis1.at(i)) << ',' << format_double(grid.axis2.at(j)) << ','
                << format_double(e.value) << ',' << format_double(e.error_radius) << '\n';
        }
}

namespace {

void put_le(std::ostream& out, double v) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    char bytes[8];
    for (int b = 0; b < 8; ++b)
        bytes[b] = static_cast<char>((bits >> (8 * b)) & 0xffU);
    out.write(bytes, 8);
}

}  // namespace

void write_grid_binary(std::ostream& out, const SweepGrid& grid) {
    for (const auto& e : grid.cells)
        put_le(out, e.value);
    for (const auto& e : grid.cells)
        put_le(out, e.error_radius);
}

json grid_sidecar(const SweepGrid& grid, const std::string& binary_name) {
    return json{{"file", binary_name},
                {"shape", json::array({2, grid.axis1.count, grid.axis2.count})},
                {"layout", "row-major"},
                {"encoding", "little-endian 8-byte IEEE-754 floats"},
                {"planes", json::array({"rho", "error_radius"})},
                {"axis1", grid.axis1},
                {"axis2", grid.axis2}};
}

}  // namespace qpf
