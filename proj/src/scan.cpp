#include "qpf/scan.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qpf/errors.hpp"
#include "qpf/harper.hpp"
#include "qpf/parallel.hpp"

namespace qpf {

namespace {

const std::map<std::string, double>& defaults_for(const std::string& family) {
    static const std::map<std::string, std::map<std::string, double>> table{
        {"translation", {{"rho0", 0.0}, {"omega", kGoldenMean}, {"eps", 0.0}}},
        {"arnold", {{"alpha", 0.0}, {"tau", 0.0}, {"beta", 0.0}, {"omega", kGoldenMean}, {"eps", 0.0}}},
        {"harper", {{"lambda", 1.0}, {"energy", 0.0}, {"omega", kGoldenMean}, {"eps", 0.0}}},
    };
    const auto it = table.find(family);
    if (it == table.end())
        throw InvalidArgument("unknown family '" + family + "'");
    return it->second;
}

CircleFunction function_of(const FamilySpec& spec, double preset_amplitude) {
    if (spec.function == "table")
        return CircleFunction::tabulated(spec.table);
    return CircleFunction::preset(spec.function, preset_amplitude);
}

}  // namespace

double FamilySpec::param(const std::string& name) const {
    const auto it = params.find(name);
    if (it != params.end())
        return it->second;
    const auto& defaults = defaults_for(family);
    const auto d = defaults.find(name);
    if (d == defaults.end())
        throw InvalidArgument("family '" + family + "' has no parameter '" + name + "'");
    return d->second;
}

FamilySpec FamilySpec::with(const std::string& name, double value) const {
    FamilySpec out = *this;
    out.params[name] = value;
    return out;
}

std::vector<std::string> family_parameters(const std::string& family) {
    std::vector<std::string> out;
    try {
        for (const auto& [name, value] : defaults_for(family))
            out.push_back(name);
    } catch (const InvalidArgument&) {
    }
    return out;
}

QpfLift build_family(const FamilySpec& spec) {
    const auto& defaults = defaults_for(spec.family);
    for (const auto& [name, value] : spec.params) {
        if (!defaults.contains(name))
            throw InvalidArgument("family '" + spec.family + "' has no parameter '" + name + "'");
        if (!std::isfinite(value))
            throw InvalidArgument("parameter '" + name + "' is not finite");
    }
    const double omega = spec.param("omega");

    std::optional<QpfLift> lift;
    if (spec.family == "translation") {
        lift.emplace(make_translation(spec.param("rho0"), omega));
    } else if (spec.family == "arnold") {
        ArnoldParams p{spec.param("alpha"), spec.param("tau"), spec.param("beta"), function_of(spec, 1.0)};
        lift.emplace(make_arnold(p, omega));
    } else {
        const double lambda = spec.param("lambda");
        HarperParams p{function_of(spec, 2.0 * lambda), spec.param("energy"), omega};
        lift.emplace(harper_lift(p));
    }
    const double eps = spec.param("eps");
    return eps == 0.0 ? *lift : perturb(*lift, eps);
}

double Axis::at(std::size_t i) const noexcept {
    if (i + 1 == count)
        return hi;
    return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
}

namespace {

void check_axis(const Axis& axis, const FamilySpec& family) {
    if (axis.count < 2)
        throw InvalidArgument("axis '" + axis.name + "' needs a resolution of at least 2");
    if (!(axis.hi > axis.lo))
        throw InvalidArgument("axis '" + axis.name + "' has a degenerate range");
    family.param(axis.name);
}

}  // namespace

std::vector<SweepPoint> sweep_1d(const SweepSpec& spec) {
    check_axis(spec.axis1, spec.family);
    EstimatorSettings inner = spec.estimator;
    inner.jobs = 1;
    return parallel_map(spec.axis1.count, spec.estimator.jobs, [&](std::size_t i) {
        const double v = spec.axis1.at(i);
        return SweepPoint{v, rotation_number(build_family(spec.family.with(spec.axis1.name, v)), inner)};
    });
}

SweepGrid sweep_2d(const SweepSpec& spec) {
    if (!spec.axis2)
        throw InvalidArgument("2-D sweep needs a second axis");
    check_axis(spec.axis1, spec.family);
    check_axis(*spec.axis2, spec.family);
    const Axis& a1 = spec.axis1;
    const Axis& a2 = *spec.axis2;
    EstimatorSettings inner = spec.estimator;
    inner.jobs = 1;
    SweepGrid grid{a1, a2, {}};
    grid.cells = parallel_map(a1.count * a2.count, spec.estimator.jobs, [&](std::size_t cell) {
        const std::size_t i = cell / a2.count;
        const std::size_t j = cell % a2.count;
        const auto fam = spec.family.with(a1.name, a1.at(i)).with(a2.name, a2.at(j));
        return rotation_number(build_family(fam), inner);
    });
    return grid;
}

std::vector<PlateauReport> detect_plateaus(std::span<const SweepPoint> sweep, const PlateauOptions& options) {
    std::vector<PlateauReport> out;
    const std::size_t n = sweep.size();
    std::size_t start = 0;
    while (start < n) {
        // Pairwise |r_i - r_j| <= e_i + e_j over the run is equivalent to
        // max(r - e) <= min(r + e) after each insertion.
        double max_low = sweep[start].estimate.value - sweep[start].estimate.error_radius;
        double min_high = sweep[start].estimate.value + sweep[start].estimate.error_radius;
        std::size_t end = start + 1;
        while (end < n) {
            const auto& e = sweep[end].estimate;
            const double low = e.value - e.error_radius;
            const double high = e.value + e.error_radius;
            if (low > min_high || high < max_low)
                break;
            max_low = std::max(max_low, low);
            min_high = std::min(min_high, high);
            ++end;
        }
        const std::size_t last = end - 1;
        const double width = sweep[last].param - sweep[start].param;
        if (last > start && width > options.min_width) {
            PlateauReport rep;
            rep.first = start;
            rep.last = last;
            rep.lo = sweep[start].param;
            rep.hi = sweep[last].param;
            double sum = 0.0, err = 0.0;
            for (std::size_t i = start; i <= last; ++i) {
                sum += sweep[i].estimate.value;
                err += sweep[i].estimate.error_radius;
            }
            const double count = static_cast<double>(last - start + 1);
            rep.value = sum / count;
            rep.confidence = width / (2.0 * err / count);
            rep.witness = rational_dependence(rep.value, options.omega, options.tol, options.qmax, options.pmax);
            rep.unwitnessed = !rep.witness && rep.cells() > 3;
            out.push_back(rep);
        }
        start = end;
    }
    return out;
}

namespace {

struct Probe {
    double value;
    double err;
};

Probe probe_at(const FamilySpec& family, const std::string& param, double v, const EstimatorSettings& settings) {
    const auto est = rotation_number(build_family(family.with(param, v)), settings);
    return {est.value, est.error_radius};
}

bool inside(const Probe& p, double target, Edge edge) {
    return edge == Edge::right ? p.value - target <= 2.0 * p.err : p.value - target >= -2.0 * p.err;
}

}  // namespace

BoundaryResult tongue_boundary(const FamilySpec& family, const std::string& param, double target, double lo, double hi,
                               double tol, const EstimatorSettings& settings, Edge edge) {
    if (!(tol > 0.0))
        throw InvalidArgument("tongue_boundary needs tol > 0");
    if (!(hi > lo))
        throw BracketInvalid("bracket must satisfy lo < hi");
    family.param(param);

    // Right edge: inside at lo, outside at hi. Left edge: the reverse.
    const bool lo_in = inside(probe_at(family, param, lo, settings), target, edge);
    const bool hi_in = inside(probe_at(family, param, hi, settings), target, edge);
    const bool ok = edge == Edge::right ? (lo_in && !hi_in) : (!lo_in && hi_in);
    if (!ok)
        throw BracketInvalid("bracket [" + std::to_string(lo) + ", " + std::to_string(hi) +
                             "] does not straddle the tongue edge");

    BoundaryResult res{0.0, lo, hi, target, 0};
    while (res.hi - res.lo > tol) {
        const double mid = 0.5 * (res.lo + res.hi);
        if (mid <= res.lo || mid >= res.hi)
            break;
        const bool mid_in = inside(probe_at(family, param, mid, settings), target, edge);
        if (mid_in == (edge == Edge::right))
            res.lo = mid;
        else
            res.hi = mid;
        ++res.iterations;
    }
    res.param = 0.5 * (res.lo + res.hi);
    return res;
}

BoundaryResult tongue_boundary(const FamilySpec& family, const std::string& param, const RationalRelation& target,
                               double lo, double hi, double tol, const EstimatorSettings& settings, Edge edge) {
    const double omega = family.param("omega");
    const double base = target.value(omega);
    const double anchor = probe_at(family, param, edge == Edge::right ? lo : hi, settings).value;
    const double lifted = base + std::round(anchor - base);
    return tongue_boundary(family, param, lifted, lo, hi, tol, settings, edge);
}

}  // namespace qpf
