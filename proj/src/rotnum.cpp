#include "qpf/rotnum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "qpf/errors.hpp"
#include "qpf/parallel.hpp"

namespace qpf {

std::string to_string(EstimatorMethod m) { return m == EstimatorMethod::plain ? "plain" : "weighted"; }

EstimatorMethod parse_estimator_method(const std::string& s) {
    if (s == "plain")
        return EstimatorMethod::plain;
    if (s == "weighted")
        return EstimatorMethod::weighted;
    throw InvalidArgument("unknown estimator method '" + s + "'");
}

std::vector<FiberPoint> make_seeds(std::size_t count, std::uint64_t seed) {
    // splitmix64
    std::uint64_t state = seed;
    auto next = [&state] {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    auto unit = [&] { return static_cast<double>(next() >> 11) * 0x1.0p-53; };
    std::vector<FiberPoint> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double theta = unit();
        const double x = unit();
        out.push_back({theta, x});
    }
    return out;
}

std::vector<FiberPoint> default_seeds() { return {{0.0, 0.0}, {0.25, 0.5}, {0.5, 0.25}, {0.75, 0.75}}; }

QpfLift perturb(const QpfLift& lift, double eps) {
    FamilyTag tag = lift.tag();
    tag.params["eps"] += eps;
    return QpfLift(
        lift.omega(), [base = lift.fiber(), eps](double theta, double x) { return base(theta, x) + eps; },
        std::move(tag), lift.theta_lipschitz());
}

namespace {

struct SeedRun {
    double plain = 0.0;
    double weighted = 0.0;
    double weighted_half = 0.0;
};

// exp(-1/(t(1-t))) on (0,1)
double bump(double t) { return std::exp(-1.0 / (t * (1.0 - t))); }

SeedRun run_seed(const QpfLift& lift, FiberPoint seed, std::size_t n, EstimatorMethod method) {
    const double omega = lift.omega();
    SeedRun r;
    WoundHeight x(seed.x);
    if (method == EstimatorMethod::plain || n < 2) {
        for (std::size_t k = 0; k < n; ++k)
            x.step(lift, phase_at(seed.theta, omega, k));
        if (!x.finite())
            throw NonFinite("orbit left the finite range");
        r.plain = x.displacement(seed.x) / static_cast<double>(n);
        r.weighted = r.weighted_half = r.plain;
        return r;
    }

    const std::size_t half = n / 2;
    const double inv_n = 1.0 / static_cast<double>(n);
    const double inv_half = 1.0 / static_cast<double>(half);
    double sum = 0.0, wsum = 0.0, hsum = 0.0, hwsum = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double step = x.step(lift, phase_at(seed.theta, omega, k));
        const double w = bump((static_cast<double>(k) + 0.5) * inv_n);
        sum += w * step;
        wsum += w;
        if (k < half) {
            const double wh = bump((static_cast<double>(k) + 0.5) * inv_half);
            hsum += wh * step;
            hwsum += wh;
        }
    }
    if (!x.finite() || !std::isfinite(sum))
        throw NonFinite("orbit left the finite range");
    r.plain = x.displacement(seed.x) * inv_n;
    r.weighted = sum / wsum;
    r.weighted_half = hsum / hwsum;
    return r;
}

}  // namespace

RotationEstimate rotation_number(const QpfLift& lift, std::size_t n, std::span<const FiberPoint> seeds,
                                 EstimatorMethod method, std::size_t jobs) {
    if (n < 1)
        throw InvalidArgument("rotation_number needs n >= 1");
    if (seeds.empty())
        throw InvalidArgument("rotation_number needs at least one seed");

    const auto runs =
        parallel_map(seeds.size(), jobs, [&](std::size_t i) { return run_seed(lift, seeds[i], n, method); });

    RotationEstimate est;
    est.n_used = n;
    est.seeds.assign(seeds.begin(), seeds.end());
    est.method = method;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    double sum = 0.0;
    double drift = 0.0;
    for (const auto& r : runs) {
        const double v = method == EstimatorMethod::plain ? r.plain : r.weighted;
        est.per_seed.push_back(v);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        sum += v;
        drift = std::max(drift, std::abs(r.weighted - r.weighted_half));
    }
    est.value = sum / static_cast<double>(runs.size());
    if (method == EstimatorMethod::plain)
        est.error_radius = (hi - lo) + 1.0 / static_cast<double>(n);
    else
        est.error_radius = (hi - lo) + drift + 1e-12 * (1.0 + std::abs(est.value));
    return est;
}

RotationEstimate rotation_number(const QpfLift& lift, const EstimatorSettings& settings) {
    return rotation_number(lift, settings.n, settings.seeds, settings.method, settings.jobs);
}

std::vector<DeviationSample> deviations(const QpfLift& lift, double rho, FiberPoint start,
                                        std::span<const std::size_t> n_list) {
    std::vector<DeviationSample> out;
    if (n_list.empty())
        return out;
    std::vector<std::size_t> sorted(n_list.begin(), n_list.end());
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

    std::map<std::size_t, double> at;
    const double omega = lift.omega();
    WoundHeight x(start.x);
    std::size_t k = 0;
    for (std::size_t target : sorted) {
        for (; k < target; ++k)
            x.step(lift, phase_at(start.theta, omega, k));
        if (!x.finite())
            throw NonFinite("orbit left the finite range");
        at[target] = x.displacement(start.x) - static_cast<double>(target) * rho;
    }
    out.reserve(n_list.size());
    for (std::size_t n : n_list)
        out.push_back({n, start.theta, start.x, at[n]});
    return out;
}

std::string to_string(BoundednessVerdict v) {
    switch (v) {
    case BoundednessVerdict::bounded_like:
        return "bounded_like";
    case BoundednessVerdict::unbounded_like:
        return "unbounded_like";
    case BoundednessVerdict::inconclusive:
        break;
    }
    return "inconclusive";
}

BoundednessReport boundedness_diagnostic(const QpfLift& lift, std::size_t n_max,
                                         std::span<const std::size_t> growth_window,
                                         const BoundednessOptions& options) {
    std::vector<std::size_t> scales(growth_window.begin(), growth_window.end());
    if (scales.empty()) {
        std::size_t s = n_max >= 1024 ? 1024 : 2;
        for (; s <= n_max; s *= 2)
            scales.push_back(s);
        if (scales.empty() || scales.back() != n_max)
            scales.push_back(n_max);
    }
    std::sort(scales.begin(), scales.end());
    scales.erase(std::unique(scales.begin(), scales.end()), scales.end());
    if (scales.back() > n_max)
        throw InvalidArgument("n_max must cover the largest growth window");

    BoundednessReport rep;
    rep.rho = options.rho ? *options.rho
                          : rotation_number(lift, n_max, default_seeds(), EstimatorMethod::weighted).value;
    rep.scales = scales;

    const double omega = lift.omega();
    const FiberPoint start = options.start;
    WoundHeight x(start.x);
    double sup = 0.0, inf = 0.0;
    std::size_t m = 0;
    for (std::size_t scale : scales) {
        for (; m < scale; ++m) {
            x.step(lift, phase_at(start.theta, omega, m));
            const double d = x.displacement(start.x) - static_cast<double>(m + 1) * rep.rho;
            sup = std::max(sup, d);
            inf = std::min(inf, d);
        }
        if (!x.finite())
            throw NonFinite("orbit left the finite range");
        rep.sup_envelope.push_back(sup);
        rep.inf_envelope.push_back(inf);
        rep.abs_envelope.push_back(std::max(sup, -inf));
    }

    const auto& env = rep.abs_envelope;
    auto ratio = [&](std::size_t j) {
        if (env[j - 1] > 0.0)
            return env[j] / env[j - 1];
        return env[j] > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
    };
    const std::size_t count = env.size();
    if (env.back() <= 1e-9) {
        rep.verdict = BoundednessVerdict::bounded_like;
    } else if (count > options.growth_scales && [&] {
                   for (std::size_t j = count - options.growth_scales; j < count; ++j)
                       if (ratio(j) < options.growth_ratio)
                           return false;
                   return true;
               }()) {
        rep.verdict = BoundednessVerdict::unbounded_like;
    } else if (count >= 3 && ratio(count - 1) <= options.saturation_ratio &&
               ratio(count - 2) <= options.saturation_ratio) {
        rep.verdict = BoundednessVerdict::bounded_like;
    } else {
        rep.verdict = BoundednessVerdict::inconclusive;
    }
    return rep;
}

std::string to_string(MonotonicityKind k) {
    switch (k) {
    case MonotonicityKind::strictly_monotone:
        return "strictly_monotone";
    case MonotonicityKind::locked:
        return "locked";
    case MonotonicityKind::one_sided_upper:
        return "one_sided_upper";
    case MonotonicityKind::one_sided_lower:
        return "one_sided_lower";
    case MonotonicityKind::inconclusive:
        break;
    }
    return "inconclusive";
}

MonotonicityKind parse_monotonicity_kind(const std::string& s) {
    for (auto k : {MonotonicityKind::strictly_monotone, MonotonicityKind::locked, MonotonicityKind::one_sided_upper,
                   MonotonicityKind::one_sided_lower, MonotonicityKind::inconclusive})
        if (to_string(k) == s)
            return k;
    throw InvalidArgument("unknown monotonicity kind '" + s + "'");
}

std::vector<double> symmetric_epsilon_grid(int first_exponent, int last_exponent) {
    std::vector<double> out{0.0};
    for (int e = std::min(first_exponent, last_exponent); e <= std::max(first_exponent, last_exponent); ++e) {
        const double v = std::pow(10.0, e);
        out.push_back(v);
        out.push_back(-v);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<double> default_epsilon_grid() { return symmetric_epsilon_grid(-6, -1); }

MonotonicityVerdict monotonicity_probe(const QpfLift& lift, std::span<const double> eps_list,
                                       const EstimatorSettings& settings) {
    std::vector<double> eps(eps_list.begin(), eps_list.end());
    std::sort(eps.begin(), eps.end());
    eps.erase(std::unique(eps.begin(), eps.end()), eps.end());
    const auto zero = std::find(eps.begin(), eps.end(), 0.0);
    if (zero == eps.end())
        throw InvalidArgument("epsilon grid must contain 0");
    for (double e : eps)
        if (std::find(eps.begin(), eps.end(), -e) == eps.end())
            throw InvalidArgument("epsilon grid must be symmetric about 0");
    if (eps.size() < 3)
        throw InvalidArgument("epsilon grid needs at least one nonzero value");
    const std::size_t i0 = static_cast<std::size_t>(zero - eps.begin());

    EstimatorSettings inner = settings;
    inner.jobs = 1;
    auto estimates = parallel_map(eps.size(), settings.jobs,
                                  [&](std::size_t i) { return rotation_number(perturb(lift, eps[i]), inner); });

    MonotonicityVerdict verdict;
    double max_err = 0.0;
    for (std::size_t i = 0; i < eps.size(); ++i) {
        max_err = std::max(max_err, estimates[i].error_radius);
        verdict.epsilon_grid.push_back({eps[i], std::move(estimates[i])});
    }
    double min_spacing = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < eps.size(); ++i)
        min_spacing = std::min(min_spacing, eps[i] - eps[i - 1]);
    if (min_spacing < 4.0 * max_err)
        throw GridTooCoarse("epsilon spacing " + std::to_string(min_spacing) + " is below 4 error radii (" +
                            std::to_string(max_err) + "); raise n or widen the grid");

    const auto& g = verdict.epsilon_grid;
    auto same = [&](std::size_t i, std::size_t j) {
        return std::abs(g[i].estimate.value - g[j].estimate.value) <=
               g[i].estimate.error_radius + g[j].estimate.error_radius;
    };
    std::size_t hi = i0;
    while (hi + 1 < g.size() && same(hi + 1, i0))
        ++hi;
    std::size_t lo = i0;
    while (lo > 0 && same(lo - 1, i0))
        --lo;

    if (lo < i0 && hi > i0) {
        verdict.kind = MonotonicityKind::locked;
    } else if (hi > i0) {
        verdict.kind = MonotonicityKind::one_sided_upper;
    } else if (lo < i0) {
        verdict.kind = MonotonicityKind::one_sided_lower;
    } else {
        bool strict = true;
        for (std::size_t i = 1; i < g.size(); ++i)
            if (g[i].estimate.value - g[i - 1].estimate.value <=
                g[i].estimate.error_radius + g[i - 1].estimate.error_radius)
                strict = false;
        verdict.kind = strict ? MonotonicityKind::strictly_monotone : MonotonicityKind::inconclusive;
    }
    if (lo < i0 || hi > i0)
        verdict.plateau = std::make_pair(g[lo].eps, g[hi].eps);
    return verdict;
}

double RationalRelation::value(double omega) const {
    const double qd = static_cast<double>(q);
    return wrap_phase(static_cast<double>(k) / qd * omega + static_cast<double>(l) / (static_cast<double>(p) * qd));
}

double circle_distance(double a, double b) {
    const double d = wrap_phase(a - b);
    return std::min(d, 1.0 - d);
}

std::optional<RationalRelation> rational_dependence(double rho, double omega, double tol, int qmax, int pmax,
                                                    int kmax) {
    if (!(tol > 0.0))
        throw InvalidArgument("rational_dependence needs tol > 0");
    if (qmax < 1 || pmax < 1)
        throw InvalidArgument("rational_dependence needs qmax, pmax >= 1");
    if (kmax < 0)
        kmax = qmax;
    for (long q = 1; q <= qmax; ++q) {
        for (long p = 1; p <= pmax; ++p) {
            const long pq = p * q;
            for (long ak = 0; ak <= kmax; ++ak) {
                for (long k : {ak, -ak}) {
                    if (ak == 0 && k < 0)
                        continue;
                    for (long l = 0; l < pq; ++l) {
                        RationalRelation rel{k, l, p, q, 0.0};
                        const double r = circle_distance(rho, rel.value(omega));
                        if (r <= tol) {
                            rel.residual = r;
                            return rel;
                        }
                    }
                }
            }
        }
    }
    return std::nullopt;
}

}  // namespace qpf
