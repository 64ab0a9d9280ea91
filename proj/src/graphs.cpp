#include "qpf/graphs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include "qpf/errors.hpp"

namespace qpf {

GraphOverTheta::GraphOverTheta(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty())
        throw InvalidArgument("graph needs at least one sample");
    for (double v : values_)
        if (!std::isfinite(v))
            throw NonFinite("graph sample is not finite");
}

GraphOverTheta GraphOverTheta::constant(std::size_t n, double value) {
    return GraphOverTheta(std::vector<double>(n, value));
}

GraphOverTheta GraphOverTheta::sample(std::size_t n, const std::function<double(double)>& f) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = f(static_cast<double>(i) / static_cast<double>(n));
    return GraphOverTheta(std::move(v));
}

double GraphOverTheta::operator()(double theta) const noexcept {
    const std::size_t n = values_.size();
    const double s = wrap_phase(theta) * static_cast<double>(n);
    std::size_t i = static_cast<std::size_t>(s);
    if (i >= n)
        i = n - 1;
    const double t = s - static_cast<double>(i);
    if (t == 0.0)
        return values_[i];
    const double a = values_[i];
    const double b = values_[(i + 1) % n];
    return a + t * (b - a);
}

double GraphOverTheta::min() const noexcept { return *std::min_element(values_.begin(), values_.end()); }

double GraphOverTheta::max() const noexcept { return *std::max_element(values_.begin(), values_.end()); }

GraphOverTheta GraphOverTheta::refined() const {
    const std::size_t n = values_.size();
    std::vector<double> v(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        v[2 * i] = values_[i];
        v[2 * i + 1] = 0.5 * (values_[i] + values_[(i + 1) % n]);
    }
    return GraphOverTheta(std::move(v));
}

namespace {

template <class Pick>
std::vector<double> window_filter(std::span<const double> in, std::size_t radius, Pick pick) {
    const std::size_t n = in.size();
    std::vector<double> out(in.begin(), in.end());
    if (radius == 0 || n == 1)
        return out;
    const std::size_t r = std::min(radius, n);
    for (std::size_t i = 0; i < n; ++i) {
        double v = in[i];
        for (std::size_t d = 1; d <= r; ++d) {
            v = pick(v, in[(i + d) % n]);
            v = pick(v, in[(i + n - d) % n]);
        }
        out[i] = v;
    }
    return out;
}

double take_max(double a, double b) { return std::max(a, b); }
double take_min(double a, double b) { return std::min(a, b); }

}  // namespace

GraphOverTheta usc_envelope(const GraphOverTheta& phi, std::size_t radius) {
    auto dilated = window_filter(phi.values(), radius, take_max);
    return GraphOverTheta(window_filter(dilated, radius, take_min));
}

GraphOverTheta lsc_envelope(const GraphOverTheta& phi, std::size_t radius) {
    auto eroded = window_filter(phi.values(), radius, take_min);
    return GraphOverTheta(window_filter(eroded, radius, take_max));
}

GraphOverTheta push_graph(const QpfLift& lift, const GraphOverTheta& gamma) {
    const std::size_t n = gamma.size();
    const double omega = lift.omega();
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double pre = wrap_phase(gamma.theta(i) - omega);
        out[i] = lift(pre, gamma(pre));
    }
    return GraphOverTheta(std::move(out));
}

std::string to_string(LimitStatus s) {
    switch (s) {
    case LimitStatus::converged:
        return "converged";
    case LimitStatus::max_iter:
        return "max_iter";
    case LimitStatus::not_monotone:
        break;
    }
    return "not_monotone";
}

GraphLimit iterate_graph_to_limit(const QpfLift& lift, const GraphOverTheta& gamma0, double tol, std::size_t n_max) {
    if (!(tol > 0.0))
        throw InvalidArgument("iterate_graph_to_limit needs tol > 0");
    const std::size_t n = gamma0.size();
    GraphLimit out{gamma0};

    GraphOverTheta current = gamma0;
    GraphOverTheta next = push_graph(lift, current);
    auto step_stats = [&](const GraphOverTheta& a, const GraphOverTheta& b) {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = b[i] - a[i];
            lo = std::min(lo, d);
            hi = std::max(hi, d);
        }
        return std::make_pair(lo, hi);
    };

    auto [lo, hi] = step_stats(current, next);
    double increment = std::max(hi, -lo);
    if (increment < tol) {
        out.status = LimitStatus::converged;
        out.last_increment = increment;
        return out;
    }
    if (lo >= 0.0)
        out.direction = 1;
    else if (hi <= 0.0)
        out.direction = -1;
    else {
        out.status = LimitStatus::not_monotone;
        out.last_increment = increment;
        return out;
    }

    // Allowance for rounding in the fiber map and interpolation.
    const double slack = 1e-12;
    std::size_t steps = 1;
    while (true) {
        current = std::move(next);
        if (increment < tol) {
            out.status = LimitStatus::converged;
            break;
        }
        if (steps >= n_max) {
            out.status = LimitStatus::max_iter;
            break;
        }
        next = push_graph(lift, current);
        std::tie(lo, hi) = step_stats(current, next);
        increment = std::max(hi, -lo);
        if ((out.direction > 0 && lo < -slack) || (out.direction < 0 && hi > slack)) {
            out.status = LimitStatus::not_monotone;
            break;
        }
        ++steps;
    }
    out.steps = steps;
    out.last_increment = increment;
    double drift = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        drift += current[i] - gamma0[i];
    out.growth_rate = drift / static_cast<double>(n) / static_cast<double>(steps);
    out.graph = std::move(current);
    return out;
}

namespace {

// min over i of sign * (F^n(gamma)(theta_i) - gamma(theta_i))
double mapped_margin(const QpfLift& lift, const GraphOverTheta& gamma, std::size_t n, double sign) {
    const double omega = lift.omega();
    double margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < gamma.size(); ++i) {
        const double start = wrap_phase(gamma.theta(i) - static_cast<double>(n) * omega);
        const double image = iterate_fiber(lift, {start, gamma(start)}, n);
        margin = std::min(margin, sign * (image - gamma[i]));
    }
    return margin;
}

}  // namespace

double below_margin(const QpfLift& lift, const GraphOverTheta& gamma, std::size_t n) {
    return mapped_margin(lift, gamma, n, -1.0);
}

double above_margin(const QpfLift& lift, const GraphOverTheta& gamma, std::size_t n) {
    return mapped_margin(lift, gamma, n, 1.0);
}

Strip::Strip(GraphOverTheta lower, GraphOverTheta upper) : lower_(std::move(lower)), upper_(std::move(upper)) {
    if (lower_.size() != upper_.size())
        throw GridMismatch("strip bounds live on different grids");
    for (std::size_t i = 0; i < lower_.size(); ++i)
        if (lower_[i] > upper_[i])
            throw InvalidArgument("strip lower bound exceeds upper bound at theta = " +
                                  std::to_string(lower_.theta(i)));
}

double Strip::max_width() const noexcept {
    double w = 0.0;
    for (std::size_t i = 0; i < size(); ++i)
        w = std::max(w, width(i));
    return w;
}

std::string to_string(StripOrder o) {
    switch (o) {
    case StripOrder::precsim:
        return "precsim";
    case StripOrder::prec:
        return "prec";
    case StripOrder::incomparable:
        break;
    }
    return "incomparable";
}

StripOrder strip_order(const Strip& a, const Strip& b) {
    if (a.size() != b.size())
        throw GridMismatch("strips live on different grids");
    bool prec = true, precsim = true;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!(a.upper()[i] < b.lower()[i]))
            prec = false;
        if (!(a.lower()[i] <= b.lower()[i] && a.upper()[i] <= b.upper()[i]))
            precsim = false;
    }
    if (prec)
        return StripOrder::prec;
    return precsim ? StripOrder::precsim : StripOrder::incomparable;
}

double strip_gap(const Strip& a, const Strip& b) {
    if (a.size() != b.size())
        throw GridMismatch("strips live on different grids");
    double gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < a.size(); ++i)
        gap = std::min(gap, b.lower()[i] - a.upper()[i]);
    return gap;
}

PinchMeasure pinch_measure(const Strip& strip) {
    PinchMeasure m{strip.width(0), strip.lower().theta(0), 0};
    for (std::size_t i = 1; i < strip.size(); ++i) {
        if (strip.width(i) < m.min_width) {
            m.min_width = strip.width(i);
            m.theta = strip.lower().theta(i);
            m.index = i;
        }
    }
    return m;
}

StripExtraction extract_strip(const QpfLift& lift, const GraphOverTheta& lower_start,
                              const GraphOverTheta& upper_start, double tol, std::size_t n_max) {
    StripExtraction out{iterate_graph_to_limit(lift, lower_start, tol, n_max),
                        iterate_graph_to_limit(lift, upper_start, tol, n_max),
                        std::nullopt};
    if (out.lower.status != LimitStatus::converged || out.upper.status != LimitStatus::converged)
        return out;
    const auto& lo = out.lower.graph;
    const auto& hi = out.upper.graph;
    if (lo.size() != hi.size())
        throw GridMismatch("start curves live on different grids");
    // Limits that agree up to the iteration tolerance form a curve.
    std::vector<double> upper(hi.values().begin(), hi.values().end());
    for (std::size_t i = 0; i < lo.size(); ++i) {
        if (lo[i] > upper[i] + tol)
            return out;
        upper[i] = std::max(upper[i], lo[i]);
    }
    out.strip.emplace(lo, GraphOverTheta(std::move(upper)));
    return out;
}

std::optional<AnnulusWitness> annulus_witness(const QpfLift& lift, const AnnulusOptions& options) {
    const std::size_t m = options.candidates;
    const std::size_t grid = options.grid;
    if (m < 2 || grid < 1)
        throw InvalidArgument("annulus_witness needs at least two candidates and a nonempty grid");

    std::vector<double> heights(m);
    std::vector<GraphOverTheta> curves;
    curves.reserve(m);
    for (std::size_t j = 0; j < m; ++j) {
        heights[j] = static_cast<double>(j) / static_cast<double>(m);
        curves.push_back(GraphOverTheta::constant(grid, heights[j]));
    }

    for (std::size_t n = 1; n <= options.max_iterate; ++n) {
        std::vector<double> below(m, -1.0), above(m, -1.0);
        for (std::size_t j = 0; j < m; ++j) {
            curves[j] = push_graph(lift, curves[j]);
            below[j] = heights[j] - curves[j].max();
            above[j] = curves[j].min() - heights[j];
        }

        // (score, minus index, plus index); best score first, then lowest indices.
        std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;
        for (std::size_t a = 0; a < m; ++a) {
            if (!(above[a] > options.strict_tol))
                continue;
            for (std::size_t b = 0; b < m; ++b) {
                if (b == a || !(below[b] > options.strict_tol))
                    continue;
                pairs.emplace_back(-std::min(above[a], below[b]), a, b);
            }
        }
        std::sort(pairs.begin(), pairs.end());

        for (const auto& [score, a, b] : pairs) {
            const double lo = heights[a];
            const double hi = heights[b] > lo ? heights[b] : heights[b] + 1.0;
            AnnulusWitness w{GraphOverTheta::constant(grid, hi), GraphOverTheta::constant(grid, lo), n};
            w.margin_plus = below_margin(lift, w.gamma_plus, n);
            w.margin_minus = above_margin(lift, w.gamma_minus, n);
            if (!(w.margin_plus > options.strict_tol && w.margin_minus > options.strict_tol))
                continue;
            w.refined_margin_plus = below_margin(lift, w.gamma_plus.refined(), n);
            w.refined_margin_minus = above_margin(lift, w.gamma_minus.refined(), n);
            if (!(w.refined_margin_plus > options.strict_tol && w.refined_margin_minus > options.strict_tol))
                continue;
            return w;
        }
    }
    return std::nullopt;
}

}  // namespace qpf
