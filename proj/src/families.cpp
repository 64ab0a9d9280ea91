#include "qpf/families.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "qpf/errors.hpp"

namespace qpf {

CircleFunction::CircleFunction(Kind kind, double amplitude, std::vector<double> samples)
    : kind_(kind), amplitude_(amplitude), samples_(std::move(samples)) {}

CircleFunction CircleFunction::zero() { return CircleFunction(Kind::zero, 0.0, {}); }

CircleFunction CircleFunction::cosine(double amplitude) {
    return CircleFunction(Kind::cosine, amplitude, {});
}

CircleFunction CircleFunction::sine(double amplitude) {
    return CircleFunction(Kind::sine, amplitude, {});
}

CircleFunction CircleFunction::tabulated(std::vector<double> samples) {
    if (samples.empty())
        throw InvalidArgument("tabulated function needs at least one sample");
    for (double v : samples)
        if (!std::isfinite(v))
            throw InvalidArgument("tabulated function has a non-finite sample");
    return CircleFunction(Kind::table, 1.0, std::move(samples));
}

CircleFunction CircleFunction::preset(const std::string& name, double amplitude) {
    if (name == "zero")
        return zero();
    if (name == "cos")
        return cosine(amplitude);
    if (name == "sin")
        return sine(amplitude);
    throw InvalidArgument("unknown function preset '" + name + "'");
}

double CircleFunction::operator()(double theta) const noexcept {
    switch (kind_) {
    case Kind::zero:
        return 0.0;
    case Kind::cosine:
        return amplitude_ * std::cos(kTwoPi * theta);
    case Kind::sine:
        return amplitude_ * std::sin(kTwoPi * theta);
    case Kind::table:
        break;
    }
    const std::size_t n = samples_.size();
    const double s = wrap_phase(theta) * static_cast<double>(n);
    std::size_t i = static_cast<std::size_t>(s);
    if (i >= n)
        i = n - 1;
    const double t = s - static_cast<double>(i);
    const double a = samples_[i];
    const double b = samples_[(i + 1) % n];
    return a + t * (b - a);
}

double CircleFunction::lipschitz() const noexcept {
    switch (kind_) {
    case Kind::zero:
        return 0.0;
    case Kind::cosine:
    case Kind::sine:
        return kTwoPi * std::abs(amplitude_);
    case Kind::table:
        break;
    }
    const std::size_t n = samples_.size();
    double slope = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        slope = std::max(slope, std::abs(samples_[(i + 1) % n] - samples_[i]));
    return slope * static_cast<double>(n);
}

double CircleFunction::max_abs() const noexcept {
    switch (kind_) {
    case Kind::zero:
        return 0.0;
    case Kind::cosine:
    case Kind::sine:
        return std::abs(amplitude_);
    case Kind::table:
        break;
    }
    double m = 0.0;
    for (double v : samples_)
        m = std::max(m, std::abs(v));
    return m;
}

std::string CircleFunction::name() const {
    switch (kind_) {
    case Kind::zero:
        return "zero";
    case Kind::cosine:
        return "cos";
    case Kind::sine:
        return "sin";
    case Kind::table:
        return "table";
    }
    return "table";
}

QpfLift::QpfLift(double omega, FiberMap fiber, FamilyTag tag, double theta_lipschitz)
    : omega_(omega),
      fiber_(std::move(fiber)),
      tag_(std::move(tag)),
      theta_lipschitz_(theta_lipschitz) {
    if (!std::isfinite(omega))
        throw InvalidArgument("omega must be finite");
    if (!fiber_)
        throw InvalidArgument("fiber map is empty");
}

QpfLift make_translation(double rho0, double omega) {
    FamilyTag tag{"translation", {{"rho0", rho0}, {"omega", omega}}, ""};
    return QpfLift(
        omega, [rho0](double, double x) { return x + rho0; }, std::move(tag), 0.0);
}

QpfLift make_arnold(const ArnoldParams& params, double omega) {
    if (!(params.alpha >= 0.0 && params.alpha <= 1.0))
        throw AlphaOutOfRange("alpha must lie in [0, 1], got " + std::to_string(params.alpha));
    FamilyTag tag{"arnold",
                  {{"alpha", params.alpha},
                   {"tau", params.tau},
                   {"beta", params.beta},
                   {"omega", omega}},
                  params.forcing.name()};
    const double amp = params.alpha / kTwoPi;
    const double tau = params.tau;
    const double beta = params.beta;
    const double lip = std::abs(beta) * params.forcing.lipschitz();
    return QpfLift(
        omega,
        [amp, tau, beta, g = params.forcing](double theta, double x) {
            return x + tau + amp * std::sin(kTwoPi * x) + beta * g(theta);
        },
        std::move(tag), lip);
}

OrbitSegment iterate(const QpfLift& lift, FiberPoint start, std::size_t n) {
    OrbitSegment seg;
    seg.start = start;
    seg.samples.reserve(n + 1);
    const double omega = lift.omega();
    WoundHeight x(start.x);
    seg.samples.push_back({phase_at(start.theta, omega, 0), start.x});
    for (std::size_t k = 0; k < n; ++k) {
        x.step(lift, phase_at(start.theta, omega, k));
        seg.samples.push_back({phase_at(start.theta, omega, k + 1), x.value()});
    }
    return seg;
}

double iterate_fiber(const QpfLift& lift, FiberPoint start, std::size_t n) {
    const double omega = lift.omega();
    WoundHeight x(start.x);
    for (std::size_t k = 0; k < n; ++k)
        x.step(lift, phase_at(start.theta, omega, k));
    return x.value();
}

}  // namespace qpf
