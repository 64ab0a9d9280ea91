#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace qpf {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// (sqrt(5) - 1) / 2
inline constexpr double kGoldenMean = 0.61803398874989484820;

// Reduces a phase to [0, 1).
inline double wrap_phase(double theta) noexcept {
    double r = theta - std::floor(theta);
    return r >= 1.0 ? 0.0 : r;
}

// theta0 + k*omega mod 1, computed from scratch at every k so that phase
// error stays at the level of one rounding of k*omega instead of growing
// with the number of accumulated additions.
inline double phase_at(double theta0, double omega, std::uint64_t k) noexcept {
    return wrap_phase(std::fma(static_cast<double>(k), omega, theta0));
}

struct FiberPoint {
    double theta = 0.0;
    double x = 0.0;

    friend bool operator==(const FiberPoint&, const FiberPoint&) = default;
};

// A continuous function on the circle: either a named trigonometric preset
// or a periodic table sampled at i/N and linearly interpolated.
class CircleFunction {
public:
    enum class Kind { zero, cosine, sine, table };

    static CircleFunction zero();
    // amplitude * cos(2 pi theta)
    static CircleFunction cosine(double amplitude = 1.0);
    static CircleFunction sine(double amplitude = 1.0);
    static CircleFunction tabulated(std::vector<double> samples);
    // Looks up "zero", "cos" or "sin".
    static CircleFunction preset(const std::string& name, double amplitude = 1.0);

    double operator()(double theta) const noexcept;

    // Lipschitz constant in theta; used for the continuity modulus of a lift.
    double lipschitz() const noexcept;
    double max_abs() const noexcept;

    Kind kind() const noexcept { return kind_; }
    double amplitude() const noexcept { return amplitude_; }
    const std::vector<double>& samples() const noexcept { return samples_; }
    std::string name() const;

private:
    CircleFunction(Kind kind, double amplitude, std::vector<double> samples);

    Kind kind_;
    double amplitude_;
    std::vector<double> samples_;
};

// Identifier plus parameter record; enough to rebuild the lift.
struct FamilyTag {
    std::string name;
    std::map<std::string, double> params;
    std::string function;  // forcing or potential preset, empty if unused
};

// Lift F of a quasiperiodically forced circle homeomorphism,
// (theta, x) -> (theta + omega, F_theta(x)) with F_theta(x + 1) = F_theta(x) + 1
// and every F_theta strictly increasing.
//
// Immutable after construction. The fiber map must be pure, so copies can be
// shared freely across threads.
class QpfLift {
public:
    using FiberMap = std::function<double(double theta, double x)>;

    QpfLift(double omega, FiberMap fiber, FamilyTag tag, double theta_lipschitz);

    double omega() const noexcept { return omega_; }
    const FamilyTag& tag() const noexcept { return tag_; }

    double operator()(double theta, double x) const { return fiber_(theta, x); }

    // Upper bound on |F_theta(x) - F_theta'(x)| for |theta - theta'| <= dtheta
    // (circle distance).
    double theta_modulus(double dtheta) const noexcept { return theta_lipschitz_ * dtheta; }
    double theta_lipschitz() const noexcept { return theta_lipschitz_; }

    const FiberMap& fiber() const noexcept { return fiber_; }

private:
    double omega_;
    FiberMap fiber_;
    FamilyTag tag_;
    double theta_lipschitz_;
};

struct ArnoldParams {
    double alpha = 0.0;
    double tau = 0.0;
    double beta = 0.0;
    CircleFunction forcing = CircleFunction::cosine();
};

// (theta, x) -> (theta + omega, x + rho0)
QpfLift make_translation(double rho0, double omega = kGoldenMean);

// x -> x + tau + alpha/(2 pi) sin(2 pi x) + beta g(theta).
// Throws AlphaOutOfRange unless 0 <= alpha <= 1.
QpfLift make_arnold(const ArnoldParams& params, double omega = kGoldenMean);

// Orbit height stored as whole turns plus a part in [0,1). By periodicity of
// the lift the fiber map only ever sees arguments in [0,1), so rounding does
// not grow with |x| along long orbits.
class WoundHeight {
public:
    explicit WoundHeight(double x) : turns_(std::floor(x)), frac_(x - turns_) {}
    // Advances one step and returns F(theta, x) - x.
    double step(const QpfLift& lift, double theta) {
        const double y = lift(theta, frac_);
        const double k = std::floor(y);
        const double inc = y - frac_;
        turns_ += k;
        frac_ = y - k;
        return inc;
    }
    double value() const noexcept { return turns_ + frac_; }
    // value() - x0 without cancellation in the integer part.
    double displacement(double x0) const noexcept {
        const double t0 = std::floor(x0);
        return (turns_ - t0) + (frac_ - (x0 - t0));
    }
    bool finite() const noexcept { return std::isfinite(turns_) && std::isfinite(frac_); }

private:
    double turns_;
    double frac_;
};

struct OrbitSegment {
    FiberPoint start;
    std::vector<FiberPoint> samples;  // samples[0] == start, x unreduced

    std::size_t length() const noexcept { return samples.empty() ? 0 : samples.size() - 1; }
    const FiberPoint& back() const { return samples.back(); }
};

OrbitSegment iterate(const QpfLift& lift, FiberPoint start, std::size_t n);

// F^n_theta0(x0) without storing the orbit.
double iterate_fiber(const QpfLift& lift, FiberPoint start, std::size_t n);

}  // namespace qpf
