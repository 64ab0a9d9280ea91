#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qpf/families.hpp"

namespace qpf {

enum class EstimatorMethod { plain, weighted };

std::string to_string(EstimatorMethod m);
EstimatorMethod parse_estimator_method(const std::string& s);

// Fibered rotation number estimate rho(F) in lift coordinates (not reduced
// mod 1).
struct RotationEstimate {
    double value = 0.0;
    double error_radius = 0.0;
    std::size_t n_used = 0;
    std::vector<FiberPoint> seeds;
    EstimatorMethod method = EstimatorMethod::plain;
    std::vector<double> per_seed;  // one estimate per seed, same order as seeds

    friend bool operator==(const RotationEstimate&, const RotationEstimate&) = default;
};

// Seeds spread over [0,1)^2 by a splitmix-style generator; bit-reproducible
// across platforms for a given seed.
std::vector<FiberPoint> make_seeds(std::size_t count, std::uint64_t seed);

// The four seeds used when nothing else is specified.
std::vector<FiberPoint> default_seeds();

struct EstimatorSettings {
    std::size_t n = 100000;
    std::vector<FiberPoint> seeds = default_seeds();
    EstimatorMethod method = EstimatorMethod::plain;
    std::size_t jobs = 1;
};

// F_eps: (theta, x) -> (theta + omega, F_theta(x) + eps).
QpfLift perturb(const QpfLift& lift, double eps);

// Plain method: mean over seeds of (F^n_theta(x) - x)/n, with
//   error_radius = (max - min over seeds) + 1/n.
// Weighted method: smooth-bump weighted Birkhoff average of the increments
// x_{k+1} - x_k, with
//   error_radius = (max - min over seeds) + max |full - first half| + 1e-12 (1 + |value|).
// Throws NonFinite if an orbit overflows.
RotationEstimate rotation_number(const QpfLift& lift, std::size_t n, std::span<const FiberPoint> seeds,
                                 EstimatorMethod method = EstimatorMethod::plain, std::size_t jobs = 1);
RotationEstimate rotation_number(const QpfLift& lift, const EstimatorSettings& settings);

struct DeviationSample {
    std::size_t n = 0;
    double theta = 0.0;
    double x = 0.0;
    double value = 0.0;  // F^n_theta(x) - x - n rho

    friend bool operator==(const DeviationSample&, const DeviationSample&) = default;
};

// Deviations from rigid rotation along the orbit of `start`, reported at every
// requested n (any order; duplicates allowed).
std::vector<DeviationSample> deviations(const QpfLift& lift, double rho, FiberPoint start,
                                        std::span<const std::size_t> n_list);

enum class BoundednessVerdict { bounded_like, unbounded_like, inconclusive };

std::string to_string(BoundednessVerdict v);

struct BoundednessReport {
    BoundednessVerdict verdict = BoundednessVerdict::inconclusive;
    double rho = 0.0;
    std::vector<std::size_t> scales;
    // Running sup/inf of D(m) over m <= scales[j], and sup |D|.
    std::vector<double> sup_envelope;
    std::vector<double> inf_envelope;
    std::vector<double> abs_envelope;
};

struct BoundednessOptions {
    FiberPoint start{0.0, 0.0};
    // Estimated with the weighted method over default_seeds() when absent.
    std::optional<double> rho;
    // Ratio between successive abs envelopes that counts as growth.
    double growth_ratio = 1.2;
    // Ratio below which the envelope counts as saturated.
    double saturation_ratio = 1.05;
    // Number of successive growing scales required for unbounded_like.
    std::size_t growth_scales = 4;
};

// Heuristic only: uniform boundedness of deviations cannot be decided from a
// finite orbit. The envelope of |D| is sampled at each scale in growth_window
// (default: powers of two from 2^10 up to n_max). unbounded_like when the last
// growth_scales ratios all exceed growth_ratio; bounded_like when the envelope
// vanishes or the last two ratios stay below saturation_ratio.
BoundednessReport boundedness_diagnostic(const QpfLift& lift, std::size_t n_max,
                                         std::span<const std::size_t> growth_window = {},
                                         const BoundednessOptions& options = {});

enum class MonotonicityKind { strictly_monotone, locked, one_sided_upper, one_sided_lower, inconclusive };

std::string to_string(MonotonicityKind k);
MonotonicityKind parse_monotonicity_kind(const std::string& s);

struct EpsilonSample {
    double eps = 0.0;
    RotationEstimate estimate;

    friend bool operator==(const EpsilonSample&, const EpsilonSample&) = default;
};

struct MonotonicityVerdict {
    MonotonicityKind kind = MonotonicityKind::inconclusive;
    std::vector<EpsilonSample> epsilon_grid;  // sorted by eps
    std::optional<std::pair<double, double>> plateau;

    friend bool operator==(const MonotonicityVerdict&, const MonotonicityVerdict&) = default;
};

// {-1e-1, ..., -1e-6, 0, 1e-6, ..., 1e-1}
std::vector<double> default_epsilon_grid();
std::vector<double> symmetric_epsilon_grid(int first_exponent, int last_exponent);

// Estimates rho(F_eps) over a symmetric grid containing 0. Two estimates are
// "equal" when they differ by at most the sum of their error radii. The flat
// flank on each side is the largest eps whose estimate equals rho(F_0):
//   both flanks flat        -> locked (plateau spans the flat flanks)
//   exactly one flank flat  -> one_sided_upper (eps > 0 flat) / one_sided_lower
//   every consecutive pair separated -> strictly_monotone
//   otherwise               -> inconclusive
// Throws GridTooCoarse when the smallest grid spacing is below four error
// radii, and InvalidArgument when the grid is not symmetric or lacks 0.
MonotonicityVerdict monotonicity_probe(const QpfLift& lift, std::span<const double> eps_list,
                                       const EstimatorSettings& settings);

// Integers witnessing rho = (k/q) omega + l/(pq) mod 1.
struct RationalRelation {
    long k = 0;
    long l = 0;
    long p = 1;
    long q = 1;
    double residual = 0.0;

    // (k/q) omega + l/(pq) reduced to [0, 1).
    double value(double omega) const;

    friend bool operator==(const RationalRelation&, const RationalRelation&) = default;
};

// Distance between a and b on R/Z, in [0, 1/2].
double circle_distance(double a, double b);

// Exhaustive search over 1 <= q <= qmax, 1 <= p <= pmax, |k| <= kmax,
// 0 <= l < pq. Returns the witness with residual <= tol that is smallest in
// the order (q, p, |k|, k < 0, l), or nothing. kmax < 0 means kmax = qmax.
std::optional<RationalRelation> rational_dependence(double rho, double omega, double tol, int qmax, int pmax,
                                                    int kmax = -1);

}  // namespace qpf
