#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qpf/families.hpp"
#include "qpf/rotnum.hpp"

namespace qpf {

// Family tag plus parameter record. Recognised parameters:
//   translation: rho0, omega, eps
//   arnold:      alpha, tau, beta, omega, eps   (function = forcing g)
//   harper:      lambda, energy, omega, eps     (function = potential V)
// `function` is a preset name ("cos", "sin", "zero") or "table", in which case
// `table` holds the samples. For harper the cos preset means 2 lambda cos.
struct FamilySpec {
    std::string family = "translation";
    std::map<std::string, double> params;
    std::string function = "cos";
    std::vector<double> table;

    double param(const std::string& name) const;
    FamilySpec with(const std::string& name, double value) const;

    friend bool operator==(const FamilySpec&, const FamilySpec&) = default;
};

// Parameter names accepted by a family, or empty for an unknown family.
std::vector<std::string> family_parameters(const std::string& family);

// Throws InvalidArgument on unknown family or parameter names and
// AlphaOutOfRange from the arnold constructor.
QpfLift build_family(const FamilySpec& spec);

struct Axis {
    std::string name;
    double lo = 0.0;
    double hi = 1.0;
    std::size_t count = 2;

    double at(std::size_t i) const noexcept;
    double spacing() const noexcept { return (hi - lo) / static_cast<double>(count - 1); }

    friend bool operator==(const Axis&, const Axis&) = default;
};

struct SweepSpec {
    FamilySpec family;
    Axis axis1;
    std::optional<Axis> axis2;
    EstimatorSettings estimator;
};

struct SweepPoint {
    double param = 0.0;
    RotationEstimate estimate;
};

// Row-major: cell (i, j) at i * axis2.count + j, i indexing axis1.
struct SweepGrid {
    Axis axis1;
    Axis axis2;
    std::vector<RotationEstimate> cells;

    const RotationEstimate& at(std::size_t i, std::size_t j) const { return cells[i * axis2.count + j]; }
};

// Grid cells run in parallel (estimator.jobs) and come back in index order.
std::vector<SweepPoint> sweep_1d(const SweepSpec& spec);
SweepGrid sweep_2d(const SweepSpec& spec);

struct PlateauOptions {
    double min_width = 0.0;
    double omega = kGoldenMean;
    double tol = 1e-5;
    int qmax = 20;
    int pmax = 20;
};

struct PlateauReport {
    double lo = 0.0;
    double hi = 0.0;
    double value = 0.0;
    std::size_t first = 0;
    std::size_t last = 0;
    std::optional<RationalRelation> witness;
    double confidence = 0.0;  // width / (2 * mean error radius)
    // More than 3 cells wide yet no rational relation: a plateau that mode
    // locking theory does not allow, so a sign of numerical trouble.
    bool unwitnessed = false;

    double width() const noexcept { return hi - lo; }
    std::size_t cells() const noexcept { return last - first; }
};

// Maximal runs of consecutive estimates that agree pairwise within the sum of
// their error radii, kept when wider than min_width. Each is annotated with a
// rational_dependence witness for its mean value; a run spanning more than
// three grid cells without one is flagged as a violation.
std::vector<PlateauReport> detect_plateaus(std::span<const SweepPoint> sweep, const PlateauOptions& options);

enum class Edge { right, left };

struct BoundaryResult {
    double param = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    double target = 0.0;
    std::size_t iterations = 0;
};

// Bisects the monotone response of `param` for the edge of the set where
// rho is within two error radii of target (lift coordinates):
//   right: supremum of parameters with rho - target <= 2 err
//   left:  infimum of parameters with rho - target >= -2 err
// Throws BracketInvalid when the bracket ends do not straddle the edge.
BoundaryResult tongue_boundary(const FamilySpec& family, const std::string& param, double target, double lo, double hi,
                               double tol, const EstimatorSettings& settings, Edge edge = Edge::right);

// Target given as a rational relation; the integer part is taken from the
// estimate at the end of the bracket that lies inside the target set.
BoundaryResult tongue_boundary(const FamilySpec& family, const std::string& param, const RationalRelation& target,
                               double lo, double hi, double tol, const EstimatorSettings& settings,
                               Edge edge = Edge::right);

}  // namespace qpf
