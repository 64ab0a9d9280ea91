#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qpf/families.hpp"

namespace qpf {

// A graph theta -> value over the circle, sampled at theta_i = i/N in lift
// coordinates. Off-grid evaluation interpolates linearly and wraps
// periodically; on-grid evaluation returns the sample exactly.
class GraphOverTheta {
public:
    explicit GraphOverTheta(std::vector<double> values);

    static GraphOverTheta constant(std::size_t n, double value);
    static GraphOverTheta sample(std::size_t n, const std::function<double(double)>& f);

    std::size_t size() const noexcept { return values_.size(); }
    double theta(std::size_t i) const noexcept { return static_cast<double>(i) / static_cast<double>(size()); }
    double operator[](std::size_t i) const noexcept { return values_[i]; }
    double operator()(double theta) const noexcept;
    std::span<const double> values() const noexcept { return values_; }

    double min() const noexcept;
    double max() const noexcept;

    // Same graph on a grid of twice the size (new samples interpolated).
    GraphOverTheta refined() const;

    friend bool operator==(const GraphOverTheta&, const GraphOverTheta&) = default;

private:
    std::vector<double> values_;
};

// Discrete upper semicontinuous regularisation: a max-filter followed by a
// min-filter of the same radius (morphological closing). Never below the
// input, idempotent, and it fills isolated dips while keeping isolated
// spikes, like the sup over the closure of the graph.
GraphOverTheta usc_envelope(const GraphOverTheta& phi, std::size_t radius = 1);

// Lower counterpart (opening): never above the input, idempotent.
GraphOverTheta lsc_envelope(const GraphOverTheta& phi, std::size_t radius = 1);

// (F gamma)(theta) = F_{theta - omega}(gamma(theta - omega)).
GraphOverTheta push_graph(const QpfLift& lift, const GraphOverTheta& gamma);

enum class LimitStatus { converged, max_iter, not_monotone };

std::string to_string(LimitStatus s);

struct GraphLimit {
    GraphOverTheta graph;
    LimitStatus status = LimitStatus::max_iter;
    std::size_t steps = 0;
    int direction = 0;            // +1 increasing, -1 decreasing, 0 undetermined
    double last_increment = 0.0;  // sup |gamma_{n+1} - gamma_n| at exit
    double growth_rate = 0.0;     // mean (gamma_n - gamma_0) / n
};

// Pushes gamma0 until sup |gamma_{n+1} - gamma_n| < tol. The sequence is
// monotone whenever the first push is ordered with gamma0, so a first push
// that crosses gamma0 stops immediately with not_monotone.
GraphLimit iterate_graph_to_limit(const QpfLift& lift, const GraphOverTheta& gamma0, double tol, std::size_t n_max);

// min over the grid of gamma(theta) - F^n(gamma)(theta), with F^n evaluated
// orbit by orbit rather than by repeated interpolation. Positive means gamma
// is mapped strictly below itself by F^n.
double below_margin(const QpfLift& lift, const GraphOverTheta& gamma, std::size_t n);

// min over the grid of F^n(gamma)(theta) - gamma(theta).
double above_margin(const QpfLift& lift, const GraphOverTheta& gamma, std::size_t n);

// Region between a lower and an upper bounding graph on a common grid.
class Strip {
public:
    // Throws GridMismatch on different grid sizes and InvalidArgument if
    // lower exceeds upper anywhere.
    Strip(GraphOverTheta lower, GraphOverTheta upper);

    const GraphOverTheta& lower() const noexcept { return lower_; }
    const GraphOverTheta& upper() const noexcept { return upper_; }
    std::size_t size() const noexcept { return lower_.size(); }
    double width(std::size_t i) const noexcept { return upper_[i] - lower_[i]; }
    double max_width() const noexcept;

private:
    GraphOverTheta lower_;
    GraphOverTheta upper_;
};

enum class StripOrder { precsim, prec, incomparable };

std::string to_string(StripOrder o);

// prec: upper of a < lower of b everywhere. precsim: lower(a) <= lower(b) and
// upper(a) <= upper(b) everywhere. prec wins when both hold.
StripOrder strip_order(const Strip& a, const Strip& b);

// min over the grid of lower(b) - upper(a); may be negative.
double strip_gap(const Strip& a, const Strip& b);

struct PinchMeasure {
    double min_width = 0.0;
    double theta = 0.0;
    std::size_t index = 0;

    bool pinched(double tol) const noexcept { return min_width <= tol; }
};

PinchMeasure pinch_measure(const Strip& strip);

// Iterates both start curves to their limits and returns the strip between
// them, or nothing if a limit fails or the limits cross.
struct StripExtraction {
    GraphLimit lower;
    GraphLimit upper;
    std::optional<Strip> strip;
};

StripExtraction extract_strip(const QpfLift& lift, const GraphOverTheta& lower_start,
                              const GraphOverTheta& upper_start, double tol, std::size_t n_max);

struct AnnulusOptions {
    std::size_t candidates = 64;
    std::size_t grid = 4096;
    std::size_t max_iterate = 200;
    double strict_tol = 1e-9;
};

// Two curves bounding a closed annulus of homotopy type (1,0) that F^N maps
// into its interior: F^N(gamma_plus) < gamma_plus, F^N(gamma_minus) > gamma_minus,
// gamma_minus < gamma_plus < gamma_minus + 1. Margins are computed orbit-wise
// on the search grid and on its dyadic refinement.
struct AnnulusWitness {
    GraphOverTheta gamma_plus;
    GraphOverTheta gamma_minus;
    std::size_t iterate = 0;
    double margin_plus = 0.0;
    double margin_minus = 0.0;
    double refined_margin_plus = 0.0;
    double refined_margin_minus = 0.0;
};

// Searches constant start curves at `candidates` equispaced heights in [0,1),
// pushing each up to max_iterate times. Absence of a witness is not a proof
// that the map is unlocked.
std::optional<AnnulusWitness> annulus_witness(const QpfLift& lift, const AnnulusOptions& options = {});

}  // namespace qpf
