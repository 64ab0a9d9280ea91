#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qpf/families.hpp"
#include "qpf/rotnum.hpp"

namespace qpf {

struct HarperParams {
    CircleFunction potential = CircleFunction::zero();
    double energy = 0.0;
    double omega = kGoldenMean;

    // V(theta) = 2 lambda cos(2 pi theta)
    static HarperParams almost_mathieu(double lambda, double energy, double omega = kGoldenMean);
};

// Transfer matrix (V(theta) - E, -1; 1, 0) acting on (u_{n+1}, u_n).
struct CocycleStep {
    double a = 0.0, b = -1.0, c = 1.0, d = 0.0;

    double determinant() const noexcept { return a * d - b * c; }
};

CocycleStep cocycle_step(const HarperParams& params, double theta);

// Projective action of (c, -1; 1, 0) in the chart where y in R covers the
// direction (cos pi y, sin pi y), lifted so that y = 0 lands in (0, 1).
// The ratio x = u_{n+1}/u_n of the eigenvalue equation is cot(pi y), so this
// is x -> c - 1/x without the pole.
double projective_action(double c, double y) noexcept;

// The Harper map as a degree-one lift. rho of this lift equals the
// integrated density of states, running from 0 below the spectrum to 1 above.
QpfLift harper_lift(const HarperParams& params);

struct IdsEstimate {
    std::size_t n = 0;
    double value = 0.0;
    std::string boundary = "dirichlet";
    std::vector<double> phases;
};

// Eigenvalues (ascending) of the N x N truncation with -1 off the diagonal
// and V(theta0 + k omega) on it, Dirichlet boundary. Throws EigenFailure if
// the tridiagonal QR iteration does not converge.
std::vector<double> truncated_spectrum(const CircleFunction& potential, double omega, std::size_t n, double theta0);

// j/8 for j = 0..7
std::vector<double> default_ids_phases();

// Eigenvalue counting for a fixed potential, averaged over several phases.
// Spectra are computed once, so scanning many energies is cheap.
class IntegratedDensity {
public:
    IntegratedDensity(const CircleFunction& potential, double omega, std::size_t n,
                      std::span<const double> phases = {});

    // Fraction of eigenvalues strictly below e.
    IdsEstimate operator()(double e) const;

    double spectrum_min() const noexcept { return lo_; }
    double spectrum_max() const noexcept { return hi_; }

private:
    std::size_t n_;
    std::vector<double> phases_;
    std::vector<std::vector<double>> spectra_;
    double lo_;
    double hi_;
};

IdsEstimate ids(const CircleFunction& potential, double omega, double e, std::size_t n,
                std::span<const double> phases = {});

struct GapLabel {
    long k = 0;
    double residual = 0.0;
    double rho = 0.0;
};

// Integer k with |rho - k omega| <= tol on R/Z, smallest |k| first and k > 0
// before -k.
std::optional<GapLabel> label_rotation(double rho, double omega, double tol, long kmax);

// Estimates rho(s_E) at the midpoint of [e_lo, e_hi], which should lie inside
// a plateau of E -> rho(s_E), and labels it. Nothing when no |k| <= kmax fits,
// which would contradict gap labelling.
std::optional<GapLabel> gap_label(const CircleFunction& potential, double omega, double e_lo, double e_hi, double tol,
                                  long kmax, const EstimatorSettings& settings);

}  // namespace qpf
