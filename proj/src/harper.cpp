#include "qpf/harper.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include <Eigen/Eigenvalues>

#include "qpf/errors.hpp"

namespace qpf {

HarperParams HarperParams::almost_mathieu(double lambda, double energy, double omega) {
    return {CircleFunction::cosine(2.0 * lambda), energy, omega};
}

CocycleStep cocycle_step(const HarperParams& params, double theta) {
    return {params.potential(theta) - params.energy, -1.0, 1.0, 0.0};
}

double projective_action(double c, double y) noexcept {
    const double whole = std::floor(y);
    const double psi = kPi * (y - whole);
    const double cs = std::cos(psi);
    const double sn = std::sin(psi);
    double angle = std::atan2(cs, c * cs - sn);
    if (angle < 0.0)
        angle += kPi;
    if (angle >= kPi)
        angle -= kPi;
    // Image of the direction psi = 0 is (c, 1), strictly in the upper half
    // plane; the lift sends [0, pi) onto [base, base + pi).
    const double base = std::atan2(1.0, c);
    if (angle < base)
        angle += kPi;
    return whole + angle / kPi;
}

QpfLift harper_lift(const HarperParams& params) {
    FamilyTag tag{"harper", {{"energy", params.energy}, {"omega", params.omega}}, params.potential.name()};
    if (params.potential.kind() == CircleFunction::Kind::cosine)
        tag.params["lambda"] = params.potential.amplitude() / 2.0;
    const double cmax = params.potential.max_abs() + std::abs(params.energy);
    const double lip = (cmax * cmax + 2.0) / kPi * params.potential.lipschitz();
    return QpfLift(
        params.omega,
        [v = params.potential, e = params.energy](double theta, double y) {
            return projective_action(v(theta) - e, y);
        },
        std::move(tag), lip);
}

std::vector<double> truncated_spectrum(const CircleFunction& potential, double omega, std::size_t n, double theta0) {
    if (n < 2)
        throw InvalidArgument("truncated operator needs N >= 2");
    Eigen::VectorXd diag(static_cast<Eigen::Index>(n));
    Eigen::VectorXd sub = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n - 1), -1.0);
    for (std::size_t k = 0; k < n; ++k)
        diag(static_cast<Eigen::Index>(k)) = potential(phase_at(theta0, omega, k));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        throw EigenFailure("tridiagonal eigen-solve did not converge");
    const auto& ev = solver.eigenvalues();
    std::vector<double> out(ev.data(), ev.data() + ev.size());
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<double> default_ids_phases() {
    std::vector<double> out;
    for (int j = 0; j < 8; ++j)
        out.push_back(j / 8.0);
    return out;
}

IntegratedDensity::IntegratedDensity(const CircleFunction& potential, double omega, std::size_t n,
                                     std::span<const double> phases)
    : n_(n), phases_(phases.begin(), phases.end()) {
    if (phases_.empty())
        phases_ = default_ids_phases();
    for (double t : phases_)
        spectra_.push_back(truncated_spectrum(potential, omega, n, t));
    lo_ = spectra_.front().front();
    hi_ = spectra_.front().back();
    for (const auto& s : spectra_) {
        lo_ = std::min(lo_, s.front());
        hi_ = std::max(hi_, s.back());
    }
}

IdsEstimate IntegratedDensity::operator()(double e) const {
    std::size_t below = 0;
    for (const auto& s : spectra_)
        below += static_cast<std::size_t>(std::lower_bound(s.begin(), s.end(), e) - s.begin());
    IdsEstimate est;
    est.n = n_;
    est.value = static_cast<double>(below) / static_cast<double>(n_ * spectra_.size());
    est.phases = phases_;
    return est;
}

IdsEstimate ids(const CircleFunction& potential, double omega, double e, std::size_t n,
                std::span<const double> phases) {
    return IntegratedDensity(potential, omega, n, phases)(e);
}

std::optional<GapLabel> label_rotation(double rho, double omega, double tol, long kmax) {
    for (long ak = 0; ak <= kmax; ++ak) {
        for (long k : {ak, -ak}) {
            const double r = circle_distance(rho, static_cast<double>(k) * omega);
            if (r <= tol)
                return GapLabel{k, r, rho};
            if (ak == 0)
                break;
        }
    }
    return std::nullopt;
}

std::optional<GapLabel> gap_label(const CircleFunction& potential, double omega, double e_lo, double e_hi, double tol,
                                  long kmax, const EstimatorSettings& settings) {
    if (!(tol > 0.0))
        throw InvalidArgument("gap_label needs tol > 0");
    if (e_hi < e_lo)
        throw InvalidArgument("gap_label needs e_lo <= e_hi");
    const auto lift = harper_lift({potential, 0.5 * (e_lo + e_hi), omega});
    const double rho = rotation_number(lift, settings).value;
    return label_rotation(rho, omega, tol, kmax);
}

}  // namespace qpf
