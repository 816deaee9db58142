#include "opencav/rigidity.hpp"

#include <cmath>
#include <numbers>

namespace opencav {

DirectRigidity rho_direct(const ComplexVector& psi) {
    const double denom = psi.squaredNorm();
    if (!(denom > 0.0)) throw Undefined("rho_direct: zero wavefunction");
    const Complex num = psi.transpose() * psi;

    DirectRigidity out;
    out.modulus = std::min(1.0, std::abs(num) / denom);
    double theta = -std::arg(num) / 2.0;
    if (theta <= -std::numbers::pi / 2) theta += std::numbers::pi;
    out.theta = theta;
    return out;
}

Complex rho_spectral(const ComplexVector& c, const RealVector& a_norm) {
    if (c.size() != a_norm.size()) throw std::invalid_argument("rho_spectral: length mismatch");
    if (std::abs(c.squaredNorm() - 1.0) > 1e-8) throw NotNormalized("rho_spectral: sum |c|^2 != 1");
    Complex sum{0.0, 0.0};
    for (Eigen::Index k = 0; k < c.size(); ++k) sum += c[k] * c[k] * a_norm[k];
    return sum;
}

double b_antisymmetry_residual(const ComplexMatrix& overlap_b) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < overlap_b.rows(); ++i)
        for (Eigen::Index j = i + 1; j < overlap_b.cols(); ++j)
            worst = std::max(worst, std::abs(overlap_b(i, j) + overlap_b(j, i)) / (1.0 + std::abs(overlap_b(i, j))));
    return worst;
}

RigidityReport rigidity_report(const SpectralSet& spec, const ComplexVector& c, const ComplexVector& psi) {
    RigidityReport r;
    r.energy = spec.energy;
    const auto direct = rho_direct(psi);
    r.rho_direct_mod = direct.modulus;
    r.rho_direct_theta = direct.theta;

    RealVector a(static_cast<Eigen::Index>(spec.size()));
    for (std::size_t k = 0; k < spec.size(); ++k) a[static_cast<Eigen::Index>(k)] = spec.states[k].a_norm;
    r.rho_spectral = rho_spectral(c, a);
    r.b_antisymmetry_residual = b_antisymmetry_residual(spec.overlap_b);
    for (const auto& s : spec.states) r.per_state_r.emplace_back(s.track_id, s.rigidity_r);
    return r;
}

}  // namespace opencav
