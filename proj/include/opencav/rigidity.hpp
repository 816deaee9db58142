#pragma once

#include <utility>
#include <vector>

#include "opencav/spectrum.hpp"

namespace opencav {

struct RigidityReport {
    double energy = 0.0;
    double rho_direct_mod = 1.0;
    double rho_direct_theta = 0.0;
    Complex rho_spectral{1.0, 0.0};
    double b_antisymmetry_residual = 0.0;
    std::vector<std::pair<int, double>> per_state_r;  // (track_id, r)
};

struct DirectRigidity {
    double modulus = 1.0;
    double theta = 0.0;  // in (-pi/2, pi/2]
};

/// |sum psi_j^2| / sum |psi_j|^2 and the rotation angle that makes the
/// numerator real. Throws Undefined for a zero vector.
DirectRigidity rho_direct(const ComplexVector& psi);

/// sum c^2 A over the states. Throws NotNormalized unless sum |c|^2 = 1 to 1e-8.
Complex rho_spectral(const ComplexVector& c, const RealVector& a_norm);

/// max over pairs of |B(l,l') + B(l',l)| / (1 + |B(l,l')|).
double b_antisymmetry_residual(const ComplexMatrix& overlap_b);

/// Assemble a report from the interior wavefunction, the normalized
/// coefficients and the spectrum they were expanded in.
RigidityReport rigidity_report(const SpectralSet& spec, const ComplexVector& c, const ComplexVector& psi);

}  // namespace opencav
