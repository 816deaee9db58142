#pragma once

#include <vector>

#include "opencav/rigidity.hpp"

namespace opencav {

using SMatrix = Eigen::Matrix2cd;

/// Everything at one real energy inside the band.
struct ScatteringSolution {
    double energy = 0.0;
    ComplexVector c;             // sum |c|^2 = 1; empty when the spectrum is defective
    ComplexVector psi_interior;  // sum_l c_l phi_l, or the Green's-function column at an EP
    Complex t_spectral{std::numeric_limits<double>::quiet_NaN(), 0.0};
    Complex t_direct;
    SMatrix s_matrix;
    RigidityReport rigidity;
    bool spectral_valid = false;
};

struct WidthCoupling {
    double gamma = 0.0;
    // 2 pi sum_C a_C^2 |phi(contact_C)|^2; equals 4 pi a^2 |phi(c)|^2 for a
    // mirror-symmetric state with identical leads.
    double four_pi_product = 0.0;
};

struct TwoLevelProfile {
    double e0 = 0.0;
    double gamma = 0.0;
    std::vector<double> grid;
    std::vector<Complex> t_values;
};

/// Expansion coefficients of the interior scattering state fed from `incoming`,
/// normalized to sum |c|^2 = 1 at this energy.
ComplexVector coefficients_c(const SpectralSet& spec, const CavityModel& model, double energy,
                             LeadSide incoming = LeadSide::Left);

ComplexVector interior_wavefunction(const SpectralSet& spec, const ComplexVector& c);

/// G(E) e_contact for the given lead: the interior state up to normalization,
/// finite at exceptional points.
ComplexVector interior_wavefunction_direct(const CavityModel& model, double energy,
                                           LeadSide incoming = LeadSide::Left);

/// Resonance sum over the biorthogonal spectrum. Throws DefectiveSpectrum at an EP.
Complex transmission_spectral(const SpectralSet& spec, const CavityModel& model, double energy);

/// -2 pi i a_L G_LR a_R with G = (E - H_eff(E))^-1 from a linear solve.
Complex transmission_direct(const CavityModel& model, double energy);

/// S = I - 2 pi i W^T G W in the (L, R) channel basis.
SMatrix s_matrix(const CavityModel& model, double energy);

std::vector<WidthCoupling> width_vs_coupling(const SpectralSet& spec, const CavityModel& model, double energy);

/// The closed-form two-level EP transmission profile, evaluated as printed.
TwoLevelProfile two_level_profile(double e0, double gamma, const std::vector<double>& grid);
Complex two_level_amplitude(double e0, double gamma, double energy);

/// Total Wigner delay Im d ln det S / dE by central difference.
double wigner_delay(const CavityModel& model, double energy, double d_energy = 1e-5);

ScatteringSolution solve_scattering(const CavityModel& model, double energy);

}  // namespace opencav
