#include "opencav/scattering.hpp"

#include <cmath>
#include <numbers>

namespace opencav {

namespace {

constexpr Complex kI{0.0, 1.0};
constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_in_band(double energy, const char* who) {
    if (!(std::abs(energy) < 2.0)) throw OutsideBand(std::string(who) + ": energy outside the open band");
}

// Columns G e_L and G e_R.
Eigen::Matrix<Complex, Eigen::Dynamic, 2> green_contact_columns(const CavityModel& model, double energy) {
    const ComplexMatrix h = assemble_heff(model, energy);
    const auto n = h.rows();
    const ComplexMatrix m = Complex(energy) * ComplexMatrix::Identity(n, n) - h;
    Eigen::Matrix<Complex, Eigen::Dynamic, 2> rhs = Eigen::Matrix<Complex, Eigen::Dynamic, 2>::Zero(n, 2);
    rhs(model.left.contact_site, 0) = 1.0;
    rhs(model.right.contact_site, 1) = 1.0;
    try {
        return solve_linear(m, rhs);
    } catch (const SingularMatrix&) {
        // A state that never touches either contact can sit exactly on the
        // axis. The system is then still consistent and the minimum-norm
        // solution carries the right contact values; only an inconsistent
        // system is a true pole.
        const Eigen::CompleteOrthogonalDecomposition<ComplexMatrix> cod(m);
        const Eigen::Matrix<Complex, Eigen::Dynamic, 2> x = cod.solve(rhs);
        const double residual = (m * x - rhs).cwiseAbs().maxCoeff();
        if (!x.allFinite() || residual > 1e-8 * (inf_norm(m) * x.cwiseAbs().maxCoeff() + 1.0))
            throw PoleOnAxis("scattering: real pole on the energy axis");
        return x;
    }
}

// Contact weight below which a state counts as decoupled from a lead.
constexpr double kDarkWeight = 1e-10;

}  // namespace

ComplexVector coefficients_c(const SpectralSet& spec, const CavityModel& model, double energy, LeadSide incoming) {
    require_in_band(energy, "coefficients_c");
    const int contact = model.lead(incoming).contact_site;
    // The lead amplitude is a common factor and drops out of the normalization.
    ComplexVector c(static_cast<Eigen::Index>(spec.size()));
    for (std::size_t k = 0; k < spec.size(); ++k) {
        const auto& s = spec.states[k];
        const Complex gap = energy - s.z;
        if (std::abs(gap) <= 1e-14 * std::max(1.0, std::abs(energy))) {
            if (std::abs(s.phi[contact]) > kDarkWeight)
                throw PoleOnAxis("coefficients_c: energy sits on a real eigenvalue");
            c[static_cast<Eigen::Index>(k)] = 0.0;
            continue;
        }
        c[static_cast<Eigen::Index>(k)] = s.phi[contact] / gap;
    }
    const double norm = c.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) throw Undefined("coefficients_c: coefficients cannot be normalized");
    return c / norm;
}

ComplexVector interior_wavefunction(const SpectralSet& spec, const ComplexVector& c) {
    if (static_cast<std::size_t>(c.size()) != spec.size())
        throw std::invalid_argument("interior_wavefunction: length mismatch");
    return spec.phi_matrix() * c;
}

ComplexVector interior_wavefunction_direct(const CavityModel& model, double energy, LeadSide incoming) {
    const auto cols = green_contact_columns(model, energy);
    return cols.col(incoming == LeadSide::Left ? 0 : 1);
}

Complex transmission_spectral(const SpectralSet& spec, const CavityModel& model, double energy) {
    require_in_band(energy, "transmission_spectral");
    if (spec.defective()) throw DefectiveSpectrum("transmission_spectral: defective spectrum, use transmission_direct");
    const double a_l = lead_contact_amplitude(model.left, model.alpha, energy);
    const double a_r = lead_contact_amplitude(model.right, model.alpha, energy);
    Complex sum{0.0, 0.0};
    for (const auto& s : spec.states) {
        const Complex weight = s.phi[model.left.contact_site] * s.phi[model.right.contact_site];
        if (energy == s.z) {
            if (std::abs(weight) > kDarkWeight * kDarkWeight)
                throw PoleOnAxis("transmission_spectral: energy sits on a real eigenvalue");
            continue;
        }
        sum += weight / (energy - s.z);
    }
    return -kTwoPi * kI * a_l * a_r * sum;
}

Complex transmission_direct(const CavityModel& model, double energy) {
    require_in_band(energy, "transmission_direct");
    const double a_l = lead_contact_amplitude(model.left, model.alpha, energy);
    const double a_r = lead_contact_amplitude(model.right, model.alpha, energy);
    const auto cols = green_contact_columns(model, energy);
    return -kTwoPi * kI * a_l * cols(model.left.contact_site, 1) * a_r;
}

SMatrix s_matrix(const CavityModel& model, double energy) {
    require_in_band(energy, "s_matrix");
    const double a[2] = {lead_contact_amplitude(model.left, model.alpha, energy),
                         lead_contact_amplitude(model.right, model.alpha, energy)};
    const int site[2] = {model.left.contact_site, model.right.contact_site};
    const auto cols = green_contact_columns(model, energy);
    SMatrix s = SMatrix::Identity();
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) s(i, j) -= kTwoPi * kI * a[i] * cols(site[i], j) * a[j];
    return s;
}

std::vector<WidthCoupling> width_vs_coupling(const SpectralSet& spec, const CavityModel& model, double energy) {
    require_in_band(energy, "width_vs_coupling");
    const double a_l = lead_contact_amplitude(model.left, model.alpha, energy);
    const double a_r = lead_contact_amplitude(model.right, model.alpha, energy);
    std::vector<WidthCoupling> out;
    out.reserve(spec.size());
    for (const auto& s : spec.states) {
        const double product = kTwoPi * (a_l * a_l * std::norm(s.phi[model.left.contact_site]) +
                                         a_r * a_r * std::norm(s.phi[model.right.contact_site]));
        out.push_back({s.width(), product});
    }
    return out;
}

Complex two_level_amplitude(double e0, double gamma, double energy) {
    const Complex x = gamma / (energy - e0 + kI * gamma / 2.0);
    return -2.0 * kI * x - x * x;
}

TwoLevelProfile two_level_profile(double e0, double gamma, const std::vector<double>& grid) {
    if (!(gamma > 0.0)) throw std::invalid_argument("two_level_profile: gamma must be positive");
    TwoLevelProfile p{e0, gamma, grid, {}};
    p.t_values.reserve(grid.size());
    for (double e : grid) p.t_values.push_back(two_level_amplitude(e0, gamma, e));
    return p;
}

double wigner_delay(const CavityModel& model, double energy, double d_energy) {
    if (!(std::abs(energy) + d_energy < 2.0)) throw OutsideBand("wigner_delay: stencil leaves the band");
    const Complex up = s_matrix(model, energy + d_energy).determinant();
    const Complex down = s_matrix(model, energy - d_energy).determinant();
    // arg of the ratio keeps the difference on the principal branch.
    return std::arg(up / down) / (2.0 * d_energy);
}

ScatteringSolution solve_scattering(const CavityModel& model, double energy) {
    require_in_band(energy, "solve_scattering");
    ScatteringSolution sol;
    sol.energy = energy;
    sol.t_direct = transmission_direct(model, energy);
    sol.s_matrix = s_matrix(model, energy);

    const auto spec = spectrum_at(model, energy);
    sol.spectral_valid = !spec.defective();
    if (sol.spectral_valid) {
        sol.c = coefficients_c(spec, model, energy, LeadSide::Left);
        sol.psi_interior = interior_wavefunction(spec, sol.c);
        sol.t_spectral = transmission_spectral(spec, model, energy);
        sol.rigidity = rigidity_report(spec, sol.c, sol.psi_interior);
    } else {
        sol.psi_interior = interior_wavefunction_direct(model, energy, LeadSide::Left);
        const auto direct = rho_direct(sol.psi_interior);
        sol.rigidity.energy = energy;
        sol.rigidity.rho_direct_mod = direct.modulus;
        sol.rigidity.rho_direct_theta = direct.theta;
        sol.rigidity.rho_spectral = {std::numeric_limits<double>::quiet_NaN(), 0.0};
        sol.rigidity.b_antisymmetry_residual = b_antisymmetry_residual(spec.overlap_b);
        for (const auto& s : spec.states) sol.rigidity.per_state_r.emplace_back(s.track_id, s.rigidity_r);
    }
    return sol;
}

}  // namespace opencav
