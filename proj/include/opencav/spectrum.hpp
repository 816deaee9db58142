#pragma once

#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include "opencav/model.hpp"

namespace opencav {

// One eigenstate of H_eff(E). phi is normalized with phi^T phi = 1; the left
// eigenvector is phi itself (transposed), so no conjugation enters the pairing.
struct ResonanceState {
    Complex z;
    ComplexVector phi;
    double a_norm = 1.0;      // phi^H phi, +inf for a defective pair
    double rigidity_r = 1.0;  // 1 / a_norm
    int track_id = 0;
    double ep_proximity = 1.0;  // reciprocal eigenvalue condition
    bool ambiguous = false;     // set by track_sweep when the match was a near tie

    double position() const { return z.real(); }
    double width() const { return -2.0 * z.imag(); }
    bool defective() const { return !std::isfinite(a_norm); }
};

struct SpectralSet {
    double energy = 0.0;
    std::vector<ResonanceState> states;
    // B(l, l') = phi_l^H phi_l' for l != l', zero diagonal.
    ComplexMatrix overlap_b;

    std::size_t size() const { return states.size(); }
    bool defective() const;
    Complex eigenvalue_sum() const;
    /// Columns are the phi of each state, in state order.
    ComplexMatrix phi_matrix() const;
};

struct PoleResult {
    double e_pole = 0.0;
    double gamma_pole = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// |phi^T phi| below this (for unit phi) marks a pair as defective.
inline constexpr double kDefectiveThreshold = 1e-12;

/// H_B plus each lead's self-energy on its contact-site diagonal entry.
ComplexMatrix assemble_heff(const CavityModel& model, double energy);

/// Biorthogonally normalized spectrum of a complex-symmetric H_eff.
/// Defective pairs are kept with the a_norm = +inf sentinel.
SpectralSet biorthogonal_spectrum(const ComplexMatrix& heff, double energy);

/// Convenience: assemble_heff followed by biorthogonal_spectrum.
SpectralSet spectrum_at(const CavityModel& model, double energy);

struct FixedPointOptions {
    double damping = 0.5;
    double tolerance = 1e-10;
    int max_iterations = 200;
};

/// Solutions of E = Re z(E), one per eigenstate of H_B, each followed through
/// the iteration by maximal eigenvector overlap.
std::vector<PoleResult> fixed_point_poles(const CavityModel& model, const FixedPointOptions& options = {});

/// Spectra along an alpha grid with track_id kept consistent by greedy
/// maximal-overlap matching between neighbouring grid points. States in each
/// returned set are ordered by track_id.
std::vector<SpectralSet> track_sweep(const std::function<CavityModel(double)>& model_family,
                                     const std::vector<double>& alphas, double energy);

using MatrixFamily = std::function<ComplexMatrix(double, double)>;

struct EpPathPoint {
    double p1 = 0.0;
    double p2 = 0.0;
    double separation_sq = 0.0;
    double a_norm = 0.0;  // larger a_norm of the tracked pair
};

struct EpReport {
    double separation_sq = 0.0;  // |z1 - z2|^2 at the optimum
    double threshold = 0.0;      // success bound on separation_sq
    double coalescence_angle = 0.0;  // min_s |phi1 - s i phi2| / |phi1|
    double max_a_norm = 0.0;
    int iterations = 0;
    std::vector<EpPathPoint> path;
};

struct ExceptionalPoint {
    double p1 = 0.0;
    double p2 = 0.0;
    Complex z;
    EpReport report;
};

struct EpSearchOptions {
    double tolerance = 1e-12;     // simplex diameter
    double initial_step = 0.1;
    double relative_threshold = 1e-8;  // on |z1 - z2|^2 / ||H||^2
};

/// Minimizes |z1 - z2|^2 over (p1, p2) for the pair of eigenvalues that is
/// closest at the start point. Throws NotFound when the pair does not coalesce.
ExceptionalPoint find_exceptional_point(const MatrixFamily& family, std::pair<double, double> start,
                                        const EpSearchOptions& options = {});

}  // namespace opencav
