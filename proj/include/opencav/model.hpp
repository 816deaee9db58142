#pragma once

#include <optional>
#include <string>
#include <vector>

#include "opencav/numerics.hpp"

namespace opencav {

// Tight-binding billiard on an nx-by-ny grid. Energies are in units of the
// hopping, which is fixed to 1 (hbar = 1 as well).
struct LatticeSpec {
    int nx = 1;
    int ny = 1;
    double onsite = 0.0;
    // Row-major over the full grid (index y * nx + x); true selects a site.
    std::optional<std::vector<bool>> mask;
    // Row-major per-site offsets added to `onsite`; masked-out entries are ignored.
    std::optional<std::vector<double>> potential;

    static constexpr double hopping = 1.0;

    /// Grid cells that carry a site, in row-major order. Matrix index k of
    /// H_B corresponds to cell sites()[k].
    std::vector<int> sites() const;
    /// Matrix index of grid cell (x, y), or -1 if the cell is masked out.
    int site_index(int x, int y) const;
    int dimension() const { return static_cast<int>(sites().size()); }

    /// Throws InvalidGeometry on an empty, malformed or disconnected lattice.
    void validate() const;
};

enum class LeadSide { Left, Right };

struct LeadSpec {
    LeadSide side = LeadSide::Left;
    int contact_site = 0;    // matrix index into H_B
    double coupling_w = 1.0;  // scaled by the model-wide alpha
    static constexpr double lead_hopping = 1.0;
};

struct CavityModel {
    LatticeSpec lattice;
    LeadSpec left{LeadSide::Left, 0, 1.0};
    LeadSpec right{LeadSide::Right, 0, 1.0};
    double alpha = 1.0;

    const LeadSpec& lead(LeadSide side) const { return side == LeadSide::Left ? left : right; }
    void validate() const;
};

/// Closed-cavity Hamiltonian: onsite (+ potential) on the diagonal, -1 between
/// nearest-neighbour sites.
ComplexMatrix build_hb(const LatticeSpec& lattice);

/// Retarded surface Green's function of a semi-infinite chain with unit hopping.
/// Inside the band it carries Im g = -sqrt(4 - E^2)/2; outside, the decaying root.
Complex surface_green(double energy);

/// w^2 g(E) with w = alpha * coupling_w.
Complex lead_self_energy(const LeadSpec& lead, double alpha, double energy);

/// Matrix element between the energy-normalized lead state and the contact
/// site, w * sqrt(sin k / pi) with E = -2 cos k. Throws OutsideBand for |E| >= 2.
double lead_contact_amplitude(const LeadSpec& lead, double alpha, double energy);

/// A 1D chain of `n` sites with the left lead on site 0 and the right lead on
/// site n - 1.
CavityModel make_chain(int n, double alpha, double coupling_w = 1.0);

}  // namespace opencav
