#include "opencav/model.hpp"

#include <cmath>
#include <numbers>
#include <queue>

namespace opencav {

std::vector<int> LatticeSpec::sites() const {
    std::vector<int> out;
    const int cells = nx * ny;
    out.reserve(static_cast<std::size_t>(std::max(cells, 0)));
    for (int c = 0; c < cells; ++c) {
        if (!mask || (*mask)[static_cast<std::size_t>(c)]) out.push_back(c);
    }
    return out;
}

int LatticeSpec::site_index(int x, int y) const {
    if (x < 0 || y < 0 || x >= nx || y >= ny) return -1;
    const int cell = y * nx + x;
    if (mask && !(*mask)[static_cast<std::size_t>(cell)]) return -1;
    if (!mask) return cell;
    int k = 0;
    for (int c = 0; c < cell; ++c) k += (*mask)[static_cast<std::size_t>(c)] ? 1 : 0;
    return k;
}

void LatticeSpec::validate() const {
    if (nx < 1 || ny < 1) throw InvalidGeometry("lattice: nx and ny must be positive");
    const auto cells = static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny);
    if (mask && mask->size() != cells) throw InvalidGeometry("lattice: mask must have nx*ny entries");
    if (potential && potential->size() != cells)
        throw InvalidGeometry("lattice: potential must have nx*ny entries");
    if (!std::isfinite(onsite)) throw InvalidGeometry("lattice: onsite must be finite");
    if (potential) {
        for (double v : *potential)
            if (!std::isfinite(v)) throw InvalidGeometry("lattice: potential must be finite");
    }

    const auto active = sites();
    if (active.empty()) throw InvalidGeometry("lattice: mask selects no sites");

    // Flood fill from the first site over edge neighbours.
    std::vector<bool> seen(cells, false);
    std::queue<int> todo;
    todo.push(active.front());
    seen[static_cast<std::size_t>(active.front())] = true;
    std::size_t reached = 0;
    while (!todo.empty()) {
        const int c = todo.front();
        todo.pop();
        ++reached;
        const int x = c % nx;
        const int y = c / nx;
        const int nbr[4][2] = {{x + 1, y}, {x - 1, y}, {x, y + 1}, {x, y - 1}};
        for (const auto& p : nbr) {
            if (p[0] < 0 || p[1] < 0 || p[0] >= nx || p[1] >= ny) continue;
            const int d = p[1] * nx + p[0];
            if (seen[static_cast<std::size_t>(d)]) continue;
            if (mask && !(*mask)[static_cast<std::size_t>(d)]) continue;
            seen[static_cast<std::size_t>(d)] = true;
            todo.push(d);
        }
    }
    if (reached != active.size()) throw InvalidGeometry("lattice: masked interior is not edge-connected");
}

void CavityModel::validate() const {
    lattice.validate();
    const int dim = lattice.dimension();
    for (const LeadSpec* l : {&left, &right}) {
        if (l->contact_site < 0 || l->contact_site >= dim)
            throw InvalidGeometry("lead: contact site out of range");
        if (!(l->coupling_w >= 0.0) || !std::isfinite(l->coupling_w))
            throw InvalidGeometry("lead: coupling_w must be finite and >= 0");
    }
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw InvalidGeometry("model: alpha must be finite and >= 0");
}

ComplexMatrix build_hb(const LatticeSpec& lattice) {
    lattice.validate();
    const auto active = lattice.sites();
    const auto n = static_cast<Eigen::Index>(active.size());
    ComplexMatrix h = ComplexMatrix::Zero(n, n);

    std::vector<int> index_of(static_cast<std::size_t>(lattice.nx * lattice.ny), -1);
    for (std::size_t k = 0; k < active.size(); ++k) index_of[static_cast<std::size_t>(active[k])] = static_cast<int>(k);

    for (Eigen::Index k = 0; k < n; ++k) {
        const int cell = active[static_cast<std::size_t>(k)];
        double eps = lattice.onsite;
        if (lattice.potential) eps += (*lattice.potential)[static_cast<std::size_t>(cell)];
        h(k, k) = eps;

        const int x = cell % lattice.nx;
        const int y = cell / lattice.nx;
        if (x + 1 < lattice.nx) {
            const int j = index_of[static_cast<std::size_t>(cell + 1)];
            if (j >= 0) h(k, j) = h(j, k) = -LatticeSpec::hopping;
        }
        if (y + 1 < lattice.ny) {
            const int j = index_of[static_cast<std::size_t>(cell + lattice.nx)];
            if (j >= 0) h(k, j) = h(j, k) = -LatticeSpec::hopping;
        }
    }
    return h;
}

Complex surface_green(double energy) {
    const double e = energy;
    if (std::abs(e) <= 2.0) return {e / 2.0, -std::sqrt(4.0 - e * e) / 2.0};
    const double root = std::sqrt(e * e - 4.0);
    return {(e - std::copysign(root, e)) / 2.0, 0.0};
}

Complex lead_self_energy(const LeadSpec& lead, double alpha, double energy) {
    const double w = alpha * lead.coupling_w;
    return w * w * surface_green(energy);
}

double lead_contact_amplitude(const LeadSpec& lead, double alpha, double energy) {
    if (!(std::abs(energy) < 2.0)) throw OutsideBand("lead_contact_amplitude: |E| >= 2 has no propagating mode");
    const double sin_k = std::sqrt(4.0 - energy * energy) / 2.0;
    return alpha * lead.coupling_w * std::sqrt(sin_k / std::numbers::pi);
}

CavityModel make_chain(int n, double alpha, double coupling_w) {
    CavityModel m;
    m.lattice.nx = n;
    m.lattice.ny = 1;
    m.left = {LeadSide::Left, 0, coupling_w};
    m.right = {LeadSide::Right, n - 1, coupling_w};
    m.alpha = alpha;
    return m;
}

}  // namespace opencav
