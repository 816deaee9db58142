#include "opencav/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace opencav {

bool SpectralSet::defective() const {
    return std::any_of(states.begin(), states.end(), [](const ResonanceState& s) { return s.defective(); });
}

Complex SpectralSet::eigenvalue_sum() const {
    Complex sum{0.0, 0.0};
    for (const auto& s : states) sum += s.z;
    return sum;
}

ComplexMatrix SpectralSet::phi_matrix() const {
    const auto n = static_cast<Eigen::Index>(states.size());
    ComplexMatrix m(n, n);
    for (Eigen::Index k = 0; k < n; ++k) m.col(k) = states[static_cast<std::size_t>(k)].phi;
    return m;
}

ComplexMatrix assemble_heff(const CavityModel& model, double energy) {
    model.validate();
    ComplexMatrix h = build_hb(model.lattice);
    h(model.left.contact_site, model.left.contact_site) += lead_self_energy(model.left, model.alpha, energy);
    h(model.right.contact_site, model.right.contact_site) += lead_self_energy(model.right, model.alpha, energy);
    return h;
}

namespace {

// Scale v so that phi^T phi = 1, picking the square-root branch that puts the
// largest component's argument in (-pi/2, pi/2].
void fix_branch(ComplexVector& phi) {
    Eigen::Index big = 0;
    phi.cwiseAbs().maxCoeff(&big);
    const double arg = std::arg(phi[big]);
    if (arg <= -std::numbers::pi / 2 || arg > std::numbers::pi / 2) phi = -phi;
}

ResonanceState make_state(const Complex& z, const ComplexVector& unit_v, double condition, int id) {
    ResonanceState s;
    s.z = z;
    s.track_id = id;
    s.ep_proximity = condition;
    const Complex vtv = unit_v.transpose() * unit_v;
    if (std::abs(vtv) < kDefectiveThreshold) {
        s.phi = unit_v;
        fix_branch(s.phi);
        s.a_norm = std::numeric_limits<double>::infinity();
        s.rigidity_r = 0.0;
        s.ep_proximity = std::min(condition, std::abs(vtv));
        return s;
    }
    s.phi = unit_v / std::sqrt(vtv);
    fix_branch(s.phi);
    s.a_norm = std::max(1.0, s.phi.squaredNorm());
    s.rigidity_r = 1.0 / s.a_norm;
    return s;
}

void fill_overlaps(SpectralSet& set) {
    const auto n = static_cast<Eigen::Index>(set.states.size());
    set.overlap_b = ComplexMatrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            if (i != j)
                set.overlap_b(i, j) =
                    set.states[static_cast<std::size_t>(i)].phi.dot(set.states[static_cast<std::size_t>(j)].phi);
}

ComplexVector unit(const ComplexVector& v) { return v / v.norm(); }

// A general eigensolver returns an arbitrary basis inside a degenerate
// eigenspace, and such a basis is not transpose-orthogonal. Within each
// cluster of coincident eigenvalues whose vectors span the full multiplicity,
// redo the basis with pivoted Gram-Schmidt under the bilinear form v^T w.
// Clusters with nearly parallel vectors are exceptional points and are left
// to the defective path.
void orthogonalize_clusters(const ComplexVector& values, ComplexMatrix& vectors, double scale) {
    const auto n = values.size();
    std::vector<Eigen::Index> root(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) root[static_cast<std::size_t>(i)] = i;
    auto find = [&](Eigen::Index i) {
        while (root[static_cast<std::size_t>(i)] != i) i = root[static_cast<std::size_t>(i)];
        return i;
    };
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j)
            if (std::abs(values[i] - values[j]) <= 1e-9 * scale) root[static_cast<std::size_t>(find(j))] = find(i);

    for (Eigen::Index r = 0; r < n; ++r) {
        std::vector<Eigen::Index> members;
        for (Eigen::Index i = 0; i < n; ++i)
            if (find(i) == r) members.push_back(i);
        if (members.size() < 2) continue;

        const auto m = static_cast<Eigen::Index>(members.size());
        ComplexMatrix block(vectors.rows(), m);
        for (Eigen::Index c = 0; c < m; ++c) block.col(c) = vectors.col(members[static_cast<std::size_t>(c)]);
        Eigen::JacobiSVD<ComplexMatrix> svd(block);
        if (svd.singularValues()(m - 1) < 1e-6) continue;

        // A cluster spanning a real subspace (states decoupled from the leads)
        // gets a real orthonormal basis, which is the one with r = 1.
        Eigen::MatrixXd parts(block.rows(), 2 * m);
        parts << block.real(), block.imag();
        Eigen::JacobiSVD<Eigen::MatrixXd> real_svd(parts, Eigen::ComputeThinU);
        const auto& sv = real_svd.singularValues();
        if (sv(m) < 1e-6 * sv(0)) {
            for (Eigen::Index c = 0; c < m; ++c) {
                ComplexVector v = real_svd.matrixU().col(c).cast<Complex>();
                vectors.col(members[static_cast<std::size_t>(c)]) = v;
            }
            continue;
        }

        std::vector<ComplexVector> pending;
        for (Eigen::Index c = 0; c < m; ++c) pending.emplace_back(block.col(c));
        std::vector<ComplexVector> done;
        while (!pending.empty()) {
            std::size_t pick = 0;
            double best = -1.0;
            for (std::size_t k = 0; k < pending.size(); ++k) {
                const double d = std::abs(Complex(pending[k].transpose() * pending[k]));
                if (d > best) {
                    best = d;
                    pick = k;
                }
            }
            // Every remaining vector is self-orthogonal: mix in a partner.
            if (best < 1e-3 && pending.size() > 1) {
                const std::size_t other = pick == 0 ? 1 : 0;
                pending[pick] = unit(ComplexVector(pending[pick] + pending[other]));
            }
            const ComplexVector v = pending[pick];
            pending.erase(pending.begin() + static_cast<std::ptrdiff_t>(pick));
            const ComplexVector phi = v / std::sqrt(Complex(v.transpose() * v));
            for (auto& w : pending) {
                w -= Complex(phi.transpose() * w) * phi;
                w = unit(w);
            }
            done.push_back(unit(phi));
        }
        for (Eigen::Index c = 0; c < m; ++c)
            vectors.col(members[static_cast<std::size_t>(c)]) = done[static_cast<std::size_t>(c)];
    }
}

}  // namespace

SpectralSet biorthogonal_spectrum(const ComplexMatrix& heff, double energy) {
    const double scale = std::max(inf_norm(heff), 1.0);
    if (heff.rows() != heff.cols()) throw InvalidMatrix("biorthogonal_spectrum: matrix is not square");
    if (symmetry_defect(heff) >= 1e-12 * scale)
        throw InvalidMatrix("biorthogonal_spectrum: H_eff must be complex symmetric");

    auto eig = eig_general(heff);
    orthogonalize_clusters(eig.values, eig.vectors, scale);
    SpectralSet set;
    set.energy = energy;
    set.states.reserve(static_cast<std::size_t>(eig.size()));
    for (Eigen::Index k = 0; k < eig.size(); ++k)
        set.states.push_back(make_state(eig.values[k], eig.vectors.col(k), eig.condition[k], static_cast<int>(k)));
    fill_overlaps(set);
    return set;
}

SpectralSet spectrum_at(const CavityModel& model, double energy) {
    return biorthogonal_spectrum(assemble_heff(model, energy), energy);
}

std::vector<PoleResult> fixed_point_poles(const CavityModel& model, const FixedPointOptions& options) {
    if (!(model.alpha > 0.0)) throw std::invalid_argument("fixed_point_poles: alpha must be positive");
    const auto closed = eig_general(build_hb(model.lattice));

    std::vector<PoleResult> out;
    for (Eigen::Index k = 0; k < closed.size(); ++k) {
        PoleResult pole;
        double energy = closed.values[k].real();
        ComplexVector reference = closed.vectors.col(k);
        for (int it = 0; it < options.max_iterations; ++it) {
            const auto set = spectrum_at(model, energy);
            std::size_t best = 0;
            double best_overlap = -1.0;
            for (std::size_t s = 0; s < set.states.size(); ++s) {
                const double ov = std::abs(reference.dot(unit(set.states[s].phi)));
                if (ov > best_overlap) {
                    best_overlap = ov;
                    best = s;
                }
            }
            const auto& state = set.states[best];
            reference = unit(state.phi);
            pole.iterations = it + 1;
            pole.gamma_pole = state.width();
            const double step = state.position() - energy;
            if (std::abs(step) < options.tolerance) {
                pole.converged = true;
                break;
            }
            energy += options.damping * step;
        }
        pole.e_pole = energy;
        out.push_back(pole);
    }
    return out;
}

namespace {

// Greedy assignment of current states to previous tracks by |u_prev^H u_cur|.
void match_tracks(const SpectralSet& prev, SpectralSet& cur) {
    const std::size_t n = prev.states.size();
    Eigen::MatrixXd overlap(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            overlap(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                std::abs(unit(prev.states[i].phi).dot(unit(cur.states[j].phi)));

    constexpr double tie = 1e-6;
    std::vector<bool> row_used(n, false), col_used(n, false);
    for (std::size_t round = 0; round < n; ++round) {
        double best = -1.0;
        std::size_t bi = 0, bj = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (row_used[i]) continue;
            for (std::size_t j = 0; j < n; ++j) {
                if (col_used[j]) continue;
                const double o = overlap(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
                const bool better = o > best + tie;
                const bool tied = std::abs(o - best) <= tie &&
                                  std::abs(prev.states[i].z - cur.states[j].z) <
                                      std::abs(prev.states[bi].z - cur.states[bj].z);
                if (better || tied) {
                    best = std::max(best, o);
                    bi = i;
                    bj = j;
                }
            }
        }
        // Flag the pick if another free candidate in its row or column is within the tie band.
        bool ambiguous = false;
        for (std::size_t k = 0; k < n; ++k) {
            if (k != bj && !col_used[k] &&
                std::abs(overlap(static_cast<Eigen::Index>(bi), static_cast<Eigen::Index>(k)) - best) <= tie)
                ambiguous = true;
            if (k != bi && !row_used[k] &&
                std::abs(overlap(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(bj)) - best) <= tie)
                ambiguous = true;
        }
        row_used[bi] = col_used[bj] = true;

        auto& state = cur.states[bj];
        state.track_id = prev.states[bi].track_id;
        state.ambiguous = ambiguous;
        const Complex proj = prev.states[bi].phi.transpose() * state.phi;
        if (proj.real() < 0.0) state.phi = -state.phi;
    }
    std::stable_sort(cur.states.begin(), cur.states.end(),
                     [](const ResonanceState& a, const ResonanceState& b) { return a.track_id < b.track_id; });
    fill_overlaps(cur);
}

}  // namespace

std::vector<SpectralSet> track_sweep(const std::function<CavityModel(double)>& model_family,
                                     const std::vector<double>& alphas, double energy) {
    for (std::size_t i = 1; i < alphas.size(); ++i)
        if (alphas[i] < alphas[i - 1]) throw std::invalid_argument("track_sweep: alpha grid must be monotone");

    std::vector<SpectralSet> out;
    out.reserve(alphas.size());
    for (std::size_t i = 0; i < alphas.size(); ++i) {
        auto set = spectrum_at(model_family(alphas[i]), energy);
        if (!out.empty()) {
            if (set.size() != out.back().size())
                throw InvalidGeometry("track_sweep: model dimension changed along the sweep");
            match_tracks(out.back(), set);
        }
        out.push_back(std::move(set));
    }
    return out;
}

namespace {

struct PairPick {
    Eigen::Index a = 0;
    Eigen::Index b = 1;
};

// The two eigenvalues nearest to `anchor`.
PairPick nearest_pair(const ComplexVector& values, const Complex& anchor) {
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(values.size()));
    for (Eigen::Index k = 0; k < values.size(); ++k) idx[static_cast<std::size_t>(k)] = k;
    std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index x, Eigen::Index y) {
        return std::abs(values[x] - anchor) < std::abs(values[y] - anchor);
    });
    return {idx[0], idx[1]};
}

double pair_a_norm(const ComplexMatrix& vectors, PairPick pick) {
    double worst = 0.0;
    for (Eigen::Index k : {pick.a, pick.b}) {
        const ComplexVector v = vectors.col(k);
        const double vtv = std::abs(Complex(v.transpose() * v));
        worst = std::max(worst, vtv > 0.0 ? 1.0 / vtv : std::numeric_limits<double>::infinity());
    }
    return worst;
}

}  // namespace

ExceptionalPoint find_exceptional_point(const MatrixFamily& family, std::pair<double, double> start,
                                        const EpSearchOptions& options) {
    const ComplexMatrix h0 = family(start.first, start.second);
    if (h0.rows() < 2) throw InvalidMatrix("find_exceptional_point: need at least two levels");
    const auto eig0 = eig_general(h0);

    // Anchor the search on the closest pair at the start point.
    Complex anchor;
    double closest = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < eig0.size(); ++i)
        for (Eigen::Index j = i + 1; j < eig0.size(); ++j) {
            const double d = std::abs(eig0.values[i] - eig0.values[j]);
            if (d < closest) {
                closest = d;
                anchor = 0.5 * (eig0.values[i] + eig0.values[j]);
            }
        }

    auto objective = [&](const RealVector& p) {
        const auto eig = eig_general(family(p[0], p[1]));
        const auto pick = nearest_pair(eig.values, anchor);
        return std::norm(eig.values[pick.a] - eig.values[pick.b]);
    };

    EpReport report;
    SimplexOptions<double> sopts;
    sopts.initial_step = options.initial_step;
    sopts.observer = [&](const RealVector& p, double value) {
        const auto eig = eig_general(family(p[0], p[1]));
        const double a = pair_a_norm(eig.vectors, nearest_pair(eig.values, anchor));
        report.path.push_back({p[0], p[1], value, a});
        report.max_a_norm = std::max(report.max_a_norm, a);
    };

    RealVector x0(2);
    x0 << start.first, start.second;
    SimplexResult<double> best;
    try {
        best = minimize_simplex(objective, x0, options.tolerance, sopts);
    } catch (const ConvergenceFailure& e) {
        throw NotFound("find_exceptional_point: minimizer hit its iteration cap", e.best_point(),
                       std::sqrt(e.best_value()));
    }

    const ComplexMatrix h = family(best.argmin[0], best.argmin[1]);
    const double scale = std::max(inf_norm(h), 1.0);
    report.separation_sq = best.value;
    report.threshold = options.relative_threshold * scale * scale;
    report.iterations = best.iterations;
    if (!(best.value < report.threshold)) {
        throw NotFound("find_exceptional_point: eigenvalues do not coalesce",
                       {best.argmin[0], best.argmin[1]}, std::sqrt(best.value));
    }

    const auto eig = eig_general(h);
    const auto pick = nearest_pair(eig.values, anchor);
    // phi = v / sqrt(v^T v) even where the spectrum module would switch to its
    // defective sentinel; the coalescence check needs the diverging vectors.
    auto biorth = [&](Eigen::Index k) {
        const ComplexVector v = eig.vectors.col(k);
        const Complex vtv = v.transpose() * v;
        return ComplexVector(vtv == Complex{} ? v : ComplexVector(v / std::sqrt(vtv)));
    };
    const ComplexVector phi1 = biorth(pick.a);
    const ComplexVector phi2 = biorth(pick.b);
    const Complex i{0.0, 1.0};
    report.coalescence_angle =
        std::min((phi1 - i * phi2).norm(), (phi1 + i * phi2).norm()) / phi1.norm();
    report.max_a_norm = std::max(report.max_a_norm, pair_a_norm(eig.vectors, pick));

    ExceptionalPoint ep;
    ep.p1 = best.argmin[0];
    ep.p2 = best.argmin[1];
    ep.z = 0.5 * (eig.values[pick.a] + eig.values[pick.b]);
    ep.report = std::move(report);
    return ep;
}

}  // namespace opencav
