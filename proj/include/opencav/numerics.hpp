#pragma once

// Dense complex kernels: general eigendecomposition, linear solves and a
// Nelder-Mead minimizer. Everything is templated on the real scalar type so
// the same code runs in double and long double.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "opencav/errors.hpp"

namespace opencav {

template <typename Real>
using ComplexMatrixX = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Real>
using ComplexVectorX = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>;
template <typename Real>
using RealVectorX = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

using Complex = std::complex<double>;
using ComplexMatrix = ComplexMatrixX<double>;
using ComplexVector = ComplexVectorX<double>;
using RealVector = RealVectorX<double>;

/// Induced infinity norm (max absolute row sum).
template <typename Derived>
typename Eigen::NumTraits<typename Derived::Scalar>::Real inf_norm(const Eigen::MatrixBase<Derived>& m) {
    if (m.size() == 0) return 0;
    return m.cwiseAbs().rowwise().sum().maxCoeff();
}

/// Largest |M(i,j) - M(j,i)|; zero for complex-symmetric input.
template <typename Derived>
typename Eigen::NumTraits<typename Derived::Scalar>::Real symmetry_defect(const Eigen::MatrixBase<Derived>& m) {
    using Real = typename Eigen::NumTraits<typename Derived::Scalar>::Real;
    Real worst = 0;
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = j + 1; i < m.rows(); ++i)
            worst = std::max<Real>(worst, std::abs(m(i, j) - m(j, i)));
    return worst;
}

template <typename Real>
struct EigenSystem {
    ComplexVectorX<Real> values;
    ComplexMatrixX<Real> vectors;  // unit 2-norm columns
    RealVectorX<Real> condition;   // reciprocal eigenvalue condition, |y^H v| / (|y| |v|)

    Eigen::Index size() const { return values.size(); }
};

namespace detail {

template <typename Derived>
void require_square_finite(const Eigen::MatrixBase<Derived>& m, const char* who) {
    if (m.rows() != m.cols())
        throw InvalidMatrix(std::string(who) + ": matrix is not square");
    if (m.rows() == 0)
        throw InvalidMatrix(std::string(who) + ": empty matrix");
    if (!m.allFinite())
        throw InvalidMatrix(std::string(who) + ": non-finite entries");
}

}  // namespace detail

/// All eigenpairs of a general complex matrix, sorted by real part (ties by
/// imaginary part). Near-defective pairs are never an error; they show up as a
/// small `condition`.
template <typename Real>
EigenSystem<Real> eig_general(const ComplexMatrixX<Real>& m) {
    detail::require_square_finite(m, "eig_general");
    const Eigen::Index n = m.rows();

    Eigen::ComplexEigenSolver<ComplexMatrixX<Real>> solver(m, true);
    if (solver.info() != Eigen::Success) {
        throw ConvergenceFailure("eig_general: QR iteration did not converge",
                                 std::numeric_limits<double>::infinity());
    }

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    const auto& vals = solver.eigenvalues();
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        if (vals[a].real() != vals[b].real()) return vals[a].real() < vals[b].real();
        return vals[a].imag() < vals[b].imag();
    });

    EigenSystem<Real> out;
    out.values.resize(n);
    out.vectors.resize(n, n);
    out.condition.resize(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        out.values[k] = vals[order[static_cast<std::size_t>(k)]];
        out.vectors.col(k) = solver.eigenvectors().col(order[static_cast<std::size_t>(k)]).normalized();
    }

    // Left eigenvectors are the rows of V^-1, already scaled so y_k^H v_k = 1.
    Eigen::FullPivLU<ComplexMatrixX<Real>> lu(out.vectors);
    if (!lu.isInvertible()) {
        out.condition.setZero();
    } else {
        const ComplexMatrixX<Real> left = lu.inverse();
        for (Eigen::Index k = 0; k < n; ++k) {
            const Real c = Real(1) / left.row(k).norm();
            out.condition[k] = std::isfinite(static_cast<double>(c)) ? c : Real(0);
        }
    }

    const Real scale = std::max<Real>(inf_norm(m), std::numeric_limits<Real>::min());
    for (Eigen::Index k = 0; k < n; ++k) {
        if (out.condition[k] <= Real(1e-6)) continue;
        const Real residual =
            (m * out.vectors.col(k) - out.values[k] * out.vectors.col(k)).cwiseAbs().maxCoeff();
        if (residual >= Real(1e-9) * scale) {
            throw ConvergenceFailure("eig_general: eigenpair residual above bound",
                                     static_cast<double>(residual / scale));
        }
    }
    return out;
}

/// Solve M x = rhs (vector or block of columns) by partial-pivot LU.
template <typename Real, typename Rhs>
Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Rhs::ColsAtCompileTime>
solve_linear(const ComplexMatrixX<Real>& m, const Eigen::MatrixBase<Rhs>& rhs) {
    detail::require_square_finite(m, "solve_linear");
    if (rhs.rows() != m.rows())
        throw InvalidMatrix("solve_linear: right-hand side has wrong length");

    const Real norm = inf_norm(m);
    Eigen::PartialPivLU<ComplexMatrixX<Real>> lu(m);
    const Real min_pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
    if (!(min_pivot >= Real(1e-14) * norm) || norm == Real(0))
        throw SingularMatrix("solve_linear: pivot below 1e-14 * ||M||");

    Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Rhs::ColsAtCompileTime> x = lu.solve(rhs);
    // One refinement sweep keeps the residual at the rounding floor for the
    // moderately conditioned systems met near narrow resonances.
    x += lu.solve(rhs - m * x);
    return x;
}

template <typename Real>
struct SimplexResult {
    RealVectorX<Real> argmin;
    Real value{};
    int iterations{};
};

template <typename Real>
struct SimplexOptions {
    int max_iterations = 2000;
    Real initial_step = Real(0.1);
    // Called once per iteration with the current best vertex and its value.
    std::function<void(const RealVectorX<Real>&, Real)> observer;
};

/// Nelder-Mead with reflection 1, expansion 2, contraction 0.5, shrink 0.5.
/// Stops when the simplex diameter drops below `tol`.
template <typename Real, typename F>
SimplexResult<Real> minimize_simplex(F&& f, const RealVectorX<Real>& start, Real tol,
                                     const SimplexOptions<Real>& options = {}) {
    if (!(tol > Real(0))) throw std::invalid_argument("minimize_simplex: tol must be positive");
    const Eigen::Index n = start.size();
    if (n == 0) throw std::invalid_argument("minimize_simplex: empty start point");

    auto eval = [&](const RealVectorX<Real>& p) {
        const Real v = static_cast<Real>(f(p));
        return std::isfinite(static_cast<double>(v)) ? v : std::numeric_limits<Real>::infinity();
    };

    std::vector<RealVectorX<Real>> pts(static_cast<std::size_t>(n + 1), start);
    std::vector<Real> vals(static_cast<std::size_t>(n + 1));
    vals[0] = eval(start);
    if (!std::isfinite(static_cast<double>(vals[0])))
        throw std::invalid_argument("minimize_simplex: objective not finite at start");
    for (Eigen::Index i = 0; i < n; ++i) {
        auto& p = pts[static_cast<std::size_t>(i + 1)];
        const Real step = options.initial_step * std::max<Real>(Real(1), std::abs(start[i]));
        p[i] += step;
        vals[static_cast<std::size_t>(i + 1)] = eval(p);
    }

    std::vector<std::size_t> idx(pts.size());
    auto diameter = [&] {
        Real d = 0;
        for (std::size_t i = 0; i < pts.size(); ++i)
            for (std::size_t j = i + 1; j < pts.size(); ++j)
                d = std::max<Real>(d, (pts[i] - pts[j]).norm());
        return d;
    };

    for (int iter = 0; iter < options.max_iterations; ++iter) {
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
        {
            std::vector<RealVectorX<Real>> p2;
            std::vector<Real> v2;
            for (auto k : idx) {
                p2.push_back(pts[k]);
                v2.push_back(vals[k]);
            }
            pts.swap(p2);
            vals.swap(v2);
        }
        if (options.observer) options.observer(pts.front(), vals.front());
        if (diameter() < tol) return {pts.front(), vals.front(), iter};

        const std::size_t worst = pts.size() - 1;
        RealVectorX<Real> centroid = RealVectorX<Real>::Zero(n);
        for (std::size_t k = 0; k < worst; ++k) centroid += pts[k];
        centroid /= Real(n);

        const RealVectorX<Real> reflected = centroid + (centroid - pts[worst]);
        const Real fr = eval(reflected);
        if (fr < vals.front()) {
            const RealVectorX<Real> expanded = centroid + Real(2) * (centroid - pts[worst]);
            const Real fe = eval(expanded);
            if (fe < fr) {
                pts[worst] = expanded;
                vals[worst] = fe;
            } else {
                pts[worst] = reflected;
                vals[worst] = fr;
            }
            continue;
        }
        if (fr < vals[worst - 1]) {
            pts[worst] = reflected;
            vals[worst] = fr;
            continue;
        }
        // Outside contraction when the reflection beats the worst vertex,
        // inside contraction otherwise.
        const bool outside = fr < vals[worst];
        const RealVectorX<Real> contracted =
            outside ? RealVectorX<Real>(centroid + Real(0.5) * (reflected - centroid))
                    : RealVectorX<Real>(centroid + Real(0.5) * (pts[worst] - centroid));
        const Real fc = eval(contracted);
        if (fc < (outside ? fr : vals[worst])) {
            pts[worst] = contracted;
            vals[worst] = fc;
            continue;
        }
        for (std::size_t k = 1; k < pts.size(); ++k) {
            pts[k] = pts.front() + Real(0.5) * (pts[k] - pts.front());
            vals[k] = eval(pts[k]);
        }
    }

    const auto best = static_cast<std::size_t>(std::min_element(vals.begin(), vals.end()) - vals.begin());
    std::vector<double> best_point(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) best_point[static_cast<std::size_t>(i)] = static_cast<double>(pts[best][i]);
    throw ConvergenceFailure("minimize_simplex: iteration cap reached", static_cast<double>(diameter()),
                             std::move(best_point), static_cast<double>(vals[best]));
}

}  // namespace opencav
