#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "povmseq/matrix.hpp"

namespace povmseq {

template <typename Real>
inline constexpr Real default_tol = Real(1e-10);

/// Relative threshold (against the largest eigenvalue) below which an
/// eigenvalue counts as zero for ranks and pseudoinverses.
template <typename Real>
inline constexpr Real default_rank_tol = Real(1e-10);

/// Modulus above which a component anchors the eigenvector phase convention.
template <typename Real>
inline constexpr Real default_phase_tol = Real(1e-8);

inline constexpr int max_jacobi_sweeps = 100;

/// Sweep convergence: off-diagonal Frobenius norm relative to the input norm.
template <typename Real>
inline constexpr Real jacobi_rel_tol = Real(1e-14);

/// Eigendecomposition of a Hermitian matrix. Eigenvalues are real and sorted
/// descending; the columns of `eigenvectors` are the matching eigenvectors.
/// The decomposition is deterministic: in each column the first component with
/// modulus above the phase threshold is made real and positive, so repeated
/// calls on the same input are bitwise identical.
template <typename Real>
struct HermEig {
    std::vector<Real> eigenvalues;
    Matrix<Real> eigenvectors;
};

/// Cyclic Jacobi diagonalization for Hermitian matrices. Intended for the
/// small dense operators this library works with (dimension up to a few tens).
template <typename Real>
HermEig<Real> herm_eig(const Matrix<Real>& m, Real tol = default_tol<Real>) {
    using Complex = std::complex<Real>;
    if (!m.square()) throw DimensionError("herm_eig: matrix is not square");
    if (frob_dist(m, m.dagger()) > tol)
        throw NotHermitianError("herm_eig: matrix is not Hermitian within tolerance");

    const std::size_t n = m.rows();
    // Work on the symmetrized copy so the iteration sees an exactly Hermitian input.
    Matrix<Real> a = (m + m.dagger()) * Real(0.5);
    Matrix<Real> v = Matrix<Real>::identity(n);

    const Real scale = a.frob_norm();
    const Real target = jacobi_rel_tol<Real> * scale;

    auto off_norm = [&]() {
        Real s(0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (i != j) s += std::norm(a(i, j));
        return std::sqrt(s);
    };

    if (scale > Real(0)) {
        int sweep = 0;
        while (off_norm() > target) {
            if (++sweep > max_jacobi_sweeps)
                throw ConvergenceError("herm_eig: Jacobi sweeps exhausted");
            for (std::size_t p = 0; p + 1 < n; ++p) {
                for (std::size_t q = p + 1; q < n; ++q) {
                    const Complex apq = a(p, q);
                    const Real r = std::abs(apq);
                    if (r == Real(0)) continue;
                    const Complex u = apq / r;
                    const Real app = a(p, p).real();
                    const Real aqq = a(q, q).real();
                    const Real tau = (aqq - app) / (Real(2) * r);
                    const Real t = (tau >= Real(0) ? Real(1) : Real(-1)) /
                                   (std::abs(tau) + std::sqrt(Real(1) + tau * tau));
                    const Real c = Real(1) / std::sqrt(Real(1) + t * t);
                    const Real s = t * c;

                    // A <- U' A U with U the identity outside the (p,q) plane,
                    // U[p][p]=U[q][q]=c, U[p][q]=s*u, U[q][p]=-s*conj(u).
                    for (std::size_t k = 0; k < n; ++k) {
                        const Complex akp = a(k, p), akq = a(k, q);
                        a(k, p) = c * akp - s * std::conj(u) * akq;
                        a(k, q) = s * u * akp + c * akq;
                    }
                    for (std::size_t k = 0; k < n; ++k) {
                        const Complex apk = a(p, k), aqk = a(q, k);
                        a(p, k) = c * apk - s * u * aqk;
                        a(q, k) = s * std::conj(u) * apk + c * aqk;
                    }
                    a(p, q) = Complex(0);
                    a(q, p) = Complex(0);
                    a(p, p) = Complex(a(p, p).real());
                    a(q, q) = Complex(a(q, q).real());

                    for (std::size_t k = 0; k < n; ++k) {
                        const Complex vkp = v(k, p), vkq = v(k, q);
                        v(k, p) = c * vkp - s * std::conj(u) * vkq;
                        v(k, q) = s * u * vkp + c * vkq;
                    }
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
        return a(i, i).real() > a(j, j).real();
    });

    HermEig<Real> result;
    result.eigenvalues.resize(n);
    result.eigenvectors = Matrix<Real>(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        result.eigenvalues[j] = a(order[j], order[j]).real();
        for (std::size_t i = 0; i < n; ++i) result.eigenvectors(i, j) = v(i, order[j]);
    }

    // Phase convention: first component above threshold becomes real positive.
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < n; ++i) {
            const Complex z = result.eigenvectors(i, j);
            const Real az = std::abs(z);
            if (az > default_phase_tol<Real>) {
                const Complex phase = std::conj(z) / az;
                for (std::size_t k = 0; k < n; ++k) result.eigenvectors(k, j) *= phase;
                break;
            }
        }
    }
    return result;
}

/// Hermitian PSD square root. Eigenvalues within `tol` of zero are snapped to
/// zero (the square root would otherwise amplify eigenvalue noise); anything
/// below -tol is rejected.
template <typename Real>
Matrix<Real> psd_sqrt(const Matrix<Real>& m, Real tol = default_tol<Real>) {
    auto eig = herm_eig(m, tol);
    std::vector<Real> roots(eig.eigenvalues.size());
    for (std::size_t i = 0; i < roots.size(); ++i) {
        const Real lam = eig.eigenvalues[i];
        if (lam < -tol) throw NotPsdError("psd_sqrt: negative eigenvalue beyond tolerance");
        roots[i] = lam <= tol ? Real(0) : std::sqrt(lam);
    }
    const auto& w = eig.eigenvectors;
    Matrix<Real> s = w * Matrix<Real>::diagonal(roots) * w.dagger();
    return (s + s.dagger()) * Real(0.5);
}

/// Pseudoinverse of the PSD square root: eigenvalues above rank_tol * lambda_max
/// map to 1/sqrt(lambda), the rest to zero. psd_sqrt(m) * pinv_sqrt(m) is the
/// projector onto the range of m.
template <typename Real>
Matrix<Real> pinv_sqrt(const Matrix<Real>& m, Real rank_tol = default_rank_tol<Real>) {
    auto eig = herm_eig(m);
    const Real lam_max = eig.eigenvalues.empty() ? Real(0) : eig.eigenvalues.front();
    const Real neg_tol = rank_tol * std::max(lam_max, Real(1));
    const Real cut = rank_tol * lam_max;
    std::vector<Real> inv(eig.eigenvalues.size(), Real(0));
    for (std::size_t i = 0; i < inv.size(); ++i) {
        const Real lam = eig.eigenvalues[i];
        if (lam < -neg_tol) throw NotPsdError("pinv_sqrt: negative eigenvalue beyond tolerance");
        if (lam > cut && lam > Real(0)) inv[i] = Real(1) / std::sqrt(lam);
    }
    const auto& w = eig.eigenvectors;
    Matrix<Real> s = w * Matrix<Real>::diagonal(inv) * w.dagger();
    return (s + s.dagger()) * Real(0.5);
}

/// Projector onto the range of a Hermitian PSD matrix.
template <typename Real>
Matrix<Real> range_projector(const Matrix<Real>& m, Real rank_tol = default_rank_tol<Real>) {
    auto eig = herm_eig(m);
    const Real lam_max = eig.eigenvalues.empty() ? Real(0) : eig.eigenvalues.front();
    const Real cut = rank_tol * lam_max;
    std::vector<Real> ind(eig.eigenvalues.size(), Real(0));
    for (std::size_t i = 0; i < ind.size(); ++i)
        if (eig.eigenvalues[i] > cut && eig.eigenvalues[i] > Real(0)) ind[i] = Real(1);
    const auto& w = eig.eigenvectors;
    Matrix<Real> s = w * Matrix<Real>::diagonal(ind) * w.dagger();
    return (s + s.dagger()) * Real(0.5);
}

/// Rank by eigenvalue threshold, relative to the largest eigenvalue.
template <typename Real>
std::size_t eig_rank(const Matrix<Real>& m, Real rank_tol = default_rank_tol<Real>) {
    auto eig = herm_eig(m);
    const Real lam_max = eig.eigenvalues.empty() ? Real(0) : eig.eigenvalues.front();
    const Real cut = rank_tol * lam_max;
    std::size_t r = 0;
    for (Real lam : eig.eigenvalues)
        if (lam > cut && lam > Real(0)) ++r;
    return r;
}

/// True when m is Hermitian with spectrum inside [-tol, 1+tol].
template <typename Real>
bool is_effect_matrix(const Matrix<Real>& m, Real tol = default_tol<Real>) {
    if (!m.square() || !m.all_finite()) return false;
    if (frob_dist(m, m.dagger()) > tol) return false;
    auto eig = herm_eig(m, tol);
    for (Real lam : eig.eigenvalues)
        if (lam < -tol || lam > Real(1) + tol) return false;
    return true;
}

/// Clamp a value expected to lie in [0, 1]; deviations beyond tol are errors.
template <typename Real>
Real clamp01(Real x, Real tol = default_tol<Real>) {
    if (x < -tol || x > Real(1) + tol)
        throw DomainError("value outside [0, 1] beyond tolerance");
    return std::min(std::max(x, Real(0)), Real(1));
}

} // namespace povmseq
