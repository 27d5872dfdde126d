#pragma once

#include <complex>
#include <random>
#include <vector>

#include "povmseq/eig.hpp"
#include "povmseq/matrix.hpp"

// Seeded generators and small oracles shared by the test suites. The oracles
// (fidelities, fixtures) use plain matrix arithmetic only; generators may
// lean on the kernel since they only produce inputs, never expected values.
namespace testutil {

using Mat = povmseq::Matrix<double>;
using Cx = std::complex<double>;

inline Cx gauss(std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    return {n(rng), n(rng)};
}

inline Mat random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
    Mat m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) m(i, j) = gauss(rng);
    return m;
}

inline Mat random_hermitian(std::size_t d, std::mt19937_64& rng) {
    Mat g = random_matrix(d, d, rng);
    return (g + g.dagger()) * 0.5;
}

/// Random PSD matrix G G^dagger; rank defaults to full.
inline Mat random_psd(std::size_t d, std::mt19937_64& rng, std::size_t rank = 0) {
    if (rank == 0 || rank > d) rank = d;
    Mat g = random_matrix(d, rank, rng);
    return g * g.dagger();
}

inline Mat random_density(std::size_t d, std::mt19937_64& rng) {
    Mat p = random_psd(d, rng);
    return p * (1.0 / p.trace().real());
}

inline std::vector<Cx> random_pure(std::size_t d, std::mt19937_64& rng) {
    std::vector<Cx> v(d);
    for (auto& z : v) z = gauss(rng);
    const double n = povmseq::vec_norm(v);
    for (auto& z : v) z /= n;
    return v;
}

/// Random effect: PSD matrix scaled so its spectrum lies in [0, 1].
inline Mat random_effect(std::size_t d, std::mt19937_64& rng) {
    Mat p = random_psd(d, rng);
    auto eig = povmseq::herm_eig(p);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    return p * (u(rng) / eig.eigenvalues.front());
}

inline Mat random_unitary(std::size_t d, std::mt19937_64& rng) {
    return povmseq::herm_eig(random_hermitian(d, rng)).eigenvectors;
}

/// Raw effect matrices of a random n-outcome POVM in dimension d.
inline std::vector<Mat> random_povm_matrices(std::size_t n, std::size_t d, std::mt19937_64& rng) {
    std::vector<Mat> parts;
    parts.reserve(n);
    Mat sum(d, d);
    for (std::size_t i = 0; i < n; ++i) {
        parts.push_back(random_psd(d, rng));
        sum += parts.back();
    }
    Mat t = povmseq::pinv_sqrt(sum);
    for (auto& m : parts) m = t * m * t;
    return parts;
}

/// <phi| rho |phi> for a pure target.
inline double fidelity_to_pure(const Mat& rho, const std::vector<Cx>& phi) {
    return std::real(povmseq::vec_dot(phi, rho.apply(phi)));
}

/// Fidelity of two joint system-ancilla pure states (ancilla fast, dimension
/// two), insensitive to one phase per ancilla branch. That per-branch phase is
/// exactly the completion freedom of the coupling construction, so two valid
/// completions compare equal here while genuinely different states do not.
inline double branch_phase_insensitive_fidelity(const std::vector<Cx>& a,
                                                const std::vector<Cx>& b) {
    double sum = 0.0;
    for (std::size_t anc = 0; anc < 2; ++anc) {
        Cx overlap(0);
        for (std::size_t i = anc; i < a.size(); i += 2) overlap += std::conj(a[i]) * b[i];
        sum += std::abs(overlap);
    }
    return sum * sum;
}

/// Fixture for the two-state discrimination problem, written out directly from
/// the closed forms so module-level code can be checked against it.
struct UsdFixture {
    double omega;
    std::vector<Cx> psi1, psi2, psi1_perp, psi2_perp;
    Mat a1, a2, aq; // effects for outcomes "1", "2", "?"
};

inline UsdFixture usd_fixture(double omega) {
    UsdFixture f;
    f.omega = omega;
    const double c = std::cos(omega), s = std::sin(omega), t = std::tan(omega);
    f.psi1 = {Cx(c), Cx(s)};
    f.psi2 = {Cx(c), Cx(-s)};
    f.psi1_perp = {Cx(s), Cx(-c)};
    f.psi2_perp = {Cx(s), Cx(c)};
    f.a1 = Mat(2, 2, {Cx(t * t / 2), Cx(t / 2), Cx(t / 2), Cx(0.5)});
    f.a2 = Mat(2, 2, {Cx(t * t / 2), Cx(-t / 2), Cx(-t / 2), Cx(0.5)});
    f.aq = Mat::identity(2) - f.a1 - f.a2;
    return f;
}

} // namespace testutil
