// entanglement.hpp: reduced emitter states in the single-excitation sector and
// their concurrences
//
// Qubit basis: e = 0, g = 1. A pair is ordered {ee, eg, ge, gg}; a triple uses
// |q_a q_b q_c> with index 4 q_a + 2 q_b + q_c. The field is traced out, so the
// missing norm 1 - sum |c|^2 sits on the all-ground state.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "plasmon_qi/errors.hpp"

namespace plasmon_qi::entanglement {

using cplx = std::complex<double>;

inline constexpr double kNormSlack = 1e-9;

namespace detail {

inline void check_norm(double n2) {
    if (!(n2 <= 1.0 + kNormSlack)) {
        throw NormViolationError("amplitudes exceed unit norm: sum |c|^2 = " + std::to_string(n2));
    }
}

// sqrt of the eigenvalues of rho S rho* S for a real symmetric S, descending.
// With rho = X X^dagger these are the singular values of X^dagger S X*.
inline std::vector<double> spin_flip_roots(const Eigen::MatrixXcd& rho, const Eigen::MatrixXd& S) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho);
    const auto& w = es.eigenvalues();
    const double scale = std::max(1.0, w.cwiseAbs().maxCoeff());
    if (w.minCoeff() < -1e-10 * scale) {
        throw ValidationError("density matrix is not positive semidefinite (min eigenvalue " +
                              std::to_string(w.minCoeff()) + ")");
    }
    // eigenvalues at rounding level are zeros of a rank-deficient rho; their square
    // roots (~1e-8) would otherwise leak into the Wootters combination
    const double floor = 64.0 * std::numeric_limits<double>::epsilon() * scale * w.size();
    Eigen::MatrixXcd X = es.eigenvectors();
    for (int k = 0; k < X.cols(); ++k) X.col(k) *= w(k) > floor ? std::sqrt(w(k)) : 0.0;
    const Eigen::MatrixXcd M = X.adjoint() * S.cast<cplx>() * X.conjugate();
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M);
    const auto& s = svd.singularValues();
    std::vector<double> out(s.data(), s.data() + s.size());
    std::sort(out.begin(), out.end(), std::greater<>());
    return out;
}

inline double wootters_combination(const std::vector<double>& r) {
    double v = r.front();
    for (std::size_t k = 1; k < r.size(); ++k) v -= r[k];
    return std::max(0.0, v);
}

} // namespace detail

/// Reduced state of emitters (l, j) in the basis {ee, eg, ge, gg}.
inline Eigen::Matrix4cd pair_density_matrix(cplx cl, cplx cj) {
    const double pl = std::norm(cl), pj = std::norm(cj);
    detail::check_norm(pl + pj);
    Eigen::Matrix4cd rho = Eigen::Matrix4cd::Zero();
    rho(1, 1) = pl;
    rho(2, 2) = pj;
    rho(3, 3) = std::max(0.0, 1.0 - pl - pj);
    rho(1, 2) = cl * std::conj(cj);
    rho(2, 1) = std::conj(rho(1, 2));
    return rho;
}

inline Eigen::Matrix4d sigma_y_sigma_y() {
    // sigma_y (x) sigma_y is real: i * i * (antidiagonal signs)
    Eigen::Matrix4d s = Eigen::Matrix4d::Zero();
    s(0, 3) = -1.0;
    s(1, 2) = 1.0;
    s(2, 1) = 1.0;
    s(3, 0) = -1.0;
    return s;
}

/// Wootters concurrence of a two-qubit density matrix.
inline double concurrence2(const Eigen::Matrix4cd& rho) {
    if (!rho.isApprox(rho.adjoint(), 1e-12)) throw ValidationError("density matrix is not Hermitian");
    return detail::wootters_combination(detail::spin_flip_roots(rho, sigma_y_sigma_y()));
}

/// C_lj from the amplitude vector; l, j are zero-based.
inline double pairwise_concurrence(const std::vector<cplx>& c, std::size_t l, std::size_t j) {
    if (l >= c.size() || j >= c.size() || l == j) throw ValidationError("invalid emitter pair index");
    double n2 = 0.0;
    for (const auto& v : c) n2 += std::norm(v);
    detail::check_norm(n2);
    return concurrence2(pair_density_matrix(c[l], c[j]));
}

/// The six SO(4) generators L_pq = E_pq - E_qp, (p, q) = (0,1), (0,2), (0,3), (1,2), (1,3), (2,3).
inline std::array<Eigen::Matrix4d, 6> so4_generators() {
    std::array<Eigen::Matrix4d, 6> out;
    int k = 0;
    for (int p = 0; p < 4; ++p) {
        for (int q = p + 1; q < 4; ++q) {
            Eigen::Matrix4d L = Eigen::Matrix4d::Zero();
            L(p, q) = 1.0;
            L(q, p) = -1.0;
            out[k++] = L;
        }
    }
    return out;
}

namespace detail {

// L_j (x) i sigma_y on the 8-dim space: pair indices (a, b) in the 4-dim factor
inline Eigen::Matrix<double, 8, 8> flip_operator(int j) {
    static const auto gens = so4_generators();
    Eigen::Matrix2d isy;
    isy << 0.0, 1.0, -1.0, 0.0;
    Eigen::Matrix<double, 8, 8> S;
    for (int r = 0; r < 4; ++r)
        for (int q = 0; q < 4; ++q) S.block<2, 2>(2 * r, 2 * q) = gens[j](r, q) * isy;
    return S;
}

} // namespace detail

/// Three-qubit state of amplitudes (c_a, c_b, c_c) in the order |q_a q_b q_c>.
inline Eigen::Matrix<cplx, 8, 8> triple_density_matrix(cplx ca, cplx cb, cplx cc) {
    const double n2 = std::norm(ca) + std::norm(cb) + std::norm(cc);
    detail::check_norm(n2);
    // single excitation on a: |e g g> = index 0*4 + 1*2 + 1 = 3, on b: |g e g> = 5, on c: |g g e> = 6
    Eigen::Matrix<cplx, 8, 1> psi = Eigen::Matrix<cplx, 8, 1>::Zero();
    psi(3) = ca;
    psi(5) = cb;
    psi(6) = cc;
    Eigen::Matrix<cplx, 8, 8> rho = psi * psi.adjoint();
    rho(7, 7) += std::max(0.0, 1.0 - n2);
    return rho;
}

/// C_j^{ab|c} for each generator: the pair (a, b) carries L_j, the singleton c
/// carries i sigma_y = [[0, 1], [-1, 0]].
inline std::array<double, 6> bipartite_terms(cplx ca, cplx cb, cplx cc) {
    const auto rho = triple_density_matrix(ca, cb, cc);
    std::array<double, 6> out{};
    for (int j = 0; j < 6; ++j) {
        out[j] = detail::wootters_combination(detail::spin_flip_roots(rho, detail::flip_operator(j)));
    }
    return out;
}

/// Second route for the same numbers. The state is psi psi^dagger + p |ggg><ggg|, so
/// with X = [psi, sqrt(p) vac] the 2x2 matrix M = X^T S X is complex symmetric and its
/// two singular values give C = s1 - s2. Taking the difference from a 2x2 SVD keeps it
/// accurate when s1 ~ s2 (sqrt(|M|_F^2 - 2|det M|) loses half the digits there).
inline std::array<double, 6> bipartite_terms_rank2(cplx ca, cplx cb, cplx cc) {
    const double n2 = std::norm(ca) + std::norm(cb) + std::norm(cc);
    detail::check_norm(n2);
    Eigen::Matrix<cplx, 8, 2> X = Eigen::Matrix<cplx, 8, 2>::Zero();
    X(3, 0) = ca;
    X(5, 0) = cb;
    X(6, 0) = cc;
    X(7, 1) = std::sqrt(std::max(0.0, 1.0 - n2));
    std::array<double, 6> out{};
    for (int j = 0; j < 6; ++j) {
        const Eigen::Matrix2cd M = X.transpose() * detail::flip_operator(j).cast<cplx>() * X;
        const auto s = Eigen::JacobiSVD<Eigen::Matrix2cd>(M).singularValues();
        out[j] = std::max(0.0, s(0) - s(1));
    }
    return out;
}

/// C3 = { (1/3) sum_j [ (C_j^{12|3})^2 + (C_j^{31|2})^2 + (C_j^{23|1})^2 ] }^{1/2}
template <class Terms>
double c3_from(const std::vector<cplx>& c, Terms terms) {
    if (c.size() != 3) throw ValidationError("tripartite_c3 needs three amplitudes");
    const auto t12 = terms(c[0], c[1], c[2]);
    const auto t31 = terms(c[2], c[0], c[1]);
    const auto t23 = terms(c[1], c[2], c[0]);
    double sum = 0.0;
    for (int j = 0; j < 6; ++j) sum += t12[j] * t12[j] + t31[j] * t31[j] + t23[j] * t23[j];
    return std::sqrt(sum / 3.0);
}

inline double tripartite_c3(const std::vector<cplx>& c) { return c3_from(c, bipartite_terms); }

/// Same quantity through bipartite_terms_rank2; used as a cross-check.
inline double tripartite_c3_rank2(const std::vector<cplx>& c) { return c3_from(c, bipartite_terms_rank2); }

} // namespace plasmon_qi::entanglement
