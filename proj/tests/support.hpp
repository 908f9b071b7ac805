#pragma once

// Brute-force oracles shared by the unit tests. Everything here is written
// independently of the library code paths it checks.

#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "randent/qsim.hpp"

namespace test {

using cplx = std::complex<double>;

inline int bit(std::size_t x, int q) { return static_cast<int>((x >> q) & 1U); }

inline Eigen::MatrixXcd embed_one(const Eigen::Matrix2cd &u, int q, int n) {
    const std::size_t d = std::size_t{1} << n;
    Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    const std::size_t mask = std::size_t{1} << q;
    for (std::size_t out = 0; out < d; ++out)
        for (std::size_t in = 0; in < d; ++in)
            if ((out & ~mask) == (in & ~mask))
                g(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(in)) = u(bit(out, q), bit(in, q));
    return g;
}

inline Eigen::MatrixXcd embed_two(const Eigen::Matrix4cd &u, int i, int j, int n) {
    const std::size_t d = std::size_t{1} << n;
    Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    const std::size_t mask = (std::size_t{1} << i) | (std::size_t{1} << j);
    for (std::size_t out = 0; out < d; ++out)
        for (std::size_t in = 0; in < d; ++in)
            if ((out & ~mask) == (in & ~mask))
                g(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(in)) =
                    u(2 * bit(out, i) + bit(out, j), 2 * bit(in, i) + bit(in, j));
    return g;
}

inline Eigen::Matrix2cd pauli(int b) {
    Eigen::Matrix2cd p;
    switch (b) {
    case 0: p << 1, 0, 0, 1; break;
    case 1: p << 0, 1, 1, 0; break;
    case 2: p << 0, cplx(0, -1), cplx(0, 1), 0; break;
    default: p << 1, 0, 0, -1; break;
    }
    return p;
}

/// <psi| P_alpha |psi>^2 / 2^n for every Pauli string, digit k of alpha acting on qubit k.
inline std::vector<double> pauli_weights(const Eigen::VectorXcd &psi, int n) {
    const std::size_t d = std::size_t{1} << n;
    const std::size_t count = std::size_t{1} << (2 * n);
    std::vector<double> w(count);
    for (std::size_t alpha = 0; alpha < count; ++alpha) {
        cplx e = 0.0;
        for (std::size_t y = 0; y < d; ++y) {
            // P|y> = coef |x>
            std::size_t x = y;
            cplx coef = 1.0;
            for (int k = 0; k < n; ++k) {
                const int p = static_cast<int>((alpha >> (2 * k)) & 3U);
                const int yb = bit(y, k);
                const Eigen::Matrix2cd m = pauli(p);
                const int xb = std::abs(m(0, yb)) > 0.5 ? 0 : 1;
                coef *= m(xb, yb);
                if (xb != yb)
                    x ^= std::size_t{1} << k;
            }
            e += std::conj(psi[static_cast<Eigen::Index>(x)]) * coef * psi[static_cast<Eigen::Index>(y)];
        }
        w[alpha] = e.real() * e.real() / static_cast<double>(d);
    }
    return w;
}

/// Reduced density matrix of qubits `a` by explicit summation.
inline Eigen::MatrixXcd reduced_density(const Eigen::VectorXcd &psi, int n, const std::vector<int> &a) {
    const std::size_t da = std::size_t{1} << a.size();
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(da), static_cast<Eigen::Index>(da));
    const std::size_t d = std::size_t{1} << n;
    auto a_index = [&](std::size_t x) {
        std::size_t r = 0;
        for (std::size_t m = 0; m < a.size(); ++m)
            r |= static_cast<std::size_t>(bit(x, a[m])) << m;
        return r;
    };
    std::size_t a_mask = 0;
    for (int q : a)
        a_mask |= std::size_t{1} << q;
    for (std::size_t x = 0; x < d; ++x)
        for (std::size_t y = 0; y < d; ++y)
            if ((x & ~a_mask) == (y & ~a_mask))
                rho(static_cast<Eigen::Index>(a_index(x)), static_cast<Eigen::Index>(a_index(y))) +=
                    psi[static_cast<Eigen::Index>(x)] * std::conj(psi[static_cast<Eigen::Index>(y)]);
    return rho;
}

/// The 24 single-qubit Clifford unitaries modulo phase, generated from H and S.
inline std::vector<Eigen::Matrix2cd> single_qubit_cliffords() {
    Eigen::Matrix2cd h, s;
    h << 1, 1, 1, -1;
    h /= std::sqrt(2.0);
    s << 1, 0, 0, cplx(0, 1);
    std::vector<Eigen::Matrix2cd> group = {Eigen::Matrix2cd::Identity()};
    auto known = [&](const Eigen::Matrix2cd &m) {
        for (const auto &g : group)
            if (std::abs((g.adjoint() * m).trace()) > 2.0 - 1e-9)
                return true;
        return false;
    };
    for (std::size_t k = 0; k < group.size(); ++k)
        for (const auto &gen : {h, s}) {
            const Eigen::Matrix2cd m = gen * group[k];
            if (!known(m))
                group.push_back(m);
        }
    return group;
}

} // namespace test
