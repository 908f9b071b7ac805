#include "randent/qsim.hpp"

#include <cmath>
#include <string>

#include "randent/errors.hpp"

namespace randent::qsim {

std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(stream), engine_(mix64(mix64(seed) ^ mix64(stream + 0x632be59bd9b4e019ULL))) {}

double RngStream::uniform() { return uniform_(engine_); }

double RngStream::normal() { return normal_(engine_); }

cplx RngStream::complex_normal() {
    const double re = normal_(engine_);
    const double im = normal_(engine_);
    return {re * M_SQRT1_2, im * M_SQRT1_2};
}

std::size_t RngStream::index(std::size_t n) {
    std::uniform_int_distribution<std::size_t> dist(0, n - 1);
    return dist(engine_);
}

bool is_unitary(const Eigen::MatrixXcd &u, double tol) {
    if (u.rows() != u.cols())
        return false;
    const Eigen::MatrixXcd d = u * u.adjoint() - Eigen::MatrixXcd::Identity(u.rows(), u.cols());
    return d.cwiseAbs().maxCoeff() <= tol;
}

PureState PureState::basis(int n, std::uint64_t index) {
    if (n < 1 || n > kMaxQubits)
        throw CapacityError("qubit count " + std::to_string(n) + " outside [1, " +
                            std::to_string(kMaxQubits) + "]");
    const std::uint64_t dim = std::uint64_t{1} << n;
    if (index >= dim)
        throw DomainError("basis index " + std::to_string(index) + " out of range for " +
                          std::to_string(n) + " qubits");
    Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(dim));
    amps[static_cast<Eigen::Index>(index)] = 1.0;
    return PureState(n, std::move(amps));
}

PureState PureState::from_amplitudes(Eigen::VectorXcd amplitudes) {
    const auto dim = static_cast<std::uint64_t>(amplitudes.size());
    if (dim < 2 || (dim & (dim - 1)) != 0)
        throw DomainError("amplitude vector length must be a power of two >= 2");
    int n = 0;
    while ((std::uint64_t{1} << n) < dim)
        ++n;
    if (n > kMaxQubits)
        throw CapacityError("state exceeds " + std::to_string(kMaxQubits) + " qubits");
    if (std::abs(amplitudes.norm() - 1.0) > 1e-10)
        throw ValidationError("amplitudes are not normalized");
    return PureState(n, std::move(amplitudes));
}

void PureState::apply_one_qubit(int q, const Matrix2c &u) {
    if (q < 0 || q >= n_)
        throw DomainError("qubit index " + std::to_string(q) + " out of range");
    if (!is_unitary(u))
        throw ValidationError("one-qubit gate is not unitary");

    const std::size_t stride = std::size_t{1} << q;
    const std::size_t total = dim();
    const cplx u00 = u(0, 0), u01 = u(0, 1), u10 = u(1, 0), u11 = u(1, 1);
    cplx *a = amps_.data();
    for (std::size_t hi = 0; hi < total; hi += 2 * stride) {
        for (std::size_t lo = 0; lo < stride; ++lo) {
            const std::size_t k0 = hi + lo;
            const std::size_t k1 = k0 + stride;
            const cplx v0 = a[k0];
            const cplx v1 = a[k1];
            a[k0] = u00 * v0 + u01 * v1;
            a[k1] = u10 * v0 + u11 * v1;
        }
    }
}

void PureState::apply_two_qubit(int i, int j, const Matrix4c &u) {
    if (i < 0 || i >= n_ || j < 0 || j >= n_)
        throw DomainError("qubit index out of range");
    if (i == j)
        throw DomainError("two-qubit gate needs distinct qubits, got " + std::to_string(i) + " twice");
    if (!is_unitary(u))
        throw ValidationError("two-qubit gate is not unitary");

    const std::size_t bit_i = std::size_t{1} << i;
    const std::size_t bit_j = std::size_t{1} << j;
    const std::size_t lo_bit = std::min(bit_i, bit_j);
    const std::size_t hi_bit = std::max(bit_i, bit_j);
    const std::size_t total = dim();

    cplx m[4][4];
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c)
            m[r][c] = u(r, c);

    cplx *a = amps_.data();
    // Row index r = 2*b_i + b_j.
    for (std::size_t outer = 0; outer < total; outer += 2 * hi_bit) {
        for (std::size_t mid = outer; mid < outer + hi_bit; mid += 2 * lo_bit) {
            for (std::size_t k = mid; k < mid + lo_bit; ++k) {
                const std::size_t idx[4] = {k, k | bit_j, k | bit_i, k | bit_i | bit_j};
                const cplx v[4] = {a[idx[0]], a[idx[1]], a[idx[2]], a[idx[3]]};
                for (int r = 0; r < 4; ++r)
                    a[idx[r]] = m[r][0] * v[0] + m[r][1] * v[1] + m[r][2] * v[2] + m[r][3] * v[3];
            }
        }
    }
}

Eigen::MatrixXcd haar_unitary(int dim, RngStream &rng) {
    Eigen::MatrixXcd z(dim, dim);
    for (int c = 0; c < dim; ++c)
        for (int r = 0; r < dim; ++r)
            z(r, c) = rng.complex_normal();
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(z);
    Eigen::MatrixXcd q = qr.householderQ();
    const Eigen::MatrixXcd &rr = qr.matrixQR();
    for (int k = 0; k < dim; ++k) {
        const cplx d = rr(k, k);
        const double mag = std::abs(d);
        q.col(k) *= (mag > 0.0) ? d / mag : cplx{1.0};
    }
    return q;
}

Matrix2c haar_u2(RngStream &rng) { return haar_unitary(2, rng); }

Matrix4c haar_u4(RngStream &rng) { return haar_unitary(4, rng); }

PureState haar_state(int n, RngStream &rng) {
    if (n < 1 || n > kMaxQubits)
        throw CapacityError("qubit count out of range");
    // Normalized complex Gaussian vector is uniform on the unit sphere.
    Eigen::VectorXcd v(Eigen::Index{1} << n);
    for (Eigen::Index k = 0; k < v.size(); ++k)
        v[k] = rng.complex_normal();
    v.normalize();
    return PureState::from_amplitudes(std::move(v));
}

} // namespace randent::qsim
