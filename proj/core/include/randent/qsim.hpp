#pragma once

/**
 * @file
 * Dense statevector of n qubits, gate application and Haar sampling.
 *
 * Qubit order is little-endian: qubit q is bit q of the amplitude index.
 * For two-qubit gates on the ordered pair (i, j), qubit i is the more
 * significant bit of the 4x4 row index, so CNOT acting on (i, j) has
 * i as control and j as target.
 */

#include <complex>
#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace randent::qsim {

using cplx = std::complex<double>;
using Matrix2c = Eigen::Matrix2cd;
using Matrix4c = Eigen::Matrix4cd;

inline constexpr int kMaxQubits = 24;
inline constexpr double kUnitaryTolerance = 1e-10;

/// Reproducible random source identified by (seed, stream).
///
/// Streams with different ids are statistically independent; the same pair
/// always produces the same draw sequence regardless of which thread uses it.
class RngStream {
  public:
    RngStream(std::uint64_t seed, std::uint64_t stream);

    [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
    [[nodiscard]] std::uint64_t stream() const noexcept { return stream_; }

    double uniform();
    double normal();
    cplx complex_normal();
    /// Uniform integer in [0, n).
    std::size_t index(std::size_t n);

    std::mt19937_64 &engine() noexcept { return engine_; }

  private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

/// SplitMix64 finalizer, used to derive engine seeds from (seed, stream).
std::uint64_t mix64(std::uint64_t x) noexcept;

/// True when u u^dagger equals the identity within tol (max-abs entry).
bool is_unitary(const Eigen::MatrixXcd &u, double tol = kUnitaryTolerance);

class PureState {
  public:
    /// Computational basis state |index>.
    static PureState basis(int n, std::uint64_t index);
    /// Wraps given amplitudes; length must be a power of two, norm 1 within 1e-10.
    static PureState from_amplitudes(Eigen::VectorXcd amplitudes);

    [[nodiscard]] int qubits() const noexcept { return n_; }
    [[nodiscard]] std::size_t dim() const noexcept { return static_cast<std::size_t>(amps_.size()); }
    [[nodiscard]] const Eigen::VectorXcd &amplitudes() const noexcept { return amps_; }
    [[nodiscard]] cplx operator[](std::size_t k) const { return amps_[static_cast<Eigen::Index>(k)]; }
    [[nodiscard]] double norm() const { return amps_.norm(); }

    void apply_one_qubit(int q, const Matrix2c &u);
    void apply_two_qubit(int i, int j, const Matrix4c &u);

  private:
    PureState(int n, Eigen::VectorXcd amps) : n_(n), amps_(std::move(amps)) {}

    int n_;
    Eigen::VectorXcd amps_;
};

/// Haar-distributed unitary of dimension dim (complex Ginibre, QR, diagonal phase fix).
Eigen::MatrixXcd haar_unitary(int dim, RngStream &rng);
Matrix2c haar_u2(RngStream &rng);
Matrix4c haar_u4(RngStream &rng);

/// Haar-random pure state on n qubits (first column of a Haar unitary, drawn directly).
PureState haar_state(int n, RngStream &rng);

} // namespace randent::qsim
