#pragma once

#include <vector>

#include "randent/qsim.hpp"

namespace randent::ent {

/// Qubit subset A of a bipartition A|B.
class Bipartition {
  public:
    /// A = first n/2 qubits (qubits 0 .. n/2-1); n must be even.
    static Bipartition symmetric(int n);
    static Bipartition of(int n, std::vector<int> members);

    [[nodiscard]] int qubits() const noexcept { return n_; }
    [[nodiscard]] const std::vector<int> &members() const noexcept { return a_; }
    [[nodiscard]] int size_a() const noexcept { return static_cast<int>(a_.size()); }
    [[nodiscard]] int size_b() const noexcept { return n_ - size_a(); }
    /// True when A is exactly the low half, so the amplitude vector reshapes without gathering.
    [[nodiscard]] bool is_low_block() const noexcept;

  private:
    Bipartition(int n, std::vector<int> a) : n_(n), a_(std::move(a)) {}
    int n_;
    std::vector<int> a_;
};

/// Schmidt coefficients, nonincreasing, length 2^min(|A|, |B|).
struct SchmidtSpectrum {
    std::vector<double> mu;
};

double purity(const qsim::PureState &state, const Bipartition &cut);
/// Von Neumann entropy of the reduced state in bits.
double vn_entropy(const qsim::PureState &state, const Bipartition &cut);
SchmidtSpectrum schmidt_spectrum(const qsim::PureState &state, const Bipartition &cut);

/// Several measures from one reduced-density-matrix diagonalization.
struct Measures {
    double purity = 1.0;
    double entropy = 0.0;
    /// Squared Schmidt coefficients, nonincreasing; empty unless requested.
    std::vector<double> mu2;
};

Measures measure(const qsim::PureState &state, const Bipartition &cut, bool want_spectrum);
/// Purity only, skipping the eigendecomposition.
double fast_purity(const qsim::PureState &state, const Bipartition &cut);

/// Mean i-th largest Schmidt coefficient (1-based rank) of a Haar-random state with
/// subsystem dimension N, from the large-N implicit formula.
double random_schmidt_reference(int rank, int big_n);
/// All N squared reference coefficients for a symmetric cut of n qubits.
std::vector<double> random_schmidt_reference_squares(int n);

/// 2N/(N^2+1) with N = 2^(n/2): exact Haar average of the symmetric-cut purity.
double asymptotic_purity(int n);
/// n/2 - 1/ln 4 bits.
double asymptotic_entropy(int n);

} // namespace randent::ent
