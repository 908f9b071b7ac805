#pragma once

/**
 * @file
 * Ensemble-averaged squared Pauli coefficients as a Markov chain.
 *
 * A Pauli string alpha on n qubits is stored as a base-4 integer whose
 * digit k is the Pauli on qubit k (0 identity, 1 x, 2 y, 3 z). Weights
 * follow p_alpha = tr(rho P_alpha)^2 / 2^n so that a pure state's weights
 * sum to one. One protocol step maps p to M p with
 *
 *     M = (1/L) sum over ordered pairs (i, j) of K embedded on (i, j),
 *
 * where the 16x16 pair kernel K acts on pair indices x = b_j + 4 b_i.
 * K(alpha, beta) is the weight moved from beta to alpha, so the update is
 * p'(alpha) = sum_beta K(alpha, beta) p(beta). All kernels in scope are
 * doubly stochastic.
 */

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "randent/gatelib.hpp"

namespace randent::chain {

enum class Coupling { Random, NnPbc, NnObc };

Coupling parse_coupling(std::string_view text);
std::string_view to_string(Coupling c);

using PairList = std::vector<std::pair<int, int>>;

/// Ordered pairs (i, j) of the coupling: n(n-1) for random, 2n for nnPBC, 2(n-1) for nnOBC.
PairList coupling_pairs(Coupling coupling, int n);

/// Average of the single-qubit conjugation map over Haar U(2), on squared Pauli weights.
Eigen::Matrix4d single_qubit_average_kernel();

using Matrix16d = Eigen::Matrix<double, 16, 16>;

class PairKernel {
  public:
    enum class Structure { Generic, CliffordMix, UniformMix };

    /// Permutation by the conjugation table followed by R (x) R mixing; phases drop out.
    static PairKernel clifford(const gates::PauliConjugationTable &table, std::string label = "clifford");
    /// Haar U(4) average: identity fixed, the other 15 products mixed uniformly.
    static PairKernel u4();
    /// Arbitrary nonnegative column-stochastic kernel.
    static PairKernel from_matrix(const Matrix16d &m, std::string label = "custom");

    [[nodiscard]] const Matrix16d &matrix() const noexcept { return matrix_; }
    [[nodiscard]] Structure structure() const noexcept { return structure_; }
    [[nodiscard]] const std::array<int, 16> &perm() const noexcept { return perm_; }
    [[nodiscard]] const std::string &label() const noexcept { return label_; }

    /// out = K * in for one gathered 16-entry block.
    void apply_block(const double *in, double *out) const noexcept;

  private:
    PairKernel() = default;

    Matrix16d matrix_ = Matrix16d::Zero();
    Structure structure_ = Structure::Generic;
    std::array<int, 16> perm_{};
    std::string label_;
};

inline PairKernel pair_kernel_clifford(const gates::PauliConjugationTable &table) {
    return PairKernel::clifford(table);
}
inline PairKernel pair_kernel_u4() { return PairKernel::u4(); }

/// Kernel for a gate spec: u4 or any Clifford gate. Throws UnsupportedError otherwise.
PairKernel kernel_for(const gates::GateSpec &spec);

/// Linear map on a real vector space, applied matrix-free.
class MarkovOperator {
  public:
    virtual ~MarkovOperator() = default;
    [[nodiscard]] virtual std::size_t dim() const = 0;
    /// out = M * in. in and out must not alias.
    virtual void apply(std::span<const double> in, std::span<double> out) const = 0;
};

inline constexpr int kMaxFullQubits = 13;
inline constexpr int kMaxLumpedQubits = 26;

struct PauliWeightDist {
    int n = 0;
    std::vector<double> weights;
};

/// Full 4^n chain.
class ChainOperator final : public MarkovOperator {
  public:
    ChainOperator(PairKernel kernel, int n, Coupling coupling);

    [[nodiscard]] std::size_t dim() const override { return dim_; }
    void apply(std::span<const double> in, std::span<double> out) const override;

    [[nodiscard]] int qubits() const noexcept { return n_; }
    [[nodiscard]] Coupling coupling() const noexcept { return coupling_; }
    [[nodiscard]] const PairList &pairs() const noexcept { return pairs_; }
    [[nodiscard]] const PairKernel &kernel() const noexcept { return kernel_; }

    /// Applies only the embedded kernel of one pair: out = K_(i,j) * in.
    void apply_pair(int i, int j, std::span<const double> in, std::span<double> out) const;

  private:
    void accumulate_pair(int i, int j, const double *in, double *out) const;

    PairKernel kernel_;
    int n_;
    Coupling coupling_;
    PairList pairs_;
    std::size_t dim_;
};

PauliWeightDist initial_dist_product_state(int n);
/// Stationary distribution: 1/2^n on the identity string, the rest uniform.
PauliWeightDist ergodic_dist(int n);

/// Symmetric-cut purity 2^(n/2) * (sum of weights with identity on qubits n/2..n-1).
double purity_from_dist(const PauliWeightDist &dist);

/// Purity after 0..t_max chain steps from dist.
std::vector<double> evolve(const ChainOperator &op, PauliWeightDist dist, int t_max);

/// Support classes of a pair index, ordered: 0 = {}, 1 = {i}, 2 = {j}, 3 = {i, j}.
int support_class(int x) noexcept;
inline constexpr std::array<int, 4> kClassSizes = {1, 3, 3, 9};

struct LumpReport {
    /// Row-stochastic class transition matrix, kernel(from, to), assuming the weight
    /// inside the source class is uniform over its members.
    Eigen::Matrix4d kernel = Eigen::Matrix4d::Zero();
    /// Largest spread, within each source class, of the per-member class-transition sums.
    std::array<double, 4> max_deviation{};
    std::array<bool, 4> lumpable{};

    [[nodiscard]] bool strongly_lumpable() const {
        return lumpable[0] && lumpable[1] && lumpable[2] && lumpable[3];
    }
};

inline constexpr double kLumpTolerance = 1e-12;

LumpReport lump(const PairKernel &kernel);

/// 2^n chain over Pauli support patterns (bit k set when qubit k carries a non-identity).
///
/// Vectors hold the total weight of each pattern; the operator is M restricted
/// to distributions that are uniform inside every pattern, a subspace M leaves
/// invariant because each step re-randomizes the touched qubits.
class LumpedChain final : public MarkovOperator {
  public:
    LumpedChain(const PairKernel &kernel, int n, Coupling coupling);

    [[nodiscard]] std::size_t dim() const override { return dim_; }
    void apply(std::span<const double> in, std::span<double> out) const override;

    [[nodiscard]] int qubits() const noexcept { return n_; }
    [[nodiscard]] Coupling coupling() const noexcept { return coupling_; }
    [[nodiscard]] const PairList &pairs() const noexcept { return pairs_; }
    [[nodiscard]] const LumpReport &report() const noexcept { return report_; }

  private:
    LumpReport report_;
    int n_;
    Coupling coupling_;
    PairList pairs_;
    std::size_t dim_;
};

/// Support pattern of a Pauli string.
std::uint64_t support_pattern(std::uint64_t alpha, int n) noexcept;

/// Embeds a lumped vector into the full space, spreading each pattern's weight
/// uniformly over its 3^|pattern| strings.
std::vector<double> lift_lumped(std::span<const double> lumped, int n);

/// Sums full-space weights per support pattern.
std::vector<double> project_to_lumped(std::span<const double> full, int n);

} // namespace randent::chain
