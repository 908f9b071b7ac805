#pragma once

/**
 * @file
 * Eigenvalues of chain operators.
 *
 * Both chains are column-stochastic and keep the identity component fixed, so
 * the all-ones row vector and the identity indicator are left eigenvectors for
 * eigenvalue 1. Their common annihilator W = {v : v_0 = 0, sum_k v_k = 0} is
 * invariant, and the iterative solver works on M restricted to W. The unit
 * multiplicity reported is 2 plus any eigenvalue on W that rounds to 1.
 */

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "randent/paulichain.hpp"

namespace randent::spectral {

using cplx = std::complex<double>;

struct Eigenvalue {
    cplx value;
    int multiplicity = 1;
};

struct SpectrumResult {
    /// Distinct eigenvalues, nonincreasing in magnitude.
    std::vector<Eigenvalue> eigenvalues;
    /// Every computed eigenvalue with repetition, in the same order.
    std::vector<cplx> values;
    int unit_multiplicity = 0;
    /// 1 - |largest non-unit eigenvalue|, set when the unit multiplicity is exactly 2.
    std::optional<double> gap;
    std::size_t dim = 0;
    std::string method;
};

inline constexpr std::size_t kMaxDenseDim = 4096;
inline constexpr double kGroupTolerance = 1e-8;
inline constexpr double kUnitTolerance = 1e-8;
inline constexpr int kMaxTopK = 12;

/// Dense matrix of op, built column by column. Throws CapacityError above kMaxDenseDim.
Eigen::MatrixXd materialize(const chain::MarkovOperator &op);

/// All eigenvalues by dense nonsymmetric decomposition.
SpectrumResult dense_spectrum(const chain::MarkovOperator &op, double group_tol = kGroupTolerance);

struct ArnoldiOptions {
    double tol = 1e-10;
    int max_restarts = 3000;
    /// Krylov basis size; 0 picks a default from k.
    int ncv = 0;
};

/// The k largest-magnitude eigenvalues (unit pair included), by implicitly
/// restarted Arnoldi on the deflated operator. Small operators fall back to the
/// dense solver. Throws ConvergenceError when the restart cap is hit.
SpectrumResult top_eigenvalues(const chain::MarkovOperator &op, int k, double tol = 1e-10);
SpectrumResult top_eigenvalues(const chain::MarkovOperator &op, int k, const ArnoldiOptions &opts);

/// Throws StructuralError unless the unit multiplicity is exactly 2 and the gap is positive.
double gap(const SpectrumResult &spec);

/// First `count` distinct eigenvalues after the unit ones, regrouped with tol.
std::vector<Eigenvalue> degeneracy_profile(const SpectrumResult &spec, double tol = kGroupTolerance, int count = 3);

/// Sorts by magnitude (ties by real then imaginary part, descending) and merges
/// values within tol of a group's first member.
std::vector<Eigenvalue> group_eigenvalues(std::vector<cplx> &values, double tol);

/// Eigenpairs of a lumped chain lifted into the full chain, with the full-chain residual of each.
struct LiftedPair {
    cplx value;
    double residual = 0.0;
};

/// Residual |M v - lambda v| / |v| in the full chain for every lumped eigenpair.
std::vector<LiftedPair> lifted_residuals(const chain::ChainOperator &full, const chain::LumpedChain &lumped);

} // namespace randent::spectral
