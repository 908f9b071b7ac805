#pragma once

/**
 * @file
 * Monte Carlo runs of the random two-qubit-gate protocol.
 *
 * Each step picks an ordered pair (i, j) uniformly from the coupling, applies
 * the gate W on it and then independent Haar rotations on qubits i and j.
 * Replica r draws from RngStream(seed, first_stream + r) and starts in |0...0>.
 */

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "randent/entmeas.hpp"
#include "randent/gatelib.hpp"
#include "randent/paulichain.hpp"
#include "randent/qsim.hpp"

namespace randent::protocol {

struct MeasureSet {
    bool purity = true;
    bool entropy = true;
    bool schmidt = false;
};

struct ProtocolConfig {
    int n = 8;
    gates::GateSpec gate;
    chain::Coupling coupling = chain::Coupling::Random;
    int steps = 50;
    int replicas = 1000;
    std::uint64_t seed = 1;
    std::uint64_t first_stream = 0;
    MeasureSet measures;
    /// Qubits of subsystem A; empty means the symmetric cut.
    std::vector<int> cut;
    /// Record every k-th step; step 0 and the last step are always recorded.
    int record_every = 1;
    /// Worker threads; 0 uses the hardware concurrency. Results do not depend on it.
    int threads = 0;
};

/// Replica sums per recorded time. Means and standard errors derive from them.
struct EnsembleTrace {
    int n = 0;
    std::size_t replicas = 0;
    MeasureSet measures;
    /// Number of squared Schmidt coefficients kept per row (0 without schmidt).
    int schmidt_count = 0;
    std::vector<int> times;
    std::vector<double> purity_sum, purity_sumsq;
    std::vector<double> entropy_sum, entropy_sumsq;
    /// Row-major, schmidt_count entries per row.
    std::vector<double> mu2_sum;

    [[nodiscard]] std::size_t rows() const noexcept { return times.size(); }
    [[nodiscard]] double purity_mean(std::size_t row) const;
    /// Sample standard deviation over sqrt(R); 0 when R = 1.
    [[nodiscard]] double purity_se(std::size_t row) const;
    [[nodiscard]] double entropy_mean(std::size_t row) const;
    [[nodiscard]] double entropy_se(std::size_t row) const;
    [[nodiscard]] double mu2_mean(std::size_t row, int k) const;
    [[nodiscard]] std::vector<double> mu2_means(std::size_t row) const;

    [[nodiscard]] std::vector<double> purity_means() const;
    [[nodiscard]] std::vector<double> purity_ses() const;
    [[nodiscard]] std::vector<double> entropy_means() const;
    [[nodiscard]] std::vector<double> entropy_ses() const;
};

/// Sum of two traces over disjoint replica sets; times and measures must match.
EnsembleTrace merge(const EnsembleTrace &a, const EnsembleTrace &b);

std::pair<int, int> choose_pair(chain::Coupling coupling, int n, qsim::RngStream &rng);

/// One protocol step on a fixed gate. Pass std::nullopt as gate for a fresh Haar U(4) per step.
void protocol_step(qsim::PureState &state, const std::optional<qsim::Matrix4c> &gate, const chain::PairList &pairs,
                   qsim::RngStream &rng);
void protocol_step(qsim::PureState &state, const gates::GateSpec &spec, chain::Coupling coupling,
                   qsim::RngStream &rng);

EnsembleTrace run_protocol(const ProtocolConfig &cfg);

/// Recorded time points of a config: 0, k, 2k, ..., and steps.
std::vector<int> record_times(int steps, int record_every);

} // namespace randent::protocol
