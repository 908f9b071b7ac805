#pragma once

/**
 * @file
 * Two-qubit gates: canonical form w(ax, ay, az), named gates, local
 * invariants, reduction to the fundamental parameter range and
 * Pauli-conjugation tables for Clifford gates.
 *
 * Two-qubit Pauli products are numbered x = b_j + 4 * b_i with
 * b in {0: identity, 1: x, 2: y, 3: z}; the product is kron(P_{b_i}, P_{b_j})
 * in the 4x4 basis where qubit i is the more significant bit.
 */

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "randent/qsim.hpp"

namespace randent::gates {

using qsim::cplx;
using qsim::Matrix2c;
using qsim::Matrix4c;

struct CanonicalParams {
    double ax = 0.0;
    double ay = 0.0;
    double az = 0.0;

    [[nodiscard]] double operator[](int k) const { return k == 0 ? ax : (k == 1 ? ay : az); }
    double &operator[](int k) { return k == 0 ? ax : (k == 1 ? ay : az); }
    friend bool operator==(const CanonicalParams &, const CanonicalParams &) = default;
};

enum class GateName { Cnot, Xy, Dcnot, Swap, Identity };

struct TwoQubitGate {
    Matrix4c matrix;
    std::variant<std::monostate, GateName, CanonicalParams> provenance;
};

/// Pauli matrix sigma^b, b in 0..3.
const Matrix2c &pauli(int b);
/// kron(sigma^{x / 4}, sigma^{x % 4}).
Matrix4c pauli_product(int x);

/// exp(i pi/4 (ax XX + ay YY + az ZZ)), built in the Bell basis where all three terms are diagonal.
TwoQubitGate canonical_gate(const CanonicalParams &p);
TwoQubitGate named_gate(GateName name);
GateName parse_gate_name(std::string_view name);
std::string_view to_string(GateName name);

/// Makhlin local invariants (G1, G2). Equal for gates related by single-qubit
/// pre/post multiplication; complex conjugation of the gate conjugates G1.
struct LocalInvariants {
    cplx g1;
    double g2;
};

LocalInvariants local_invariants(const Matrix4c &u);

/// One symmetry generator applied during reduction.
///
///  - Shift:    a_k -> a_k + 2*delta (delta = +-1), multiplication by the local gate -+i sigma^k sigma^k.
///  - Exchange: swap a_k and a_l, conjugation by a pi/2 rotation on both qubits.
///  - Reflect:  a_k -> 2 - a_k, the 1+a <-> 1-a symmetry; involves complex conjugation of the gate.
struct SymmetryMove {
    enum class Kind { Shift, Exchange, Reflect };
    Kind kind;
    int k;
    int other_or_delta;

    friend bool operator==(const SymmetryMove &, const SymmetryMove &) = default;
};

std::string describe(const SymmetryMove &move);
CanonicalParams apply_move(CanonicalParams p, const SymmetryMove &move);

struct Reduction {
    CanonicalParams params;
    std::vector<SymmetryMove> transcript;
    /// Number of Reflect moves; odd means the reduced gate is equivalent to the conjugate.
    [[nodiscard]] int conjugations() const;
};

/// Maps p into 1 >= ax >= ay >= az >= 0 using only the generators above.
Reduction reduce_to_fundamental(const CanonicalParams &p);

enum class Phase : unsigned char { PlusOne, MinusOne, PlusI, MinusI };
cplx to_complex(Phase ph);

/// g P_x g^dagger = phase[x] * P_{perm[x]}.
struct PauliConjugationTable {
    std::array<int, 16> perm{};
    std::array<Phase, 16> phase{};
};

inline constexpr double kCliffordTolerance = 1e-8;

/// Table for a gate mapping every Pauli product to a single phased Pauli product, else nullopt.
std::optional<PauliConjugationTable> pauli_conjugation_table(const Matrix4c &g,
                                                             double tol = kCliffordTolerance);

/// Gate choice for a protocol run, as parsed from "cnot" | "xy" | "dcnot" | "swap" |
/// "identity" | "u4" | "canonical:ax,ay,az".
struct GateSpec {
    enum class Kind { Named, Canonical, HaarU4 };
    Kind kind = Kind::Named;
    GateName name = GateName::Cnot;
    CanonicalParams params{};

    /// Fixed two-qubit gate; throws UnsupportedError for HaarU4.
    [[nodiscard]] TwoQubitGate gate() const;
    [[nodiscard]] std::string to_string() const;
};

GateSpec parse_gate_spec(std::string_view text);

} // namespace randent::gates
