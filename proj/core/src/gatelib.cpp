#include "randent/gatelib.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include <fmt/format.h>

#include "randent/errors.hpp"

namespace randent::gates {

namespace {

const std::array<Matrix2c, 4> &pauli_table() {
    static const std::array<Matrix2c, 4> table = [] {
        std::array<Matrix2c, 4> t;
        t[0] << 1, 0, 0, 1;
        t[1] << 0, 1, 1, 0;
        t[2] << 0, cplx(0, -1), cplx(0, 1), 0;
        t[3] << 1, 0, 0, -1;
        return t;
    }();
    return table;
}

Matrix4c kron(const Matrix2c &a, const Matrix2c &b) {
    Matrix4c out;
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c)
            out.block<2, 2>(2 * r, 2 * c) = a(r, c) * b;
    return out;
}

// Magic basis; columns are Bell states with phases chosen so that
// Q^dagger (A (x) B) Q is real orthogonal for A, B in SU(2).
const Matrix4c &magic_basis() {
    static const Matrix4c q = [] {
        const cplx i(0, 1);
        Matrix4c m;
        m << 1, 0, 0, i,
             0, i, 1, 0,
             0, i, -1, 0,
             1, 0, 0, -i;
        return Matrix4c(m * M_SQRT1_2);
    }();
    return q;
}

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    return out;
}

double parse_double(std::string_view s) {
    while (!s.empty() && s.front() == ' ')
        s.remove_prefix(1);
    while (!s.empty() && s.back() == ' ')
        s.remove_suffix(1);
    if (!s.empty() && s.front() == '+')
        s.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v))
        throw DomainError(fmt::format("invalid number '{}' in gate spec", s));
    return v;
}

} // namespace

const Matrix2c &pauli(int b) {
    if (b < 0 || b > 3)
        throw DomainError("Pauli index must be in 0..3");
    return pauli_table()[static_cast<std::size_t>(b)];
}

Matrix4c pauli_product(int x) {
    if (x < 0 || x > 15)
        throw DomainError("Pauli product index must be in 0..15");
    return kron(pauli(x / 4), pauli(x % 4));
}

TwoQubitGate canonical_gate(const CanonicalParams &p) {
    const double s = 1.0 / std::sqrt(2.0);
    // Bell states and their (XX, YY, ZZ) eigenvalues.
    struct Bell {
        Eigen::Vector4cd v;
        double xx, yy, zz;
    };
    const std::array<Bell, 4> bells = {{
        {Eigen::Vector4cd(s, 0, 0, s), +1, -1, +1},
        {Eigen::Vector4cd(s, 0, 0, -s), -1, +1, +1},
        {Eigen::Vector4cd(0, s, s, 0), +1, +1, -1},
        {Eigen::Vector4cd(0, s, -s, 0), -1, -1, -1},
    }};
    Matrix4c w = Matrix4c::Zero();
    for (const auto &b : bells) {
        const double angle = M_PI / 4.0 * (p.ax * b.xx + p.ay * b.yy + p.az * b.zz);
        w += std::polar(1.0, angle) * (b.v * b.v.adjoint());
    }
    return {w, p};
}

TwoQubitGate named_gate(GateName name) {
    Matrix4c m = Matrix4c::Zero();
    const cplx i(0, 1);
    switch (name) {
    case GateName::Cnot:
        m << 1, 0, 0, 0,
             0, 1, 0, 0,
             0, 0, 0, 1,
             0, 0, 1, 0;
        break;
    case GateName::Xy:
        m << 1, 0, 0, 0,
             0, 0, -i, 0,
             0, -i, 0, 0,
             0, 0, 0, 1;
        break;
    case GateName::Dcnot: {
        // CNOT_ij * CNOT_ji
        Matrix4c cnot_ij = named_gate(GateName::Cnot).matrix;
        Matrix4c cnot_ji;
        cnot_ji << 1, 0, 0, 0,
                   0, 0, 0, 1,
                   0, 0, 1, 0,
                   0, 1, 0, 0;
        m = cnot_ij * cnot_ji;
        break;
    }
    case GateName::Swap:
        m << 1, 0, 0, 0,
             0, 0, 1, 0,
             0, 1, 0, 0,
             0, 0, 0, 1;
        break;
    case GateName::Identity:
        m = Matrix4c::Identity();
        break;
    }
    return {m, name};
}

GateName parse_gate_name(std::string_view name) {
    const std::string s = lower(name);
    if (s == "cnot")
        return GateName::Cnot;
    if (s == "xy")
        return GateName::Xy;
    if (s == "dcnot")
        return GateName::Dcnot;
    if (s == "swap")
        return GateName::Swap;
    if (s == "identity" || s == "id")
        return GateName::Identity;
    throw DomainError(fmt::format("unknown gate name '{}'", name));
}

std::string_view to_string(GateName name) {
    switch (name) {
    case GateName::Cnot: return "cnot";
    case GateName::Xy: return "xy";
    case GateName::Dcnot: return "dcnot";
    case GateName::Swap: return "swap";
    case GateName::Identity: return "identity";
    }
    return "?";
}

LocalInvariants local_invariants(const Matrix4c &u) {
    if (!qsim::is_unitary(u))
        throw ValidationError("local invariants need a unitary gate");
    const Matrix4c &q = magic_basis();
    const Matrix4c ub = q.adjoint() * u * q;
    const Matrix4c m = ub.transpose() * ub;
    const cplx det = u.determinant();
    const cplx tr = m.trace();
    const cplx tr2 = (m * m).trace();
    return {tr * tr / (16.0 * det), ((tr * tr - tr2) / (4.0 * det)).real()};
}

std::string describe(const SymmetryMove &move) {
    static constexpr std::array<char, 3> axis = {'x', 'y', 'z'};
    const char k = axis[static_cast<std::size_t>(move.k)];
    switch (move.kind) {
    case SymmetryMove::Kind::Shift:
        return fmt::format("shift a{} by {:+d}", k, 2 * move.other_or_delta);
    case SymmetryMove::Kind::Exchange:
        return fmt::format("exchange a{} <-> a{}", k, axis[static_cast<std::size_t>(move.other_or_delta)]);
    case SymmetryMove::Kind::Reflect:
        return fmt::format("reflect a{} -> 2 - a{} (conjugate)", k, k);
    }
    return "?";
}

CanonicalParams apply_move(CanonicalParams p, const SymmetryMove &move) {
    switch (move.kind) {
    case SymmetryMove::Kind::Shift:
        p[move.k] += 2.0 * move.other_or_delta;
        break;
    case SymmetryMove::Kind::Exchange:
        std::swap(p[move.k], p[move.other_or_delta]);
        break;
    case SymmetryMove::Kind::Reflect:
        p[move.k] = 2.0 - p[move.k];
        break;
    }
    return p;
}

int Reduction::conjugations() const {
    return static_cast<int>(std::count_if(transcript.begin(), transcript.end(), [](const SymmetryMove &m) {
        return m.kind == SymmetryMove::Kind::Reflect;
    }));
}

Reduction reduce_to_fundamental(const CanonicalParams &p) {
    for (int k = 0; k < 3; ++k)
        if (!std::isfinite(p[k]))
            throw DomainError("canonical parameters must be finite");

    Reduction r{p, {}};
    auto push = [&r](SymmetryMove m) {
        r.params = apply_move(r.params, m);
        r.transcript.push_back(m);
    };

    for (int k = 0; k < 3; ++k) {
        // Bring a_k into [0, 2).
        const double turns = std::floor(r.params[k] / 2.0);
        if (turns != 0.0)
            push({SymmetryMove::Kind::Shift, k, -static_cast<int>(turns)});
        if (r.params[k] >= 2.0)
            push({SymmetryMove::Kind::Shift, k, -1});
        if (r.params[k] < 0.0)
            push({SymmetryMove::Kind::Shift, k, +1});
        if (r.params[k] > 1.0)
            push({SymmetryMove::Kind::Reflect, k, 0});
    }
    // Sort descending with adjacent exchanges.
    for (int pass = 0; pass < 2; ++pass)
        for (int k = 0; k < 2 - pass; ++k)
            if (r.params[k] < r.params[k + 1])
                push({SymmetryMove::Kind::Exchange, k, k + 1});
    return r;
}

cplx to_complex(Phase ph) {
    switch (ph) {
    case Phase::PlusOne: return {1, 0};
    case Phase::MinusOne: return {-1, 0};
    case Phase::PlusI: return {0, 1};
    case Phase::MinusI: return {0, -1};
    }
    return {};
}

std::optional<PauliConjugationTable> pauli_conjugation_table(const Matrix4c &g, double tol) {
    if (!qsim::is_unitary(g))
        throw ValidationError("Pauli conjugation table needs a unitary gate");
    PauliConjugationTable table;
    for (int x = 0; x < 16; ++x) {
        const Matrix4c c = g * pauli_product(x) * g.adjoint();
        int best = -1;
        cplx best_coef{};
        for (int y = 0; y < 16; ++y) {
            // P_y is Hermitian and tr(P_y P_y) = 4.
            const cplx coef = (pauli_product(y) * c).trace() / 4.0;
            if (best < 0 || std::abs(coef) > std::abs(best_coef)) {
                best = y;
                best_coef = coef;
            }
        }
        if ((c - best_coef * pauli_product(best)).cwiseAbs().maxCoeff() > tol)
            return std::nullopt;
        constexpr std::array<Phase, 4> phases = {Phase::PlusOne, Phase::MinusOne, Phase::PlusI, Phase::MinusI};
        const auto match = std::find_if(phases.begin(), phases.end(), [&](Phase ph) {
            return std::abs(best_coef - to_complex(ph)) <= tol;
        });
        if (match == phases.end())
            return std::nullopt;
        table.perm[static_cast<std::size_t>(x)] = best;
        table.phase[static_cast<std::size_t>(x)] = *match;
    }
    return table;
}

TwoQubitGate GateSpec::gate() const {
    switch (kind) {
    case Kind::Named:
        return named_gate(name);
    case Kind::Canonical:
        return canonical_gate(params);
    case Kind::HaarU4:
        break;
    }
    throw UnsupportedError("u4 draws a fresh gate every step and has no fixed matrix");
}

std::string GateSpec::to_string() const {
    switch (kind) {
    case Kind::Named:
        return std::string(gates::to_string(name));
    case Kind::Canonical:
        return fmt::format("canonical:{},{},{}", params.ax, params.ay, params.az);
    case Kind::HaarU4:
        return "u4";
    }
    return "?";
}

GateSpec parse_gate_spec(std::string_view text) {
    const std::string s = lower(text);
    GateSpec spec;
    if (s == "u4") {
        spec.kind = GateSpec::Kind::HaarU4;
        return spec;
    }
    constexpr std::string_view prefix = "canonical:";
    if (s.rfind(prefix, 0) == 0) {
        std::string_view rest = std::string_view(s).substr(prefix.size());
        std::array<double, 3> values{};
        for (int k = 0; k < 3; ++k) {
            const auto comma = rest.find(',');
            if ((k < 2) == (comma == std::string_view::npos))
                throw DomainError(fmt::format("gate spec '{}' needs exactly three comma-separated parameters", text));
            values[static_cast<std::size_t>(k)] = parse_double(rest.substr(0, comma));
            if (comma != std::string_view::npos)
                rest.remove_prefix(comma + 1);
        }
        spec.kind = GateSpec::Kind::Canonical;
        spec.params = {values[0], values[1], values[2]};
        return spec;
    }
    spec.kind = GateSpec::Kind::Named;
    spec.name = parse_gate_name(s);
    return spec;
}

} // namespace randent::gates
