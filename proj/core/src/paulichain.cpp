#include "randent/paulichain.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include <fmt/format.h>

#include "randent/errors.hpp"

namespace randent::chain {

namespace {

std::size_t pow4(int n) { return std::size_t{1} << (2 * n); }

// R (x) R on a 16-block indexed x = b_j + 4 b_i; R keeps the identity
// component and replaces x, y, z components by their mean.
inline void mix_pair(const double *p, double *r) noexcept {
    double q[16];
    for (int bi = 0; bi < 4; ++bi) {
        const double *row = p + 4 * bi;
        const double m = (row[1] + row[2] + row[3]) / 3.0;
        q[4 * bi] = row[0];
        q[4 * bi + 1] = q[4 * bi + 2] = q[4 * bi + 3] = m;
    }
    for (int bj = 0; bj < 4; ++bj) {
        const double m = (q[4 + bj] + q[8 + bj] + q[12 + bj]) / 3.0;
        r[bj] = q[bj];
        r[4 + bj] = r[8 + bj] = r[12 + bj] = m;
    }
}

void check_qubits(int n, int max, const char *what) {
    if (n < 2)
        throw DomainError(fmt::format("{} needs at least 2 qubits, got {}", what, n));
    if (n > max)
        throw CapacityError(fmt::format("{} is limited to {} qubits, got {}", what, max, n));
}

// Enumerates the base offsets of all index blocks whose digits at positions
// lo < hi are zero, for digits of width `bits` (2 for Pauli strings, 1 for patterns).
template <class F>
void for_each_block(int n, int lo, int hi, int bits, F &&f) {
    const std::size_t total = std::size_t{1} << (bits * n);
    const std::size_t s_lo = std::size_t{1} << (bits * lo);
    const std::size_t s_hi = std::size_t{1} << (bits * hi);
    const std::size_t radix = std::size_t{1} << bits;
    for (std::size_t outer = 0; outer < total; outer += radix * s_hi)
        for (std::size_t mid = outer; mid < outer + s_hi; mid += radix * s_lo)
            for (std::size_t k = mid; k < mid + s_lo; ++k)
                f(k);
}

} // namespace

Coupling parse_coupling(std::string_view text) {
    std::string s(text);
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (s == "random" || s == "ran" || s == "random-ij")
        return Coupling::Random;
    if (s == "nnpbc")
        return Coupling::NnPbc;
    if (s == "nnobc")
        return Coupling::NnObc;
    throw DomainError(fmt::format("unknown coupling '{}' (expected random, nnpbc or nnobc)", text));
}

std::string_view to_string(Coupling c) {
    switch (c) {
    case Coupling::Random: return "random";
    case Coupling::NnPbc: return "nnpbc";
    case Coupling::NnObc: return "nnobc";
    }
    return "?";
}

PairList coupling_pairs(Coupling coupling, int n) {
    if (n < 2)
        throw DomainError(fmt::format("a coupling needs at least 2 qubits, got {}", n));
    PairList pairs;
    switch (coupling) {
    case Coupling::Random:
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (i != j)
                    pairs.emplace_back(i, j);
        break;
    case Coupling::NnPbc:
        for (int i = 0; i < n; ++i) {
            pairs.emplace_back(i, (i + 1) % n);
            pairs.emplace_back((i + 1) % n, i);
        }
        break;
    case Coupling::NnObc:
        for (int i = 0; i + 1 < n; ++i) {
            pairs.emplace_back(i, i + 1);
            pairs.emplace_back(i + 1, i);
        }
        break;
    }
    return pairs;
}

Eigen::Matrix4d single_qubit_average_kernel() {
    Eigen::Matrix4d r = Eigen::Matrix4d::Zero();
    r(0, 0) = 1.0;
    r.bottomRightCorner<3, 3>().setConstant(1.0 / 3.0);
    return r;
}

PairKernel PairKernel::clifford(const gates::PauliConjugationTable &table, std::string label) {
    std::array<bool, 16> seen{};
    for (int x : table.perm) {
        if (x < 0 || x > 15 || seen[static_cast<std::size_t>(x)])
            throw ValidationError("conjugation table is not a permutation of 0..15");
        seen[static_cast<std::size_t>(x)] = true;
    }
    if (table.perm[0] != 0)
        throw ValidationError("conjugation table must fix the identity");

    const Eigen::Matrix4d r = single_qubit_average_kernel();
    PairKernel k;
    k.structure_ = Structure::CliffordMix;
    k.perm_ = table.perm;
    k.label_ = std::move(label);
    for (int alpha = 0; alpha < 16; ++alpha)
        for (int beta = 0; beta < 16; ++beta) {
            const int bp = table.perm[static_cast<std::size_t>(beta)];
            k.matrix_(alpha, beta) = r(alpha / 4, bp / 4) * r(alpha % 4, bp % 4);
        }
    return k;
}

PairKernel PairKernel::u4() {
    PairKernel k;
    k.structure_ = Structure::UniformMix;
    k.label_ = "u4";
    k.matrix_(0, 0) = 1.0;
    k.matrix_.bottomRightCorner<15, 15>().setConstant(1.0 / 15.0);
    return k;
}

PairKernel PairKernel::from_matrix(const Matrix16d &m, std::string label) {
    if ((m.array() < 0.0).any())
        throw ValidationError("pair kernel entries must be nonnegative");
    const Eigen::Matrix<double, 1, 16> col_sums = m.colwise().sum();
    if ((col_sums.array() - 1.0).abs().maxCoeff() > 1e-12)
        throw ValidationError("pair kernel columns must sum to one");
    PairKernel k;
    k.matrix_ = m;
    k.label_ = std::move(label);
    return k;
}

void PairKernel::apply_block(const double *in, double *out) const noexcept {
    switch (structure_) {
    case Structure::CliffordMix: {
        double p[16];
        for (int x = 0; x < 16; ++x)
            p[perm_[static_cast<std::size_t>(x)]] = in[x];
        mix_pair(p, out);
        return;
    }
    case Structure::UniformMix: {
        double s = 0.0;
        for (int x = 1; x < 16; ++x)
            s += in[x];
        s /= 15.0;
        out[0] = in[0];
        for (int x = 1; x < 16; ++x)
            out[x] = s;
        return;
    }
    case Structure::Generic:
        break;
    }
    for (int a = 0; a < 16; ++a) {
        double s = 0.0;
        for (int b = 0; b < 16; ++b)
            s += matrix_(a, b) * in[b];
        out[a] = s;
    }
}

PairKernel kernel_for(const gates::GateSpec &spec) {
    if (spec.kind == gates::GateSpec::Kind::HaarU4)
        return PairKernel::u4();
    const auto gate = spec.gate();
    const auto table = gates::pauli_conjugation_table(gate.matrix);
    if (!table)
        throw UnsupportedError(fmt::format(
            "gate '{}' is not Clifford: its Pauli weights do not evolve as a Markov chain; "
            "use u4 or a gate that maps Pauli products to Pauli products",
            spec.to_string()));
    return PairKernel::clifford(*table, spec.to_string());
}

ChainOperator::ChainOperator(PairKernel kernel, int n, Coupling coupling)
    : kernel_(std::move(kernel)), n_(n), coupling_(coupling) {
    check_qubits(n, kMaxFullQubits, "full Pauli chain");
    pairs_ = coupling_pairs(coupling, n);
    dim_ = pow4(n);
}

void ChainOperator::accumulate_pair(int i, int j, const double *in, double *out) const {
    const std::size_t si = std::size_t{1} << (2 * i);
    const std::size_t sj = std::size_t{1} << (2 * j);
    std::size_t offset[16];
    for (int x = 0; x < 16; ++x)
        offset[x] = static_cast<std::size_t>(x / 4) * si + static_cast<std::size_t>(x % 4) * sj;

    for_each_block(n_, std::min(i, j), std::max(i, j), 2, [&](std::size_t base) {
        double g[16], r[16];
        for (int x = 0; x < 16; ++x)
            g[x] = in[base + offset[x]];
        kernel_.apply_block(g, r);
        for (int x = 0; x < 16; ++x)
            out[base + offset[x]] += r[x];
    });
}

void ChainOperator::apply(std::span<const double> in, std::span<double> out) const {
    if (in.size() != dim_ || out.size() != dim_)
        throw DomainError("chain vector has the wrong length");
    std::fill(out.begin(), out.end(), 0.0);
    for (const auto &[i, j] : pairs_)
        accumulate_pair(i, j, in.data(), out.data());
    const double scale = 1.0 / static_cast<double>(pairs_.size());
    for (double &v : out)
        v *= scale;
}

void ChainOperator::apply_pair(int i, int j, std::span<const double> in, std::span<double> out) const {
    if (in.size() != dim_ || out.size() != dim_)
        throw DomainError("chain vector has the wrong length");
    if (i == j || i < 0 || j < 0 || i >= n_ || j >= n_)
        throw DomainError("invalid qubit pair");
    std::fill(out.begin(), out.end(), 0.0);
    accumulate_pair(i, j, in.data(), out.data());
}

PauliWeightDist initial_dist_product_state(int n) {
    check_qubits(n, kMaxFullQubits, "Pauli weight distribution");
    PauliWeightDist d{n, std::vector<double>(pow4(n), 0.0)};
    const double w = std::ldexp(1.0, -n);
    // Strings with every digit in {identity, z}.
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
        std::uint64_t alpha = 0;
        for (int k = 0; k < n; ++k)
            if ((mask >> k) & 1U)
                alpha |= std::uint64_t{3} << (2 * k);
        d.weights[alpha] = w;
    }
    return d;
}

PauliWeightDist ergodic_dist(int n) {
    check_qubits(n, kMaxFullQubits, "Pauli weight distribution");
    const std::size_t dim = pow4(n);
    const double id = std::ldexp(1.0, -n);
    PauliWeightDist d{n, std::vector<double>(dim, (1.0 - id) / static_cast<double>(dim - 1))};
    d.weights[0] = id;
    return d;
}

double purity_from_dist(const PauliWeightDist &dist) {
    const int n = dist.n;
    if (n < 2 || n % 2 != 0)
        throw DomainError(fmt::format("symmetric-cut purity needs an even qubit count, got {}", n));
    if (dist.weights.size() != pow4(n))
        throw DomainError("weight vector has the wrong length");
    // Strings with identity on qubits n/2..n-1 are exactly the indices below 4^(n/2).
    const std::size_t count = pow4(n / 2);
    double s = 0.0;
    for (std::size_t a = 0; a < count; ++a)
        s += dist.weights[a];
    return std::ldexp(s, n / 2);
}

std::vector<double> evolve(const ChainOperator &op, PauliWeightDist dist, int t_max) {
    if (dist.n != op.qubits())
        throw DomainError("distribution and operator have different qubit counts");
    if (t_max < 0)
        throw DomainError("t_max must be nonnegative");
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(t_max) + 1);
    out.push_back(purity_from_dist(dist));
    PauliWeightDist next{dist.n, std::vector<double>(dist.weights.size())};
    for (int t = 1; t <= t_max; ++t) {
        op.apply(dist.weights, next.weights);
        std::swap(dist.weights, next.weights);
        out.push_back(purity_from_dist(dist));
    }
    return out;
}

int support_class(int x) noexcept { return (x / 4 != 0 ? 1 : 0) + (x % 4 != 0 ? 2 : 0); }

LumpReport lump(const PairKernel &kernel) {
    const Matrix16d &k = kernel.matrix();
    // Class-transition sums per source member.
    std::array<std::array<double, 4>, 16> per_member{};
    for (int beta = 0; beta < 16; ++beta)
        for (int alpha = 0; alpha < 16; ++alpha)
            per_member[static_cast<std::size_t>(beta)][static_cast<std::size_t>(support_class(alpha))] +=
                k(alpha, beta);

    LumpReport report;
    for (int c = 0; c < 4; ++c) {
        const auto cs = static_cast<std::size_t>(c);
        std::array<double, 4> lo{}, hi{};
        lo.fill(1e300);
        hi.fill(-1e300);
        for (int beta = 0; beta < 16; ++beta) {
            if (support_class(beta) != c)
                continue;
            for (int to = 0; to < 4; ++to) {
                const double v = per_member[static_cast<std::size_t>(beta)][static_cast<std::size_t>(to)];
                report.kernel(c, to) += v / kClassSizes[cs];
                lo[static_cast<std::size_t>(to)] = std::min(lo[static_cast<std::size_t>(to)], v);
                hi[static_cast<std::size_t>(to)] = std::max(hi[static_cast<std::size_t>(to)], v);
            }
        }
        double dev = 0.0;
        for (int to = 0; to < 4; ++to)
            dev = std::max(dev, hi[static_cast<std::size_t>(to)] - lo[static_cast<std::size_t>(to)]);
        report.max_deviation[cs] = dev;
        report.lumpable[cs] = dev <= kLumpTolerance;
    }
    return report;
}

LumpedChain::LumpedChain(const PairKernel &kernel, int n, Coupling coupling)
    : report_(lump(kernel)), n_(n), coupling_(coupling) {
    check_qubits(n, kMaxLumpedQubits, "lumped Pauli chain");
    pairs_ = coupling_pairs(coupling, n);
    dim_ = std::size_t{1} << n;
}

void LumpedChain::apply(std::span<const double> in, std::span<double> out) const {
    if (in.size() != dim_ || out.size() != dim_)
        throw DomainError("lumped chain vector has the wrong length");
    std::fill(out.begin(), out.end(), 0.0);
    double lk[4][4];
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            lk[a][b] = report_.kernel(a, b);

    for (const auto &[i, j] : pairs_) {
        const std::size_t bi = std::size_t{1} << i;
        const std::size_t bj = std::size_t{1} << j;
        const std::size_t offset[4] = {0, bi, bj, bi | bj};
        for_each_block(n_, std::min(i, j), std::max(i, j), 1, [&](std::size_t base) {
            const double u[4] = {in[base], in[base + bi], in[base + bj], in[base + (bi | bj)]};
            for (int to = 0; to < 4; ++to)
                out[base + offset[to]] += lk[0][to] * u[0] + lk[1][to] * u[1] + lk[2][to] * u[2] + lk[3][to] * u[3];
        });
    }
    const double scale = 1.0 / static_cast<double>(pairs_.size());
    for (double &v : out)
        v *= scale;
}

std::uint64_t support_pattern(std::uint64_t alpha, int n) noexcept {
    std::uint64_t s = 0;
    for (int k = 0; k < n; ++k)
        if ((alpha >> (2 * k)) & 3U)
            s |= std::uint64_t{1} << k;
    return s;
}

std::vector<double> lift_lumped(std::span<const double> lumped, int n) {
    check_qubits(n, kMaxFullQubits, "lifting to the full chain");
    if (lumped.size() != (std::size_t{1} << n))
        throw DomainError("lumped vector has the wrong length");
    std::vector<double> full(pow4(n));
    for (std::uint64_t alpha = 0; alpha < full.size(); ++alpha) {
        const std::uint64_t s = support_pattern(alpha, n);
        full[alpha] = lumped[s] / std::pow(3.0, std::popcount(s));
    }
    return full;
}

std::vector<double> project_to_lumped(std::span<const double> full, int n) {
    check_qubits(n, kMaxFullQubits, "projecting from the full chain");
    if (full.size() != pow4(n))
        throw DomainError("full vector has the wrong length");
    std::vector<double> out(std::size_t{1} << n, 0.0);
    for (std::uint64_t alpha = 0; alpha < full.size(); ++alpha)
        out[support_pattern(alpha, n)] += full[alpha];
    return out;
}

} // namespace randent::chain
