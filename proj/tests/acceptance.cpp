// Acceptance run: one PASS/FAIL line per criterion, followed by the measured values.
// Exit status is 0 only when every criterion passes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include <fmt/format.h>

#include "randent/randent.hpp"

using namespace randent;
using chain::Coupling;

namespace {

// Tolerances and budgets.
constexpr double kGapEqualityTol = 1e-9;
constexpr double kUnitGapFloor = 1e-6;
constexpr double kFitSlack = 0.10;
constexpr double kSpectrumTol = 1e-8;
constexpr double kOracleSigmas = 3.0;
constexpr double kOracleFraction = 0.95;
constexpr double kOracleAbsTol = 1e-12;
constexpr int kOracleQubits = 10, kOracleReplicas = 2000, kOracleSteps = 100;
constexpr int kDecayReplicas = 2000, kDecaySteps = 80;
constexpr double kDecayALo = 0.4, kDecayAHi = 1.2;
// Published U(4) random-coupling gap line 1/tau = c/(n + d), used as the fixed decay time.
constexpr double kU4LineC = 1.33, kU4LineD = 2.50;
constexpr int kSweepQubits = 8, kSweepReplicas = 1000, kSweepStepsRandom = 30, kSweepStepsNn = 50;
constexpr double kSweepGrid = 0.25;
constexpr double kSweepMaxKappa = 1.2, kSweepMaxKappaTol = 0.15;
constexpr double kNnKappaXy = 0.7, kNnKappaCnot = 0.5, kNnKappaTol = 0.1;
constexpr int kHaarSamples = 2000;
constexpr double kRefNormTol = 0.05;
constexpr int kSchmidtQubits = 12, kSchmidtReplicas = 1000, kSchmidtSteps = 300;
constexpr double kSchmidtTol = 0.1;
constexpr int kPropertyCases = 1000;

const std::array<const char *, 3> kGates = {"cnot", "xy", "u4"};
const std::array<Coupling, 3> kCouplings = {Coupling::Random, Coupling::NnPbc, Coupling::NnObc};

struct Outcome {
    bool pass = true;
    std::vector<std::string> notes;
    void check(bool ok, std::string note) {
        pass = pass && ok;
        notes.push_back((ok ? "  ok    " : "  FAIL  ") + std::move(note));
    }
};

chain::PairKernel kernel(const char *gate) { return chain::kernel_for(gates::parse_gate_spec(gate)); }

// Top of the spectrum per (gate, coupling, n): full chain up to 10 qubits, lumped above.
class GapTable {
  public:
    const spectral::SpectrumResult &get(const char *gate, Coupling c, int n) {
        const auto key = std::make_tuple(std::string(gate), c, n);
        auto it = cache_.find(key);
        if (it != cache_.end())
            return it->second;
        spectral::SpectrumResult s;
        if (n <= 10)
            s = spectral::top_eigenvalues(chain::ChainOperator(kernel(gate), n, c), 6);
        else
            s = spectral::top_eigenvalues(chain::LumpedChain(kernel(gate), n, c), 6);
        return cache_.emplace(key, std::move(s)).first->second;
    }
    double gap(const char *gate, Coupling c, int n) { return spectral::gap(get(gate, c, n)); }

  private:
    std::map<std::tuple<std::string, Coupling, int>, spectral::SpectrumResult> cache_;
};

GapTable gaps;

std::string label(const char *gate, Coupling c) { return fmt::format("{}/{}", gate, chain::to_string(c)); }

protocol::ProtocolConfig config(const char *gate, Coupling c, int n, int steps, int replicas, std::uint64_t seed) {
    protocol::ProtocolConfig cfg;
    cfg.n = n;
    cfg.gate = gates::parse_gate_spec(gate);
    cfg.coupling = c;
    cfg.steps = steps;
    cfg.replicas = replicas;
    cfg.seed = seed;
    cfg.measures = {true, false, false};
    return cfg;
}

Outcome clifford_tables() {
    Outcome o;
    const std::array<int, 16> cnot = {0, 1, 14, 15, 5, 4, 11, 10, 9, 8, 7, 6, 12, 13, 2, 3};
    const std::array<int, 16> xy = {0, 11, 7, 12, 14, 5, 9, 2, 13, 6, 10, 1, 3, 8, 4, 15};
    const auto tc = gates::pauli_conjugation_table(gates::named_gate(gates::GateName::Cnot).matrix);
    const auto tx = gates::pauli_conjugation_table(gates::named_gate(gates::GateName::Xy).matrix);
    o.check(tc && tc->perm == cnot, "CNOT permutation");
    o.check(tx && tx->perm == xy, "XY permutation");
    return o;
}

Outcome unit_structure() {
    Outcome o;
    for (const char *g : kGates)
        for (Coupling c : kCouplings)
            for (int n : {4, 6, 8}) {
                const auto &s = gaps.get(g, c, n);
                double third = 0.0;
                if (s.values.size() > 2)
                    third = std::abs(s.values[2]);
                o.check(s.unit_multiplicity == 2 && third < 1.0 - kUnitGapFloor,
                        fmt::format("{} n={}: unit multiplicity {}, |lambda_3| = {:.9f}", label(g, c), n,
                                    s.unit_multiplicity, third));
            }
    return o;
}

Outcome gap_bound() {
    Outcome o;
    for (int n = 4; n <= 10; ++n) {
        const double g = gaps.gap("cnot", Coupling::Random, n);
        const double bound = 4.0 / (9.0 * n * (n - 1));
        o.check(g > bound, fmt::format("n={}: gap {:.9f} > {:.9f}", n, g, bound));
    }
    return o;
}

Outcome gap_equality() {
    Outcome o;
    for (int n = 4; n <= 10; ++n) {
        const double a = gaps.gap("xy", Coupling::Random, n);
        const double b = gaps.gap("cnot", Coupling::Random, n);
        o.check(std::abs(a - b) <= kGapEqualityTol,
                fmt::format("n={}: xy {:.12f} cnot {:.12f} diff {:.2e}", n, a, b, std::abs(a - b)));
    }
    return o;
}

struct GapFormula {
    const char *gate;
    Coupling coupling;
    double c, d;
};

Outcome gap_fits() {
    Outcome o;
    const std::vector<GapFormula> formulas = {
        {"cnot", Coupling::Random, 1.47, 2.15}, {"xy", Coupling::Random, 1.47, 2.15},
        {"u4", Coupling::Random, 1.33, 2.50},   {"xy", Coupling::NnPbc, 0.45, -2.50},
        {"u4", Coupling::NnPbc, 0.36, -2.67},   {"cnot", Coupling::NnPbc, 0.28, -3.01},
        {"xy", Coupling::NnObc, 0.23, -3.01},   {"u4", Coupling::NnObc, 0.19, -3.12},
        {"cnot", Coupling::NnObc, 0.15, -2.98}};
    for (const auto &f : formulas) {
        std::string row;
        bool ok = true;
        int above = 0, below = 0;
        std::vector<std::pair<int, double>> pts;
        for (int n = 6; n <= 12; ++n) {
            const double g = gaps.gap(f.gate, f.coupling, n);
            const double ref = f.c / (n + f.d);
            const double rel = g / ref - 1.0;
            ok = ok && std::abs(rel) <= kFitSlack;
            (rel > 0 ? above : below) += 1;
            row += fmt::format(" {}:{:+.3f}", n, rel);
            pts.emplace_back(n, g);
        }
        const auto lin = analysis::fit_gap_scaling(pts, analysis::GapModel::Linear);
        std::string note = fmt::format("{} vs {:.2f}/(n{:+.2f}) rel.dev{} | own fit c={:.3f} d={:+.3f}",
                                       label(f.gate, f.coupling), f.c, f.d, row, lin.value("c"), lin.value("d"));
        if (above == 0 || below == 0) {
            const auto lg = analysis::fit_gap_scaling(pts, analysis::GapModel::Log);
            note += fmt::format(" | one-sided; log model e={:.4f} f={:.3f} residual {:.2e} vs linear {:.2e}",
                                lg.value("e"), lg.value("f"), lg.residual_norm, lin.residual_norm);
        }
        o.check(ok, note);
    }
    return o;
}

Outcome gate_ordering() {
    Outcome o;
    const double xy = gaps.gap("xy", Coupling::NnPbc, 8);
    const double u4 = gaps.gap("u4", Coupling::NnPbc, 8);
    const double cnot = gaps.gap("cnot", Coupling::NnPbc, 8);
    o.check(xy > u4 && u4 > cnot, fmt::format("nnpbc n=8: xy {:.6f} > u4 {:.6f} > cnot {:.6f}", xy, u4, cnot));
    const double ur = gaps.gap("u4", Coupling::Random, 8), xr = gaps.gap("xy", Coupling::Random, 8);
    o.check(ur < xr, fmt::format("random n=8: u4 {:.6f} < xy {:.6f}", ur, xr));
    for (int n = 10; n <= 12; ++n) {
        const double r = gaps.gap("u4", Coupling::Random, n) / gaps.gap("xy", Coupling::Random, n);
        o.check(r >= 0.85 && r <= 0.95, fmt::format("random n={}: u4/xy = {:.4f}", n, r));
    }
    return o;
}

Outcome boundary_factor() {
    Outcome o;
    for (const char *g : kGates) {
        const double r = gaps.gap(g, Coupling::NnPbc, 10) / gaps.gap(g, Coupling::NnObc, 10);
        o.check(r >= 1.6 && r <= 2.4, fmt::format("{} n=10: nnpbc/nnobc = {:.4f}", g, r));
    }
    return o;
}

Outcome chain_oracle() {
    Outcome o;
    for (const char *g : {"xy", "cnot"}) {
        auto cfg = config(g, Coupling::NnPbc, kOracleQubits, kOracleSteps, kOracleReplicas, 2024);
        const auto tr = protocol::run_protocol(cfg);
        const chain::ChainOperator op(kernel(g), kOracleQubits, Coupling::NnPbc);
        const auto exact = chain::evolve(op, chain::initial_dist_product_state(kOracleQubits), kOracleSteps);
        int inside = 0, total = 0;
        double worst = 0.0;
        for (std::size_t r = 1; r < tr.rows(); ++r) {
            const double diff = std::abs(tr.purity_mean(r) - exact[static_cast<std::size_t>(tr.times[r])]);
            const double z = diff <= kOracleAbsTol ? 0.0 : diff / tr.purity_se(r);
            worst = std::max(worst, z);
            inside += z <= kOracleSigmas ? 1 : 0;
            ++total;
        }
        const double frac = static_cast<double>(inside) / total;
        o.check(frac >= kOracleFraction,
                fmt::format("{} nnpbc n={} R={}: {}/{} steps within 3 SE ({:.1f}%), worst {:.2f} SE", g,
                            kOracleQubits, kOracleReplicas, inside, total, 100 * frac, worst));
    }
    return o;
}

std::string profile_text(const std::vector<spectral::Eigenvalue> &p) {
    std::string s;
    for (const auto &e : p)
        s += fmt::format(" {:.6f}x{}", e.value.real(), e.multiplicity);
    return s;
}

Outcome degeneracy_and_cutoff() {
    Outcome o;
    for (int n : {6, 8})
        for (const char *g : kGates)
            for (Coupling c : kCouplings) {
                const auto p =
                    spectral::degeneracy_profile(spectral::dense_spectrum(chain::LumpedChain(kernel(g), n, c)));
                bool ok = p.size() == 3;
                if (ok && c == Coupling::Random) {
                    const std::size_t slot = std::string(g) == "cnot" ? 1 : 2;
                    ok = p[slot].multiplicity == n - 1;
                } else if (ok) {
                    ok = std::all_of(p.begin(), p.end(), [](const auto &e) { return e.multiplicity == 1; });
                }
                o.check(ok, fmt::format("{} n={}:{}", label(g, c), n, profile_text(p)));
            }
    std::map<int, double> a;
    for (int n : {10, 12}) {
        auto cfg = config("u4", Coupling::Random, n, kDecaySteps, kDecayReplicas, 1700 + n);
        const auto tr = protocol::run_protocol(cfg);
        const double tau = (n + kU4LineD) / kU4LineC;
        try {
            const auto fit = analysis::fit_degenerate_decay(analysis::purity_series(tr), ent::asymptotic_purity(n), tau);
            a[n] = fit.value("a");
            o.check(n != 12 || (a[n] >= kDecayALo && a[n] <= kDecayAHi),
                    fmt::format("u4/random n={} tau={:.3f} (computed gap gives {:.3f}): a = {:.4f} +- {:.4f}, b = {:.4f} +- {:.4f}, window {}..{}",
                                n, tau, 1.0 / gaps.gap("u4", Coupling::Random, n), fit.value("a"), fit.error("a"), fit.value("b"), fit.error("b"), fit.x_lo,
                                fit.x_hi));
        } catch (const std::exception &e) {
            o.check(false, fmt::format("u4/random n={}: fit failed: {}", n, e.what()));
        }
    }
    if (a.size() == 2)
        o.check(a[12] > a[10], fmt::format("a increases from n=10 ({:.4f}) to n=12 ({:.4f})", a[10], a[12]));
    return o;
}

Outcome sweep_landscape() {
    Outcome o;
    auto base = config("cnot", Coupling::Random, kSweepQubits, kSweepStepsRandom, kSweepReplicas, 1000);
    const auto grid = analysis::sweep_canonical(base, kSweepGrid, kSweepStepsRandom, kSweepReplicas);
    const auto &best = grid.points[grid.argmax];
    const bool on_family = best.params[0] >= 1.0 - kSweepGrid && best.params[2] <= kSweepGrid;
    o.check(on_family, fmt::format("random argmax at ({}, {}, {})", best.params[0], best.params[1], best.params[2]));
    o.check(std::abs(best.kappa - kSweepMaxKappa) <= kSweepMaxKappaTol,
            fmt::format("random max kappa = {:.4f} +- {:.4f}", best.kappa, best.kappa_se));
    for (const auto &p : grid.points)
        if (p.params == gates::CanonicalParams{1, 1, 1})
            o.check(std::abs(p.kappa) <= 3 * p.kappa_se + 1e-12,
                    fmt::format("kappa(1,1,1) = {:.3e} +- {:.3e}", p.kappa, p.kappa_se));

    base.coupling = Coupling::NnPbc;
    const auto nn = analysis::sweep_canonical(base, kSweepGrid, kSweepStepsNn, kSweepReplicas);
    for (const auto &p : nn.points) {
        if (p.params == gates::CanonicalParams{1, 1, 0})
            o.check(std::abs(p.kappa - kNnKappaXy) <= kNnKappaTol,
                    fmt::format("nnpbc kappa(xy) = {:.4f} +- {:.4f}", p.kappa, p.kappa_se));
        if (p.params == gates::CanonicalParams{1, 0, 0})
            o.check(std::abs(p.kappa - kNnKappaCnot) <= kNnKappaTol,
                    fmt::format("nnpbc kappa(cnot) = {:.4f} +- {:.4f}", p.kappa, p.kappa_se));
    }
    return o;
}

Outcome random_state_references() {
    Outcome o;
    qsim::RngStream rng(880, 0);
    const auto cut = ent::Bipartition::symmetric(8);
    double sum = 0, sumsq = 0;
    for (int s = 0; s < kHaarSamples; ++s) {
        const double p = ent::purity(qsim::haar_state(8, rng), cut);
        sum += p;
        sumsq += p * p;
    }
    const double mean = sum / kHaarSamples;
    const double se = std::sqrt((sumsq / kHaarSamples - mean * mean) / (kHaarSamples - 1));
    const double ref = ent::asymptotic_purity(8);
    o.check(std::abs(mean - ref) <= 3 * se,
            fmt::format("Haar n=8 mean purity {:.6f} +- {:.6f} vs {:.6f}", mean, se, ref));

    const auto list = ent::random_schmidt_reference_squares(8);
    double total = 0.0;
    for (double v : list)
        total += v;
    o.check(std::abs(total - 1.0) <= kRefNormTol, fmt::format("reference list N=16 sums to {:.5f}", total));

    auto cfg = config("xy", Coupling::NnPbc, kSchmidtQubits, kSchmidtSteps, kSchmidtReplicas, 12);
    cfg.measures = {false, false, true};
    cfg.record_every = kSchmidtSteps / 6;
    const auto d = analysis::schmidt_distance(protocol::run_protocol(cfg));
    std::string row;
    for (const auto &[t, v] : d)
        row += fmt::format(" t={}:{:.4f}", t, v);
    o.check(d.back().second < kSchmidtTol, fmt::format("xy/nnpbc n=12 sum|mu2 - ref|:{}", row));
    return o;
}

Outcome lumped_validity() {
    Outcome o;
    for (const char *g : kGates)
        for (Coupling c : kCouplings)
            for (int n : {4, 6, 8}) {
                const double full = gaps.gap(g, c, n);
                const double lumped = spectral::gap(spectral::top_eigenvalues(chain::LumpedChain(kernel(g), n, c), 6));
                o.check(std::abs(full - lumped) <= kGapEqualityTol,
                        fmt::format("{} n={}: gap diff {:.2e}", label(g, c), n, std::abs(full - lumped)));
                const auto pairs = spectral::lifted_residuals(chain::ChainOperator(kernel(g), n, c),
                                                              chain::LumpedChain(kernel(g), n, c));
                double worst = 0.0;
                for (const auto &p : pairs)
                    worst = std::max(worst, p.residual);
                o.check(worst <= kSpectrumTol,
                        fmt::format("{} n={}: {} lumped eigenpairs, worst full-chain residual {:.2e}", label(g, c), n,
                                    pairs.size(), worst));
            }
    return o;
}

// Condensed randomized property checks, one per module invariant.
Outcome properties() {
    Outcome o;
    qsim::RngStream rng(13, 0);
    int bad_unitary = 0, bad_norm = 0, bad_stochastic = 0, bad_identity = 0, bad_symmetry = 0, bad_fit = 0;
    for (int c = 0; c < kPropertyCases; ++c) {
        const auto u = qsim::haar_u4(rng);
        bad_unitary += qsim::is_unitary(u) ? 0 : 1;

        const int n = 2 + static_cast<int>(rng.index(5));
        auto s = qsim::haar_state(n, rng);
        const int i = static_cast<int>(rng.index(static_cast<std::size_t>(n)));
        int j = static_cast<int>(rng.index(static_cast<std::size_t>(n - 1)));
        j += j >= i ? 1 : 0;
        s.apply_two_qubit(i, j, u);
        bad_norm += std::abs(s.amplitudes().norm() - 1.0) < 1e-12 ? 0 : 1;

        const char *g = kGates[rng.index(3)];
        const Coupling cp = kCouplings[rng.index(3)];
        const int m = 2 + static_cast<int>(rng.index(4));
        const chain::ChainOperator op(kernel(g), m, cp);
        std::vector<double> in(op.dim()), out(op.dim());
        double total = 0.0;
        for (double &x : in) {
            x = rng.uniform();
            total += x;
        }
        for (double &x : in)
            x /= total;
        op.apply(in, out);
        double out_total = 0.0, out_min = 1.0;
        for (double x : out) {
            out_total += x;
            out_min = std::min(out_min, x);
        }
        bad_stochastic += std::abs(out_total - 1.0) < 1e-12 && out_min >= 0.0 ? 0 : 1;
        bad_identity += std::abs(out[0] - in[0]) < 1e-15 ? 0 : 1;

        const gates::CanonicalParams p{4 * rng.uniform() - 2, 4 * rng.uniform() - 2, 4 * rng.uniform() - 2};
        const auto red = gates::reduce_to_fundamental(p);
        const auto a = gates::local_invariants(gates::canonical_gate(p).matrix);
        const auto b = gates::local_invariants(gates::canonical_gate(red.params).matrix);
        const qsim::cplx g1 = red.conjugations() % 2 ? std::conj(b.g1) : b.g1;
        bad_symmetry += std::abs(a.g1 - g1) < 1e-10 && std::abs(a.g2 - b.g2) < 1e-10 ? 0 : 1;

        const double kappa = 0.3 + 2.0 * rng.uniform();
        const double i_inf = ent::asymptotic_purity(2 * m);
        std::vector<double> trace;
        for (int t = 0; t <= 60; ++t)
            trace.push_back(i_inf + (1 - i_inf) * std::exp(-kappa * t / (2 * m)));
        analysis::FitWindow window;
        window.t_max = std::floor(2 * m * std::log(1e6) / kappa);
        const auto f = analysis::fit_kappa(analysis::exact_series(trace), 2 * m, i_inf, window);
        bad_fit += std::abs(f.value("kappa") - kappa) < 1e-8 ? 0 : 1;
    }
    o.check(bad_unitary == 0, fmt::format("Haar U(4) unitarity: {} failures", bad_unitary));
    o.check(bad_norm == 0, fmt::format("gate application preserves norm: {} failures", bad_norm));
    o.check(bad_stochastic == 0, fmt::format("chain step stochastic and nonnegative: {} failures", bad_stochastic));
    o.check(bad_identity == 0, fmt::format("identity weight conserved: {} failures", bad_identity));
    o.check(bad_symmetry == 0, fmt::format("symmetry reduction keeps local invariants: {} failures", bad_symmetry));
    o.check(bad_fit == 0, fmt::format("kappa fit recovers exact decay: {} failures", bad_fit));
    return o;
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"Clifford conjugation tables", clifford_tables},
        {"two unit eigenvalues", unit_structure},
        {"CNOT random gap lower bound", gap_bound},
        {"XY and CNOT random gaps equal", gap_equality},
        {"gap scaling within 10% of published fits", gap_fits},
        {"gate ordering", gate_ordering},
        {"nnPBC / nnOBC gap factor", boundary_factor},
        {"Monte Carlo vs chain purity", chain_oracle},
        {"degeneracies and two-mode decay", degeneracy_and_cutoff},
        {"canonical sweep landscape", sweep_landscape},
        {"random-state references", random_state_references},
        {"lumped chain validity", lumped_validity},
        {"randomized property suites", properties},
    };
    int failed = 0;
    std::vector<std::string> summary;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[k].second();
        } catch (const std::exception &e) {
            o.check(false, fmt::format("exception: {}", e.what()));
        }
        const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const std::string line =
            fmt::format("{} {:2d} {} ({:.1f}s)", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first, dt);
        std::printf("%s\n", line.c_str());
        for (const auto &n : o.notes)
            std::printf("%s\n", n.c_str());
        std::fflush(stdout);
        summary.push_back(line);
        failed += o.pass ? 0 : 1;
    }
    std::printf("\nsummary\n");
    for (const auto &s : summary)
        std::printf("%s\n", s.c_str());
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
