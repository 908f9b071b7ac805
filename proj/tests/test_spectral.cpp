#include <gtest/gtest.h>

#include <array>
#include <cmath>

#include "randent/errors.hpp"
#include "randent/spectral.hpp"

using namespace randent;
using namespace randent::chain;
using namespace randent::spectral;

namespace {

PairKernel kernel(const char *spec) { return kernel_for(gates::parse_gate_spec(spec)); }

constexpr std::array<const char *, 3> kSpecs = {"cnot", "xy", "u4"};
constexpr std::array<Coupling, 3> kCouplings = {Coupling::Random, Coupling::NnPbc, Coupling::NnObc};

// Every value of `sub` is within tol of some value of `super`.
bool contained(const std::vector<cplx> &sub, const std::vector<cplx> &super, double tol) {
    for (cplx z : sub) {
        double best = 1e300;
        for (cplx w : super)
            best = std::min(best, std::abs(z - w));
        if (best > tol)
            return false;
    }
    return true;
}

} // namespace

TEST(DenseSpectrum, TwoQubitU4IsRankTwoProjection) {
    const ChainOperator op(PairKernel::u4(), 2, Coupling::Random);
    const SpectrumResult s = dense_spectrum(op);
    ASSERT_EQ(s.eigenvalues.size(), 2U);
    EXPECT_NEAR(std::abs(s.eigenvalues[0].value - 1.0), 0.0, 1e-12);
    EXPECT_EQ(s.eigenvalues[0].multiplicity, 2);
    EXPECT_NEAR(std::abs(s.eigenvalues[1].value), 0.0, 1e-12);
    EXPECT_EQ(s.eigenvalues[1].multiplicity, 14);
    EXPECT_EQ(s.unit_multiplicity, 2);
    EXPECT_NEAR(gap(s), 1.0, 1e-12);
}

TEST(DenseSpectrum, TwoUnitEigenvaluesAtFourQubits) {
    for (const char *spec : kSpecs)
        for (Coupling c : kCouplings) {
            const SpectrumResult s = dense_spectrum(ChainOperator(kernel(spec), 4, c));
            EXPECT_EQ(s.unit_multiplicity, 2) << spec << " " << to_string(c);
            for (cplx z : s.values)
                EXPECT_LE(std::abs(z), 1.0 + 1e-10);
            ASSERT_TRUE(s.gap);
            EXPECT_GT(*s.gap, 1e-6);
        }
}

TEST(DenseSpectrum, LumpedSpectrumIsContainedInFullAtFourQubits) {
    for (const char *spec : kSpecs)
        for (Coupling c : kCouplings) {
            const auto full = dense_spectrum(ChainOperator(kernel(spec), 4, c));
            const auto lumped = dense_spectrum(LumpedChain(kernel(spec), 4, c));
            EXPECT_TRUE(contained(lumped.values, full.values, 1e-8)) << spec << " " << to_string(c);
            EXPECT_NEAR(gap(full), gap(lumped), 1e-9);
        }
}

TEST(DenseSpectrum, CapacityLimit) {
    EXPECT_THROW(dense_spectrum(ChainOperator(kernel("cnot"), 7, Coupling::Random)), CapacityError);
}

TEST(LiftedResiduals, LumpedEigenpairsAreFullChainEigenpairs) {
    for (const char *spec : kSpecs)
        for (Coupling c : kCouplings)
            for (int n : {4, 6}) {
                const auto res = lifted_residuals(ChainOperator(kernel(spec), n, c), LumpedChain(kernel(spec), n, c));
                ASSERT_EQ(res.size(), std::size_t{1} << n);
                for (const auto &p : res)
                    ASSERT_LT(p.residual, 1e-10) << spec << " " << to_string(c) << " n=" << n;
            }
}

TEST(TopEigenvalues, AgreeWithDenseOracle) {
    const std::array<std::pair<const char *, Coupling>, 3> full_cases = {
        {{"cnot", Coupling::Random}, {"xy", Coupling::NnPbc}, {"u4", Coupling::NnObc}}};
    for (const auto &[spec, c] : full_cases) {
        const ChainOperator full(kernel(spec), 5, c);
        const auto dense = dense_spectrum(full);
        const auto top = top_eigenvalues(full, 6);
        EXPECT_EQ(top.method, "arnoldi");
        EXPECT_EQ(top.unit_multiplicity, 2);
        ASSERT_TRUE(top.gap);
        EXPECT_NEAR(*top.gap, *dense.gap, 1e-8) << spec << " " << to_string(c);
        EXPECT_TRUE(contained(top.values, dense.values, 1e-8)) << spec << " " << to_string(c);
    }
    for (const char *spec : kSpecs)
        for (Coupling c : kCouplings) {
            const LumpedChain lumped(kernel(spec), 9, c);
            const auto ld = dense_spectrum(lumped);
            const auto lt = top_eigenvalues(lumped, 8);
            EXPECT_NEAR(*lt.gap, *ld.gap, 1e-8);
            EXPECT_TRUE(contained(lt.values, ld.values, 1e-8)) << spec << " " << to_string(c);
        }
}

TEST(TopEigenvalues, SmallOperatorsUseDenseFallback) {
    const auto s = top_eigenvalues(ChainOperator(kernel("xy"), 3, Coupling::Random), 4);
    EXPECT_EQ(s.method, "dense");
    EXPECT_LE(s.values.size(), 4U);
    EXPECT_EQ(s.unit_multiplicity, 2);
}

TEST(TopEigenvalues, ArgumentChecks) {
    const ChainOperator op(kernel("xy"), 4, Coupling::Random);
    EXPECT_THROW(top_eigenvalues(op, 0), DomainError);
    EXPECT_THROW(top_eigenvalues(op, 13), DomainError);
    EXPECT_THROW(top_eigenvalues(op, 4, -1.0), DomainError);
}

TEST(TopEigenvalues, RestartCapRaisesConvergenceError) {
    const ChainOperator op(kernel("cnot"), 6, Coupling::NnObc);
    ArnoldiOptions opts;
    opts.max_restarts = 1;
    opts.ncv = 4;
    opts.tol = 1e-15;
    try {
        top_eigenvalues(op, 3, opts);
        FAIL() << "expected ConvergenceError";
    } catch (const ConvergenceError &e) {
        EXPECT_GT(e.best_residual(), 0.0);
    }
}

TEST(Gap, XyAndCnotAgreeOnRandomCouplingAtEightQubits) {
    const auto a = top_eigenvalues(ChainOperator(kernel("xy"), 8, Coupling::Random), 4);
    const auto b = top_eigenvalues(ChainOperator(kernel("cnot"), 8, Coupling::Random), 4);
    EXPECT_NEAR(gap(a), gap(b), 1e-9);
}

TEST(Gap, ExceedsKnownLowerBoundForCnot) {
    for (int n : {4, 5, 6, 7}) {
        const double g = gap(top_eigenvalues(ChainOperator(kernel("cnot"), n, Coupling::Random), 4));
        EXPECT_GT(g, 4.0 / (9.0 * n * (n - 1))) << n;
    }
}

TEST(Gap, NearestNeighbourValuesAtEightQubits) {
    const double xy = gap(top_eigenvalues(ChainOperator(kernel("xy"), 8, Coupling::NnPbc), 4));
    EXPECT_NEAR(xy, 0.45 / (8 - 2.50), 0.1 * 0.45 / (8 - 2.50));
    const double cnot = gap(top_eigenvalues(ChainOperator(kernel("cnot"), 8, Coupling::NnObc), 4));
    EXPECT_NEAR(cnot, 0.15 / (8 - 2.98), 0.1 * 0.15 / (8 - 2.98));
}

TEST(Gap, StructuralErrorWithoutTwoUnitEigenvalues) {
    SpectrumResult s;
    s.values = {1.0, 1.0, 1.0, 0.5};
    s.unit_multiplicity = 3;
    EXPECT_THROW(gap(s), StructuralError);
    SpectrumResult periodic;
    periodic.values = {1.0, 1.0, -1.0};
    periodic.unit_multiplicity = 2;
    EXPECT_THROW(gap(periodic), StructuralError);
}

TEST(DegeneracyProfile, RandomCouplingMultiplicities) {
    for (int n : {6, 8}) {
        const auto cnot = degeneracy_profile(dense_spectrum(LumpedChain(kernel("cnot"), n, Coupling::Random)));
        ASSERT_EQ(cnot.size(), 3U);
        EXPECT_EQ(cnot[0].multiplicity, 1);
        EXPECT_EQ(cnot[1].multiplicity, n - 1);
        for (const char *spec : {"xy", "u4"}) {
            const auto p = degeneracy_profile(dense_spectrum(LumpedChain(kernel(spec), n, Coupling::Random)));
            EXPECT_EQ(p[0].multiplicity, 1) << spec;
            EXPECT_EQ(p[2].multiplicity, n - 1) << spec;
        }
    }
}

TEST(DegeneracyProfile, LargestNontrivialEigenvalueIsSimple) {
    for (const char *spec : kSpecs)
        for (Coupling c : kCouplings) {
            const auto p = degeneracy_profile(dense_spectrum(LumpedChain(kernel(spec), 6, c)));
            ASSERT_FALSE(p.empty());
            if (!(std::string(spec) == "u4" && c == Coupling::NnObc))
                EXPECT_EQ(p[0].multiplicity, 1) << spec << " " << to_string(c);
        }
}

TEST(GroupEigenvalues, MergesWithinToleranceOnly) {
    std::vector<cplx> v = {0.5, cplx(0.3, 0.4), cplx(0.3, -0.4), 0.5 + 1e-10, -0.5};
    const auto g = group_eigenvalues(v, 1e-8);
    ASSERT_EQ(g.size(), 4U);
    EXPECT_EQ(g[0].multiplicity, 2);
    EXPECT_NEAR(g[0].value.real(), 0.5, 1e-9);
}
