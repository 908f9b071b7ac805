#include "randent/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <arpack/arpack.hpp>
#include <fmt/format.h>

#include "randent/errors.hpp"

namespace randent::spectral {

namespace {

constexpr std::size_t kDenseFallbackDim = 256;

// Orthogonal projection onto W = {v_0 = 0, sum v = 0}.
void project(double *v, std::size_t n) {
    v[0] = 0.0;
    double s = 0.0;
    for (std::size_t k = 1; k < n; ++k)
        s += v[k];
    s /= static_cast<double>(n - 1);
    for (std::size_t k = 1; k < n; ++k)
        v[k] -= s;
}

bool is_unit(cplx z) { return std::abs(z - 1.0) <= kUnitTolerance; }

void finish(SpectrumResult &r, double group_tol) {
    r.unit_multiplicity = static_cast<int>(std::count_if(r.values.begin(), r.values.end(), is_unit));
    r.eigenvalues = group_eigenvalues(r.values, group_tol);
    r.gap.reset();
    if (r.unit_multiplicity != 2)
        return;
    double top = 0.0;
    for (cplx z : r.values)
        if (!is_unit(z))
            top = std::max(top, std::abs(z));
    if (1.0 - top > kUnitTolerance)
        r.gap = 1.0 - top;
}

} // namespace

std::vector<Eigenvalue> group_eigenvalues(std::vector<cplx> &values, double tol) {
    std::sort(values.begin(), values.end(), [](cplx a, cplx b) {
        const double ma = std::abs(a), mb = std::abs(b);
        if (ma != mb)
            return ma > mb;
        if (a.real() != b.real())
            return a.real() > b.real();
        return a.imag() > b.imag();
    });
    std::vector<Eigenvalue> groups;
    std::vector<cplx> first, sum;
    for (cplx z : values) {
        std::size_t g = 0;
        // Magnitudes are sorted, so only groups with a close magnitude can match.
        for (g = groups.size(); g-- > 0;) {
            if (std::abs(first[g]) - std::abs(z) > tol) {
                g = groups.size();
                break;
            }
            if (std::abs(first[g] - z) <= tol)
                break;
        }
        if (g < groups.size()) {
            ++groups[g].multiplicity;
            sum[g] += z;
        } else {
            groups.push_back({z, 1});
            first.push_back(z);
            sum.push_back(z);
        }
    }
    for (std::size_t g = 0; g < groups.size(); ++g)
        groups[g].value = sum[g] / static_cast<double>(groups[g].multiplicity);
    return groups;
}

Eigen::MatrixXd materialize(const chain::MarkovOperator &op) {
    const std::size_t n = op.dim();
    if (n > kMaxDenseDim)
        throw CapacityError(fmt::format("dense spectrum is limited to {} states, operator has {}", kMaxDenseDim, n));
    Eigen::MatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    std::vector<double> e(n, 0.0), col(n);
    for (std::size_t c = 0; c < n; ++c) {
        e[c] = 1.0;
        op.apply(e, col);
        e[c] = 0.0;
        m.col(static_cast<Eigen::Index>(c)) = Eigen::Map<const Eigen::VectorXd>(col.data(), static_cast<Eigen::Index>(n));
    }
    return m;
}

SpectrumResult dense_spectrum(const chain::MarkovOperator &op, double group_tol) {
    const Eigen::MatrixXd m = materialize(op);
    Eigen::EigenSolver<Eigen::MatrixXd> solver(m, false);
    if (solver.info() != Eigen::Success)
        throw NumericError("dense eigendecomposition failed");
    SpectrumResult r;
    r.dim = op.dim();
    r.method = "dense";
    const Eigen::VectorXcd &ev = solver.eigenvalues();
    r.values.assign(ev.data(), ev.data() + ev.size());
    finish(r, group_tol);
    return r;
}

SpectrumResult top_eigenvalues(const chain::MarkovOperator &op, int k, double tol) {
    ArnoldiOptions opts;
    opts.tol = tol;
    return top_eigenvalues(op, k, opts);
}

SpectrumResult top_eigenvalues(const chain::MarkovOperator &op, int k, const ArnoldiOptions &opts) {
    if (k < 1 || k > kMaxTopK)
        throw DomainError(fmt::format("top_eigenvalues supports 1 <= k <= {}, got {}", kMaxTopK, k));
    if (!(opts.tol > 0.0))
        throw DomainError("eigenvalue tolerance must be positive");
    const std::size_t dim = op.dim();

    if (dim <= kDenseFallbackDim) {
        SpectrumResult r = dense_spectrum(op);
        r.values.resize(std::min(r.values.size(), static_cast<std::size_t>(k)));
        r.method = "dense";
        finish(r, kGroupTolerance);
        return r;
    }

    const a_int n = static_cast<a_int>(dim);
    const a_int nev = std::max(k - 2, 1);
    a_int ncv = opts.ncv > 0 ? opts.ncv : std::max<a_int>(2 * nev + 1, 20);
    ncv = std::min(std::max(ncv, nev + 2), n);
    const a_int lworkl = 3 * ncv * ncv + 6 * ncv;

    std::vector<double> resid(dim), v(dim * static_cast<std::size_t>(ncv)), workd(3 * dim),
        workl(static_cast<std::size_t>(lworkl));
    std::mt19937_64 start(0x5eed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (double &x : resid)
        x = u(start);
    project(resid.data(), dim);

    a_int iparam[11] = {};
    iparam[0] = 1;
    iparam[2] = opts.max_restarts;
    iparam[6] = 1;
    a_int ipntr[14] = {};
    a_int ido = 0;
    a_int info = 1;
    std::vector<double> tmp(dim);
    int matvecs = 0;

    while (true) {
        arpack::naupd(ido, arpack::bmat::identity, n, arpack::which::largest_magnitude, nev, opts.tol, resid.data(),
                      ncv, v.data(), n, iparam, ipntr, workd.data(), workl.data(), lworkl, info);
        if (ido != -1 && ido != 1)
            break;
        double *x = workd.data() + ipntr[0] - 1;
        double *y = workd.data() + ipntr[1] - 1;
        std::copy(x, x + dim, tmp.begin());
        project(tmp.data(), dim);
        op.apply(tmp, std::span<double>(y, dim));
        project(y, dim);
        ++matvecs;
    }

    auto worst_estimate = [&] {
        double worst = 0.0;
        const double *bounds = workl.data() + ipntr[10] - 1;
        for (a_int i = ncv - nev; i < ncv; ++i)
            worst = std::max(worst, std::abs(bounds[i]));
        return worst;
    };
    if (info == 1 || info == 3)
        throw ConvergenceError(fmt::format("Arnoldi iteration did not converge after {} operator applications "
                                           "({} of {} eigenvalues converged)",
                                           matvecs, iparam[4], nev),
                               worst_estimate());
    if (info != 0)
        throw NumericError(fmt::format("Arnoldi iteration failed with ARPACK code {}", info));

    std::vector<a_int> select(static_cast<std::size_t>(ncv));
    std::vector<double> dr(static_cast<std::size_t>(nev) + 1), di(static_cast<std::size_t>(nev) + 1),
        workev(3 * static_cast<std::size_t>(ncv));
    arpack::neupd(0, arpack::howmny::ritz_vectors, select.data(), dr.data(), di.data(), v.data(), n, 0.0, 0.0,
                  workev.data(), arpack::bmat::identity, n, arpack::which::largest_magnitude, nev, opts.tol,
                  resid.data(), ncv, v.data(), n, iparam, ipntr, workd.data(), workl.data(), lworkl, info);
    if (info != 0)
        throw NumericError(fmt::format("Ritz value extraction failed with ARPACK code {}", info));
    const a_int nconv = iparam[4];
    if (nconv < nev)
        throw ConvergenceError(fmt::format("only {} of {} eigenvalues converged", nconv, nev), worst_estimate());

    SpectrumResult r;
    r.dim = dim;
    r.method = "arnoldi";
    r.values = {1.0, 1.0};
    for (a_int i = 0; i < nconv; ++i)
        r.values.emplace_back(dr[static_cast<std::size_t>(i)], di[static_cast<std::size_t>(i)]);
    finish(r, kGroupTolerance);
    return r;
}

double gap(const SpectrumResult &spec) {
    if (spec.unit_multiplicity != 2)
        throw StructuralError(fmt::format("gap needs exactly two unit eigenvalues, found {}", spec.unit_multiplicity));
    if (!spec.gap)
        throw StructuralError("a non-unit eigenvalue lies on the unit circle; the chain is periodic");
    return *spec.gap;
}

std::vector<Eigenvalue> degeneracy_profile(const SpectrumResult &spec, double tol, int count) {
    std::vector<cplx> rest;
    for (cplx z : spec.values)
        if (!is_unit(z))
            rest.push_back(z);
    std::vector<Eigenvalue> groups = group_eigenvalues(rest, tol);
    if (static_cast<int>(groups.size()) > count)
        groups.resize(static_cast<std::size_t>(count));
    return groups;
}

std::vector<LiftedPair> lifted_residuals(const chain::ChainOperator &full, const chain::LumpedChain &lumped) {
    const int n = full.qubits();
    if (lumped.qubits() != n || lumped.coupling() != full.coupling())
        throw DomainError("full and lumped chains must share qubit count and coupling");
    Eigen::EigenSolver<Eigen::MatrixXd> solver(materialize(lumped), true);
    if (solver.info() != Eigen::Success)
        throw NumericError("dense eigendecomposition failed");

    const Eigen::VectorXcd &values = solver.eigenvalues();
    const Eigen::MatrixXcd &vectors = solver.eigenvectors();
    const std::size_t dim = full.dim();
    const std::size_t ldim = lumped.dim();
    std::vector<double> re(ldim), im(ldim), mre(dim), mim(dim);
    std::vector<LiftedPair> out;
    out.reserve(static_cast<std::size_t>(values.size()));
    for (Eigen::Index c = 0; c < values.size(); ++c) {
        for (std::size_t s = 0; s < ldim; ++s) {
            re[s] = vectors(static_cast<Eigen::Index>(s), c).real();
            im[s] = vectors(static_cast<Eigen::Index>(s), c).imag();
        }
        const std::vector<double> vr = chain::lift_lumped(re, n);
        const std::vector<double> vi = chain::lift_lumped(im, n);
        full.apply(vr, mre);
        full.apply(vi, mim);
        const cplx lambda = values[c];
        double num = 0.0, den = 0.0;
        for (std::size_t a = 0; a < dim; ++a) {
            const double rr = mre[a] - (lambda.real() * vr[a] - lambda.imag() * vi[a]);
            const double ri = mim[a] - (lambda.real() * vi[a] + lambda.imag() * vr[a]);
            num += rr * rr + ri * ri;
            den += vr[a] * vr[a] + vi[a] * vi[a];
        }
        out.push_back({lambda, std::sqrt(num / den)});
    }
    return out;
}

} // namespace randent::spectral
