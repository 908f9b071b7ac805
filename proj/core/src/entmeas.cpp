#include "randent/entmeas.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "randent/errors.hpp"

namespace randent::ent {

namespace {

// Amplitudes reshaped into a |A| x |B| matrix (row index from A bits, column from B bits).
Eigen::MatrixXcd amplitude_matrix(const qsim::PureState &state, const Bipartition &cut) {
    if (cut.qubits() != state.qubits())
        throw DomainError(fmt::format("bipartition is for {} qubits, state has {}", cut.qubits(), state.qubits()));
    const Eigen::Index da = Eigen::Index{1} << cut.size_a();
    const Eigen::Index db = Eigen::Index{1} << cut.size_b();
    if (cut.is_low_block())
        return Eigen::Map<const Eigen::MatrixXcd>(state.amplitudes().data(), da, db);

    std::vector<int> b_members;
    const auto &a_members = cut.members();
    for (int q = 0; q < cut.qubits(); ++q)
        if (std::find(a_members.begin(), a_members.end(), q) == a_members.end())
            b_members.push_back(q);

    Eigen::MatrixXcd psi(da, db);
    for (std::size_t k = 0; k < state.dim(); ++k) {
        Eigen::Index a = 0, b = 0;
        for (std::size_t m = 0; m < a_members.size(); ++m)
            a |= static_cast<Eigen::Index>((k >> a_members[m]) & 1U) << m;
        for (std::size_t m = 0; m < b_members.size(); ++m)
            b |= static_cast<Eigen::Index>((k >> b_members[m]) & 1U) << m;
        psi(a, b) = state[k];
    }
    return psi;
}

// Lower triangle of the smaller reduced density matrix.
Eigen::MatrixXcd reduced_lower(const Eigen::MatrixXcd &psi) {
    const bool rows_smaller = psi.rows() <= psi.cols();
    const Eigen::Index d = rows_smaller ? psi.rows() : psi.cols();
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(d, d);
    if (rows_smaller)
        rho.selfadjointView<Eigen::Lower>().rankUpdate(psi);
    else
        rho.selfadjointView<Eigen::Lower>().rankUpdate(psi.adjoint());
    return rho;
}

double frobenius_sq_lower(const Eigen::MatrixXcd &rho) {
    double diag = 0.0, off = 0.0;
    for (Eigen::Index c = 0; c < rho.cols(); ++c) {
        diag += std::norm(rho(c, c));
        for (Eigen::Index r = c + 1; r < rho.rows(); ++r)
            off += std::norm(rho(r, c));
    }
    return diag + 2.0 * off;
}

// Eigenvalues of the reduced state, nonincreasing and clamped at zero.
std::vector<double> reduced_spectrum(const qsim::PureState &state, const Bipartition &cut) {
    const Eigen::MatrixXcd rho = reduced_lower(amplitude_matrix(state, cut));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(rho, Eigen::EigenvaluesOnly);
    const Eigen::VectorXd &ev = solver.eigenvalues();
    std::vector<double> out(static_cast<std::size_t>(ev.size()));
    for (Eigen::Index k = 0; k < ev.size(); ++k)
        out[static_cast<std::size_t>(k)] = std::max(ev[ev.size() - 1 - k], 0.0);
    return out;
}

double entropy_bits(const std::vector<double> &lambda) {
    double s = 0.0;
    for (double l : lambda)
        if (l > 0.0)
            s -= l * std::log2(l);
    return s;
}

} // namespace

Bipartition Bipartition::symmetric(int n) {
    if (n < 2 || n % 2 != 0)
        throw DomainError(fmt::format("symmetric cut needs an even qubit count >= 2, got {}", n));
    std::vector<int> a(static_cast<std::size_t>(n / 2));
    for (int q = 0; q < n / 2; ++q)
        a[static_cast<std::size_t>(q)] = q;
    return {n, std::move(a)};
}

Bipartition Bipartition::of(int n, std::vector<int> members) {
    std::sort(members.begin(), members.end());
    members.erase(std::unique(members.begin(), members.end()), members.end());
    if (members.empty() || static_cast<int>(members.size()) >= n)
        throw DomainError("subsystem A must be a non-empty proper subset of the qubits");
    if (members.front() < 0 || members.back() >= n)
        throw DomainError("subsystem A contains an out-of-range qubit");
    return {n, std::move(members)};
}

bool Bipartition::is_low_block() const noexcept {
    for (std::size_t k = 0; k < a_.size(); ++k)
        if (a_[k] != static_cast<int>(k))
            return false;
    return true;
}

double fast_purity(const qsim::PureState &state, const Bipartition &cut) {
    return frobenius_sq_lower(reduced_lower(amplitude_matrix(state, cut)));
}

double purity(const qsim::PureState &state, const Bipartition &cut) { return fast_purity(state, cut); }

double vn_entropy(const qsim::PureState &state, const Bipartition &cut) {
    return entropy_bits(reduced_spectrum(state, cut));
}

SchmidtSpectrum schmidt_spectrum(const qsim::PureState &state, const Bipartition &cut) {
    std::vector<double> lambda = reduced_spectrum(state, cut);
    for (double &l : lambda)
        l = std::sqrt(l);
    return {std::move(lambda)};
}

Measures measure(const qsim::PureState &state, const Bipartition &cut, bool want_spectrum) {
    std::vector<double> lambda = reduced_spectrum(state, cut);
    Measures m;
    m.purity = 0.0;
    for (double l : lambda)
        m.purity += l * l;
    m.entropy = entropy_bits(lambda);
    if (want_spectrum)
        m.mu2 = std::move(lambda);
    return m;
}

double random_schmidt_reference(int rank, int big_n) {
    if (big_n < 1)
        throw DomainError("subspace dimension must be positive");
    if (rank < 1 || rank > big_n)
        throw DomainError(fmt::format("Schmidt rank {} outside [1, {}]", rank, big_n));
    // Rank r sits at the midpoint (r - 1/2) of its quantile bin.
    const double target = (static_cast<double>(rank) - 0.5) * M_PI / (2.0 * big_n);
    double lo = 0.0, hi = M_PI / 2.0;
    while (hi - lo > 1e-13) {
        const double mid = 0.5 * (lo + hi);
        if (mid - 0.5 * std::sin(2.0 * mid) < target)
            lo = mid;
        else
            hi = mid;
    }
    const double phi = 0.5 * (lo + hi);
    return 2.0 * std::cos(phi) / std::sqrt(static_cast<double>(big_n));
}

std::vector<double> random_schmidt_reference_squares(int n) {
    if (n < 2 || n % 2 != 0)
        throw DomainError("reference Schmidt coefficients need an even qubit count");
    const int big_n = 1 << (n / 2);
    std::vector<double> out(static_cast<std::size_t>(big_n));
    for (int r = 1; r <= big_n; ++r) {
        const double mu = random_schmidt_reference(r, big_n);
        out[static_cast<std::size_t>(r - 1)] = mu * mu;
    }
    return out;
}

double asymptotic_purity(int n) {
    if (n < 2 || n % 2 != 0)
        throw DomainError(fmt::format("asymptotic purity needs an even qubit count, got {}", n));
    const double big_n = std::ldexp(1.0, n / 2);
    return 2.0 * big_n / (big_n * big_n + 1.0);
}

double asymptotic_entropy(int n) {
    if (n < 2 || n % 2 != 0)
        throw DomainError(fmt::format("asymptotic entropy needs an even qubit count, got {}", n));
    return n / 2.0 - 1.0 / std::log(4.0);
}

} // namespace randent::ent
