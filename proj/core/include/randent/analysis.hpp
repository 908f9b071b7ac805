#pragma once

/**
 * @file
 * Decay fits, gap-scaling fits, canonical-gate sweeps and convergence diagnostics.
 *
 * Purity fits work on I(t) - I_inf with I_inf = 2N/(N^2+1) held fixed.
 */

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "randent/gatelib.hpp"
#include "randent/protocol.hpp"

namespace randent::analysis {

enum class FitModel { Kappa, Tau, Degenerate, GapLinear, GapLog };

FitModel parse_fit_model(std::string_view text);
std::string_view to_string(FitModel m);

struct FitParameter {
    std::string name;
    double value = 0.0;
    double error = 0.0;
};

struct FitResult {
    FitModel model = FitModel::Kappa;
    std::vector<FitParameter> params;
    /// Euclidean norm of the unweighted residuals inside the window, on the scale of
    /// I - I_inf for decay fits and of 1/Delta for gap fits.
    double residual_norm = 0.0;
    /// Sum of squared weighted residuals divided by the degrees of freedom (unweighted fits: 0).
    double reduced_chi2 = 0.0;
    /// Window in the fit's abscissa: time steps, or qubit counts for gap fits.
    double x_lo = 0.0;
    double x_hi = 0.0;
    std::size_t points = 0;
    bool weighted = false;

    [[nodiscard]] const FitParameter &param(std::string_view name) const;
    [[nodiscard]] double value(std::string_view name) const { return param(name).value; }
    [[nodiscard]] double error(std::string_view name) const { return param(name).error; }
};

/// A purity or entropy time series with standard errors (zero errors mean "unweighted").
struct Series {
    std::vector<double> t;
    std::vector<double> value;
    std::vector<double> se;
};

Series purity_series(const protocol::EnsembleTrace &trace);
/// Exact chain purities, with zero errors.
Series exact_series(const std::vector<double> &purity);

struct FitWindow {
    double t_min = 3.0;
    /// Negative means no upper bound.
    double t_max = -1.0;
    /// The window ends before the first point with I - I_inf < se_factor * SE.
    double se_factor = 5.0;
};

/// Weighted least squares of ln(I - I_inf) = c - kappa t / n.
FitResult fit_kappa(const Series &s, int n, double i_inf, const FitWindow &window = {});
/// Weighted least squares of ln(I - I_inf) = c - t / tau.
FitResult fit_tau(const Series &s, double i_inf, const FitWindow &window = {});
/// I - I_inf = (1 + a exp(-b t / tau)) / (1 + a) exp(-t / tau) with tau fixed and a >= 0.
FitResult fit_degenerate_decay(const Series &s, double i_inf, double tau, const FitWindow &window = {});

enum class GapModel { Linear, Log };

/// Linear: 1/Delta = (n + d) / c. Log: 1/Delta = e n ln n + f.
FitResult fit_gap_scaling(const std::vector<std::pair<int, double>> &points, GapModel model);

/// Canonical points i*step >= j*step >= k*step on the fundamental domain; 1/step must be an integer.
std::vector<gates::CanonicalParams> fundamental_grid(double step);

/// Rate from a single time: I(T) - I_inf = (1 - I_inf) exp(-kappa T / n).
/// Infinite when I(T) <= I_inf.
struct KappaEstimate {
    double kappa = 0.0;
    double se = 0.0;
};
KappaEstimate kappa_at(double purity, double purity_se, int n, int steps, double i_inf);

struct SweepPoint {
    gates::CanonicalParams params;
    double purity = 0.0;
    double purity_se = 0.0;
    double kappa = 0.0;
    double kappa_se = 0.0;
};

struct SweepGrid {
    std::vector<SweepPoint> points;
    std::size_t argmax = 0;
};

/// Runs the protocol at every grid point with seed (base.seed xor point index).
/// base.gate is ignored; base.steps and base.replicas are overridden by steps and replicas.
SweepGrid sweep_canonical(const protocol::ProtocolConfig &base, double step, int steps, int replicas);

struct CollapseCurve {
    std::string label;
    std::vector<double> t;
    std::vector<double> entropy;
    double tau = 1.0;
    double s_inf = 0.0;
};

struct CollapseTable {
    std::vector<double> x;
    /// S_inf - S(x tau) per curve, linearly interpolated onto x.
    std::vector<std::vector<double>> columns;
    /// Largest pairwise sup-distance between columns.
    double metric = 0.0;
};

/// Overlays curves on a common grid of t / tau in [x_lo, x_hi], clipped to the range every curve covers.
CollapseTable entropy_collapse(const std::vector<CollapseCurve> &curves, double x_lo = 0.5, double x_hi = 3.0,
                               int samples = 101);

/// Per recorded time, sum over i of |mu_i^2(t) - mu_i^2(inf)| against the random-state references.
std::vector<std::pair<int, double>> schmidt_distance(const protocol::EnsembleTrace &trace);

} // namespace randent::analysis
