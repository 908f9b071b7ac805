#include "randent/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>
#include <fmt/format.h>
#include <unsupported/Eigen/LevenbergMarquardt>

#include "randent/entmeas.hpp"
#include "randent/errors.hpp"

namespace randent::analysis {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kMinDecayPoints = 4;
constexpr double kExactFloor = 1e-12;

std::vector<std::size_t> select_window(const Series &s, double i_inf, const FitWindow &w) {
    if (s.t.size() != s.value.size() || s.t.size() != s.se.size())
        throw DomainError("series columns have different lengths");
    std::vector<std::size_t> idx;
    for (std::size_t k = 0; k < s.t.size(); ++k) {
        if (s.t[k] < w.t_min)
            continue;
        if (w.t_max >= 0.0 && s.t[k] > w.t_max)
            break;
        const double diff = s.value[k] - i_inf;
        if (diff <= kExactFloor || diff < w.se_factor * s.se[k])
            break;
        idx.push_back(k);
    }
    if (idx.size() < kMinDecayPoints)
        throw InsufficientDataError(
            fmt::format("decay fit needs at least {} usable points above the noise floor, found {}", kMinDecayPoints,
                        idx.size()));
    return idx;
}

bool all_positive_se(const Series &s, const std::vector<std::size_t> &idx) {
    return std::all_of(idx.begin(), idx.end(), [&](std::size_t k) { return s.se[k] > 0.0; });
}

struct LineFit {
    double slope, intercept;
    double var_slope, var_intercept, cov;
    double chi2;
    bool weighted;
};

// y = slope * x + intercept; sigma empty means unweighted with the variance estimated from the residuals.
LineFit fit_line(const std::vector<double> &x, const std::vector<double> &y, const std::vector<double> &sigma) {
    const std::size_t m = x.size();
    double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < m; ++k) {
        const double w = sigma.empty() ? 1.0 : 1.0 / (sigma[k] * sigma[k]);
        sw += w;
        sx += w * x[k];
        sy += w * y[k];
        sxx += w * x[k] * x[k];
        sxy += w * x[k] * y[k];
    }
    const double det = sw * sxx - sx * sx;
    if (!(std::abs(det) > 0.0))
        throw FitError("line fit is degenerate: all abscissae coincide");
    LineFit f{};
    f.slope = (sw * sxy - sx * sy) / det;
    f.intercept = (sxx * sy - sx * sxy) / det;
    f.var_slope = sw / det;
    f.var_intercept = sxx / det;
    f.cov = -sx / det;
    f.chi2 = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        const double r = y[k] - (f.slope * x[k] + f.intercept);
        f.chi2 += sigma.empty() ? r * r : r * r / (sigma[k] * sigma[k]);
    }
    f.weighted = !sigma.empty();
    if (!f.weighted) {
        const double s2 = m > 2 ? f.chi2 / static_cast<double>(m - 2) : 0.0;
        f.var_slope *= s2;
        f.var_intercept *= s2;
        f.cov *= s2;
    }
    return f;
}

struct LogFit {
    LineFit line;
    std::vector<std::size_t> idx;
    double residual_norm;
};

LogFit fit_log_decay(const Series &s, double i_inf, const FitWindow &w) {
    LogFit out;
    out.idx = select_window(s, i_inf, w);
    const bool weighted = all_positive_se(s, out.idx);
    std::vector<double> x, y, sigma;
    for (std::size_t k : out.idx) {
        const double diff = s.value[k] - i_inf;
        x.push_back(s.t[k]);
        y.push_back(std::log(diff));
        if (weighted)
            sigma.push_back(s.se[k] / diff);
    }
    out.line = fit_line(x, y, sigma);
    double rn = 0.0;
    for (std::size_t k : out.idx) {
        const double r = (s.value[k] - i_inf) - std::exp(out.line.slope * s.t[k] + out.line.intercept);
        rn += r * r;
    }
    out.residual_norm = std::sqrt(rn);
    return out;
}

FitResult decay_result(FitModel model, const Series &s, const LogFit &f) {
    FitResult r;
    r.model = model;
    r.residual_norm = f.residual_norm;
    r.points = f.idx.size();
    r.x_lo = s.t[f.idx.front()];
    r.x_hi = s.t[f.idx.back()];
    r.weighted = f.line.weighted;
    r.reduced_chi2 = f.line.weighted && r.points > 2 ? f.line.chi2 / static_cast<double>(r.points - 2) : 0.0;
    return r;
}

// Weighted residuals of the degenerate-decay model in x = (s, b), a = s^2.
struct DegenerateFunctor : Eigen::DenseFunctor<double> {
    const std::vector<double> &t, &y, &sigma;
    double tau;

    DegenerateFunctor(const std::vector<double> &t_, const std::vector<double> &y_, const std::vector<double> &sigma_,
                      double tau_)
        : Eigen::DenseFunctor<double>(2, static_cast<int>(t_.size())), t(t_), y(y_), sigma(sigma_), tau(tau_) {}

    static double model(double a, double b, double t, double tau) {
        return (1.0 + a * std::exp(-b * t / tau)) / (1.0 + a) * std::exp(-t / tau);
    }

    int operator()(const InputType &x, ValueType &fvec) const {
        const double a = x[0] * x[0];
        for (std::size_t k = 0; k < t.size(); ++k)
            fvec[static_cast<Eigen::Index>(k)] = (y[k] - model(a, x[1], t[k], tau)) / sigma[k];
        return 0;
    }

    int df(const InputType &x, JacobianType &fjac) const {
        const double s = x[0], a = s * s, b = x[1];
        for (std::size_t k = 0; k < t.size(); ++k) {
            const double e = std::exp(-b * t[k] / tau);
            const double g = std::exp(-t[k] / tau);
            const double dfda = g * (e - 1.0) / ((1.0 + a) * (1.0 + a));
            const double dfdb = g * a * e * (-t[k] / tau) / (1.0 + a);
            const auto row = static_cast<Eigen::Index>(k);
            fjac(row, 0) = -dfda * 2.0 * s / sigma[k];
            fjac(row, 1) = -dfdb / sigma[k];
        }
        return 0;
    }
};

double interpolate(const std::vector<double> &x, const std::vector<double> &y, double at) {
    const auto it = std::lower_bound(x.begin(), x.end(), at);
    if (it == x.begin())
        return y.front();
    if (it == x.end())
        return y.back();
    const std::size_t hi = static_cast<std::size_t>(it - x.begin());
    const std::size_t lo = hi - 1;
    const double w = (at - x[lo]) / (x[hi] - x[lo]);
    return y[lo] + w * (y[hi] - y[lo]);
}

} // namespace

FitModel parse_fit_model(std::string_view text) {
    if (text == "kappa")
        return FitModel::Kappa;
    if (text == "tau")
        return FitModel::Tau;
    if (text == "degenerate")
        return FitModel::Degenerate;
    if (text == "gap-linear")
        return FitModel::GapLinear;
    if (text == "gap-log")
        return FitModel::GapLog;
    throw DomainError(fmt::format("unknown fit model '{}'", text));
}

std::string_view to_string(FitModel m) {
    switch (m) {
    case FitModel::Kappa: return "kappa";
    case FitModel::Tau: return "tau";
    case FitModel::Degenerate: return "degenerate";
    case FitModel::GapLinear: return "gap-linear";
    case FitModel::GapLog: return "gap-log";
    }
    return "?";
}

const FitParameter &FitResult::param(std::string_view name) const {
    for (const auto &p : params)
        if (p.name == name)
            return p;
    throw DomainError(fmt::format("fit has no parameter '{}'", name));
}

Series purity_series(const protocol::EnsembleTrace &trace) {
    Series s;
    for (std::size_t r = 0; r < trace.rows(); ++r) {
        s.t.push_back(trace.times[r]);
        s.value.push_back(trace.purity_mean(r));
        s.se.push_back(trace.purity_se(r));
    }
    return s;
}

Series exact_series(const std::vector<double> &purity) {
    Series s;
    for (std::size_t t = 0; t < purity.size(); ++t) {
        s.t.push_back(static_cast<double>(t));
        s.value.push_back(purity[t]);
        s.se.push_back(0.0);
    }
    return s;
}

FitResult fit_kappa(const Series &s, int n, double i_inf, const FitWindow &window) {
    if (n < 1)
        throw DomainError("qubit count must be positive");
    const LogFit f = fit_log_decay(s, i_inf, window);
    FitResult r = decay_result(FitModel::Kappa, s, f);
    r.params = {{"kappa", -f.line.slope * n, std::sqrt(f.line.var_slope) * n},
                {"log_amplitude", f.line.intercept, std::sqrt(f.line.var_intercept)}};
    return r;
}

FitResult fit_tau(const Series &s, double i_inf, const FitWindow &window) {
    const LogFit f = fit_log_decay(s, i_inf, window);
    if (!(f.line.slope < 0.0))
        throw FitError(fmt::format("purity does not decay inside the window (slope {})", f.line.slope));
    FitResult r = decay_result(FitModel::Tau, s, f);
    r.params = {{"tau", -1.0 / f.line.slope, std::sqrt(f.line.var_slope) / (f.line.slope * f.line.slope)},
                {"log_amplitude", f.line.intercept, std::sqrt(f.line.var_intercept)}};
    return r;
}

FitResult fit_degenerate_decay(const Series &s, double i_inf, double tau, const FitWindow &window) {
    if (!(tau > 0.0) || !std::isfinite(tau))
        throw DomainError("tau must be positive and finite");
    const std::vector<std::size_t> idx = select_window(s, i_inf, window);
    const bool weighted = all_positive_se(s, idx);
    std::vector<double> t, y, sigma;
    for (std::size_t k : idx) {
        t.push_back(s.t[k]);
        y.push_back(s.value[k] - i_inf);
        sigma.push_back(weighted ? s.se[k] : 1.0);
    }

    DegenerateFunctor functor(t, y, sigma, tau);
    Eigen::VectorXd x(2), fvec(static_cast<Eigen::Index>(t.size()));
    double best = kInf;
    for (double a0 : {0.1, 0.3, 1.0, 3.0, 10.0})
        for (double b0 : {0.1, 0.3, 0.75, 1.5, 3.0}) {
            Eigen::VectorXd trial(2);
            trial << std::sqrt(a0), b0;
            functor(trial, fvec);
            if (fvec.squaredNorm() < best) {
                best = fvec.squaredNorm();
                x = trial;
            }
        }

    Eigen::LevenbergMarquardt<DegenerateFunctor> lm(functor);
    lm.setXtol(1e-14);
    lm.setFtol(1e-14);
    lm.setMaxfev(5000);
    const auto status = lm.minimize(x);
    functor(x, fvec);
    const double cost = fvec.squaredNorm();
    using Eigen::LevenbergMarquardtSpace::Status;
    if (status == Status::ImproperInputParameters || status == Status::TooManyFunctionEvaluation ||
        status == Status::UserAsked || !x.allFinite() || !std::isfinite(cost))
        throw FitError(fmt::format("degenerate-decay fit did not converge (status {}, a = {}, b = {}, cost = {})",
                                   static_cast<int>(status), x[0] * x[0], x[1], cost));

    const double m = static_cast<double>(t.size());
    Eigen::MatrixXd jac(static_cast<Eigen::Index>(t.size()), 2);
    functor.df(x, jac);
    const Eigen::Matrix2d jtj = jac.transpose() * jac;
    Eigen::FullPivLU<Eigen::Matrix2d> lu(jtj);
    double err_s = kInf, err_b = kInf;
    if (lu.isInvertible()) {
        Eigen::Matrix2d cov = lu.inverse();
        if (!weighted)
            cov *= cost / std::max(1.0, m - 2.0);
        err_s = std::sqrt(std::max(0.0, cov(0, 0)));
        err_b = std::sqrt(std::max(0.0, cov(1, 1)));
    }

    FitResult r;
    r.model = FitModel::Degenerate;
    r.params = {{"a", x[0] * x[0], 2.0 * std::abs(x[0]) * err_s}, {"b", x[1], err_b}, {"tau", tau, 0.0}};
    double rn = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k) {
        const double d = y[k] - DegenerateFunctor::model(x[0] * x[0], x[1], t[k], tau);
        rn += d * d;
    }
    r.residual_norm = std::sqrt(rn);
    r.reduced_chi2 = weighted && m > 2 ? cost / (m - 2.0) : 0.0;
    r.weighted = weighted;
    r.points = t.size();
    r.x_lo = t.front();
    r.x_hi = t.back();
    return r;
}

FitResult fit_gap_scaling(const std::vector<std::pair<int, double>> &points, GapModel model) {
    if (points.size() < 3)
        throw InsufficientDataError(fmt::format("gap scaling fit needs at least 3 points, got {}", points.size()));
    std::vector<double> x, y;
    for (const auto &[n, gap] : points) {
        if (!(gap > 0.0) || n < 2)
            throw DomainError("gap points need n >= 2 and a positive gap");
        x.push_back(model == GapModel::Linear ? n : n * std::log(static_cast<double>(n)));
        y.push_back(1.0 / gap);
    }
    const LineFit f = fit_line(x, y, {});
    FitResult r;
    r.model = model == GapModel::Linear ? FitModel::GapLinear : FitModel::GapLog;
    r.residual_norm = std::sqrt(f.chi2);
    r.points = points.size();
    const auto [lo, hi] = std::minmax_element(points.begin(), points.end());
    r.x_lo = lo->first;
    r.x_hi = hi->first;
    if (model == GapModel::Linear) {
        const double c = 1.0 / f.slope;
        const double d = f.intercept / f.slope;
        const double dd_dint = 1.0 / f.slope;
        const double dd_dslope = -f.intercept / (f.slope * f.slope);
        const double var_d = dd_dint * dd_dint * f.var_intercept + dd_dslope * dd_dslope * f.var_slope +
                             2.0 * dd_dint * dd_dslope * f.cov;
        r.params = {{"c", c, std::sqrt(f.var_slope) / (f.slope * f.slope)}, {"d", d, std::sqrt(std::max(0.0, var_d))}};
    } else {
        r.params = {{"e", f.slope, std::sqrt(f.var_slope)}, {"f", f.intercept, std::sqrt(f.var_intercept)}};
    }
    return r;
}

std::vector<gates::CanonicalParams> fundamental_grid(double step) {
    if (!(step > 0.0) || step > 1.0)
        throw DomainError("grid step must lie in (0, 1]");
    const double inv = 1.0 / step;
    const int m = static_cast<int>(std::lround(inv));
    if (std::abs(inv - m) > 1e-9)
        throw DomainError(fmt::format("grid step {} does not divide 1", step));
    std::vector<gates::CanonicalParams> grid;
    for (int i = 0; i <= m; ++i)
        for (int j = 0; j <= i; ++j)
            for (int k = 0; k <= j; ++k)
                grid.push_back({static_cast<double>(i) / m, static_cast<double>(j) / m, static_cast<double>(k) / m});
    return grid;
}

KappaEstimate kappa_at(double purity, double purity_se, int n, int steps, double i_inf) {
    if (steps < 1)
        throw DomainError("rate estimate needs T >= 1");
    const double diff = purity - i_inf;
    const double scale = static_cast<double>(n) / steps;
    if (!(diff > 0.0))
        return {kInf, kInf};
    return {-scale * std::log(diff / (1.0 - i_inf)), scale * purity_se / diff};
}

SweepGrid sweep_canonical(const protocol::ProtocolConfig &base, double step, int steps, int replicas) {
    if (!base.cut.empty())
        throw DomainError("the sweep uses the symmetric cut");
    const double i_inf = ent::asymptotic_purity(base.n);
    const auto grid = fundamental_grid(step);
    SweepGrid out;
    for (std::size_t p = 0; p < grid.size(); ++p) {
        protocol::ProtocolConfig cfg = base;
        cfg.gate.kind = gates::GateSpec::Kind::Canonical;
        cfg.gate.params = grid[p];
        cfg.seed = base.seed ^ static_cast<std::uint64_t>(p);
        cfg.first_stream = 0;
        cfg.steps = steps;
        cfg.replicas = replicas;
        cfg.measures = {true, false, false};
        cfg.record_every = std::max(1, steps);
        const protocol::EnsembleTrace trace = protocol::run_protocol(cfg);
        const std::size_t last = trace.rows() - 1;
        SweepPoint sp;
        sp.params = grid[p];
        sp.purity = trace.purity_mean(last);
        sp.purity_se = trace.purity_se(last);
        const KappaEstimate k = kappa_at(sp.purity, sp.purity_se, base.n, steps, i_inf);
        sp.kappa = k.kappa;
        sp.kappa_se = k.se;
        out.points.push_back(sp);
        if (out.points[out.argmax].kappa < sp.kappa)
            out.argmax = p;
    }
    return out;
}

CollapseTable entropy_collapse(const std::vector<CollapseCurve> &curves, double x_lo, double x_hi, int samples) {
    CollapseTable table;
    if (curves.empty())
        return table;
    if (samples < 2)
        throw DomainError("collapse grid needs at least 2 samples");
    double lo = x_lo, hi = x_hi;
    std::vector<std::vector<double>> xs, ys;
    for (const auto &c : curves) {
        if (c.t.size() != c.entropy.size() || c.t.empty())
            throw DomainError(fmt::format("curve '{}' has mismatched or empty columns", c.label));
        if (!(c.tau > 0.0))
            throw DomainError(fmt::format("curve '{}' needs a positive tau", c.label));
        std::vector<double> x(c.t.size()), y(c.t.size());
        for (std::size_t k = 0; k < c.t.size(); ++k) {
            x[k] = c.t[k] / c.tau;
            y[k] = c.s_inf - c.entropy[k];
        }
        lo = std::max(lo, x.front());
        hi = std::min(hi, x.back());
        xs.push_back(std::move(x));
        ys.push_back(std::move(y));
    }
    if (!(hi > lo))
        throw DomainError("curves do not share a t/tau range inside the requested window");
    for (int k = 0; k < samples; ++k)
        table.x.push_back(lo + (hi - lo) * k / (samples - 1));
    for (std::size_t c = 0; c < curves.size(); ++c) {
        std::vector<double> col;
        for (double x : table.x)
            col.push_back(interpolate(xs[c], ys[c], x));
        table.columns.push_back(std::move(col));
    }
    for (std::size_t a = 0; a < curves.size(); ++a)
        for (std::size_t b = a + 1; b < curves.size(); ++b)
            for (std::size_t k = 0; k < table.x.size(); ++k)
                table.metric = std::max(table.metric, std::abs(table.columns[a][k] - table.columns[b][k]));
    return table;
}

std::vector<std::pair<int, double>> schmidt_distance(const protocol::EnsembleTrace &trace) {
    const std::vector<double> ref = ent::random_schmidt_reference_squares(trace.n);
    if (trace.schmidt_count != static_cast<int>(ref.size()))
        throw DomainError("Schmidt distance needs a symmetric-cut trace with Schmidt data");
    std::vector<std::pair<int, double>> out;
    for (std::size_t r = 0; r < trace.rows(); ++r) {
        double d = 0.0;
        for (int k = 0; k < trace.schmidt_count; ++k)
            d += std::abs(trace.mu2_mean(r, k) - ref[static_cast<std::size_t>(k)]);
        out.emplace_back(trace.times[r], d);
    }
    return out;
}

} // namespace randent::analysis
