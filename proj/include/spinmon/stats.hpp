#pragma once

// Scaling-law classification: competing least-squares fits of the half-chain
// entropy against L and ln L, the F statistic F = SSE_L / SSE_lnL, and its
// one-sided P-value under the F distribution with nu1 = nu2 = n - 2 (both
// candidate models fit two parameters to the same n points).
//
// P close to 1 favors volume-law growth (the linear-in-L fit has the smaller
// residual), P close to 0 favors logarithmic growth.

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace spinmon {

// ---------------------------------------------------------------------------
// least squares

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double sse = 0.0;  // sum of squared residuals (weighted if weights given)

    double at(double x) const { return intercept + slope * x; }
};

// Ordinary least squares of ys against xs. Requires >= 3 points and
// non-degenerate xs.
inline LinearFit linear_fit(std::span<const double> xs, std::span<const double> ys) {
    const std::size_t n = xs.size();
    if (n != ys.size()) throw std::invalid_argument("linear_fit: xs/ys size mismatch");
    if (n < 3) throw std::invalid_argument("linear_fit: need at least 3 points");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (sxx <= 0.0) throw std::invalid_argument("linear_fit: x values are degenerate");
    LinearFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    for (std::size_t i = 0; i < n; ++i) {
        double r = ys[i] - fit.at(xs[i]);
        fit.sse += r * r;
    }
    return fit;
}

// Weighted least squares (weights > 0, typically 1/stderr^2). Provided for
// sensitivity checks; the default analysis is unweighted.
inline LinearFit weighted_linear_fit(std::span<const double> xs, std::span<const double> ys,
                                     std::span<const double> ws) {
    const std::size_t n = xs.size();
    if (n != ys.size() || n != ws.size())
        throw std::invalid_argument("weighted_linear_fit: size mismatch");
    if (n < 3) throw std::invalid_argument("weighted_linear_fit: need at least 3 points");
    double W = 0.0, mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!(ws[i] > 0.0))
            throw std::invalid_argument("weighted_linear_fit: weights must be positive");
        W += ws[i];
        mx += ws[i] * xs[i];
        my += ws[i] * ys[i];
    }
    mx /= W;
    my /= W;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += ws[i] * (xs[i] - mx) * (xs[i] - mx);
        sxy += ws[i] * (xs[i] - mx) * (ys[i] - my);
    }
    if (sxx <= 0.0) throw std::invalid_argument("weighted_linear_fit: x values are degenerate");
    LinearFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    for (std::size_t i = 0; i < n; ++i) {
        double r = ys[i] - fit.at(xs[i]);
        fit.sse += ws[i] * r * r;
    }
    return fit;
}

// ---------------------------------------------------------------------------
// special functions

// Regularized incomplete beta I_x(a,b), evaluated by the modified Lentz
// continued fraction with the symmetry I_x(a,b) = 1 - I_{1-x}(b,a) chosen so
// the fraction converges fast. Absolute accuracy better than 1e-10 over the
// parameter ranges used here.
namespace detail {

inline double beta_cont_fraction(double a, double b, double x) {
    constexpr double eps = 1e-15;
    constexpr double tiny = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 500; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < eps) return h;
    }
    throw std::runtime_error("incomplete beta: continued fraction did not converge");
}

}  // namespace detail

inline double regularized_incomplete_beta(double x, double a, double b) {
    if (!(a > 0.0) || !(b > 0.0))
        throw std::invalid_argument("regularized_incomplete_beta: a and b must be > 0");
    if (!(x >= 0.0) || !(x <= 1.0))
        throw std::invalid_argument("regularized_incomplete_beta: x must be in [0,1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0))
        return front * detail::beta_cont_fraction(a, b, x) / a;
    return 1.0 - front * detail::beta_cont_fraction(b, a, 1.0 - x) / b;
}

// CDF of the F distribution with (nu1, nu2) degrees of freedom.
inline double f_cdf(double x, double nu1, double nu2) {
    if (!(nu1 > 0.0) || !(nu2 > 0.0))
        throw std::invalid_argument("f_cdf: degrees of freedom must be > 0");
    if (std::isnan(x) || x < 0.0) throw std::invalid_argument("f_cdf: x must be >= 0");
    if (x == 0.0) return 0.0;
    if (std::isinf(x)) return 1.0;
    const double z = nu1 * x / (nu1 * x + nu2);
    return regularized_incomplete_beta(z, 0.5 * nu1, 0.5 * nu2);
}

// ---------------------------------------------------------------------------
// scaling series and the F test

struct ScalingPoint {
    int L = 0;
    double S_mean = 0.0;
    double S_stderr = 0.0;
    int n_samples = 0;
};

struct ScalingSeries {
    std::vector<ScalingPoint> points;

    void validate() const {
        if (points.size() < 4)
            throw std::invalid_argument("scaling series needs at least 4 sizes");
        for (std::size_t i = 0; i < points.size(); ++i) {
            const auto& p = points[i];
            if (p.L < 2 || p.L % 2 != 0)
                throw std::invalid_argument("scaling series: L values must be even and >= 2");
            if (!std::isfinite(p.S_mean) || !std::isfinite(p.S_stderr))
                throw std::invalid_argument("scaling series: entropies must be finite");
            for (std::size_t j = 0; j < i; ++j)
                if (points[j].L == p.L)
                    throw std::invalid_argument("scaling series: L values must be distinct");
        }
    }
};

struct FTestReport {
    LinearFit fit_L;    // S against L
    LinearFit fit_lnL;  // S against ln L
    double F = 0.0;     // sse_L / sse_lnL (+inf sentinel when sse_lnL = 0)
    int nu1 = 0;        // n - 2
    int nu2 = 0;        // n - 2
    double P = -1.0;    // filled by p_value(); -1 marks "not yet computed"
    bool weighted = false;
};

// Ratio of residuals with the sentinel conventions:
//   sse_lnL = 0, sse_L > 0  ->  F = +inf   (log fit is exact)
//   both zero               ->  F = 1      (fits indistinguishable)
inline double f_ratio(double sse_L, double sse_lnL) {
    if (sse_L < 0.0 || sse_lnL < 0.0) throw std::invalid_argument("f_ratio: negative SSE");
    if (sse_lnL == 0.0)
        return sse_L == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
    return sse_L / sse_lnL;
}

// Fit the series against L and ln L and form the F statistic. P is left
// unset; call p_value() for it.
inline FTestReport f_statistic(const ScalingSeries& series, bool weighted = false) {
    series.validate();
    const std::size_t n = series.points.size();
    std::vector<double> xs_L(n), xs_lnL(n), ys(n), ws(n);
    for (std::size_t i = 0; i < n; ++i) {
        xs_L[i] = static_cast<double>(series.points[i].L);
        xs_lnL[i] = std::log(static_cast<double>(series.points[i].L));
        ys[i] = series.points[i].S_mean;
        if (weighted) {
            const double se = series.points[i].S_stderr;
            if (!(se > 0.0))
                throw std::invalid_argument(
                    "weighted F test requires positive standard errors");
            ws[i] = 1.0 / (se * se);
        }
    }
    FTestReport rep;
    rep.weighted = weighted;
    rep.fit_L = weighted ? weighted_linear_fit(xs_L, ys, ws) : linear_fit(xs_L, ys);
    rep.fit_lnL = weighted ? weighted_linear_fit(xs_lnL, ys, ws) : linear_fit(xs_lnL, ys);
    rep.F = f_ratio(rep.fit_L.sse, rep.fit_lnL.sse);
    rep.nu1 = static_cast<int>(n) - 2;
    rep.nu2 = static_cast<int>(n) - 2;
    return rep;
}

// P = 1 - F_cdf(F; nu1, nu2): the probability of a statistic at least as
// large as F under the null (volume-law) hypothesis. Sentinels: F = +inf
// gives P = 0, F = 0 gives P = 1.
inline double p_value(const FTestReport& rep) {
    if (rep.nu1 < 1 || rep.nu2 < 1)
        throw std::invalid_argument("p_value: degrees of freedom must be >= 1");
    if (std::isnan(rep.F) || rep.F < 0.0)
        throw std::invalid_argument("p_value: F must be >= 0");
    return 1.0 - f_cdf(rep.F, static_cast<double>(rep.nu1), static_cast<double>(rep.nu2));
}

inline double p_value(double F, int nu1, int nu2) {
    FTestReport rep;
    rep.F = F;
    rep.nu1 = nu1;
    rep.nu2 = nu2;
    return p_value(rep);
}

// Complete analysis: fits, F, and P in one call.
inline FTestReport analyze_series(const ScalingSeries& series, bool weighted = false) {
    FTestReport rep = f_statistic(series, weighted);
    rep.P = p_value(rep);
    return rep;
}

inline constexpr double kDefaultVerdictThreshold = 0.5;

// "volume-law favored" iff P >= threshold (default 0.5).
inline std::string verdict_string(double P, double threshold = kDefaultVerdictThreshold) {
    return P >= threshold ? "volume-law favored" : "non-volume-law";
}

}  // namespace spinmon
