#pragma once

// Descriptive statistics, autocorrelation, an augmented Dickey-Fuller test
// with constant-plus-trend regression, and the efficiency scorecard metrics
// (band coverage percentages, conditional fair sigma, straddle payoff).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "errors.hpp"
#include "estimate.hpp"

namespace fairvol {

struct SummaryStats {
    std::size_t count = 0;
    double mean = 0.0;
    double sd = 0.0;        // divisor n-1
    double min = 0.0;
    double max = 0.0;
    double range = 0.0;     // max - min
    double skewness = 0.0;  // m3 / m2^{3/2}, moments with divisor n
    double kurtosis = 0.0;  // m4 / m2^2 (raw, Gaussian -> 3)
};

inline SummaryStats summary_stats(const std::vector<double>& x) {
    if (x.size() < 4) throw std::invalid_argument("summary statistics need at least 4 values");
    for (double v : x)
        if (!std::isfinite(v)) throw DataError("non-finite value in sample");
    SummaryStats s;
    s.count = x.size();
    double n = static_cast<double>(x.size());
    double acc = 0.0, comp = 0.0;
    for (double v : x) {
        double y = v - comp;
        double t = acc + y;
        comp = (t - acc) - y;
        acc = t;
    }
    s.mean = acc / n;
    s.min = *std::min_element(x.begin(), x.end());
    s.max = *std::max_element(x.begin(), x.end());
    s.range = s.max - s.min;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0, ss = 0.0;
    for (double v : x) {
        double d = v - s.mean;
        double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
        ss += d2;
    }
    if (!(m2 > 0.0)) throw DataError("degenerate sample: zero variance");
    s.sd = std::sqrt(ss / (n - 1.0));
    m2 /= n;
    m3 /= n;
    m4 /= n;
    s.skewness = m3 / std::pow(m2, 1.5);
    s.kurtosis = m4 / (m2 * m2);
    return s;
}

// Biased sample autocorrelation; out[0] = 1.
inline std::vector<double> sample_acf(const std::vector<double>& x, std::size_t max_lag) {
    if (max_lag < 1) throw std::invalid_argument("autocorrelation needs max_lag >= 1");
    if (x.size() <= max_lag)
        throw std::invalid_argument("series must be longer than max_lag");
    double n = static_cast<double>(x.size());
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= n;
    double denom = 0.0;
    for (double v : x) denom += (v - mean) * (v - mean);
    if (!(denom > 0.0)) throw DataError("degenerate sample: zero variance");
    std::vector<double> rho(max_lag + 1, 0.0);
    rho[0] = 1.0;
    for (std::size_t k = 1; k <= max_lag; ++k) {
        double num = 0.0;
        for (std::size_t t = k; t < x.size(); ++t)
            num += (x[t] - mean) * (x[t - k] - mean);
        rho[k] = num / denom;
    }
    return rho;
}

struct AdfResult {
    double statistic = 0.0;
    double pvalue = 1.0;
    std::size_t used_lags = 0;
    std::size_t nobs = 0;    // effective regression sample size
    double crit_1 = 0.0;
    double crit_5 = 0.0;
    double crit_10 = 0.0;
};

namespace detail {

// Householder QR least squares; also yields coefficient standard errors via
// the row norms of R^{-1}.
struct LsqFit {
    std::vector<double> beta;
    std::vector<double> se;
    double s2 = 0.0;
    std::size_t df = 0;
};

inline LsqFit least_squares(std::vector<double> a, std::size_t rows, std::size_t cols,
                            std::vector<double> y) {
    if (rows < cols || cols == 0) throw std::invalid_argument("least squares needs rows >= cols");
    // a is row-major rows x cols.
    std::vector<double> rdiag(cols, 0.0);
    for (std::size_t k = 0; k < cols; ++k) {
        double norm = 0.0;
        for (std::size_t i = k; i < rows; ++i) norm += a[i * cols + k] * a[i * cols + k];
        norm = std::sqrt(norm);
        if (norm == 0.0) {
            rdiag[k] = 0.0;
            continue;
        }
        if (a[k * cols + k] > 0.0) norm = -norm;
        for (std::size_t i = k; i < rows; ++i) a[i * cols + k] /= norm;
        a[k * cols + k] -= 1.0;
        for (std::size_t j = k + 1; j < cols; ++j) {
            double s = 0.0;
            for (std::size_t i = k; i < rows; ++i) s += a[i * cols + k] * a[i * cols + j];
            s /= a[k * cols + k];
            for (std::size_t i = k; i < rows; ++i) a[i * cols + j] += s * a[i * cols + k];
        }
        double s = 0.0;
        for (std::size_t i = k; i < rows; ++i) s += a[i * cols + k] * y[i];
        s /= a[k * cols + k];
        for (std::size_t i = k; i < rows; ++i) y[i] += s * a[i * cols + k];
        rdiag[k] = norm;
    }

    double max_diag = 0.0;
    for (double d : rdiag) max_diag = std::max(max_diag, std::abs(d));
    for (double d : rdiag)
        if (!(std::abs(d) > 1e-10 * std::max(max_diag, 1.0)))
            throw DataError("degenerate regression: collinear design");

    // R sits in the upper triangle (diagonal in rdiag).
    auto r_at = [&](std::size_t i, std::size_t j) -> double {
        return i == j ? rdiag[i] : a[i * cols + j];
    };

    LsqFit fit;
    fit.beta.assign(cols, 0.0);
    for (std::size_t ki = cols; ki-- > 0;) {
        double s = y[ki];
        for (std::size_t j = ki + 1; j < cols; ++j) s -= r_at(ki, j) * fit.beta[j];
        fit.beta[ki] = s / rdiag[ki];
    }

    double rss = 0.0;
    for (std::size_t i = cols; i < rows; ++i) rss += y[i] * y[i];
    fit.df = rows - cols;
    fit.s2 = fit.df > 0 ? rss / static_cast<double>(fit.df) : 0.0;

    // R^{-1} by back substitution on the identity, one column at a time.
    std::vector<double> rinv(cols * cols, 0.0);
    for (std::size_t col = 0; col < cols; ++col) {
        for (std::size_t ki = col + 1; ki-- > 0;) {
            double s = (ki == col) ? 1.0 : 0.0;
            for (std::size_t j = ki + 1; j <= col; ++j) s -= r_at(ki, j) * rinv[j * cols + col];
            rinv[ki * cols + col] = s / rdiag[ki];
        }
    }
    fit.se.assign(cols, 0.0);
    for (std::size_t i = 0; i < cols; ++i) {
        double row = 0.0;
        for (std::size_t j = i; j < cols; ++j) row += rinv[i * cols + j] * rinv[i * cols + j];
        fit.se[i] = std::sqrt(fit.s2 * row);
    }
    return fit;
}

// Unit-root p-value response surface (constant + trend, single series) and
// finite-sample critical-value surface.
inline double adf_pvalue_ct(double stat) {
    constexpr double tau_max = 0.7, tau_min = -16.18, tau_star = -2.89;
    constexpr double small_p[3] = {3.2512, 1.6047, 0.049588};
    constexpr double large_p[4] = {2.5261, 0.61654, -0.37956, -0.060285};
    if (stat > tau_max) return 1.0;
    if (stat < tau_min) return 0.0;
    double z;
    if (stat <= tau_star) {
        z = small_p[0] + stat * (small_p[1] + stat * small_p[2]);
    } else {
        z = large_p[0] + stat * (large_p[1] + stat * (large_p[2] + stat * large_p[3]));
    }
    return normal_cdf(z);
}

inline double adf_critvalue_ct(double pct, std::size_t nobs) {
    // rows: {beta_inf, beta_1, beta_2, beta_3} for 1%, 5%, 10%
    constexpr double table[3][4] = {
        {-3.95877, -9.0531, -28.428, -134.155},
        {-3.41049, -4.3904, -9.036, -45.374},
        {-3.12705, -2.5856, -3.925, -22.380},
    };
    int row = pct == 1.0 ? 0 : pct == 5.0 ? 1 : 2;
    double t = static_cast<double>(nobs);
    return table[row][0] + table[row][1] / t + table[row][2] / (t * t) +
           table[row][3] / (t * t * t);
}

}  // namespace detail

// Augmented Dickey-Fuller test with constant and linear trend:
//   dx_t = alpha + beta t + gamma x_{t-1} + sum_i phi_i dx_{t-i} + e_t,
// statistic = t-ratio of gamma.
inline AdfResult adf_test(const std::vector<double>& x, std::size_t lags = 1) {
    if (x.size() < 25 + lags)
        throw std::invalid_argument("unit-root test needs at least 25 + lags observations");
    for (double v : x)
        if (!std::isfinite(v)) throw DataError("non-finite value in sample");
    std::size_t m = x.size();
    std::vector<double> dx(m - 1);
    for (std::size_t i = 0; i + 1 < m; ++i) dx[i] = x[i + 1] - x[i];

    std::size_t rows = m - 1 - lags;
    std::size_t cols = 3 + lags;
    std::vector<double> design(rows * cols, 0.0);
    std::vector<double> y(rows, 0.0);
    for (std::size_t r = 0; r < rows; ++r) {
        std::size_t t = r + lags;  // index into dx; regressand dx[t]
        y[r] = dx[t];
        double* row = &design[r * cols];
        row[0] = x[t];                              // level x_{t-1}
        row[1] = 1.0;                               // constant
        row[2] = static_cast<double>(t + 1);        // trend
        for (std::size_t i = 0; i < lags; ++i) row[3 + i] = dx[t - 1 - i];
    }
    detail::LsqFit fit = detail::least_squares(std::move(design), rows, cols, std::move(y));
    AdfResult res;
    res.statistic = fit.beta[0] / fit.se[0];
    res.pvalue = detail::adf_pvalue_ct(res.statistic);
    res.used_lags = lags;
    res.nobs = rows;
    res.crit_1 = detail::adf_critvalue_ct(1.0, rows);
    res.crit_5 = detail::adf_critvalue_ct(5.0, rows);
    res.crit_10 = detail::adf_critvalue_ct(10.0, rows);
    return res;
}

struct EfficiencyMetrics {
    std::size_t windows = 0;
    std::size_t h_inside = 0;
    std::size_t vol_inside = 0;
    double pct_h_in_ci = 0.0;
    double pct_vol_in_band = 0.0;
};

// Percentage of windows with H inside the efficiency band and historical
// volatility inside the fair band.
inline EfficiencyMetrics efficiency_metrics(const HurstSeries& hurst,
                                            const VolatilitySeries& vol) {
    if (hurst.h_hat.empty() || vol.sigma_hist.empty())
        throw std::invalid_argument("efficiency metrics need nonempty series");
    if (hurst.h_hat.size() != vol.sigma_hist.size() ||
        vol.fair_lo.size() != vol.sigma_hist.size() ||
        vol.fair_hi.size() != vol.sigma_hist.size())
        throw std::invalid_argument("efficiency metrics need aligned series");
    EfficiencyMetrics m;
    m.windows = hurst.h_hat.size();
    for (std::size_t i = 0; i < m.windows; ++i) {
        if (hurst.h_hat[i] >= hurst.ci_lo && hurst.h_hat[i] <= hurst.ci_hi) ++m.h_inside;
        if (vol.sigma_hist[i] >= vol.fair_lo[i] && vol.sigma_hist[i] <= vol.fair_hi[i])
            ++m.vol_inside;
    }
    m.pct_h_in_ci = 100.0 * static_cast<double>(m.h_inside) / static_cast<double>(m.windows);
    m.pct_vol_in_band =
        100.0 * static_cast<double>(m.vol_inside) / static_cast<double>(m.windows);
    return m;
}

// Conditional volatility sigma(alpha): SD of the returns r_t whose
// next-window estimate H_{t+1} lies inside the alpha-level efficiency band.
inline double fair_sigma_alpha(const std::vector<double>& returns, const HurstSeries& hurst,
                               double alpha) {
    if (hurst.h_hat.empty()) throw std::invalid_argument("hurst series is empty");
    auto [lo, hi] = hurst_ci(hurst.delta, hurst.n, alpha);
    std::vector<double> kept;
    for (std::size_t i = 0; i < hurst.t_index.size(); ++i) {
        std::size_t t_next = hurst.t_index[i];
        if (t_next == 0) continue;
        std::size_t t = t_next - 1;  // return preceding the estimate
        if (t >= returns.size()) continue;
        if (hurst.h_hat[i] >= lo && hurst.h_hat[i] <= hi) kept.push_back(returns[t]);
    }
    if (kept.size() < 2)
        throw EstimationError("too few returns qualify for the conditional volatility",
                              hurst.t_index.empty() ? 0 : hurst.t_index.front());
    double mean = 0.0;
    for (double v : kept) mean += v;
    mean /= static_cast<double>(kept.size());
    double ss = 0.0;
    for (double v : kept) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / static_cast<double>(kept.size() - 1));
}

// Net payoff of a long straddle held to expiry.
inline double straddle_payoff(double terminal_price, double strike, double call_premium,
                              double put_premium) {
    if (call_premium < 0.0 || put_premium < 0.0)
        throw std::invalid_argument("option premiums must be nonnegative");
    return std::abs(terminal_price - strike) - (call_premium + put_premium);
}

}  // namespace fairvol
