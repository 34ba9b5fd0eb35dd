#pragma once

// Rolling Hurst-Holder estimation from log-returns, the efficiency
// confidence band around H = 1/2, and the volatility decomposition
//   sigma_theo(t) = h^{H(t)} nu(t) sqrt(A(H(t))),  h = 1/(n-1),
// with a fair-volatility band obtained by pushing the H confidence
// interval through the same map.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "errors.hpp"
#include "special.hpp"

namespace fairvol {

struct RollingConfig {
    std::size_t delta = 20;      // estimation window length (returns)
    double alpha = 0.05;         // efficiency band significance level
    std::size_t nu_window = 120; // trailing median window for nu smoothing

    void validate() const {
        if (delta < 5) throw std::invalid_argument("rolling window delta must be at least 5");
        if (!(alpha > 0.0 && alpha < 1.0))
            throw std::invalid_argument("alpha must lie in (0, 1)");
        if (nu_window < delta)
            throw std::invalid_argument("nu smoothing window must be at least delta");
    }
};

enum class Regime { Efficient, Momentum, Reversal };

inline const char* to_string(Regime r) {
    switch (r) {
        case Regime::Efficient: return "efficient";
        case Regime::Momentum: return "momentum";
        case Regime::Reversal: return "reversal";
    }
    return "unknown";
}

// Rolling estimates aligned on window right endpoints: entry i describes the
// window of returns ending at return index t_index[i].
struct HurstSeries {
    std::vector<std::size_t> t_index;
    std::vector<double> h_hat;    // fixed-point estimate, clamped to (0.01, 0.99)
    std::vector<double> h_raw;    // first-pass estimate, no normalization correction
    std::vector<bool> clamped;
    std::vector<Regime> regime;
    double ci_lo = 0.0;           // efficiency band, identical for all windows
    double ci_hi = 0.0;
    std::size_t n = 0;            // price series length the returns came from
    std::size_t delta = 0;
    double alpha = 0.0;
};

struct VolatilitySeries {
    std::vector<std::size_t> t_index;
    std::vector<double> sigma_hist;
    std::vector<double> sigma_theo;
    std::vector<double> nu_hat;
    std::vector<double> fair_lo;
    std::vector<double> fair_hi;
};

// Log-returns of a positive price series; index i maps prices[i] -> prices[i+1].
inline std::vector<double> log_returns(const std::vector<double>& prices) {
    if (prices.size() < 2) throw std::invalid_argument("need at least two prices");
    std::vector<double> r(prices.size() - 1);
    for (std::size_t i = 0; i < prices.size(); ++i) {
        if (!(prices[i] > 0.0) || !std::isfinite(prices[i]))
            throw DataError("nonpositive or non-finite price at index " + std::to_string(i), i);
    }
    for (std::size_t i = 0; i + 1 < prices.size(); ++i)
        r[i] = std::log(prices[i + 1] / prices[i]);
    return r;
}

// Two-sided confidence interval around 1/2 for the window estimator under
// the efficient null: halfwidth z_{1-alpha/2} sqrt(1 / (2 delta ln^2(n-1))).
inline std::pair<double, double> hurst_ci(std::size_t delta, std::size_t n, double alpha) {
    if (delta < 2) throw std::invalid_argument("hurst_ci needs delta >= 2");
    if (n < 3) throw std::invalid_argument("hurst_ci needs n >= 3");
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
    double log_m = std::log(static_cast<double>(n - 1));
    double half = normal_quantile(1.0 - 0.5 * alpha) *
                  std::sqrt(1.0 / (2.0 * static_cast<double>(delta) * log_m * log_m));
    return {0.5 - half, 0.5 + half};
}

inline Regime classify_regime(double h_hat, double ci_lo, double ci_hi) {
    if (h_hat > ci_hi) return Regime::Momentum;
    if (h_hat < ci_lo) return Regime::Reversal;
    return Regime::Efficient;
}

namespace detail {

inline double window_mean_square(const std::vector<double>& r, std::size_t end_inclusive,
                                 std::size_t delta) {
    double s = 0.0, c = 0.0;
    for (std::size_t j = end_inclusive + 1 - delta; j <= end_inclusive; ++j) {
        double y = r[j] * r[j] - c;
        double t = s + y;
        c = (t - s) - y;
        s = t;
    }
    return s / static_cast<double>(delta);
}

// Trailing moving median with partial windows at the start.
inline std::vector<double> trailing_median(const std::vector<double>& x, std::size_t window) {
    std::vector<double> out(x.size());
    std::vector<double> buf;
    for (std::size_t i = 0; i < x.size(); ++i) {
        std::size_t lo = (i + 1 >= window) ? i + 1 - window : 0;
        buf.assign(x.begin() + lo, x.begin() + i + 1);
        std::sort(buf.begin(), buf.end());
        std::size_t k = buf.size();
        out[i] = (k % 2 == 1) ? buf[k / 2] : 0.5 * (buf[k / 2 - 1] + buf[k / 2]);
    }
    return out;
}

}  // namespace detail

// Rolling window estimator.  Returns are treated as increments of a process
// observed at n = returns.size() + 1 points on [0, 1] with step 1/(n-1); the
// window mean square S2(t) gives the first-pass estimate
//   H_raw = -ln S2 / (2 ln(n-1)),
// refined by the normalization fixed point
//   H <- -(ln S2 - ln V_H) / (2 ln(n-1))
// iterated to 1e-6, then clamped to (0.01, 0.99) with a flag.
inline HurstSeries estimate_hurst(const std::vector<double>& returns, const RollingConfig& cfg) {
    cfg.validate();
    std::size_t m = returns.size();
    if (m < cfg.delta)
        throw std::invalid_argument("return series shorter than the rolling window");
    for (std::size_t i = 0; i < m; ++i)
        if (!std::isfinite(returns[i]))
            throw DataError("non-finite return at index " + std::to_string(i), i);

    std::size_t n = m + 1;
    double log_m = std::log(static_cast<double>(m));
    auto [lo, hi] = hurst_ci(cfg.delta, n, cfg.alpha);

    HurstSeries hs;
    hs.ci_lo = lo;
    hs.ci_hi = hi;
    hs.n = n;
    hs.delta = cfg.delta;
    hs.alpha = cfg.alpha;
    std::size_t count = m - cfg.delta + 1;
    hs.t_index.reserve(count);
    hs.h_hat.reserve(count);
    hs.h_raw.reserve(count);
    hs.clamped.reserve(count);
    hs.regime.reserve(count);

    constexpr double kEvalLo = 0.005, kEvalHi = 0.995;
    constexpr double kClampLo = 0.01, kClampHi = 0.99;
    for (std::size_t t = cfg.delta - 1; t < m; ++t) {
        double s2 = detail::window_mean_square(returns, t, cfg.delta);
        if (!(s2 > 0.0))
            throw EstimationError("window quadratic variation vanished", t);
        double log_s2 = std::log(s2);
        double h_raw = -log_s2 / (2.0 * log_m);
        double x = std::clamp(h_raw, kEvalLo, kEvalHi);
        for (int it = 0; it < 200; ++it) {
            double next = -(log_s2 - std::log(v_const(std::clamp(x, kEvalLo, kEvalHi)))) /
                          (2.0 * log_m);
            double moved = std::abs(next - x);
            x = next;
            if (moved <= 1e-6) break;
        }
        bool clamp_hit = x <= kClampLo || x >= kClampHi;
        double h = std::clamp(x, kClampLo, kClampHi);
        hs.t_index.push_back(t);
        hs.h_raw.push_back(h_raw);
        hs.h_hat.push_back(h);
        hs.clamped.push_back(clamp_hit);
        hs.regime.push_back(classify_regime(h, lo, hi));
    }
    return hs;
}

// Rolling mean-centered SD over the same windows, divisor delta - 1.
inline std::vector<double> historical_vol(const std::vector<double>& returns,
                                          const RollingConfig& cfg) {
    cfg.validate();
    std::size_t m = returns.size();
    if (m < cfg.delta)
        throw std::invalid_argument("return series shorter than the rolling window");
    std::vector<double> out;
    out.reserve(m - cfg.delta + 1);
    for (std::size_t t = cfg.delta - 1; t < m; ++t) {
        double mean = 0.0;
        for (std::size_t j = t + 1 - cfg.delta; j <= t; ++j) mean += returns[j];
        mean /= static_cast<double>(cfg.delta);
        double ss = 0.0;
        for (std::size_t j = t + 1 - cfg.delta; j <= t; ++j) {
            double d = returns[j] - mean;
            ss += d * d;
        }
        out.push_back(std::sqrt(ss / static_cast<double>(cfg.delta - 1)));
    }
    return out;
}

// Raw scale recovery nu~(t) = sqrt(S2(t)) / (h^{H_t} sqrt(A(H_t))) smoothed
// by a trailing moving median of length cfg.nu_window.  The Hurst series may
// come from estimate_hurst or from external knowledge; the inversion is only
// informative about the true scale when H_t does not itself encode S2(t).
inline std::vector<double> estimate_nu(const std::vector<double>& returns,
                                       const HurstSeries& hurst, const RollingConfig& cfg) {
    cfg.validate();
    std::size_t m = returns.size();
    if (m < cfg.delta)
        throw std::invalid_argument("return series shorter than the rolling window");
    if (hurst.t_index.size() != hurst.h_hat.size() || hurst.t_index.empty())
        throw std::invalid_argument("hurst series is empty or inconsistent");
    double h_step = 1.0 / static_cast<double>(m);
    std::vector<double> raw(hurst.t_index.size());
    for (std::size_t i = 0; i < hurst.t_index.size(); ++i) {
        std::size_t t = hurst.t_index[i];
        if (t >= m || t + 1 < cfg.delta)
            throw std::invalid_argument("hurst series index outside the return range");
        double s2 = detail::window_mean_square(returns, t, cfg.delta);
        if (!(s2 > 0.0))
            throw EstimationError("window quadratic variation vanished", t);
        HurstValue hv(hurst.h_hat[i]);
        raw[i] = std::sqrt(s2) /
                 (std::pow(h_step, hv.value()) * std::sqrt(a_const(hv)));
    }
    return detail::trailing_median(raw, cfg.nu_window);
}

// sigma_theo(t) = h^{H_t} nu_hat(t) sqrt(A(H_t)), h = 1/(n-1).
inline std::vector<double> theoretical_vol(const HurstSeries& hurst,
                                           const std::vector<double>& nu_hat) {
    if (hurst.n < 2) throw std::invalid_argument("hurst series lacks the source length");
    if (nu_hat.size() != hurst.h_hat.size())
        throw std::invalid_argument("nu series does not align with the hurst series");
    double h_step = 1.0 / static_cast<double>(hurst.n - 1);
    std::vector<double> out(nu_hat.size());
    for (std::size_t i = 0; i < nu_hat.size(); ++i) {
        HurstValue hv(hurst.h_hat[i]);
        out[i] = std::pow(h_step, hv.value()) * nu_hat[i] * std::sqrt(a_const(hv));
        if (!(out[i] > 0.0))
            throw EstimationError("theoretical volatility not positive", hurst.t_index[i]);
    }
    return out;
}

// Volatility band consistent with the efficiency band on H: the upper H
// endpoint gives the lower volatility edge because h < 1.
inline std::pair<std::vector<double>, std::vector<double>> fair_vol_band(
    const HurstSeries& hurst, const std::vector<double>& nu_hat) {
    if (hurst.n < 2) throw std::invalid_argument("hurst series lacks the source length");
    if (nu_hat.size() != hurst.h_hat.size())
        throw std::invalid_argument("nu series does not align with the hurst series");
    double h_step = 1.0 / static_cast<double>(hurst.n - 1);
    HurstValue h_lo_v(hurst.ci_lo), h_hi_v(hurst.ci_hi);
    double lo_factor = std::pow(h_step, h_hi_v.value()) * std::sqrt(a_const(h_hi_v));
    double hi_factor = std::pow(h_step, h_lo_v.value()) * std::sqrt(a_const(h_lo_v));
    std::vector<double> lo(nu_hat.size()), hi(nu_hat.size());
    for (std::size_t i = 0; i < nu_hat.size(); ++i) {
        lo[i] = lo_factor * nu_hat[i];
        hi[i] = hi_factor * nu_hat[i];
        if (!(lo[i] < hi[i]))
            throw EstimationError("fair volatility band collapsed", hurst.t_index[i]);
    }
    return {std::move(lo), std::move(hi)};
}

// Full volatility decomposition over the rolling windows.
inline VolatilitySeries estimate_volatility(const std::vector<double>& returns,
                                            const HurstSeries& hurst,
                                            const RollingConfig& cfg) {
    VolatilitySeries vs;
    vs.t_index = hurst.t_index;
    vs.sigma_hist = historical_vol(returns, cfg);
    if (vs.sigma_hist.size() != hurst.t_index.size())
        throw std::invalid_argument("hurst series does not align with the return windows");
    vs.nu_hat = estimate_nu(returns, hurst, cfg);
    vs.sigma_theo = theoretical_vol(hurst, vs.nu_hat);
    auto band = fair_vol_band(hurst, vs.nu_hat);
    vs.fair_lo = std::move(band.first);
    vs.fair_hi = std::move(band.second);
    return vs;
}

}  // namespace fairvol
