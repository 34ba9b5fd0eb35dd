#include <catch_amalgamated.hpp>

#include <cmath>
#include <numeric>
#include <vector>

#include <fairvol/estimate.hpp>
#include <fairvol/simulate.hpp>

using namespace fairvol;
using Catch::Approx;

namespace {

double mean_of(const std::vector<double>& x) {
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

HurstSeries known_hurst(double h, std::size_t m, std::size_t delta, double alpha) {
    HurstSeries hs;
    hs.n = m + 1;
    hs.delta = delta;
    hs.alpha = alpha;
    auto [lo, hi] = hurst_ci(delta, hs.n, alpha);
    hs.ci_lo = lo;
    hs.ci_hi = hi;
    for (std::size_t t = delta - 1; t < m; ++t) {
        hs.t_index.push_back(t);
        hs.h_hat.push_back(h);
        hs.h_raw.push_back(h);
        hs.clamped.push_back(false);
        hs.regime.push_back(classify_regime(h, lo, hi));
    }
    return hs;
}

}  // namespace

TEST_CASE("log returns of prices") {
    REQUIRE(log_returns({100.0, 100.0}) == std::vector<double>{0.0});
    auto r = log_returns({100.0, 110.51709180756477});
    REQUIRE(r.size() == 1);
    REQUIRE(r[0] == Approx(0.1).margin(1e-4));
    REQUIRE(r[0] == Approx(0.1).epsilon(1e-12));

    try {
        log_returns({100.0, 0.0, 50.0});
        FAIL("expected DataError");
    } catch (const DataError& e) {
        REQUIRE(e.line() == 1);
    }
    REQUIRE_THROWS_AS(log_returns({100.0}), std::invalid_argument);
    REQUIRE_THROWS_AS(log_returns({100.0, -5.0}), DataError);
}

TEST_CASE("confidence interval pins") {
    auto [lo1, hi1] = hurst_ci(20, 24527, 0.05);
    REQUIRE(lo1 == Approx(0.4693398118598874).margin(1e-12));
    REQUIRE(hi1 == Approx(0.5306601881401126).margin(1e-12));
    REQUIRE(std::abs(lo1 - 0.469) < 5e-4);
    REQUIRE(std::abs(hi1 - 0.531) < 5e-4);

    auto [lo2, hi2] = hurst_ci(20, 4612, 0.05);
    REQUIRE(std::abs(lo2 - 0.463) < 5e-4);
    REQUIRE(std::abs(hi2 - 0.537) < 5e-4);

    // symmetric about one half for any inputs
    for (std::size_t d : {5u, 20u, 120u})
        for (std::size_t n : {100u, 4612u, 24527u})
            for (double a : {0.01, 0.05, 0.2}) {
                auto [lo, hi] = hurst_ci(d, n, a);
                REQUIRE(lo + hi == Approx(1.0).margin(1e-15));
                REQUIRE(lo < hi);
            }

    // width collapses as the window grows
    auto [lo3, hi3] = hurst_ci(1000000000, 4096, 0.05);
    REQUIRE(hi3 - lo3 < 1e-4);
    REQUIRE(lo3 == Approx(0.5).margin(1e-4));

    REQUIRE_THROWS_AS(hurst_ci(1, 100, 0.05), std::invalid_argument);
    REQUIRE_THROWS_AS(hurst_ci(20, 2, 0.05), std::invalid_argument);
    REQUIRE_THROWS_AS(hurst_ci(20, 100, 0.0), std::invalid_argument);
    REQUIRE_THROWS_AS(hurst_ci(20, 100, 1.0), std::invalid_argument);
}

TEST_CASE("regime boundaries") {
    REQUIRE(classify_regime(0.5, 0.469, 0.531) == Regime::Efficient);
    REQUIRE(classify_regime(0.6, 0.469, 0.531) == Regime::Momentum);
    REQUIRE(classify_regime(0.42, 0.469, 0.531) == Regime::Reversal);
    REQUIRE(classify_regime(0.531, 0.469, 0.531) == Regime::Efficient);  // closed band
    REQUIRE(classify_regime(0.469, 0.469, 0.531) == Regime::Efficient);
    REQUIRE(std::string(to_string(Regime::Momentum)) == "momentum");
    REQUIRE(std::string(to_string(Regime::Efficient)) == "efficient");
    REQUIRE(std::string(to_string(Regime::Reversal)) == "reversal");
}

TEST_CASE("rolling estimator recovers the efficient null", "[mc]") {
    RollingConfig cfg;
    double acc = 0.0;
    std::size_t count = 0;
    for (std::uint64_t s = 0; s < 20; ++s) {
        auto hs = estimate_hurst(gen_fgn(4096, 0.5, 100 + s).values, cfg);
        for (double h : hs.h_hat) acc += h;
        count += hs.h_hat.size();
        REQUIRE(hs.t_index.front() == cfg.delta - 1);
        REQUIRE(hs.t_index.back() == 4094);
        REQUIRE(hs.n == 4096);
    }
    double mean = acc / static_cast<double>(count);
    REQUIRE(mean > 0.48);
    REQUIRE(mean < 0.52);
}

TEST_CASE("rolling estimator tracks a persistent exponent", "[mc]") {
    RollingConfig cfg;
    double acc = 0.0;
    std::size_t count = 0;
    for (std::uint64_t s = 0; s < 20; ++s) {
        auto hs = estimate_hurst(gen_fgn(4096, 0.7, 200 + s).values, cfg);
        for (double h : hs.h_hat) acc += h;
        count += hs.h_hat.size();
    }
    double mean = acc / static_cast<double>(count);
    REQUIRE(mean > 0.67);
    REQUIRE(mean < 0.73);
}

TEST_CASE("estimator input validation") {
    RollingConfig cfg;
    std::vector<double> tiny(cfg.delta - 1, 0.01);
    REQUIRE_THROWS_AS(estimate_hurst(tiny, cfg), std::invalid_argument);

    std::vector<double> with_nan(64, 0.01);
    with_nan[10] = std::nan("");
    REQUIRE_THROWS_AS(estimate_hurst(with_nan, cfg), DataError);

    std::vector<double> zeros(64, 0.0);
    try {
        estimate_hurst(zeros, cfg);
        FAIL("expected EstimationError");
    } catch (const EstimationError& e) {
        REQUIRE(e.index() == cfg.delta - 1);  // first full window is already flat
    }

    RollingConfig bad;
    bad.delta = 3;
    REQUIRE_THROWS_AS(estimate_hurst(std::vector<double>(64, 0.01), bad),
                      std::invalid_argument);
    bad = RollingConfig{};
    bad.nu_window = 4;  // below delta
    REQUIRE_THROWS_AS(estimate_hurst(std::vector<double>(64, 0.01), bad),
                      std::invalid_argument);
    bad = RollingConfig{};
    bad.alpha = 1.2;
    REQUIRE_THROWS_AS(estimate_hurst(std::vector<double>(64, 0.01), bad),
                      std::invalid_argument);
}

TEST_CASE("fixed point honored by the reported estimate") {
    RollingConfig cfg;
    auto returns = gen_fgn(512, 0.6, 5).values;
    auto hs = estimate_hurst(returns, cfg);
    double log_m = std::log(static_cast<double>(returns.size()));
    for (std::size_t i = 0; i < hs.h_hat.size(); i += 37) {
        std::size_t t = hs.t_index[i];
        double s2 = 0.0;
        for (std::size_t j = t + 1 - cfg.delta; j <= t; ++j) s2 += returns[j] * returns[j];
        s2 /= static_cast<double>(cfg.delta);
        double h = hs.h_hat[i];
        REQUIRE_FALSE(hs.clamped[i]);
        double recomputed = -(std::log(s2) - std::log(v_const(h))) / (2.0 * log_m);
        REQUIRE(h == Approx(recomputed).margin(2e-6));
        REQUIRE(hs.h_raw[i] == Approx(-std::log(s2) / (2.0 * log_m)).margin(1e-12));
    }
}

TEST_CASE("pathological scales hit the clamp and say so") {
    RollingConfig cfg;
    std::vector<double> huge(64);
    for (std::size_t i = 0; i < huge.size(); ++i) huge[i] = 1e12 * (1.0 + 0.1 * (i % 7));
    auto hs_lo = estimate_hurst(huge, cfg);
    for (std::size_t i = 0; i < hs_lo.h_hat.size(); ++i) {
        REQUIRE(hs_lo.clamped[i]);
        REQUIRE(hs_lo.h_hat[i] == Approx(0.01));
        REQUIRE(hs_lo.regime[i] == Regime::Reversal);
    }
    std::vector<double> tiny(64);
    for (std::size_t i = 0; i < tiny.size(); ++i) tiny[i] = 1e-30 * (1.0 + 0.1 * (i % 7));
    auto hs_hi = estimate_hurst(tiny, cfg);
    for (std::size_t i = 0; i < hs_hi.h_hat.size(); ++i) {
        REQUIRE(hs_hi.clamped[i]);
        REQUIRE(hs_hi.h_hat[i] == Approx(0.99));
        REQUIRE(hs_hi.regime[i] == Regime::Momentum);
    }
}

TEST_CASE("rolling standard deviation basics") {
    RollingConfig cfg;
    cfg.delta = 5;
    std::vector<double> flat(32, 0.007);
    auto v = historical_vol(flat, cfg);
    REQUIRE(v.size() == 28);
    for (double x : v) REQUIRE(x == Approx(0.0).margin(1e-18));

    RollingConfig two;
    two.delta = 5;
    std::vector<double> r = {0.01, -0.02, 0.03, 0.005, -0.015, 0.02};
    auto hv = historical_vol(r, two);
    // negation symmetry
    std::vector<double> neg(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) neg[i] = -r[i];
    auto hv_neg = historical_vol(neg, two);
    for (std::size_t i = 0; i < hv.size(); ++i)
        REQUIRE(hv[i] == Approx(hv_neg[i]).epsilon(1e-15));
}

TEST_CASE("two point window formula") {
    RollingConfig cfg;
    cfg.delta = 5;
    // the delta >= 5 floor blocks a literal two point window, so check the
    // closed form on a delta = 5 window with four equal values and one off
    std::vector<double> w = {1.0, 1.0, 1.0, 1.0, 2.0};
    double mean = 1.2;
    double ss = 4 * (1.0 - mean) * (1.0 - mean) + (2.0 - mean) * (2.0 - mean);
    auto v = historical_vol(w, cfg);
    REQUIRE(v.size() == 1);
    REQUIRE(v[0] == Approx(std::sqrt(ss / 4.0)).epsilon(1e-15));
}

TEST_CASE("rolling volatility concentrates on the true scale", "[mc]") {
    RollingConfig cfg;
    const double sigma = 0.02;
    double acc = 0.0;
    std::size_t count = 0;
    for (std::uint64_t s = 0; s < 5; ++s) {
        auto base = gen_iid_gaussian(4001, 40 + s).values;
        for (auto& x : base) x *= sigma;
        auto v = historical_vol(base, cfg);
        acc += mean_of(v);
        count += 1;
    }
    double ratio = (acc / count) / sigma;
    // E[SD]/sigma for a 20-sample Gaussian window is about 0.987
    REQUIRE(ratio == Approx(0.987).margin(0.02));
}

TEST_CASE("scale recovery is the gamma reciprocal when self referenced") {
    RollingConfig cfg;
    auto returns = gen_fgn(2048, 0.6, 77).values;
    auto hs = estimate_hurst(returns, cfg);
    auto nu = estimate_nu(returns, hs, cfg);
    std::vector<double> reciprocal(hs.h_hat.size());
    for (std::size_t i = 0; i < hs.h_hat.size(); ++i)
        reciprocal[i] = 1.0 / gamma_fn(hs.h_hat[i] + 0.5);
    auto smoothed = fairvol::detail::trailing_median(reciprocal, cfg.nu_window);
    for (std::size_t i = 0; i < nu.size(); ++i) {
        REQUIRE(nu[i] == Approx(smoothed[i]).epsilon(1e-5));
        REQUIRE(nu[i] > 0.0);
    }
}

TEST_CASE("unit scale recovered on normalized brownian data", "[mc]") {
    RollingConfig cfg;
    auto returns = gen_fgn(4096, 0.5, 3).values;  // per-step SD (n-1)^{-1/2}
    auto hs = estimate_hurst(returns, cfg);
    auto nu = estimate_nu(returns, hs, cfg);
    REQUIRE(mean_of(nu) == Approx(1.0).margin(0.05));
}

TEST_CASE("known scale factor two recovered against the true exponent", "[mc]") {
    HurstPathSpec hp = HurstPathSpec::constant(0.7);
    NuPathSpec np = NuPathSpec::constant(2.0);
    PathSample path = gen_mpre(hp, np, 2048, 10.0, 4, 91);
    std::vector<double> returns(path.values.size() - 1);
    for (std::size_t i = 0; i + 1 < path.values.size(); ++i)
        returns[i] = path.values[i + 1] - path.values[i];

    RollingConfig cfg;
    HurstSeries truth = known_hurst(0.7, returns.size(), cfg.delta, cfg.alpha);
    auto nu = estimate_nu(returns, truth, cfg);
    double mean = mean_of(nu);
    REQUIRE(mean > 1.9);
    REQUIRE(mean < 2.1);
}

TEST_CASE("scale recovery error paths") {
    RollingConfig cfg;
    std::vector<double> returns(64, 0.01);
    HurstSeries hs = known_hurst(0.5, returns.size(), cfg.delta, cfg.alpha);
    hs.t_index.back() = 500;  // outside the return range
    REQUIRE_THROWS_AS(estimate_nu(returns, hs, cfg), std::invalid_argument);

    HurstSeries empty;
    REQUIRE_THROWS_AS(estimate_nu(returns, empty, cfg), std::invalid_argument);

    std::vector<double> zeros(64, 0.0);
    HurstSeries hz = known_hurst(0.5, zeros.size(), cfg.delta, cfg.alpha);
    REQUIRE_THROWS_AS(estimate_nu(zeros, hz, cfg), EstimationError);
}

TEST_CASE("theoretical volatility closed forms") {
    RollingConfig cfg;
    std::size_t m = 4095;
    HurstSeries hs = known_hurst(0.5, m, cfg.delta, cfg.alpha);
    std::vector<double> ones(hs.h_hat.size(), 1.0);
    auto theo = theoretical_vol(hs, ones);
    for (double v : theo) REQUIRE(v == Approx(1.0 / std::sqrt(4095.0)).epsilon(1e-12));

    // exact linearity in the scale
    std::vector<double> twos(hs.h_hat.size(), 2.0);
    auto theo2 = theoretical_vol(hs, twos);
    for (std::size_t i = 0; i < theo.size(); ++i)
        REQUIRE(theo2[i] == Approx(2.0 * theo[i]).epsilon(1e-15));

    // strictly decreasing in the exponent at fixed scale, h < 1
    double prev = std::numeric_limits<double>::infinity();
    for (int i = 1; i <= 19; ++i) {
        HurstSeries one = known_hurst(0.05 * i, m, cfg.delta, cfg.alpha);
        double v = theoretical_vol(one, std::vector<double>(one.h_hat.size(), 1.0)).front();
        REQUIRE(v < prev);
        prev = v;
    }

    REQUIRE_THROWS_AS(theoretical_vol(hs, std::vector<double>(3, 1.0)),
                      std::invalid_argument);
}

TEST_CASE("fair band ordering and nesting") {
    RollingConfig cfg;
    std::size_t m = 4095;
    HurstSeries hs = known_hurst(0.5, m, cfg.delta, cfg.alpha);
    std::vector<double> nu(hs.h_hat.size(), 1.3);
    auto [lo, hi] = fair_vol_band(hs, nu);
    for (std::size_t i = 0; i < lo.size(); ++i) REQUIRE(lo[i] < hi[i]);

    // a looser significance level gives a strictly wider exponent band and
    // hence a strictly wider volatility band
    HurstSeries narrow = known_hurst(0.5, m, cfg.delta, 0.20);
    auto [nlo, nhi] = fair_vol_band(narrow, nu);
    for (std::size_t i = 0; i < lo.size(); ++i) {
        REQUIRE(nlo[i] > lo[i]);
        REQUIRE(nhi[i] < hi[i]);
    }

    // the band collapses onto the square root law as the window grows
    HurstSeries tightened = known_hurst(0.5, m, cfg.delta, cfg.alpha);
    std::tie(tightened.ci_lo, tightened.ci_hi) = hurst_ci(1000000000, m + 1, cfg.alpha);
    auto [tlo, thi] = fair_vol_band(tightened, nu);
    double target = 1.3 / std::sqrt(4095.0);
    REQUIRE(tlo.front() == Approx(target).epsilon(1e-4));
    REQUIRE(thi.front() == Approx(target).epsilon(1e-4));
    REQUIRE((thi.front() - tlo.front()) / target < 1e-3);
}

TEST_CASE("decomposition agrees with its parts and itself", "[mc]") {
    HurstPathSpec hp = HurstPathSpec::constant(0.7);
    NuPathSpec np = NuPathSpec::constant(1.0);
    PathSample path = gen_mpre(hp, np, 2048, 10.0, 4, 55);
    std::vector<double> returns(path.values.size() - 1);
    for (std::size_t i = 0; i + 1 < path.values.size(); ++i)
        returns[i] = path.values[i + 1] - path.values[i];

    RollingConfig cfg;
    auto hs = estimate_hurst(returns, cfg);
    auto vs = estimate_volatility(returns, hs, cfg);
    REQUIRE(vs.t_index == hs.t_index);
    REQUIRE(vs.sigma_hist.size() == vs.sigma_theo.size());
    REQUIRE(vs.nu_hat.size() == vs.fair_lo.size());

    double ratio_acc = 0.0;
    std::size_t cnt = 0;
    for (std::size_t i = 0; i < vs.sigma_hist.size(); ++i) {
        REQUIRE(vs.sigma_hist[i] >= 0.0);
        REQUIRE(vs.sigma_theo[i] > 0.0);
        REQUIRE(vs.fair_lo[i] < vs.fair_hi[i]);
        if (vs.sigma_hist[i] > 0.0) {
            ratio_acc += vs.sigma_theo[i] / vs.sigma_hist[i];
            ++cnt;
        }
    }
    double mean_ratio = ratio_acc / static_cast<double>(cnt);
    REQUIRE(mean_ratio > 0.9);
    REQUIRE(mean_ratio < 1.1);
}

TEST_CASE("regime labels survive a global rescale of the data", "[mc]") {
    RollingConfig cfg;
    auto returns = gen_fgn(4096, 0.72, 12).values;
    auto base = estimate_hurst(returns, cfg);
    for (double c : {0.5, 2.0}) {
        std::vector<double> scaled(returns.size());
        for (std::size_t i = 0; i < returns.size(); ++i) scaled[i] = c * returns[i];
        auto got = estimate_hurst(scaled, cfg);
        std::size_t same = 0;
        for (std::size_t i = 0; i < base.regime.size(); ++i)
            if (base.regime[i] == got.regime[i]) ++same;
        double frac = static_cast<double>(same) / static_cast<double>(base.regime.size());
        INFO("c=" << c << " agreement=" << frac);
        REQUIRE(frac >= 0.95);
    }
}
