#pragma once

// Dataset loading, end-to-end analysis, and report serialization.  CSV input
// is a two-column `date,close` file; reports serialize to a single JSON file
// (lossless round-trip) or a directory of CSV tables.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "estimate.hpp"
#include "simulate.hpp"
#include "stats.hpp"

namespace fairvol {

struct PricePath {
    std::string instrument;
    std::vector<std::string> dates;  // ISO YYYY-MM-DD, strictly increasing
    std::vector<double> closes;      // positive
};

struct DatasetManifest {
    std::string ticker;
    std::string label;
    std::string start;
    std::string end;
    std::size_t size = 0;
};

struct LoadResult {
    PricePath path;
    std::size_t dropped_rows = 0;  // rows skipped for a blank close field
};

struct AnalysisReport {
    std::string instrument;
    std::string start_date;
    std::string end_date;
    std::size_t n_prices = 0;
    RollingConfig config;
    HurstSeries hurst;
    VolatilitySeries vol;
    SummaryStats returns_stats;
    SummaryStats hurst_stats;
    SummaryStats vol_stats;  // on the historical volatility series
    bool adf_valid = false;
    AdfResult adf_hurst;
    double fair_lo_agg = 0.0;  // time medians of the fair band edges
    double fair_hi_agg = 0.0;
    bool sigma_alpha_valid = false;
    double sigma_alpha = 0.0;
    EfficiencyMetrics metrics;
};

namespace detail {

inline bool valid_date(int y, int mo, int d) {
    if (y < 1 || mo < 1 || mo > 12 || d < 1) return false;
    static const int days[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    int dim = days[mo - 1];
    bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
    if (mo == 2 && leap) dim = 29;
    return d <= dim;
}

inline bool parse_iso_date(const std::string& s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
    for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u})
        if (s[i] < '0' || s[i] > '9') return false;
    int y = std::stoi(s.substr(0, 4)), mo = std::stoi(s.substr(5, 2)),
        d = std::stoi(s.substr(8, 2));
    return valid_date(y, mo, d);
}

inline std::string trim(std::string s) {
    auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
    while (!s.empty() && is_space(s.back())) s.pop_back();
    std::size_t b = 0;
    while (b < s.size() && is_space(s[b])) ++b;
    return s.substr(b);
}

inline std::string fmt_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string fmt_fixed4(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

}  // namespace detail

// Loads a `date,close` CSV.  Rows with a blank close are dropped and
// counted; malformed dates, nonpositive or unparseable closes, duplicate
// dates, and non-increasing dates are rejected with the offending line.
inline LoadResult load_csv(const std::string& filename) {
    std::ifstream in(filename, std::ios::binary);
    if (!in) throw DataError("cannot open " + filename);
    LoadResult res;
    res.path.instrument = std::filesystem::path(filename).stem().string();

    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) throw DataError("empty file: " + filename);
    ++line_no;
    if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF &&
        static_cast<unsigned char>(line[1]) == 0xBB && static_cast<unsigned char>(line[2]) == 0xBF)
        line.erase(0, 3);
    if (detail::trim(line) != "date,close")
        throw DataError("expected header 'date,close'", line_no);

    while (std::getline(in, line)) {
        ++line_no;
        std::string t = detail::trim(line);
        if (t.empty()) continue;
        std::size_t comma = t.find(',');
        if (comma == std::string::npos)
            throw DataError("expected two comma-separated fields", line_no);
        std::string date = detail::trim(t.substr(0, comma));
        std::string close = detail::trim(t.substr(comma + 1));
        if (!detail::parse_iso_date(date))
            throw DataError("invalid calendar date '" + date + "'", line_no);
        if (close.empty()) {
            ++res.dropped_rows;
            continue;
        }
        char* end = nullptr;
        double v = std::strtod(close.c_str(), &end);
        if (end == close.c_str() || *end != '\0' || !std::isfinite(v))
            throw DataError("unparseable close '" + close + "'", line_no);
        if (!(v > 0.0)) throw DataError("nonpositive close " + close, line_no);
        if (!res.path.dates.empty()) {
            if (date == res.path.dates.back())
                throw DataError("duplicate date " + date, line_no);
            if (date < res.path.dates.back())
                throw DataError("dates not increasing at " + date, line_no);
        }
        res.path.dates.push_back(std::move(date));
        res.path.closes.push_back(v);
    }
    if (res.path.closes.size() < 2)
        throw DataError("need at least two usable rows in " + filename);
    return res;
}

inline void save_csv(const PricePath& path, const std::string& filename) {
    std::ofstream out(filename, std::ios::binary);
    if (!out) throw DataError("cannot write " + filename);
    out << "date,close\n";
    for (std::size_t i = 0; i < path.dates.size(); ++i)
        out << path.dates[i] << ',' << detail::fmt_full(path.closes[i]) << '\n';
    if (!out) throw DataError("write failed for " + filename);
}

inline DatasetManifest make_manifest(const PricePath& path, const std::string& label) {
    DatasetManifest m;
    m.ticker = path.instrument;
    m.label = label;
    m.start = path.dates.empty() ? "" : path.dates.front();
    m.end = path.dates.empty() ? "" : path.dates.back();
    m.size = path.closes.size();
    return m;
}

// Simulated path export: `index,time,value`.
inline void write_path_csv(const PathSample& p, std::ostream& out) {
    out << "index,time,value\n";
    for (std::size_t i = 0; i < p.values.size(); ++i)
        out << i << ',' << detail::fmt_full(p.times[i]) << ',' << detail::fmt_full(p.values[i])
            << '\n';
}

inline void write_path_csv(const PathSample& p, const std::string& filename) {
    std::ofstream out(filename, std::ios::binary);
    if (!out) throw DataError("cannot write " + filename);
    write_path_csv(p, out);
    if (!out) throw DataError("write failed for " + filename);
}

// Full analysis: rolling Hurst estimates, volatility decomposition, summary
// statistics, a unit-root test on the estimate series (when long enough),
// the time-median fair band, the conditional sigma(alpha), and coverage
// metrics.  Pure function of its inputs.
inline AnalysisReport run_analysis(const PricePath& prices, const RollingConfig& cfg) {
    cfg.validate();
    if (prices.closes.size() < cfg.delta + 2)
        throw std::invalid_argument("price series shorter than delta + 2");
    if (prices.dates.size() != prices.closes.size() && !prices.dates.empty())
        throw std::invalid_argument("dates and closes must align");

    AnalysisReport rep;
    rep.instrument = prices.instrument;
    rep.start_date = prices.dates.empty() ? "" : prices.dates.front();
    rep.end_date = prices.dates.empty() ? "" : prices.dates.back();
    rep.n_prices = prices.closes.size();
    rep.config = cfg;

    std::vector<double> returns = log_returns(prices.closes);
    rep.hurst = estimate_hurst(returns, cfg);
    rep.vol = estimate_volatility(returns, rep.hurst, cfg);
    rep.returns_stats = summary_stats(returns);
    rep.hurst_stats = summary_stats(rep.hurst.h_hat);
    rep.vol_stats = summary_stats(rep.vol.sigma_hist);

    if (rep.hurst.h_hat.size() >= 26) {
        rep.adf_hurst = adf_test(rep.hurst.h_hat, 1);
        rep.adf_valid = true;
    }

    auto median_of = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        std::size_t k = v.size();
        return (k % 2 == 1) ? v[k / 2] : 0.5 * (v[k / 2 - 1] + v[k / 2]);
    };
    rep.fair_lo_agg = median_of(rep.vol.fair_lo);
    rep.fair_hi_agg = median_of(rep.vol.fair_hi);

    try {
        rep.sigma_alpha = fair_sigma_alpha(returns, rep.hurst, cfg.alpha);
        rep.sigma_alpha_valid = true;
    } catch (const EstimationError&) {
        rep.sigma_alpha = 0.0;
        rep.sigma_alpha_valid = false;
    }

    rep.metrics = efficiency_metrics(rep.hurst, rep.vol);
    return rep;
}

namespace detail {

inline nlohmann::ordered_json summary_to_json(const SummaryStats& s) {
    return nlohmann::ordered_json{{"count", s.count}, {"mean", s.mean}, {"sd", s.sd},
                                  {"min", s.min},     {"max", s.max},   {"range", s.range},
                                  {"skewness", s.skewness}, {"kurtosis", s.kurtosis}};
}

inline SummaryStats summary_from_json(const nlohmann::ordered_json& j) {
    SummaryStats s;
    s.count = j.at("count").get<std::size_t>();
    s.mean = j.at("mean").get<double>();
    s.sd = j.at("sd").get<double>();
    s.min = j.at("min").get<double>();
    s.max = j.at("max").get<double>();
    s.range = j.at("range").get<double>();
    s.skewness = j.at("skewness").get<double>();
    s.kurtosis = j.at("kurtosis").get<double>();
    return s;
}

}  // namespace detail

inline nlohmann::ordered_json report_to_json(const AnalysisReport& rep) {
    nlohmann::ordered_json j;
    j["instrument"] = rep.instrument;
    j["start"] = rep.start_date;
    j["end"] = rep.end_date;
    j["n_prices"] = rep.n_prices;
    j["config"] = {{"delta", rep.config.delta},
                   {"alpha", rep.config.alpha},
                   {"nu_window", rep.config.nu_window}};
    j["ci"] = {{"lo", rep.hurst.ci_lo}, {"hi", rep.hurst.ci_hi}};

    nlohmann::ordered_json hs;
    hs["t_index"] = rep.hurst.t_index;
    hs["h_hat"] = rep.hurst.h_hat;
    hs["h_raw"] = rep.hurst.h_raw;
    std::vector<int> clamped(rep.hurst.clamped.begin(), rep.hurst.clamped.end());
    hs["clamped"] = clamped;
    std::vector<std::string> regimes;
    regimes.reserve(rep.hurst.regime.size());
    for (Regime r : rep.hurst.regime) regimes.emplace_back(to_string(r));
    hs["regime"] = regimes;
    j["hurst"] = std::move(hs);

    j["volatility"] = {{"t_index", rep.vol.t_index},   {"sigma_hist", rep.vol.sigma_hist},
                       {"sigma_theo", rep.vol.sigma_theo}, {"nu_hat", rep.vol.nu_hat},
                       {"fair_lo", rep.vol.fair_lo},   {"fair_hi", rep.vol.fair_hi}};
    j["returns_stats"] = detail::summary_to_json(rep.returns_stats);
    j["hurst_stats"] = detail::summary_to_json(rep.hurst_stats);
    j["vol_stats"] = detail::summary_to_json(rep.vol_stats);
    j["adf_hurst"] = {{"valid", rep.adf_valid},
                      {"statistic", rep.adf_hurst.statistic},
                      {"pvalue", rep.adf_hurst.pvalue},
                      {"used_lags", rep.adf_hurst.used_lags},
                      {"nobs", rep.adf_hurst.nobs},
                      {"crit_1", rep.adf_hurst.crit_1},
                      {"crit_5", rep.adf_hurst.crit_5},
                      {"crit_10", rep.adf_hurst.crit_10}};
    j["fair_band_aggregate"] = {{"lo", rep.fair_lo_agg}, {"hi", rep.fair_hi_agg}};
    j["sigma_alpha"] = {{"valid", rep.sigma_alpha_valid}, {"value", rep.sigma_alpha}};
    j["metrics"] = {{"windows", rep.metrics.windows},
                    {"h_inside", rep.metrics.h_inside},
                    {"vol_inside", rep.metrics.vol_inside},
                    {"pct_h_in_ci", rep.metrics.pct_h_in_ci},
                    {"pct_vol_in_band", rep.metrics.pct_vol_in_band}};
    return j;
}

inline AnalysisReport report_from_json(const nlohmann::ordered_json& j) {
    AnalysisReport rep;
    rep.instrument = j.at("instrument").get<std::string>();
    rep.start_date = j.at("start").get<std::string>();
    rep.end_date = j.at("end").get<std::string>();
    rep.n_prices = j.at("n_prices").get<std::size_t>();
    rep.config.delta = j.at("config").at("delta").get<std::size_t>();
    rep.config.alpha = j.at("config").at("alpha").get<double>();
    rep.config.nu_window = j.at("config").at("nu_window").get<std::size_t>();
    rep.hurst.ci_lo = j.at("ci").at("lo").get<double>();
    rep.hurst.ci_hi = j.at("ci").at("hi").get<double>();
    rep.hurst.n = rep.n_prices;
    rep.hurst.delta = rep.config.delta;
    rep.hurst.alpha = rep.config.alpha;

    const auto& hs = j.at("hurst");
    rep.hurst.t_index = hs.at("t_index").get<std::vector<std::size_t>>();
    rep.hurst.h_hat = hs.at("h_hat").get<std::vector<double>>();
    rep.hurst.h_raw = hs.at("h_raw").get<std::vector<double>>();
    for (int v : hs.at("clamped").get<std::vector<int>>()) rep.hurst.clamped.push_back(v != 0);
    for (const auto& s : hs.at("regime").get<std::vector<std::string>>()) {
        if (s == "momentum") rep.hurst.regime.push_back(Regime::Momentum);
        else if (s == "reversal") rep.hurst.regime.push_back(Regime::Reversal);
        else rep.hurst.regime.push_back(Regime::Efficient);
    }

    const auto& vs = j.at("volatility");
    rep.vol.t_index = vs.at("t_index").get<std::vector<std::size_t>>();
    rep.vol.sigma_hist = vs.at("sigma_hist").get<std::vector<double>>();
    rep.vol.sigma_theo = vs.at("sigma_theo").get<std::vector<double>>();
    rep.vol.nu_hat = vs.at("nu_hat").get<std::vector<double>>();
    rep.vol.fair_lo = vs.at("fair_lo").get<std::vector<double>>();
    rep.vol.fair_hi = vs.at("fair_hi").get<std::vector<double>>();

    rep.returns_stats = detail::summary_from_json(j.at("returns_stats"));
    rep.hurst_stats = detail::summary_from_json(j.at("hurst_stats"));
    rep.vol_stats = detail::summary_from_json(j.at("vol_stats"));
    const auto& adf = j.at("adf_hurst");
    rep.adf_valid = adf.at("valid").get<bool>();
    rep.adf_hurst.statistic = adf.at("statistic").get<double>();
    rep.adf_hurst.pvalue = adf.at("pvalue").get<double>();
    rep.adf_hurst.used_lags = adf.at("used_lags").get<std::size_t>();
    rep.adf_hurst.nobs = adf.at("nobs").get<std::size_t>();
    rep.adf_hurst.crit_1 = adf.at("crit_1").get<double>();
    rep.adf_hurst.crit_5 = adf.at("crit_5").get<double>();
    rep.adf_hurst.crit_10 = adf.at("crit_10").get<double>();
    rep.fair_lo_agg = j.at("fair_band_aggregate").at("lo").get<double>();
    rep.fair_hi_agg = j.at("fair_band_aggregate").at("hi").get<double>();
    rep.sigma_alpha_valid = j.at("sigma_alpha").at("valid").get<bool>();
    rep.sigma_alpha = j.at("sigma_alpha").at("value").get<double>();
    rep.metrics.windows = j.at("metrics").at("windows").get<std::size_t>();
    rep.metrics.h_inside = j.at("metrics").at("h_inside").get<std::size_t>();
    rep.metrics.vol_inside = j.at("metrics").at("vol_inside").get<std::size_t>();
    rep.metrics.pct_h_in_ci = j.at("metrics").at("pct_h_in_ci").get<double>();
    rep.metrics.pct_vol_in_band = j.at("metrics").at("pct_vol_in_band").get<double>();
    return rep;
}

enum class ReportFormat { Json, Csv };

// JSON: single file, full double precision.  CSV: a directory containing
// hurst.csv, volatility.csv, summary.csv (4 decimals), metrics.csv.
inline void export_report(const AnalysisReport& rep, const std::string& target,
                          ReportFormat format) {
    if (format == ReportFormat::Json) {
        std::ofstream out(target, std::ios::binary);
        if (!out) throw DataError("cannot write " + target);
        out << report_to_json(rep).dump(2) << '\n';
        if (!out) throw DataError("write failed for " + target);
        return;
    }
    std::filesystem::create_directories(target);
    {
        std::ofstream out(std::filesystem::path(target) / "hurst.csv", std::ios::binary);
        if (!out) throw DataError("cannot write hurst.csv under " + target);
        out << "t_index,h_hat,h_raw,ci_lo,ci_hi,regime,clamped\n";
        for (std::size_t i = 0; i < rep.hurst.t_index.size(); ++i)
            out << rep.hurst.t_index[i] << ',' << detail::fmt_full(rep.hurst.h_hat[i]) << ','
                << detail::fmt_full(rep.hurst.h_raw[i]) << ','
                << detail::fmt_full(rep.hurst.ci_lo) << ',' << detail::fmt_full(rep.hurst.ci_hi)
                << ',' << to_string(rep.hurst.regime[i]) << ','
                << (rep.hurst.clamped[i] ? 1 : 0) << '\n';
    }
    {
        std::ofstream out(std::filesystem::path(target) / "volatility.csv", std::ios::binary);
        if (!out) throw DataError("cannot write volatility.csv under " + target);
        out << "t_index,sigma_hist,sigma_theo,nu_hat,fair_lo,fair_hi\n";
        for (std::size_t i = 0; i < rep.vol.t_index.size(); ++i)
            out << rep.vol.t_index[i] << ',' << detail::fmt_full(rep.vol.sigma_hist[i]) << ','
                << detail::fmt_full(rep.vol.sigma_theo[i]) << ','
                << detail::fmt_full(rep.vol.nu_hat[i]) << ','
                << detail::fmt_full(rep.vol.fair_lo[i]) << ','
                << detail::fmt_full(rep.vol.fair_hi[i]) << '\n';
    }
    {
        std::ofstream out(std::filesystem::path(target) / "summary.csv", std::ios::binary);
        if (!out) throw DataError("cannot write summary.csv under " + target);
        out << "section,field,value\n";
        auto put = [&](const char* sec, const char* field, double v) {
            out << sec << ',' << field << ',' << detail::fmt_fixed4(v) << '\n';
        };
        auto put_stats = [&](const char* sec, const SummaryStats& s) {
            out << sec << ",count," << s.count << '\n';
            put(sec, "mean", s.mean);
            put(sec, "sd", s.sd);
            put(sec, "range", s.range);
            put(sec, "kurtosis", s.kurtosis);
            put(sec, "skewness", s.skewness);
            put(sec, "min", s.min);
            put(sec, "max", s.max);
        };
        put_stats("hurst", rep.hurst_stats);
        put("hurst_ci", "lo", rep.hurst.ci_lo);
        put("hurst_ci", "hi", rep.hurst.ci_hi);
        put("adf", "pvalue", rep.adf_hurst.pvalue);
        put("adf", "statistic", rep.adf_hurst.statistic);
        put("adf", "cvalue", rep.adf_hurst.crit_5);
        put_stats("volatility", rep.vol_stats);
        put("fair_volatility_ci", "lo", rep.fair_lo_agg);
        put("fair_volatility_ci", "hi", rep.fair_hi_agg);
        put("fair_volatility_ci", "sigma_alpha", rep.sigma_alpha);
        put_stats("returns", rep.returns_stats);
    }
    {
        std::ofstream out(std::filesystem::path(target) / "metrics.csv", std::ios::binary);
        if (!out) throw DataError("cannot write metrics.csv under " + target);
        out << "metric,value\n";
        out << "pct_h_in_ci," << detail::fmt_full(rep.metrics.pct_h_in_ci) << '\n';
        out << "pct_vol_in_band," << detail::fmt_full(rep.metrics.pct_vol_in_band) << '\n';
    }
}

inline AnalysisReport load_report(const std::string& filename) {
    std::ifstream in(filename, std::ios::binary);
    if (!in) throw DataError("cannot open " + filename);
    nlohmann::ordered_json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed report JSON: ") + e.what());
    }
    return report_from_json(j);
}

// Three aligned panel tables sharing one index column: the rolling estimate
// with its band, the volatility triple with the fair band, and the local
// scale. Written under `dir` so plotting stays outside this library.
inline void export_plot_data(const AnalysisReport& rep, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    auto open = [&](const char* name) {
        std::ofstream out(fs::path(dir) / name, std::ios::binary);
        if (!out) throw DataError(std::string("cannot write ") + name);
        return out;
    };
    const auto& ix = rep.hurst.t_index;
    {
        std::ofstream out = open("panel_hurst.csv");
        out << "t_index,h_hat,ci_lo,ci_hi\n";
        for (std::size_t i = 0; i < ix.size(); ++i)
            out << ix[i] << ',' << detail::fmt_full(rep.hurst.h_hat[i]) << ','
                << detail::fmt_full(rep.hurst.ci_lo) << ','
                << detail::fmt_full(rep.hurst.ci_hi) << '\n';
        if (!out) throw DataError("write failed for panel_hurst.csv");
    }
    {
        std::ofstream out = open("panel_volatility.csv");
        out << "t_index,sigma_hist,sigma_theo,fair_lo,fair_hi\n";
        for (std::size_t i = 0; i < ix.size(); ++i) {
            if (!(rep.vol.fair_lo[i] <= rep.vol.fair_hi[i]))
                throw EstimationError("fair band edges out of order", ix[i]);
            out << ix[i] << ',' << detail::fmt_full(rep.vol.sigma_hist[i]) << ','
                << detail::fmt_full(rep.vol.sigma_theo[i]) << ','
                << detail::fmt_full(rep.vol.fair_lo[i]) << ','
                << detail::fmt_full(rep.vol.fair_hi[i]) << '\n';
        }
        if (!out) throw DataError("write failed for panel_volatility.csv");
    }
    {
        std::ofstream out = open("panel_nu.csv");
        out << "t_index,nu_hat\n";
        for (std::size_t i = 0; i < ix.size(); ++i)
            out << ix[i] << ',' << detail::fmt_full(rep.vol.nu_hat[i]) << '\n';
        if (!out) throw DataError("write failed for panel_nu.csv");
    }
}

}  // namespace fairvol
