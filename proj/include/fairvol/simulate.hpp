#pragma once

// Path simulators: fractional Gaussian noise / fractional Brownian motion via
// exact circulant embedding, a multifractional process with time-varying
// Hurst and scale paths, AR(1) and (i)id Gaussian benchmark panels, and a
// Monte Carlo validator for the increment-variance law
//   SD[X(t+h) - X(t)] ~ |h|^{H(t)} nu(t) sqrt(A(H(t))).

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "fft.hpp"
#include "rng.hpp"
#include "special.hpp"

namespace fairvol {

enum class PathKind { Fbm, Fgn, Mpre, Ar1, IidGaussian, InidGaussian, ConcatFgn };

inline const char* to_string(PathKind k) {
    switch (k) {
        case PathKind::Fbm: return "fbm";
        case PathKind::Fgn: return "fgn";
        case PathKind::Mpre: return "mpre";
        case PathKind::Ar1: return "ar1";
        case PathKind::IidGaussian: return "iid";
        case PathKind::InidGaussian: return "inid";
        case PathKind::ConcatFgn: return "concat";
    }
    return "unknown";
}

// Time-varying Hurst exponent H(t) on [0, 1], extended to negative kernel
// history times by its value at the left edge of the definition range.
// All modes keep values inside a compact [h_lo, h_hi] within (0, 1).
class HurstPathSpec {
  public:
    enum class Mode { Constant, PiecewiseConstant, Smooth, FractionalOuSampled };

    static HurstPathSpec constant(double h) {
        check_range(h, h);
        HurstPathSpec s;
        s.mode_ = Mode::Constant;
        s.lo_ = s.hi_ = h;
        s.levels_ = {h};
        return s;
    }

    // breakpoints: strictly increasing interior knots in (0, 1);
    // levels: one per segment, levels.size() == breakpoints.size() + 1.
    static HurstPathSpec piecewise(std::vector<double> breakpoints, std::vector<double> levels) {
        if (levels.empty() || levels.size() != breakpoints.size() + 1)
            throw std::invalid_argument("piecewise hurst path: need one level per segment");
        if (!std::is_sorted(breakpoints.begin(), breakpoints.end()) ||
            std::adjacent_find(breakpoints.begin(), breakpoints.end()) != breakpoints.end())
            throw std::invalid_argument("piecewise hurst path: breakpoints must be strictly increasing");
        double lo = *std::min_element(levels.begin(), levels.end());
        double hi = *std::max_element(levels.begin(), levels.end());
        check_range(lo, hi);
        HurstPathSpec s;
        s.mode_ = Mode::PiecewiseConstant;
        s.breaks_ = std::move(breakpoints);
        s.levels_ = std::move(levels);
        s.lo_ = lo;
        s.hi_ = hi;
        return s;
    }

    // f must map every evaluation time into [h_lo, h_hi]; violations are
    // detected at sampling time.
    static HurstPathSpec smooth(std::function<double(double)> f, double h_lo, double h_hi) {
        check_range(h_lo, h_hi);
        if (!f) throw std::invalid_argument("smooth hurst path: null function");
        HurstPathSpec s;
        s.mode_ = Mode::Smooth;
        s.fn_ = std::move(f);
        s.lo_ = h_lo;
        s.hi_ = h_hi;
        return s;
    }

    // Mean-reverting diffusion dH = kappa (mu - H) dt + eta dB^{h_driver},
    // Euler-sampled on the requested grid and clamped into [h_lo, h_hi].
    static HurstPathSpec fractional_ou(double mu, double kappa, double eta, double h_driver,
                                       double h_lo = 0.1, double h_hi = 0.9) {
        check_range(h_lo, h_hi);
        if (mu < h_lo || mu > h_hi)
            throw std::invalid_argument("fractional OU hurst path: mean outside [h_lo, h_hi]");
        if (kappa <= 0.0 || eta < 0.0)
            throw std::invalid_argument("fractional OU hurst path: need kappa > 0, eta >= 0");
        if (h_driver <= 0.0 || h_driver >= 1.0)
            throw std::invalid_argument("fractional OU hurst path: driver Hurst outside (0, 1)");
        HurstPathSpec s;
        s.mode_ = Mode::FractionalOuSampled;
        s.ou_mu_ = mu;
        s.ou_kappa_ = kappa;
        s.ou_eta_ = eta;
        s.ou_driver_h_ = h_driver;
        s.lo_ = h_lo;
        s.hi_ = h_hi;
        return s;
    }

    Mode mode() const { return mode_; }
    bool is_constant() const { return mode_ == Mode::Constant; }
    bool is_random() const { return mode_ == Mode::FractionalOuSampled; }
    double constant_value() const {
        if (mode_ != Mode::Constant) throw std::logic_error("hurst path is not constant");
        return levels_[0];
    }
    double lo() const { return lo_; }
    double hi() const { return hi_; }

    // times must be nondecreasing; seed is consumed only by the sampled OU
    // mode (deterministic modes ignore it).
    std::vector<double> sample(const std::vector<double>& times, std::uint64_t seed) const {
        std::vector<double> out(times.size());
        switch (mode_) {
            case Mode::Constant:
                std::fill(out.begin(), out.end(), levels_[0]);
                break;
            case Mode::PiecewiseConstant:
                for (std::size_t i = 0; i < times.size(); ++i) {
                    double t = std::clamp(times[i], 0.0, 1.0);
                    std::size_t seg = std::upper_bound(breaks_.begin(), breaks_.end(), t) - breaks_.begin();
                    out[i] = levels_[seg];
                }
                break;
            case Mode::Smooth:
                for (std::size_t i = 0; i < times.size(); ++i) {
                    double v = fn_(std::clamp(times[i], 0.0, 1.0));
                    // rounding slack so e.g. 0.4 + 0.2*1.0 landing one ulp
                    // above a declared hi of 0.6 is not a contract breach
                    const double slack = 1e-9;
                    if (!(v >= lo_ - slack && v <= hi_ + slack))
                        throw std::domain_error("smooth hurst path: sampled value outside declared range");
                    out[i] = std::clamp(v, lo_, hi_);
                }
                break;
            case Mode::FractionalOuSampled:
                sample_ou(times, seed, out);
                break;
        }
        return out;
    }

  private:
    static void check_range(double lo, double hi) {
        if (!(lo > 0.0 && hi < 1.0 && lo <= hi))
            throw std::domain_error("hurst path range must satisfy 0 < h_lo <= h_hi < 1");
    }

    void sample_ou(const std::vector<double>& times, std::uint64_t seed,
                   std::vector<double>& out) const;

    Mode mode_ = Mode::Constant;
    std::vector<double> breaks_;
    std::vector<double> levels_;
    std::function<double(double)> fn_;
    double lo_ = 0.5, hi_ = 0.5;
    double ou_mu_ = 0.5, ou_kappa_ = 1.0, ou_eta_ = 0.1, ou_driver_h_ = 0.7;
};

// Time-varying scale nu(t) > 0; same grid conventions as HurstPathSpec.
class NuPathSpec {
  public:
    enum class Mode { Constant, PiecewiseConstant, Smooth };

    static NuPathSpec constant(double nu) {
        check_positive(nu);
        NuPathSpec s;
        s.mode_ = Mode::Constant;
        s.levels_ = {nu};
        return s;
    }

    static NuPathSpec piecewise(std::vector<double> breakpoints, std::vector<double> levels) {
        if (levels.empty() || levels.size() != breakpoints.size() + 1)
            throw std::invalid_argument("piecewise nu path: need one level per segment");
        if (!std::is_sorted(breakpoints.begin(), breakpoints.end()) ||
            std::adjacent_find(breakpoints.begin(), breakpoints.end()) != breakpoints.end())
            throw std::invalid_argument("piecewise nu path: breakpoints must be strictly increasing");
        for (double v : levels) check_positive(v);
        NuPathSpec s;
        s.mode_ = Mode::PiecewiseConstant;
        s.breaks_ = std::move(breakpoints);
        s.levels_ = std::move(levels);
        return s;
    }

    static NuPathSpec smooth(std::function<double(double)> f) {
        if (!f) throw std::invalid_argument("smooth nu path: null function");
        NuPathSpec s;
        s.mode_ = Mode::Smooth;
        s.fn_ = std::move(f);
        return s;
    }

    Mode mode() const { return mode_; }
    bool is_constant() const { return mode_ == Mode::Constant; }
    double constant_value() const {
        if (mode_ != Mode::Constant) throw std::logic_error("nu path is not constant");
        return levels_[0];
    }

    std::vector<double> sample(const std::vector<double>& times) const {
        std::vector<double> out(times.size());
        switch (mode_) {
            case Mode::Constant:
                std::fill(out.begin(), out.end(), levels_[0]);
                break;
            case Mode::PiecewiseConstant:
                for (std::size_t i = 0; i < times.size(); ++i) {
                    double t = std::clamp(times[i], 0.0, 1.0);
                    std::size_t seg = std::upper_bound(breaks_.begin(), breaks_.end(), t) - breaks_.begin();
                    out[i] = levels_[seg];
                }
                break;
            case Mode::Smooth:
                for (std::size_t i = 0; i < times.size(); ++i) {
                    double v = fn_(std::clamp(times[i], 0.0, 1.0));
                    check_positive(v);
                    out[i] = v;
                }
                break;
        }
        return out;
    }

  private:
    static void check_positive(double v) {
        if (!(v > 0.0) || !std::isfinite(v))
            throw std::domain_error("nu path values must be positive and finite");
    }

    Mode mode_ = Mode::Constant;
    std::vector<double> breaks_;
    std::vector<double> levels_;
    std::function<double(double)> fn_;
};

struct SimulationSpec {
    PathKind kind = PathKind::Fbm;
    std::size_t n = 1024;           // observation count on [0, 1], step 1/(n-1)
    std::uint64_t seed = 0;
    double h = 0.5;                 // fbm / fgn / first concat segment
    double h2 = 0.5;                // second concat segment
    double phi = 0.0;               // ar1
    double truncation = 10.0;       // mpre kernel history length T
    unsigned substeps = 4;          // mpre kernel cells per observation step
    std::optional<HurstPathSpec> hurst_path;  // mpre
    std::optional<NuPathSpec> nu_path;        // mpre
};

// Simulated path plus the metadata needed to reproduce it.
struct PathSample {
    std::vector<double> times;
    std::vector<double> values;
    PathKind kind = PathKind::Fbm;
    std::uint64_t seed = 0;
    std::string label;
};

namespace detail {

inline void check_n(std::size_t n) {
    if (n < 2) throw std::invalid_argument("path length n must be at least 2");
}

// Right-endpoint grid for n-1 increments of a process observed at
// t_k = k/(n-1), k = 0..n-1.
inline std::vector<double> increment_times(std::size_t n) {
    std::vector<double> t(n - 1);
    double step = 1.0 / static_cast<double>(n - 1);
    for (std::size_t k = 0; k < n - 1; ++k) t[k] = static_cast<double>(k + 1) * step;
    return t;
}

inline std::vector<double> level_times(std::size_t n) {
    std::vector<double> t(n);
    double step = 1.0 / static_cast<double>(n - 1);
    for (std::size_t k = 0; k < n; ++k) t[k] = static_cast<double>(k) * step;
    t.back() = 1.0;
    return t;
}

inline unsigned worker_count(std::size_t items) {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    if (const char* env = std::getenv("FAIRVOL_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && v >= 1) hw = static_cast<unsigned>(std::min<long>(v, 256));
    }
    return static_cast<unsigned>(std::min<std::size_t>(hw, std::max<std::size_t>(items, 1)));
}

// Runs fn(begin, end) over a contiguous partition of [0, total).  Workers
// write to disjoint preallocated slots; reductions stay with the caller so
// results cannot depend on the thread count.
template <typename Fn>
void parallel_chunks(std::size_t total, Fn&& fn) {
    if (total == 0) return;
    unsigned workers = worker_count(total);
    if (workers <= 1) {
        fn(std::size_t{0}, total);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::size_t base = total / workers, rem = total % workers, begin = 0;
    std::exception_ptr first_error;
    std::vector<std::exception_ptr> errors(workers);
    for (unsigned w = 0; w < workers; ++w) {
        std::size_t len = base + (w < rem ? 1 : 0);
        std::size_t end = begin + len;
        pool.emplace_back([&fn, begin, end, w, &errors] {
            try {
                fn(begin, end);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
        begin = end;
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

inline double kahan_sum(const std::vector<double>& xs) {
    double s = 0.0, c = 0.0;
    for (double x : xs) {
        double y = x - c;
        double t = s + y;
        c = (t - s) - y;
        s = t;
    }
    return s;
}

// Sample mean and SD (divisor n-1) with compensated accumulation.
inline std::pair<double, double> mean_sd(const std::vector<double>& xs) {
    if (xs.size() < 2) throw std::invalid_argument("mean_sd needs at least two samples");
    double mean = kahan_sum(xs) / static_cast<double>(xs.size());
    double s = 0.0, c = 0.0;
    for (double x : xs) {
        double d = (x - mean) * (x - mean);
        double y = d - c;
        double t = s + y;
        c = (t - s) - y;
        s = t;
    }
    return {mean, std::sqrt(s / static_cast<double>(xs.size() - 1))};
}

// Exact fGn sampler: m zero-mean stationary Gaussian values with
// autocovariance gamma(k) = fgn_autocov(k, step, h).  Circulant embedding
// first; dense Cholesky when the embedding spectrum goes negative.
inline std::vector<double> fgn_exact(std::size_t m, double step, double h, std::uint64_t noise_seed) {
    if (m == 0) return {};
    HurstValue hv(h);
    GaussianStream gauss(noise_seed);
    if (m == 1) return {std::sqrt(fgn_autocov(0, step, hv)) * gauss.next()};

    std::size_t g = next_pow2(m);
    std::size_t ring = 2 * g;
    std::vector<std::complex<double>> c(ring);
    for (std::size_t j = 0; j <= g; ++j) c[j] = fgn_autocov(j, step, hv);
    for (std::size_t j = 1; j < g; ++j) c[ring - j] = c[j];
    fft_radix2(c, false);

    double lam_max = 0.0, lam_min = 0.0;
    for (auto& z : c) {
        lam_max = std::max(lam_max, z.real());
        lam_min = std::min(lam_min, z.real());
    }
    bool embeddable = lam_min >= -1e-12 * std::max(lam_max, 1.0);

    if (embeddable) {
        std::vector<std::complex<double>> a(ring);
        double inv_ring = 1.0 / static_cast<double>(ring);
        auto lam = [&](std::size_t k) { return std::max(c[k].real(), 0.0) * inv_ring; };
        a[0] = std::sqrt(lam(0)) * gauss.next();
        a[g] = std::sqrt(lam(g)) * gauss.next();
        for (std::size_t k = 1; k < g; ++k) {
            double amp = std::sqrt(lam(k) * 0.5);
            double re = gauss.next(), im = gauss.next();
            a[k] = std::complex<double>(amp * re, amp * im);
            a[ring - k] = std::conj(a[k]);
        }
        fft_radix2(a, false);
        std::vector<double> out(m);
        for (std::size_t j = 0; j < m; ++j) out[j] = a[j].real();
        return out;
    }

    // Dense fallback: lower-triangular Cholesky of the Toeplitz covariance.
    std::vector<double> gamma(m);
    for (std::size_t k = 0; k < m; ++k) gamma[k] = fgn_autocov(k, step, hv);
    std::vector<double> L(m * m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = gamma[i - j];
            for (std::size_t k = 0; k < j; ++k) s -= L[i * m + k] * L[j * m + k];
            if (i == j) {
                if (s <= 0.0)
                    throw SimulationError("fgn covariance not positive definite; cannot sample exactly");
                L[i * m + i] = std::sqrt(s);
            } else {
                L[i * m + j] = s / L[j * m + j];
            }
        }
    }
    std::vector<double> z(m);
    for (auto& v : z) v = gauss.next();
    std::vector<double> out(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j <= i; ++j) s += L[i * m + j] * z[j];
        out[i] = s;
    }
    return out;
}

}  // namespace detail

inline void HurstPathSpec::sample_ou(const std::vector<double>& times, std::uint64_t seed,
                                     std::vector<double>& out) const {
    if (times.empty()) return;
    // Driver increments on the (possibly nonuniform) requested grid: use the
    // median spacing as the Euler step scale for the fractional driver.
    std::size_t m = times.size();
    std::vector<double> dt(m > 1 ? m - 1 : 0);
    for (std::size_t i = 0; i + 1 < m; ++i) dt[i] = std::max(times[i + 1] - times[i], 0.0);
    double step = 1.0;
    if (!dt.empty()) {
        std::vector<double> sorted = dt;
        std::sort(sorted.begin(), sorted.end());
        step = std::max(sorted[sorted.size() / 2], 1e-12);
    }
    std::vector<double> noise =
        m > 1 ? detail::fgn_exact(m - 1, step, ou_driver_h_, derive_stream(seed, stream_id::kHurstPath))
              : std::vector<double>{};
    double x = ou_mu_;
    out[0] = std::clamp(x, lo_, hi_);
    for (std::size_t i = 1; i < m; ++i) {
        double d = dt[i - 1];
        x += ou_kappa_ * (ou_mu_ - x) * d + ou_eta_ * noise[i - 1];
        x = std::clamp(x, lo_, hi_);
        out[i] = x;
    }
}

// n-1 exact fractional Gaussian noise increments on the [0, 1] grid.
inline PathSample gen_fgn(std::size_t n, double h, std::uint64_t seed) {
    detail::check_n(n);
    double step = 1.0 / static_cast<double>(n - 1);
    PathSample p;
    p.kind = PathKind::Fgn;
    p.seed = seed;
    p.label = "fgn";
    p.times = detail::increment_times(n);
    p.values = detail::fgn_exact(n - 1, step, h, derive_stream(seed, stream_id::kNoise));
    for (double v : p.values)
        if (!std::isfinite(v)) throw SimulationError("fgn sampler produced a non-finite value");
    return p;
}

// n levels of fractional Brownian motion on [0, 1], X(0) = 0.
inline PathSample gen_fbm(std::size_t n, double h, std::uint64_t seed) {
    PathSample incr = gen_fgn(n, h, seed);
    PathSample p;
    p.kind = PathKind::Fbm;
    p.seed = seed;
    p.label = "fbm";
    p.times = detail::level_times(n);
    p.values.resize(n);
    p.values[0] = 0.0;
    double acc = 0.0, comp = 0.0;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        double y = incr.values[k] - comp;
        double t = acc + y;
        comp = (t - acc) - y;
        acc = t;
        p.values[k + 1] = acc;
    }
    return p;
}

namespace detail {

// Discretization of the moving-average representation
//   X(t) = nu(t) Int_{-T}^{t} [(t-s)_+^{H(t)-1/2} - (-s)_+^{H(t)-1/2}] dW(s)
// on cells of width ds = 1/((n-1) m).  Each cell contributes with the
// root-mean-square kernel value over the cell, so the per-cell variance of
// the discrete sum matches the exact integral of the squared kernel; a
// point-evaluated kernel loses several percent of increment variance near
// the singular cell even at m = 4.
struct MpreGrid {
    std::size_t n = 0;
    unsigned m = 1;
    std::size_t n_neg = 0;   // cells covering [-T, 0)
    std::size_t n_pos = 0;   // cells covering [0, 1)
    double ds = 0.0;

    static MpreGrid make(std::size_t n, double truncation, unsigned m) {
        check_n(n);
        if (!(truncation > 0.0) || !std::isfinite(truncation))
            throw std::invalid_argument("mpre truncation must be positive and finite");
        if (m < 1) throw std::invalid_argument("mpre substeps must be at least 1");
        MpreGrid g;
        g.n = n;
        g.m = m;
        g.ds = 1.0 / (static_cast<double>(n - 1) * m);
        g.n_pos = (n - 1) * static_cast<std::size_t>(m);
        double cells = truncation * static_cast<double>(n - 1) * m;
        if (cells > 5e8) throw std::invalid_argument("mpre truncation grid too large");
        g.n_neg = static_cast<std::size_t>(std::llround(std::max(cells, 1.0)));
        return g;
    }

    std::size_t total() const { return n_neg + n_pos; }

    std::vector<double> cell_midpoints() const {
        std::vector<double> mid(total());
        for (std::size_t j = 0; j < total(); ++j)
            mid[j] = (static_cast<double>(j) - static_cast<double>(n_neg) + 0.5) * ds;
        return mid;
    }
};

// RMS kernel weight for a cell at lag index ell >= 1 (distance from the
// observation time to the far edge of the cell is ell*ds):
//   phi(ell) = ds^{H-1/2} sqrt((ell^{2H} - (ell-1)^{2H}) / (2H)).
inline double mpre_cell_weight(std::size_t ell, double ds, double h) {
    double p = 2.0 * h;
    double l = static_cast<double>(ell);
    double diff;
    if (ell == 1) {
        diff = 1.0;
    } else {
        diff = -std::expm1(p * std::log1p(-1.0 / l)) * std::pow(l, p);
    }
    return std::pow(ds, h - 0.5) * std::sqrt(diff / p);
}

// Constant-H constant-nu sampler: the weight table depends only on the lag,
// so all observation times come out of one linear convolution.
class MpreConstantKernel {
  public:
    MpreConstantKernel(const MpreGrid& grid, double h, double nu) : grid_(grid), nu_(nu) {
        HurstValue hv(h);
        std::size_t total = grid.total();
        phi_.assign(total + 1, 0.0);
        for (std::size_t ell = 1; ell <= total; ++ell)
            phi_[ell] = mpre_cell_weight(ell, grid.ds, hv.value());
        std::size_t need = 2 * total + 1;
        fft_len_ = next_pow2(need);
        phi_fft_.assign(fft_len_, 0.0);
        for (std::size_t i = 0; i <= total; ++i) phi_fft_[i] = phi_[i];
        fft_radix2(phi_fft_, false);
    }

    std::vector<double> sample(std::uint64_t noise_seed) const {
        std::size_t total = grid_.total();
        GaussianStream gauss(noise_seed);
        double root_ds = std::sqrt(grid_.ds);
        std::vector<std::complex<double>> w(fft_len_, 0.0);
        for (std::size_t j = 0; j < total; ++j) w[j] = root_ds * gauss.next();
        fft_radix2(w, false);
        for (std::size_t i = 0; i < fft_len_; ++i) w[i] *= phi_fft_[i];
        fft_radix2(w, true);
        // w[i] now holds sum_{j < i} phi(i-j) dW_j for i <= total.
        std::vector<double> x(grid_.n);
        double base = w[grid_.n_neg].real();
        for (std::size_t k = 0; k < grid_.n; ++k) {
            std::size_t b = grid_.n_neg + k * grid_.m;
            x[k] = nu_ * (w[b].real() - base);
        }
        x[0] = 0.0;
        return x;
    }

  private:
    MpreGrid grid_;
    double nu_;
    std::vector<double> phi_;
    std::vector<std::complex<double>> phi_fft_;
    std::size_t fft_len_ = 0;
};

// Time-varying sampler evaluated at selected observation indices only.
// Kernel exponents follow H at the observation time (the defining property
// of the process); nu multiplies at the observation time as well.
inline std::vector<double> mpre_values_at(const MpreGrid& grid, const std::vector<double>& h_obs,
                                          const std::vector<double>& nu_obs,
                                          const std::vector<std::size_t>& obs_indices,
                                          std::uint64_t noise_seed) {
    std::size_t total = grid.total();
    GaussianStream gauss(noise_seed);
    double root_ds = std::sqrt(grid.ds);
    std::vector<double> dw(total);
    for (auto& v : dw) v = root_ds * gauss.next();

    std::vector<double> out(obs_indices.size(), 0.0);
    for (std::size_t q = 0; q < obs_indices.size(); ++q) {
        std::size_t k = obs_indices[q];
        if (k >= grid.n) throw std::invalid_argument("mpre observation index out of range");
        if (k == 0) {
            out[q] = 0.0;
            continue;
        }
        double h = h_obs[k];
        double p = 2.0 * h;
        auto g = [&](std::size_t ell) {
            double l = static_cast<double>(ell);
            double diff = (ell == 1) ? 1.0 : -std::expm1(p * std::log1p(-1.0 / l)) * std::pow(l, p);
            return std::sqrt(diff / p);
        };
        std::size_t b = grid.n_neg + k * grid.m;
        double acc = 0.0, comp = 0.0;
        for (std::size_t j = 0; j < b; ++j) {
            double w = g(b - j);
            if (j < grid.n_neg) w -= g(grid.n_neg - j);
            double term = w * dw[j];
            double y = term - comp;
            double t = acc + y;
            comp = (t - acc) - y;
            acc = t;
        }
        out[q] = nu_obs[k] * std::pow(grid.ds, h - 0.5) * acc;
    }
    return out;
}

}  // namespace detail

// Multifractional process with prescribed Hurst and scale paths, observed at
// n points on [0, 1].  truncation is the kernel history length T > 0;
// substeps m >= 1 is the number of integration cells per observation step.
inline PathSample gen_mpre(const HurstPathSpec& hurst, const NuPathSpec& nu, std::size_t n,
                           double truncation, unsigned substeps, std::uint64_t seed) {
    auto grid = detail::MpreGrid::make(n, truncation, substeps);
    PathSample p;
    p.kind = PathKind::Mpre;
    p.seed = seed;
    p.label = "mpre";
    p.times = detail::level_times(n);

    std::uint64_t noise_seed = derive_stream(seed, stream_id::kNoise);
    if (hurst.is_constant() && nu.is_constant()) {
        detail::MpreConstantKernel kernel(grid, hurst.constant_value(), nu.constant_value());
        p.values = kernel.sample(noise_seed);
    } else {
        std::vector<double> h_obs = hurst.sample(p.times, seed);
        std::vector<double> nu_obs = nu.sample(p.times);
        std::vector<std::size_t> all(n);
        for (std::size_t k = 0; k < n; ++k) all[k] = k;
        p.values = detail::mpre_values_at(grid, h_obs, nu_obs, all, noise_seed);
    }
    for (double v : p.values)
        if (!std::isfinite(v)) throw SimulationError("mpre sampler produced a non-finite value");
    return p;
}

// n-1 values of a stationary unit-variance AR(1) with |phi| < 1.
inline PathSample gen_ar1(double phi, std::size_t n, std::uint64_t seed) {
    detail::check_n(n);
    if (!(std::abs(phi) < 1.0))
        throw std::invalid_argument("ar1 coefficient must satisfy |phi| < 1");
    PathSample p;
    p.kind = PathKind::Ar1;
    p.seed = seed;
    p.label = "ar1";
    p.times = detail::increment_times(n);
    p.values.resize(n - 1);
    GaussianStream gauss(derive_stream(seed, stream_id::kNoise));
    double innov_sd = std::sqrt(1.0 - phi * phi);
    double x = gauss.next();
    p.values[0] = x;
    for (std::size_t k = 1; k < n - 1; ++k) {
        x = phi * x + innov_sd * gauss.next();
        p.values[k] = x;
    }
    return p;
}

inline PathSample gen_iid_gaussian(std::size_t n, std::uint64_t seed) {
    detail::check_n(n);
    PathSample p;
    p.kind = PathKind::IidGaussian;
    p.seed = seed;
    p.label = "iid";
    p.times = detail::increment_times(n);
    p.values.resize(n - 1);
    GaussianStream gauss(derive_stream(seed, stream_id::kNoise));
    for (auto& v : p.values) v = gauss.next();
    return p;
}

// Independent non-identically distributed Gaussians: four equal blocks with
// SDs sigma_schedule, rescaled so the pooled theoretical variance is 1.
inline PathSample gen_inid_gaussian(std::size_t n, std::uint64_t seed,
                                    std::vector<double> sigma_schedule = {0.5, 1.5, 0.75, 1.25}) {
    detail::check_n(n);
    if (sigma_schedule.empty())
        throw std::invalid_argument("inid sigma schedule must be nonempty");
    for (double s : sigma_schedule)
        if (!(s > 0.0)) throw std::invalid_argument("inid sigmas must be positive");
    std::size_t m = n - 1;
    std::size_t blocks = sigma_schedule.size();
    std::vector<std::size_t> len(blocks, m / blocks);
    len.back() += m % blocks;
    double pooled = 0.0;
    for (std::size_t b = 0; b < blocks; ++b)
        pooled += static_cast<double>(len[b]) * sigma_schedule[b] * sigma_schedule[b];
    pooled = std::sqrt(pooled / static_cast<double>(m));

    PathSample p;
    p.kind = PathKind::InidGaussian;
    p.seed = seed;
    p.label = "inid";
    p.times = detail::increment_times(n);
    p.values.resize(m);
    GaussianStream gauss(derive_stream(seed, stream_id::kNoise));
    std::size_t pos = 0;
    for (std::size_t b = 0; b < blocks; ++b) {
        double s = sigma_schedule[b] / pooled;
        for (std::size_t i = 0; i < len[b]; ++i) p.values[pos++] = s * gauss.next();
    }
    return p;
}

// Two back-to-back unit-variance fGn segments with Hurst h1 then h2;
// independent noise per segment.
inline PathSample gen_concat_fgn(double h1, double h2, std::size_t n_half, std::uint64_t seed) {
    if (n_half < 2) throw std::invalid_argument("concat segments need n_half >= 2");
    HurstValue hv1(h1), hv2(h2);
    auto segment = [&](double h, std::uint64_t sub) {
        std::vector<double> seg = detail::fgn_exact(n_half, 1.0, h, sub);
        double scale = 1.0 / std::sqrt(v_const(h));
        for (auto& v : seg) v *= scale;
        return seg;
    };
    std::vector<double> a = segment(h1, derive_stream(seed, 21));
    std::vector<double> b = segment(h2, derive_stream(seed, 22));

    PathSample p;
    p.kind = PathKind::ConcatFgn;
    p.seed = seed;
    p.label = "concat";
    p.times = detail::increment_times(2 * n_half + 1);
    p.values = std::move(a);
    p.values.insert(p.values.end(), b.begin(), b.end());
    return p;
}

// Four benchmark return sequences (iid, inid, ar1 phi = +0.9, ar1
// phi = -0.9), each rescaled so its full-sample SD is exactly 1.
inline std::vector<PathSample> gen_demo_panel(std::uint64_t seed, std::size_t n = 2048) {
    std::vector<PathSample> panel;
    panel.push_back(gen_iid_gaussian(n, derive_stream(seed, 11)));
    panel.push_back(gen_inid_gaussian(n, derive_stream(seed, 12)));
    panel.push_back(gen_ar1(0.9, n, derive_stream(seed, 13)));
    panel.push_back(gen_ar1(-0.9, n, derive_stream(seed, 14)));
    panel[2].label = "ar1_pos";
    panel[3].label = "ar1_neg";
    for (auto& p : panel) {
        auto [mean, sd] = detail::mean_sd(p.values);
        (void)mean;
        if (!(sd > 0.0)) throw SimulationError("demo panel series degenerate");
        double inv = 1.0 / sd;
        for (auto& v : p.values) v *= inv;
    }
    return panel;
}

inline PathSample simulate_path(const SimulationSpec& spec) {
    switch (spec.kind) {
        case PathKind::Fbm: return gen_fbm(spec.n, spec.h, spec.seed);
        case PathKind::Fgn: return gen_fgn(spec.n, spec.h, spec.seed);
        case PathKind::Mpre: {
            HurstPathSpec hp = spec.hurst_path ? *spec.hurst_path : HurstPathSpec::constant(spec.h);
            NuPathSpec np = spec.nu_path ? *spec.nu_path : NuPathSpec::constant(1.0);
            return gen_mpre(hp, np, spec.n, spec.truncation, spec.substeps, spec.seed);
        }
        case PathKind::Ar1: return gen_ar1(spec.phi, spec.n, spec.seed);
        case PathKind::IidGaussian: return gen_iid_gaussian(spec.n, spec.seed);
        case PathKind::InidGaussian: return gen_inid_gaussian(spec.n, spec.seed);
        case PathKind::ConcatFgn: return gen_concat_fgn(spec.h, spec.h2, spec.n / 2, spec.seed);
    }
    throw std::invalid_argument("unknown path kind");
}

// One probe of the increment-variance law: Monte Carlo SD of
// X(t + lag) - X(t) against |lag|^{H(t)} nu(t) sqrt(A(H(t))).
struct Prop1Row {
    double probe_t = 0.0;
    double lag = 0.0;
    double measured_sd = 0.0;
    double theoretical_sd = 0.0;
    double ratio = 0.0;
};

inline std::vector<Prop1Row> validate_prop1(const SimulationSpec& spec, std::size_t paths,
                                            std::vector<double> lag_grid = {}) {
    if (spec.kind != PathKind::Mpre)
        throw std::invalid_argument("increment-law validation requires an mpre spec");
    if (paths < 100)
        throw std::invalid_argument("increment-law validation needs at least 100 paths");
    HurstPathSpec hp = spec.hurst_path ? *spec.hurst_path : HurstPathSpec::constant(spec.h);
    NuPathSpec np = spec.nu_path ? *spec.nu_path : NuPathSpec::constant(1.0);
    if (hp.is_random())
        throw std::invalid_argument("increment-law validation needs a deterministic hurst path");

    auto grid = detail::MpreGrid::make(spec.n, spec.truncation, spec.substeps);
    double step = 1.0 / static_cast<double>(spec.n - 1);
    if (lag_grid.empty()) {
        for (double mult : {1.0, 2.0, 4.0, 8.0}) lag_grid.push_back(mult * step);
    }

    // Snap probes and lags onto the observation grid.
    std::vector<double> probe_targets = {0.25, 0.5, 0.75};
    std::vector<std::size_t> probe_idx;
    for (double t : probe_targets)
        probe_idx.push_back(static_cast<std::size_t>(std::llround(t * (spec.n - 1))));
    std::vector<std::size_t> lag_steps;
    for (double lag : lag_grid) {
        auto s = static_cast<std::size_t>(std::llround(lag / step));
        s = std::max<std::size_t>(s, 1);
        lag_steps.push_back(s);
    }

    std::vector<double> times = detail::level_times(spec.n);
    std::vector<double> h_obs = hp.sample(times, spec.seed);
    std::vector<double> nu_obs = np.sample(times);

    // A lone per-cell SD over 500 paths carries ~3% relative noise, too wide
    // for the [0.97, 1.03] Brownian band. Each probe therefore pools a small
    // neighborhood of non-overlapping increments, every one normalized by the
    // law at its own left endpoint, which keeps the check pointwise while
    // cutting the noise by roughly sqrt(offsets). The dense (non-constant)
    // branch pays one kernel table per endpoint, so it pools fewer offsets.
    bool fast = hp.is_constant() && np.is_constant();
    const long K = fast ? 8 : 2;

    struct Cell {
        double t, lag;
        double theo_center;
        std::vector<std::pair<std::size_t, std::size_t>> span;
        std::vector<double> theo;
    };
    std::vector<Cell> cells;
    std::vector<std::size_t> needed;
    for (std::size_t pi = 0; pi < probe_idx.size(); ++pi) {
        for (std::size_t li = 0; li < lag_steps.size(); ++li) {
            const long c = static_cast<long>(probe_idx[pi]);
            const long ls = static_cast<long>(lag_steps[li]);
            if (c + ls >= static_cast<long>(spec.n)) continue;
            Cell cell;
            cell.t = static_cast<double>(c) * step;
            cell.lag = static_cast<double>(ls) * step;
            cell.theo_center = increment_sd(cell.lag, h_obs[c], nu_obs[c]);
            for (long j = -K; j <= K; ++j) {
                const long i0 = c + j * ls;
                const long i1 = i0 + ls;
                if (i0 < 0 || i1 >= static_cast<long>(spec.n)) continue;
                cell.span.emplace_back(static_cast<std::size_t>(i0),
                                       static_cast<std::size_t>(i1));
                cell.theo.push_back(increment_sd(cell.lag, h_obs[i0], nu_obs[i0]));
                needed.push_back(static_cast<std::size_t>(i0));
                needed.push_back(static_cast<std::size_t>(i1));
            }
            cells.push_back(std::move(cell));
        }
    }
    std::sort(needed.begin(), needed.end());
    needed.erase(std::unique(needed.begin(), needed.end()), needed.end());
    std::vector<std::size_t> slot(spec.n, 0);
    for (std::size_t q = 0; q < needed.size(); ++q) slot[needed[q]] = q;

    std::vector<std::vector<double>> zsq(cells.size(), std::vector<double>(paths, 0.0));
    std::optional<detail::MpreConstantKernel> kernel;
    std::vector<std::vector<double>> wt;  // dense discrete kernels, one per needed index
    if (fast) {
        kernel.emplace(grid, hp.constant_value(), np.constant_value());
    } else {
        wt.resize(needed.size());
        for (std::size_t q = 0; q < needed.size(); ++q) {
            std::size_t k = needed[q];
            double h = h_obs[k];
            double p = 2.0 * h;
            double scale = std::pow(grid.ds, h - 0.5) * nu_obs[k];
            auto g = [&](std::size_t ell) {
                double l = static_cast<double>(ell);
                double diff =
                    (ell == 1) ? 1.0 : -std::expm1(p * std::log1p(-1.0 / l)) * std::pow(l, p);
                return std::sqrt(diff / p);
            };
            std::size_t b = grid.n_neg + k * grid.m;
            std::vector<double> w(b);
            for (std::size_t j = 0; j < b; ++j) {
                double v = g(b - j);
                if (j < grid.n_neg) v -= g(grid.n_neg - j);
                w[j] = scale * v;
            }
            wt[q] = std::move(w);
        }
    }

    detail::parallel_chunks(paths, [&](std::size_t begin, std::size_t end) {
        for (std::size_t pth = begin; pth < end; ++pth) {
            std::uint64_t noise =
                derive_stream(spec.seed, stream_id::kPathBase + static_cast<std::uint64_t>(pth));
            std::vector<double> x;
            if (fast) {
                x = kernel->sample(noise);
            } else {
                GaussianStream gauss(noise);
                double root_ds = std::sqrt(grid.ds);
                std::vector<double> dw(grid.total());
                for (auto& v : dw) v = root_ds * gauss.next();
                x.resize(needed.size());
                for (std::size_t q = 0; q < needed.size(); ++q) {
                    double acc = 0.0;
                    const auto& w = wt[q];
                    for (std::size_t j = 0; j < w.size(); ++j) acc += w[j] * dw[j];
                    x[q] = acc;
                }
            }
            for (std::size_t r = 0; r < cells.size(); ++r) {
                const Cell& cell = cells[r];
                double s = 0.0;
                for (std::size_t o = 0; o < cell.span.size(); ++o) {
                    auto [i0, i1] = cell.span[o];
                    double d = fast ? x[i1] - x[i0] : x[slot[i1]] - x[slot[i0]];
                    double z = d / cell.theo[o];
                    s += z * z;
                }
                zsq[r][pth] = s;
            }
        }
    });

    std::vector<Prop1Row> rows(cells.size());
    for (std::size_t r = 0; r < cells.size(); ++r) {
        Prop1Row row;
        row.probe_t = cells[r].t;
        row.lag = cells[r].lag;
        row.theoretical_sd = cells[r].theo_center;
        double n_samples = static_cast<double>(paths * cells[r].span.size());
        row.ratio = std::sqrt(detail::kahan_sum(zsq[r]) / n_samples);
        row.measured_sd = row.ratio * row.theoretical_sd;
        rows[r] = row;
    }
    std::sort(rows.begin(), rows.end(), [](const Prop1Row& a, const Prop1Row& b) {
        if (a.probe_t != b.probe_t) return a.probe_t < b.probe_t;
        return a.lag < b.lag;
    });
    return rows;
}

}  // namespace fairvol
