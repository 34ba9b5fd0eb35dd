#pragma once

#include <cmath>
#include <cstddef>
#include <queue>
#include <vector>

#include "fairvol/errors.hpp"

namespace fairvol {

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;   // sum of per-interval |K15 - G7| proxies
    std::size_t intervals = 0;     // leaf intervals in the final partition
    bool converged = false;
};

namespace detail {

// Gauss 7 / Kronrod 15 node pair on [-1, 1] (QUADPACK values). The Kronrod
// rule supplies the value, the embedded Gauss rule the error proxy.
inline constexpr double kGk15Nodes[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
};
inline constexpr double kGk15WeightsK[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
};
inline constexpr double kGk15WeightsG[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
};

template <typename F>
void gk15_apply(const F& f, double a, double b, double& value, double& err) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double fv[15];
    // nodes ordered: -x0..-x6, 0, +x6..+x0 evaluated pairwise below
    double sum_k = kGk15WeightsK[7] * f(c);
    double sum_g = kGk15WeightsG[3] * f(c);
    for (int i = 0; i < 7; ++i) {
        const double dx = h * kGk15Nodes[i];
        const double f1 = f(c - dx);
        const double f2 = f(c + dx);
        fv[i] = f1;
        fv[14 - i] = f2;
        sum_k += kGk15WeightsK[i] * (f1 + f2);
        if (i % 2 == 1)  // Kronrod nodes 1,3,5 are the Gauss-7 nodes
            sum_g += kGk15WeightsG[i / 2] * (f1 + f2);
    }
    (void)fv;
    value = sum_k * h;
    err = std::abs((sum_k - sum_g) * h);
    // QUADPACK-style sharpening of the raw difference
    if (err > 0.0) {
        const double scale = std::pow(200.0 * err / (std::abs(value) + err + 1e-300), 1.5);
        if (scale < 1.0) err = err * scale;
    }
}

struct Segment {
    double a, b, value, err;
    bool operator<(const Segment& o) const { return err < o.err; }
};

}  // namespace detail

// Adaptive Gauss-Kronrod integration of f over the finite interval [a, b].
// Bisects the interval with the largest error proxy until the accumulated
// error satisfies max(abs_tol, rel_tol*|integral|) or the interval budget is
// exhausted. Integrable endpoint singularities are fine (nodes are interior);
// callers soften hard singularities by substitution for speed.
template <typename F>
QuadratureResult integrate(const F& f, double a, double b,
                           double abs_tol = 1e-12, double rel_tol = 1e-12,
                           std::size_t max_intervals = 4000) {
    if (!(a < b)) throw std::invalid_argument("integrate: requires a < b");
    QuadratureResult res;
    std::priority_queue<detail::Segment> queue;
    detail::Segment s0{a, b, 0.0, 0.0};
    detail::gk15_apply(f, a, b, s0.value, s0.err);
    queue.push(s0);
    double total_value = s0.value;
    double total_err = s0.err;
    std::size_t n_seg = 1;

    while (n_seg < max_intervals) {
        if (total_err <= std::max(abs_tol, rel_tol * std::abs(total_value))) break;
        detail::Segment worst = queue.top();
        queue.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (mid <= worst.a || mid >= worst.b) {  // interval at floating-point resolution
            queue.push(worst);
            break;
        }
        detail::Segment left{worst.a, mid, 0.0, 0.0};
        detail::Segment right{mid, worst.b, 0.0, 0.0};
        detail::gk15_apply(f, left.a, left.b, left.value, left.err);
        detail::gk15_apply(f, right.a, right.b, right.value, right.err);
        total_value += left.value + right.value - worst.value;
        total_err += left.err + right.err - worst.err;
        queue.push(left);
        queue.push(right);
        ++n_seg;
    }

    res.value = total_value;
    res.error_estimate = total_err;
    res.intervals = n_seg;
    res.converged = total_err <= std::max(abs_tol, rel_tol * std::abs(total_value));
    return res;
}

// Same, but throws NumericalError when the tolerance was not met.
template <typename F>
double integrate_checked(const F& f, double a, double b,
                         double abs_tol = 1e-12, double rel_tol = 1e-12,
                         std::size_t max_intervals = 4000) {
    QuadratureResult r = integrate(f, a, b, abs_tol, rel_tol, max_intervals);
    if (!r.converged)
        throw NumericalError("quadrature did not converge: error estimate " +
                             std::to_string(r.error_estimate) + " after " +
                             std::to_string(r.intervals) + " intervals");
    return r.value;
}

}  // namespace fairvol
