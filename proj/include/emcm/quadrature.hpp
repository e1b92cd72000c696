// SPDX-License-Identifier: Apache-2.0
//
// emcm - electromagnetically consistent communication models
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <span>
#include <vector>

namespace emcm::quad {

namespace detail {

// Gauss-Kronrod 7/15 nodes on [-1, 1] (non-negative half, descending).
inline constexpr std::array<double, 8> kNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5, 7).
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

inline double magnitude(double v) { return std::abs(v); }
inline double magnitude(const std::complex<double>& v) { return std::abs(v); }

template <class T, class F>
void gk15(F& f, double a, double b, T& kronrod, double& error) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    T gauss{};
    kronrod = T{};
    const T fc = f(center);
    kronrod += kKronrodWeights[7] * fc;
    gauss += kGaussWeights[3] * fc;
    for (int i = 0; i < 7; ++i) {
        const double dx = half * kNodes[i];
        const T sum = f(center - dx) + f(center + dx);
        kronrod += kKronrodWeights[i] * sum;
        if (i % 2 == 1) gauss += kGaussWeights[i / 2] * sum;
    }
    kronrod *= half;
    gauss *= half;
    error = magnitude(kronrod - gauss);
}

template <class T, class F>
T adapt(F& f, double a, double b, T whole, double whole_err, double abs_tol, int depth, int& evals) {
    if (whole_err <= abs_tol || depth <= 0 || b - a <= 1e-15 * (std::abs(a) + std::abs(b))) return whole;
    const double mid = 0.5 * (a + b);
    T left{}, right{};
    double el = 0.0, er = 0.0;
    gk15<T>(f, a, mid, left, el);
    gk15<T>(f, mid, b, right, er);
    evals += 30;
    const double half_tol = 0.5 * abs_tol;
    return adapt<T>(f, a, mid, left, el, half_tol, depth - 1, evals) +
           adapt<T>(f, mid, b, right, er, half_tol, depth - 1, evals);
}

}  // namespace detail

struct Options {
    double rel_tol = 1e-8;
    double abs_tol = 1e-14;
    int max_depth = 40;
};

/// Adaptive Gauss-Kronrod (7/15) integration of f over [a, b], split first at
/// every breakpoint inside the interval. The error target is
/// max(abs_tol, rel_tol * |coarse estimate|), distributed over subintervals.
template <class T, class F>
T integrate(F&& f, double a, double b, std::span<const double> breakpoints = {}, Options opt = {}) {
    std::vector<double> cuts{a};
    for (double p : breakpoints) {
        if (p > a && p < b) cuts.push_back(p);
    }
    cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    std::vector<T> pieces(cuts.size() - 1);
    std::vector<double> errs(cuts.size() - 1);
    double scale = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        detail::gk15<T>(f, cuts[i], cuts[i + 1], pieces[i], errs[i]);
        scale += detail::magnitude(pieces[i]);
    }
    const double target = std::max(opt.abs_tol, opt.rel_tol * scale);
    T total{};
    int evals = 0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double share = target * (cuts[i + 1] - cuts[i]) / (b - a);
        total += detail::adapt<T>(f, cuts[i], cuts[i + 1], pieces[i], errs[i], share, opt.max_depth, evals);
    }
    return total;
}

}  // namespace emcm::quad
