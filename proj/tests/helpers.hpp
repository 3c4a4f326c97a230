#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "pfr/matrix.hpp"
#include "pfr/rng.hpp"

namespace testutil {

inline pfr::NonNegMatrix dense(int n, std::vector<double> rows) {
    return pfr::NonNegMatrix::from_dense(n, rows);
}

// the hand-solvable 2x2 used across the suite: lambda* = 0.5,
// u* = (1, 0.75), eta* = (1, 1)
inline pfr::NonNegMatrix asym2() {
    return dense(2, {0.2, 0.4, 0.3, 0.1});
}

// random irreducible sub-stochastic matrix: a guaranteed ring plus random
// extra edges, rows scaled to random sums <= 1. With ring_only the support
// is a pure n-cycle (period n).
inline pfr::NonNegMatrix random_substochastic(int n, pfr::CycleRng& rng,
                                              bool ring_only = false) {
    std::vector<double> a(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) a[i * n + (i + 1) % n] = 0.5 + rng.next_double();
    if (!ring_only) {
        int extras = 1 + static_cast<int>(rng.next_below(2 * n));
        for (int e = 0; e < extras; ++e) {
            int i = static_cast<int>(rng.next_below(n));
            int j = static_cast<int>(rng.next_below(n));
            a[i * n + j] = 0.1 + rng.next_double();
        }
    }
    for (int i = 0; i < n; ++i) {
        double rs = 0.0;
        for (int j = 0; j < n; ++j) rs += a[i * n + j];
        double target = 0.3 + 0.65 * rng.next_double(); // row sum in (0.3, 0.95)
        for (int j = 0; j < n; ++j) a[i * n + j] *= target / rs;
    }
    return pfr::NonNegMatrix::from_dense(n, a);
}

inline double cosine(const std::vector<double>& a,
                     const std::vector<double>& b) {
    double ab = 0, aa = 0, bb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ab += a[i] * b[i];
        aa += a[i] * a[i];
        bb += b[i] * b[i];
    }
    return ab / std::sqrt(aa * bb);
}

// dense shifted power iteration, independent of the library's sparse path;
// returns the spectral radius and fills the dominant direction
inline double power_oracle(const pfr::NonNegMatrix& B,
                           std::vector<double>* vec = nullptr,
                           long max_iter = 2000000) {
    int n = B.size();
    auto a = B.to_dense();
    std::vector<double> x(n, 1.0), y(n);
    double lo = 0, hi = 0;
    for (long it = 0; it < max_iter; ++it) {
        lo = 1e300;
        hi = 0;
        double norm = 0;
        for (int i = 0; i < n; ++i) {
            double s = x[i];
            for (int j = 0; j < n; ++j) s += a[i * n + j] * x[j];
            y[i] = s;
            double ratio = s / x[i];
            lo = std::min(lo, ratio);
            hi = std::max(hi, ratio);
            norm = std::max(norm, s);
        }
        for (int i = 0; i < n; ++i) x[i] = y[i] / norm;
        if (hi - lo <= 1e-12 * hi) break;
    }
    if (vec) *vec = x;
    return 0.5 * (lo + hi) - 1.0;
}

} // namespace testutil
