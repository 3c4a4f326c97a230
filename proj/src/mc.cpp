#include "pfr/mc.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace pfr {

namespace {

// two-sided normal quantile for the usual CI levels; falls back to a
// rational approximation for other levels
double normal_quantile_two_sided(double level) {
    if (std::abs(level - 0.95) < 1e-12) return 1.959963984540054;
    if (std::abs(level - 0.99) < 1e-12) return 2.5758293035489004;
    if (std::abs(level - 0.90) < 1e-12) return 1.6448536269514722;
    // Acklam-style approximation at p = (1 + level) / 2
    double p = (1.0 + level) / 2.0;
    // central region coefficients
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    double q = p - 0.5;
    double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r +
            a[5]) *
           q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r +
            1.0);
}

} // namespace

ChainSampler::ChainSampler(const AugmentedChain& chain)
    : n_(chain.B.size()) {
    row_ptr_.assign(n_ + 1, 0);
    for (int i = 0; i < n_; ++i) {
        auto cols = chain.B.row_cols(i);
        auto vals = chain.B.row_vals(i);
        row_ptr_[i + 1] = row_ptr_[i] + static_cast<int>(cols.size());
        double acc = 0.0;
        for (std::size_t k = 0; k < cols.size(); ++k) {
            acc += vals[k];
            cols_.push_back(cols[k]);
            cum_.push_back(acc);
        }
    }
}

int ChainSampler::step(int x, CycleRng& rng) const {
    double u = rng.next_double();
    int lo = row_ptr_[x], hi = row_ptr_[x + 1];
    if (lo == hi || u >= cum_[hi - 1]) return -1; // Delta
    auto it = std::upper_bound(cum_.begin() + lo, cum_.begin() + hi, u);
    return cols_[it - cum_.begin()];
}

RegenCycleSample sample_cycle(const ChainSampler& sampler, int z,
                              CycleRng& rng, std::uint32_t n_max,
                              std::optional<int> start) {
    RegenCycleSample out;
    int x = start.value_or(z);
    out.visits.emplace_back(x, 0u);
    for (std::uint32_t t = 1;; ++t) {
        int next = sampler.step(x, rng);
        out.tau = t;
        if (next < 0) return out; // absorbed at Delta
        if (next == z) {
            out.survived = true;
            return out;
        }
        if (t >= n_max) {
            out.truncated = true; // counted as not survived
            return out;
        }
        out.visits.emplace_back(next, t);
        x = next;
    }
}

std::vector<RegenCycleSample> sample_cycles(const ChainSampler& sampler,
                                            int z, std::uint64_t seed,
                                            std::uint64_t n,
                                            std::uint32_t n_max, int threads,
                                            std::optional<int> start,
                                            std::uint64_t stream_offset) {
    std::vector<RegenCycleSample> out(n);
    auto work = [&](std::uint64_t lo, std::uint64_t hi) {
        for (std::uint64_t i = lo; i < hi; ++i) {
            CycleRng rng(seed, stream_offset + i);
            out[i] = sample_cycle(sampler, z, rng, n_max, start);
        }
    };
    if (threads <= 1 || n < 1024) {
        work(0, n);
    } else {
        std::vector<std::thread> pool;
        std::uint64_t chunk = (n + threads - 1) / threads;
        for (int t = 0; t < threads; ++t) {
            std::uint64_t lo = t * chunk;
            if (lo >= n) break;
            pool.emplace_back(work, lo, std::min(n, lo + chunk));
        }
        for (auto& th : pool) th.join();
    }
    return out;
}

McEstimate empirical_h(std::span<const RegenCycleSample> samples,
                       double theta) {
    McEstimate est;
    est.n_samples = samples.size();
    double sum = 0.0, sumsq = 0.0;
    for (const auto& s : samples) {
        double v = s.survived ? std::exp(theta * s.tau) : 0.0;
        if (s.survived) ++est.n_survived;
        sum += v;
        sumsq += v * v;
    }
    double n = static_cast<double>(samples.size());
    est.value = sum / n;
    double var = std::max(0.0, (sumsq - sum * sum / n) / std::max(1.0, n - 1));
    est.std_error = std::sqrt(var / n);
    return est;
}

SaaSolution saa_solve_theta(std::span<const RegenCycleSample> samples,
                            double tol, double ci_level) {
    std::uint64_t surv = 0;
    for (const auto& s : samples) surv += s.survived ? 1 : 0;
    if (surv == 0)
        throw Error(ErrorKind::a1_fail,
                    "A1 unestimable: no surviving cycles in the sample");

    auto h = [&](double theta) { return empirical_h(samples, theta).value; };
    // empirical h is continuous, strictly increasing, 0 at -inf, +inf at +inf
    double lo = 0.0, step = 1.0;
    while (h(lo) >= 1.0) {
        lo -= step;
        step *= 2.0;
    }
    double hi = lo + step;
    while (h(hi) < 1.0) hi = lo + 2.0 * (hi - lo);
    double theta = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        theta = 0.5 * (lo + hi);
        double v = h(theta);
        if (std::abs(v - 1.0) <= tol ||
            hi - lo <= 1e-15 * std::max(1.0, std::abs(theta)))
            break;
        (v < 1.0 ? lo : hi) = theta;
    }

    // delta method: se(theta) = se(h at root) / h'(root)
    auto est = empirical_h(samples, theta);
    double hp = 0.0;
    for (const auto& s : samples)
        if (s.survived) hp += s.tau * std::exp(theta * s.tau);
    hp /= static_cast<double>(samples.size());
    double zq = normal_quantile_two_sided(ci_level);
    return {theta, zq * est.std_error / hp, hp, surv};
}

McEstimate estimate_u(const ChainSampler& sampler, int z, int x,
                      double theta_hat, std::uint64_t n, std::uint64_t seed,
                      std::uint32_t n_max, int threads) {
    auto samples = sample_cycles(sampler, z, seed, n, n_max, threads, x);
    return empirical_h(samples, theta_hat);
}

std::vector<McEstimate> estimate_eta(std::span<const RegenCycleSample> samples,
                                     double theta_hat, int n_states) {
    std::vector<double> sum(n_states, 0.0), sumsq(n_states, 0.0);
    std::vector<double> per_cycle(n_states, 0.0);
    std::vector<int> touched;
    for (const auto& s : samples) {
        touched.clear();
        // each recorded visit has T > j by construction
        for (auto [y, j] : s.visits) {
            if (per_cycle[y] == 0.0) touched.push_back(y);
            per_cycle[y] += std::exp(theta_hat * j);
        }
        for (int y : touched) {
            sum[y] += per_cycle[y];
            sumsq[y] += per_cycle[y] * per_cycle[y];
            per_cycle[y] = 0.0;
        }
    }
    double n = static_cast<double>(samples.size());
    std::vector<McEstimate> out(n_states);
    for (int y = 0; y < n_states; ++y) {
        out[y].n_samples = samples.size();
        out[y].value = sum[y] / n;
        double var = std::max(
            0.0, (sumsq[y] - sum[y] * sum[y] / n) / std::max(1.0, n - 1));
        out[y].std_error = std::sqrt(var / n);
    }
    return out;
}

} // namespace pfr
