#include "pfr/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pfr {

KernelCycleSample split_block_cycle(const KernelModel& model, CycleRng& rng,
                                    std::uint32_t n_max_blocks,
                                    const std::optional<KernelPoint>& start) {
    KernelCycleSample out;
    KernelPoint x = start ? *start : model.psi_sampler(rng);
    out.visits.emplace_back(x, 0u);
    double dv = 0.0; // b_m(v, y), reused below
    for (std::uint32_t k = 1;; ++k) {
        KernelPoint cur = x;
        out.tau = k;
        bool killed = false;
        for (int step = 0; step < model.m; ++step) {
            auto next = model.step_sampler(cur, rng);
            if (!next) {
                killed = true;
                break;
            }
            cur = std::move(*next);
        }
        if (killed) return out;
        dv = model.density_m(model.v, cur);
        double dx = model.density_m(x, cur);
        double coin = model.c1 * dv / dx;
        if (!(coin >= 0.0 && coin <= 1.0 + 1e-12))
            throw Error(ErrorKind::a4_violation,
                        "A4 violated: regeneration coin " +
                            std::to_string(coin) +
                            " outside [0, 1] at a block ending with density "
                            "ratio " +
                            std::to_string(dv / dx));
        if (rng.next_double() < coin) {
            out.survived = true;
            return out;
        }
        if (k >= n_max_blocks) {
            out.truncated = true;
            return out;
        }
        out.visits.emplace_back(cur, k);
        x = std::move(cur);
    }
}

namespace {

// SAA root of (1/N) sum e^{theta tau_i} I(survived_i) = 1 over block cycles
struct BlockSaa {
    double theta;
    double se_theta;
    std::uint64_t n_survived;
};

BlockSaa saa_blocks(const std::vector<KernelCycleSample>& samples,
                    double tol) {
    std::uint64_t surv = 0;
    for (const auto& s : samples) surv += s.survived ? 1 : 0;
    if (surv == 0)
        throw Error(ErrorKind::a1_fail,
                    "A1 unestimable: no surviving kernel cycles");
    double n = static_cast<double>(samples.size());
    auto h = [&](double theta) {
        double acc = 0.0;
        for (const auto& s : samples)
            if (s.survived) acc += std::exp(theta * s.tau);
        return acc / n;
    };
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
    double sum = 0.0, sumsq = 0.0, hp = 0.0;
    for (const auto& s : samples) {
        double v = s.survived ? std::exp(theta * s.tau) : 0.0;
        sum += v;
        sumsq += v * v;
        if (s.survived) hp += s.tau * std::exp(theta * s.tau);
    }
    hp /= n;
    double var = std::max(0.0, (sumsq - sum * sum / n) / std::max(1.0, n - 1));
    double se_h = std::sqrt(var / n);
    return {theta, se_h / hp, surv};
}

} // namespace

KernelEstimate estimate_kernel_pf(const KernelModel& model,
                                  std::uint64_t n_cycles, std::uint64_t seed,
                                  const std::vector<KernelPoint>& query_points,
                                  double tol, std::uint32_t n_max_blocks,
                                  std::uint64_t n_u_cycles) {
    if (n_cycles < 1)
        throw Error(ErrorKind::domain, "n_cycles must be at least 1");
    std::vector<KernelCycleSample> samples(n_cycles);
    std::uint64_t truncated = 0;
    for (std::uint64_t i = 0; i < n_cycles; ++i) {
        CycleRng rng(seed, i);
        samples[i] = split_block_cycle(model, rng, n_max_blocks);
        truncated += samples[i].truncated ? 1 : 0;
    }
    auto saa = saa_blocks(samples, tol);

    KernelEstimate out;
    out.theta_hat = saa.theta;
    out.lambda_star_B = std::exp(-saa.theta / model.m);
    out.theta_ci_halfwidth = 1.959963984540054 * saa.se_theta;
    // lambda = exp(-theta/m): |dlambda| = lambda/m |dtheta|
    out.ci_halfwidth = out.lambda_star_B / model.m * out.theta_ci_halfwidth;
    out.n_cycles = n_cycles;
    out.n_survived = saa.n_survived;
    out.truncated_fraction =
        static_cast<double>(truncated) / static_cast<double>(n_cycles);

    if (n_u_cycles == 0) n_u_cycles = std::max<std::uint64_t>(1, n_cycles / 10);
    out.u_at_points.reserve(query_points.size());
    for (std::size_t qi = 0; qi < query_points.size(); ++qi) {
        double sum = 0.0, sumsq = 0.0;
        std::uint64_t surv = 0;
        for (std::uint64_t i = 0; i < n_u_cycles; ++i) {
            CycleRng rng(seed + 1, qi * n_u_cycles + i);
            auto s = split_block_cycle(model, rng, n_max_blocks,
                                       query_points[qi]);
            double v = s.survived ? std::exp(saa.theta * s.tau) : 0.0;
            surv += s.survived ? 1 : 0;
            sum += v;
            sumsq += v * v;
        }
        McEstimate est;
        est.n_samples = n_u_cycles;
        est.n_survived = surv;
        double n = static_cast<double>(n_u_cycles);
        est.value = sum / n;
        double var =
            std::max(0.0, (sumsq - sum * sum / n) / std::max(1.0, n - 1));
        est.std_error = std::sqrt(var / n);
        out.u_at_points.push_back(std::move(est));
    }

    for (const auto& s : samples)
        for (const auto& [pt, j] : s.visits) {
            double w = std::exp(saa.theta * j) /
                       static_cast<double>(n_cycles);
            out.eta.atoms.emplace_back(pt, w);
            out.eta.total += w;
        }
    return out;
}

NonNegMatrix discretize_oracle(
    const std::function<double(double, double)>& density_1, double lo,
    double hi, int grid_size) {
    if (grid_size < 1)
        throw Error(ErrorKind::domain, "grid size must be at least 1");
    if (!(hi > lo)) throw Error(ErrorKind::domain, "empty box");
    double h = (hi - lo) / grid_size;
    std::vector<Triplet> trip;
    for (int i = 0; i < grid_size; ++i) {
        double x = lo + (i + 0.5) * h;
        double rs = 0.0;
        for (int j = 0; j < grid_size; ++j) {
            double y = lo + (j + 0.5) * h;
            double w = density_1(x, y) * h;
            rs += w;
            if (w > 0) trip.push_back({i, j, w});
        }
        if (rs > 1.0 + 1e-6)
            throw Error(ErrorKind::numeric,
                        "grid too coarse: quadrature row sum " +
                            std::to_string(rs) + " exceeds 1; refine");
    }
    return NonNegMatrix::from_triplets(grid_size, std::move(trip));
}

// --- uniform-kill kernel ------------------------------------------------

KernelModel make_uniform_kill_kernel(double kappa, int m) {
    if (!(kappa > 0.0 && kappa < 1.0))
        throw Error(ErrorKind::domain, "kappa must lie in (0, 1)");
    if (m < 1) throw Error(ErrorKind::domain, "m must be at least 1");
    double surv_m = std::pow(1.0 - kappa, m);
    KernelModel model;
    model.m = m;
    model.v = {0.5};
    model.c1 = 1.0; // b_m is x-independent
    model.c2 = 1.0;
    model.step_sampler = [kappa](const KernelPoint&, CycleRng& rng)
        -> std::optional<KernelPoint> {
        if (rng.next_double() < kappa) return std::nullopt;
        return KernelPoint{rng.next_double()};
    };
    model.density_m = [surv_m](const KernelPoint&, const KernelPoint&) {
        return surv_m;
    };
    model.psi_sampler = [](CycleRng& rng) {
        return KernelPoint{rng.next_double()};
    };
    return model;
}

double uniform_kill_one_step_density(double kappa, double, double) {
    return 1.0 - kappa;
}

// --- flagship Gaussian-mixture kernel -----------------------------------

namespace {

constexpr double kMu1 = 0.35, kSigma1 = 0.18;
constexpr double kMu2 = 0.72, kSigma2 = 0.15;

double norm_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double truncated_normal_pdf(double y, double mu, double sigma) {
    if (y < 0.0 || y > 1.0) return 0.0;
    double zc = norm_cdf((1.0 - mu) / sigma) - norm_cdf((0.0 - mu) / sigma);
    double t = (y - mu) / sigma;
    return std::exp(-0.5 * t * t) /
           (sigma * std::sqrt(2.0 * 3.141592653589793) * zc);
}

double mix_weight(double x) { return 0.3 + 0.4 * x; }   // in [0.3, 0.7]
double survival(double x) { return 0.9 - 0.1 * x; }     // in [0.8, 0.9]

double sample_truncated_normal(double mu, double sigma, CycleRng& rng) {
    for (;;) {
        double y = mu + sigma * rng.next_normal();
        if (y >= 0.0 && y <= 1.0) return y;
    }
}

} // namespace

double gaussian_mixture_one_step_density(double x, double y) {
    double w = mix_weight(x);
    return survival(x) * (w * truncated_normal_pdf(y, kMu1, kSigma1) +
                          (1.0 - w) * truncated_normal_pdf(y, kMu2, kSigma2));
}

KernelModel make_gaussian_mixture_kernel() {
    KernelModel model;
    model.m = 1;
    model.v = {0.0};
    // ratio b(x,.)/b(v,.) = [s(x)/s(v)] * mixture ratio; the mediant
    // inequality bounds the mixture ratio by the weight ratios, so these
    // closed forms never exceed the true inf / fall below the true sup:
    //   c1 = min_x s(x)/s(0) * min(w(x)/w(0), (1-w(x))/(1-w(0)))
    //   c2 = max_x s(x)/s(0) * max(w(x)/w(0), (1-w(x))/(1-w(0)))
    model.c1 = (0.8 / 0.9) * (0.3 / 0.7); // x = 1 end
    model.c2 = (0.8 / 0.9) * (0.7 / 0.3); // x = 1 end (s decays slower)
    model.step_sampler = [](const KernelPoint& x, CycleRng& rng)
        -> std::optional<KernelPoint> {
        if (rng.next_double() >= survival(x[0])) return std::nullopt;
        double w = mix_weight(x[0]);
        if (rng.next_double() < w)
            return KernelPoint{sample_truncated_normal(kMu1, kSigma1, rng)};
        return KernelPoint{sample_truncated_normal(kMu2, kSigma2, rng)};
    };
    model.density_m = [](const KernelPoint& x, const KernelPoint& y) {
        return gaussian_mixture_one_step_density(x[0], y[0]);
    };
    // psi proportional to b_1(v, .): v = 0 has weight w(0) = 0.3
    model.psi_sampler = [](CycleRng& rng) {
        if (rng.next_double() < mix_weight(0.0))
            return KernelPoint{sample_truncated_normal(kMu1, kSigma1, rng)};
        return KernelPoint{sample_truncated_normal(kMu2, kSigma2, rng)};
    };
    return model;
}

} // namespace pfr
