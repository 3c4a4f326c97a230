#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "pfr/matrix.hpp"
#include "pfr/mc.hpp"
#include "pfr/rng.hpp"

namespace pfr {

// Opaque continuous-state point; the library never inspects dimensionality.
using KernelPoint = std::vector<double>;

// User-supplied killed kernel with a certified m-step density. Callbacks
// must be pure (same input, same value) and callable concurrently; all
// randomness flows through the supplied stream.
struct KernelModel {
    // one step of the killed chain; nullopt = jumped to Delta
    std::function<std::optional<KernelPoint>(const KernelPoint&, CycleRng&)>
        step_sampler;
    // m-step density b_m(x, y) w.r.t. the reference measure
    std::function<double(const KernelPoint&, const KernelPoint&)> density_m;
    // draw from psi(dy) proportional to b_m(v, y) nu(dy)
    std::function<KernelPoint(CycleRng&)> psi_sampler;
    int m = 1;
    KernelPoint v;
    double c1 = 0.0; // certified lower ratio bound (any value <= the true inf)
    double c2 = 0.0; // certified upper ratio bound
};

struct EmpiricalMeasure {
    std::vector<std::pair<KernelPoint, double>> atoms; // (state, weight >= 0)
    double total = 0.0;
};

// Block cycle with continuous occupation: visits hold (X_{jm}, j).
struct KernelCycleSample {
    std::uint32_t tau = 0; // block count
    bool survived = false;
    bool truncated = false;
    std::vector<std::pair<KernelPoint, std::uint32_t>> visits;
};

// One split-chain cycle: X_0 ~ psi (or `start`), blocks of m one-step moves,
// retrospective regeneration coin c1 b_m(v, y) / b_m(x0, y) at each block
// end. Coin outside [0, 1] is an A4 violation and throws.
KernelCycleSample split_block_cycle(const KernelModel& model, CycleRng& rng,
                                    std::uint32_t n_max_blocks,
                                    const std::optional<KernelPoint>& start = {});

struct KernelEstimate {
    double theta_hat = 0.0;      // block-level root
    double lambda_star_B = 1.0;  // e^{-theta_hat / m}
    double ci_halfwidth = 0.0;   // on lambda_star_B, delta method
    double theta_ci_halfwidth = 0.0;
    std::vector<McEstimate> u_at_points;
    EmpiricalMeasure eta;
    std::uint64_t n_cycles = 0;
    std::uint64_t n_survived = 0;
    double truncated_fraction = 0.0;
};

KernelEstimate estimate_kernel_pf(const KernelModel& model,
                                  std::uint64_t n_cycles, std::uint64_t seed,
                                  const std::vector<KernelPoint>& query_points,
                                  double tol = 1e-12,
                                  std::uint32_t n_max_blocks = 1000000,
                                  std::uint64_t n_u_cycles = 0);

// Grid-midpoint discretization of a 1-D kernel on [lo, hi] into a finite
// sub-stochastic matrix (verification oracle; needs the ONE-step density).
NonNegMatrix discretize_oracle(
    const std::function<double(double, double)>& density_1, double lo,
    double hi, int grid_size);

// Built-in kernels -----------------------------------------------------

// Uniform redraw on [0,1] with per-step kill probability kappa; exactly
// representable on any grid, lambda*_B = 1 - kappa.
KernelModel make_uniform_kill_kernel(double kappa, int m);
double uniform_kill_one_step_density(double kappa, double x, double y);

// Flagship: two-component truncated-Gaussian mixture on [0,1] with mildly
// state-dependent weights and killing; certified c1/c2 are closed-form
// bounds (mediant inequality), guaranteed conservative.
KernelModel make_gaussian_mixture_kernel();
double gaussian_mixture_one_step_density(double x, double y);

} // namespace pfr
