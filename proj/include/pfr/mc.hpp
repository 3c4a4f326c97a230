#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "pfr/matrix.hpp"
#include "pfr/rng.hpp"

namespace pfr {

// One simulated regenerative cycle. visits records (state, time j) for every
// j strictly before the cycle's end (regeneration, killing, or the cap), so
// the eta estimator can evaluate I(T > j) per visit.
struct RegenCycleSample {
    std::uint32_t tau = 0; // steps taken; the cycle length when survived
    bool survived = false; // regenerated before killing and before the cap
    bool truncated = false;
    std::vector<std::pair<int, std::uint32_t>> visits;
};

struct McEstimate {
    double value = 0.0;
    double std_error = 0.0;
    std::uint64_t n_samples = 0;
    std::uint64_t n_survived = 0;
};

struct McConfig {
    std::uint64_t seed = 0;
    std::uint64_t n_cycles = 100000;
    std::uint32_t n_max = 1000000;
    std::optional<int> z_override;
    double ci_level = 0.95;
    int threads = 1;
};

// Per-row cumulative tables for O(log deg) transition draws on the
// Delta-augmented chain.
class ChainSampler {
  public:
    explicit ChainSampler(const AugmentedChain& chain);
    // next state, or -1 for Delta
    int step(int x, CycleRng& rng) const;
    int size() const { return n_; }

  private:
    int n_;
    std::vector<int> row_ptr_;
    std::vector<int> cols_;
    std::vector<double> cum_; // cumulative weights within each row
};

RegenCycleSample sample_cycle(const ChainSampler& sampler, int z,
                              CycleRng& rng, std::uint32_t n_max,
                              std::optional<int> start = {});

// Deterministic pool of cycles: cycle i uses stream (seed, i) regardless of
// thread count.
std::vector<RegenCycleSample> sample_cycles(const ChainSampler& sampler,
                                            int z, std::uint64_t seed,
                                            std::uint64_t n,
                                            std::uint32_t n_max,
                                            int threads = 1,
                                            std::optional<int> start = {},
                                            std::uint64_t stream_offset = 0);

// Sample mean and standard error of e^{theta tau} I(survived); killed and
// truncated cycles contribute exactly 0.
McEstimate empirical_h(std::span<const RegenCycleSample> samples,
                       double theta);

struct SaaSolution {
    double theta_hat;
    double ci_halfwidth;   // on theta, delta method at the stated level
    double h_prime;        // sample mean of tau e^{theta tau} I(survived)
    std::uint64_t n_survived;
};

SaaSolution saa_solve_theta(std::span<const RegenCycleSample> samples,
                            double tol = 1e-12, double ci_level = 0.95);

McEstimate estimate_u(const ChainSampler& sampler, int z, int x,
                      double theta_hat, std::uint64_t n,
                      std::uint64_t seed, std::uint32_t n_max,
                      int threads = 1);

std::vector<McEstimate> estimate_eta(std::span<const RegenCycleSample> samples,
                                     double theta_hat, int n_states);

} // namespace pfr
