#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pfr/exact.hpp"
#include "pfr/matrix.hpp"
#include "pfr/mc.hpp"

namespace pfr {

// Witness for B^m(x, .) >= delta psi(.): ratios B^m(x,y)/B^m(v,y) lie in
// [c1, c2] over supp B^m(v, .), delta = c1 * sum_w B^m(v, w), and
// B_tilde = B^m - delta psi is entrywise nonnegative.
struct MinorizationCertificate {
    int v = 0;
    int m = 1;
    double c1 = 0.0;
    double c2 = 0.0;
    double delta = 0.0;
    std::vector<double> psi;
    NonNegMatrix Bm;     // B^m (== B when m = 1)
    NonNegMatrix Btilde; // B^m - delta psi, dust below 1e-14 clamped to 0
};

struct CertifyResult {
    std::optional<MinorizationCertificate> cert;
    std::string failure; // non-empty when certification failed
};

CertifyResult certify_A3(const NonNegMatrix& B, int v);

struct A3PrimeResult {
    std::optional<MinorizationCertificate> cert;
    // per-m failure diagnostics when exhausted
    std::vector<std::string> diagnostics;
};

// Tries m = 1..m_max; for the first admissible m picks v maximizing c1/c2.
A3PrimeResult certify_A3prime(const NonNegMatrix& B, int m_max);

// One randomized-regeneration cycle (m = 1 split): at each step regenerate
// from psi w.p. delta (ending the cycle), move by B_tilde, or die. The
// psi-drawn landing state of a regeneration is recorded in final_state so
// marginal-law tests can reconstruct one-step frequencies.
struct SplitCycleSample {
    RegenCycleSample cycle;
    int final_state = -1; // state entered on the cycle-ending transition
};

SplitCycleSample split_cycle(const MinorizationCertificate& cert,
                             const AugmentedChain& chain, CycleRng& rng,
                             std::uint32_t n_max,
                             std::optional<int> start = {});

// Theorem 5's bound theta2 >= theta1 - log(1 - c1/c2); +inf when c1 = c2.
double theta_gap_bound(const MinorizationCertificate& cert, double theta1);

enum class SplitEngine { exact, mc };

struct SplitParams {
    std::uint64_t seed = 0;
    std::uint64_t n_cycles = 100000;
    std::uint32_t n_max = 1000000;
    double tol = 1e-12;
    int threads = 1;
    std::optional<int> z_norm; // state at which u*, eta* are normalized
};

struct SplitSolution {
    PFSolution sol;            // B-eigenvalue lambda*^{1/m} and eigenvectors
    double theta_block = 0.0;  // root of E_psi e^{theta tau} I(T > tau)
    double ci_halfwidth = 0.0; // MC engine only, on theta_block
    std::uint64_t n_survived = 0;
};

SplitSolution solve_via_split(const NonNegMatrix& B,
                              const MinorizationCertificate& cert,
                              SplitEngine engine, const SplitParams& params);

} // namespace pfr
