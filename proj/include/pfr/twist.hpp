#pragma once

#include <vector>

#include "pfr/exact.hpp"
#include "pfr/matrix.hpp"

namespace pfr {

struct TwistedChain {
    NonNegMatrix P_star;          // stochastic
    std::vector<double> pi_star;  // stationary law, sums to 1
    double normalizer;            // <u*, eta*>
};

// P*(x,y) = B(x,y) u*(y) / (lambda* u*(x)); pi* proportional to u* eta*
// entrywise.
TwistedChain doob_transform(const NonNegMatrix& B, const PFSolution& sol);

// ||pi* P* - pi*||_inf
double verify_stationarity(const TwistedChain& tc);

// For n = 1..n_terms, max-entry deviation of the period-averaged scaled
// power (1/p) sum_j lambda*^{-pn-j} B^{pn+j} from u* eta^T / <u*, eta*>.
// Powers are accumulated with per-step rescaling by lambda*^{-1}.
std::vector<double> verify_power_limit(const NonNegMatrix& B,
                                       const PFSolution& sol, int period,
                                       int n_terms);

// Randomized stand-in for Theorem 2's uniqueness: random positive starts,
// iterate v <- Bv/lambda* with period-p averaging, require the limit
// direction to match u* (cosine >= 1 - 1e-8) in every trial.
bool uniqueness_probe(const NonNegMatrix& B, const PFSolution& sol,
                      int trials, std::uint64_t seed = 0);

} // namespace pfr
