#pragma once

#include <utility>
#include <vector>

#include "pfr/matrix.hpp"

namespace pfr {

// Slotted-queue birth-death chain killed at 0, truncated to states 1..L.
struct BirthDeathSpec {
    double p;   // up probability, in (0, 1)
    int L;      // truncation level, >= 2
};

enum class UpperBoundary {
    killed,     // row L keeps only the down-step; up-step mass is lost
    reflecting, // up-step becomes a self-loop at L (breaks period 2)
};

NonNegMatrix bd_matrix(const BirthDeathSpec& spec,
                       UpperBoundary boundary = UpperBoundary::killed);

// critical eigenvalue 2 sqrt(p q) of the infinite chain
double closed_form_lambda(double p);

// critical eigenvectors u(x) = x (q/p)^{x/2}, eta(x) = x (p/q)^{x/2}, x >= 1
double closed_form_u(double p, int x);
double closed_form_eta(double p, int x);

// roots of p z^2 - lambda z + q = 0; requires lambda >= 2 sqrt(pq)
std::pair<double, double> quad_roots(double p, double lambda);

// supercritical positive eigenvector u(x) = a z1^x + z2^x for
// lambda > 2 sqrt(pq)
double supercritical_u(double p, double lambda, int x);

// P_1(T_0 = 2n+1) = C(2n+1, n+1) p^n q^{n+1} / (2n+1), via log-gamma
double first_passage_pmf(double p, long n);

struct ConvergenceProbe {
    std::vector<double> partial_sums; // S_N = sum_{n<=N} lambda^{-n} B^n(x,x)
    double tail_ratio;                // increment ratio averaged on the tail
};

// Numerical illustration of the convergence-parameter dichotomy on the
// truncation: divergence signature (tail ratio near 1) below 2 sqrt(pq),
// saturation above. Not a proof.
ConvergenceProbe convergence_param_probe(double p, double lambda, int L,
                                         int N, int x = 0);

} // namespace pfr
