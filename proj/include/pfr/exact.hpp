#pragma once

#include <optional>
#include <vector>

#include "pfr/matrix.hpp"

namespace pfr {

// Cycle decomposition of B around a regeneration state z: excursions from z
// stay in S \ {z} and are governed by the taboo matrix Q.
struct TabooDecomposition {
    int z = 0;
    int n = 0;             // size of the full matrix
    NonNegMatrix Q;        // (n-1) x (n-1), states != z reindexed in order
    std::vector<double> r; // B(z, y), y != z
    std::vector<double> c; // B(x, z), x != z
    double b_zz = 0.0;
    double rho_q = 0.0;            // spectral radius of Q (0 when empty)
    std::vector<int> rest_states;  // original indices of Q's states
};

struct PFSolution {
    double theta = 0.0;
    double lambda_star = 1.0; // exp(-theta)
    int z = 0;
    std::vector<double> u_star;   // u_star[z] == 1
    std::vector<double> eta_star; // eta_star[z] == 1
    double h_residual = 0.0;      // |h(theta) - 1| at the accepted root
    double eig_residual_u = 0.0;  // ||B u - lambda u||_inf / ||u||_inf
    double eig_residual_eta = 0.0;
};

struct Theorem3Gap {
    double theta1; // -log rho(B)
    double theta2; // -log rho(Q); +inf when the taboo matrix vanishes
    bool satisfied;
};

// Default z: median index among the states of maximal row sum (middle of the
// chain keeps eigenvector dynamic range inside double limits on long
// near-critical chains).
int default_regeneration_state(const NonNegMatrix& B);

TabooDecomposition taboo_decompose(const NonNegMatrix& B, int z);

// h(theta) = E_z e^{theta tau} I(T > tau) = s b_zz + s^2 r (I - sQ)^{-1} c
// with s = e^theta. nullopt signals divergence (s at or beyond the taboo
// radius). When h_prime is non-null it receives
// h'(theta) = E_z tau e^{theta tau} I(T > tau).
std::optional<double> cycle_transform_h(const TabooDecomposition& td,
                                        double theta,
                                        double* h_prime = nullptr);

struct ThetaSolution {
    double theta;
    double lambda_star;
    double h_residual;
    double h_prime; // A2 value E_z tau e^{theta tau} I(T > tau)
};

ThetaSolution solve_theta(const TabooDecomposition& td, double tol = 1e-12);

PFSolution eigenvectors(const NonNegMatrix& B, const TabooDecomposition& td,
                        double theta);

// Convenience: decompose + root-find + eigenvectors.
PFSolution solve_exact(const NonNegMatrix& B, std::optional<int> z = {},
                       double tol = 1e-12);

Theorem3Gap check_theorem3_gap(const NonNegMatrix& B,
                               const TabooDecomposition& td);

// Runs solve_theta at every z; returns the maximal pairwise |theta(z) -
// theta(z')| (Proposition 1 says it should vanish).
double solidarity_scan(const NonNegMatrix& B, double tol = 1e-12);

} // namespace pfr
