#include "pfr/twist.hpp"

#include <cmath>

#include "pfr/rng.hpp"

namespace pfr {

TwistedChain doob_transform(const NonNegMatrix& B, const PFSolution& sol) {
    if (sol.eig_residual_u > 1e-8 || sol.eig_residual_eta > 1e-8)
        throw Error(ErrorKind::domain,
                    "eigenpair residuals too large for the Doob transform");
    int n = B.size();
    std::vector<Triplet> trip;
    for (int i = 0; i < n; ++i) {
        auto cols = B.row_cols(i);
        auto vals = B.row_vals(i);
        for (std::size_t k = 0; k < cols.size(); ++k)
            trip.push_back({i, cols[k],
                            vals[k] * sol.u_star[cols[k]] /
                                (sol.lambda_star * sol.u_star[i])});
    }
    TwistedChain tc;
    tc.P_star = NonNegMatrix::from_triplets(n, std::move(trip));
    for (int i = 0; i < n; ++i)
        if (std::abs(tc.P_star.row_sums()[i] - 1.0) > 1e-8)
            throw Error(ErrorKind::numeric,
                        "twisted row " + std::to_string(i) +
                            " sums to " +
                            std::to_string(tc.P_star.row_sums()[i]) +
                            "; eigenpair is inconsistent");
    tc.normalizer = 0.0;
    tc.pi_star.assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
        tc.pi_star[i] = sol.u_star[i] * sol.eta_star[i];
        tc.normalizer += tc.pi_star[i];
    }
    for (auto& p : tc.pi_star) p /= tc.normalizer;
    return tc;
}

double verify_stationarity(const TwistedChain& tc) {
    auto piP = tc.P_star.apply_left(tc.pi_star);
    double res = 0.0;
    for (std::size_t i = 0; i < piP.size(); ++i)
        res = std::max(res, std::abs(piP[i] - tc.pi_star[i]));
    return res;
}

namespace {

// dense row-major multiply: C = A * M where M = B / lambda (scaled per step
// so powers of a sub-unit-radius matrix do not underflow)
std::vector<double> step_scaled(const std::vector<double>& A,
                                const NonNegMatrix& B, double inv_lambda) {
    int n = B.size();
    std::vector<double> C(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < n; ++k) {
            double a = A[static_cast<std::size_t>(i) * n + k];
            if (a == 0.0) continue;
            auto cols = B.row_cols(k);
            auto vals = B.row_vals(k);
            for (std::size_t t = 0; t < cols.size(); ++t)
                C[static_cast<std::size_t>(i) * n + cols[t]] +=
                    a * vals[t] * inv_lambda;
        }
    }
    return C;
}

} // namespace

std::vector<double> verify_power_limit(const NonNegMatrix& B,
                                       const PFSolution& sol, int period,
                                       int n_terms) {
    if (n_terms < 1)
        throw Error(ErrorKind::domain, "n_terms must be at least 1");
    int n = B.size();
    int p = period;
    double inv_lambda = 1.0 / sol.lambda_star;

    double norm = 0.0;
    for (int i = 0; i < n; ++i) norm += sol.u_star[i] * sol.eta_star[i];
    std::vector<double> limit(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            limit[static_cast<std::size_t>(i) * n + j] =
                sol.u_star[i] * sol.eta_star[j] / norm;
    std::vector<double> errors;
    errors.reserve(n_terms);

    // C holds lambda^{-k} B^k; advance k one step at a time
    std::vector<double> C(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) C[static_cast<std::size_t>(i) * n + i] = 1.0;
    int k = 0;
    for (int nn = 1; nn <= n_terms; ++nn) {
        while (k < p * nn) {
            C = step_scaled(C, B, inv_lambda);
            ++k;
        }
        std::vector<double> avg(static_cast<std::size_t>(n) * n, 0.0);
        std::vector<double> Cj = C;
        for (int j = 0; j < p; ++j) {
            if (j > 0) Cj = step_scaled(Cj, B, inv_lambda);
            for (std::size_t t = 0; t < avg.size(); ++t) avg[t] += Cj[t] / p;
        }
        double err = 0.0;
        for (std::size_t t = 0; t < avg.size(); ++t)
            err = std::max(err, std::abs(avg[t] - limit[t]));
        errors.push_back(err);
    }
    return errors;
}

bool uniqueness_probe(const NonNegMatrix& B, const PFSolution& sol,
                      int trials, std::uint64_t seed) {
    int n = B.size();
    auto ga = analyze_graph(B);
    int p = ga.period;
    double inv_lambda = 1.0 / sol.lambda_star;
    for (int trial = 0; trial < trials; ++trial) {
        CycleRng rng(seed, static_cast<std::uint64_t>(trial));
        std::vector<double> v(n);
        for (auto& x : v) x = 0.05 + rng.next_double();
        std::vector<double> avg_prev(n, 0.0);
        bool ok = false;
        for (int it = 0; it < 100000; ++it) {
            // period-p Cesaro average of consecutive iterates
            std::vector<double> avg(n, 0.0);
            std::vector<double> w = v;
            for (int j = 0; j < p; ++j) {
                if (j > 0) {
                    w = B.apply(w);
                    for (auto& x : w) x *= inv_lambda;
                }
                for (int i = 0; i < n; ++i) avg[i] += w[i] / p;
            }
            double norm = 0.0;
            for (double x : avg) norm = std::max(norm, std::abs(x));
            for (auto& x : avg) x /= norm;
            double diff = 0.0;
            for (int i = 0; i < n; ++i)
                diff = std::max(diff, std::abs(avg[i] - avg_prev[i]));
            avg_prev = avg;
            if (it > 2 && diff < 1e-13) {
                // cosine similarity against u*
                double dot = 0.0, na = 0.0, nu = 0.0;
                for (int i = 0; i < n; ++i) {
                    dot += avg[i] * sol.u_star[i];
                    na += avg[i] * avg[i];
                    nu += sol.u_star[i] * sol.u_star[i];
                }
                ok = dot / std::sqrt(na * nu) >= 1.0 - 1e-8;
                break;
            }
            v = B.apply(v);
            for (auto& x : v) x *= inv_lambda;
            double norm2 = 0.0;
            for (double x : v) norm2 = std::max(norm2, std::abs(x));
            for (auto& x : v) x /= norm2;
        }
        if (!ok) return false;
    }
    return true;
}

} // namespace pfr
