#include "pfr/exact.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

namespace pfr {

namespace {

using SpMat = Eigen::SparseMatrix<double>;

// I - sQ as an Eigen sparse matrix (Q reindexed, possibly empty)
SpMat resolvent_matrix(const NonNegMatrix& Q, double s, bool transpose) {
    int m = Q.size();
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(Q.nnz() + m);
    for (int i = 0; i < m; ++i) trip.emplace_back(i, i, 1.0);
    for (int i = 0; i < m; ++i) {
        auto cols = Q.row_cols(i);
        auto vals = Q.row_vals(i);
        for (std::size_t k = 0; k < cols.size(); ++k) {
            int r = transpose ? cols[k] : i;
            int c = transpose ? i : cols[k];
            trip.emplace_back(r, c, -s * vals[k]);
        }
    }
    SpMat A(m, m);
    A.setFromTriplets(trip.begin(), trip.end());
    return A;
}

// Solves (I - sQ) w = rhs (or the transposed system); nullopt when the
// factorization fails or the solution leaves the nonnegative cone, both of
// which signal s at or beyond the taboo radius.
std::optional<Eigen::VectorXd> solve_resolvent(const NonNegMatrix& Q, double s,
                                               const Eigen::VectorXd& rhs,
                                               bool transpose,
                                               bool require_nonneg) {
    SpMat A = resolvent_matrix(Q, s, transpose);
    Eigen::SparseLU<SpMat> lu;
    lu.compute(A);
    if (lu.info() != Eigen::Success) return std::nullopt;
    Eigen::VectorXd w = lu.solve(rhs);
    if (lu.info() != Eigen::Success) return std::nullopt;
    if (!w.allFinite()) return std::nullopt;
    if (require_nonneg) {
        // genuinely negative components signal s beyond the taboo radius
        // (the resolvent stops being an M-matrix inverse); roundoff-level
        // negatives from sparse elimination are tolerated
        double scale = w.cwiseAbs().maxCoeff();
        if (scale > 0 && w.minCoeff() < -1e-9 * scale) return std::nullopt;
    }
    return w;
}

} // namespace

int default_regeneration_state(const NonNegMatrix& B) {
    double best = B.max_row_sum();
    std::vector<int> maximizers;
    for (int i = 0; i < B.size(); ++i)
        if (B.row_sums()[i] >= best * (1.0 - 1e-14)) maximizers.push_back(i);
    return maximizers[maximizers.size() / 2];
}

TabooDecomposition taboo_decompose(const NonNegMatrix& B, int z) {
    if (z < 0 || z >= B.size())
        throw Error(ErrorKind::domain, "regeneration state out of range");
    auto ga = analyze_graph(B);
    if (!ga.irreducible) {
        auto [a, b] = *ga.scc_witness;
        throw Error(ErrorKind::reducible,
                    "matrix is reducible: no path from state " +
                        std::to_string(a) + " to state " + std::to_string(b));
    }
    TabooDecomposition td;
    td.z = z;
    td.n = B.size();
    td.b_zz = B.entry(z, z);
    int m = B.size() - 1;
    std::vector<int> to_sub(B.size(), -1);
    for (int i = 0, k = 0; i < B.size(); ++i)
        if (i != z) {
            to_sub[i] = k++;
            td.rest_states.push_back(i);
        }
    td.r.assign(m, 0.0);
    td.c.assign(m, 0.0);
    std::vector<Triplet> qtrip;
    for (int i = 0; i < B.size(); ++i) {
        auto cols = B.row_cols(i);
        auto vals = B.row_vals(i);
        for (std::size_t k = 0; k < cols.size(); ++k) {
            int j = cols[k];
            double w = vals[k];
            if (i == z && j == z) continue;
            if (i == z)
                td.r[to_sub[j]] = w;
            else if (j == z)
                td.c[to_sub[i]] = w;
            else
                qtrip.push_back({to_sub[i], to_sub[j], w});
        }
    }
    if (m > 0) {
        td.Q = NonNegMatrix::from_triplets(m, std::move(qtrip));
        td.rho_q = td.Q.nnz() == 0 ? 0.0 : spectral_radius(td.Q, 1e-10, 100000);
    }
    return td;
}

std::optional<double> cycle_transform_h(const TabooDecomposition& td,
                                        double theta, double* h_prime) {
    // Divergence (s at or beyond the taboo radius of the states feeding z)
    // is detected from the resolvent solve itself: the series solution of
    // (I - sQ) w = c is entrywise nonnegative inside the radius and grows a
    // genuinely negative part beyond it. A guard on the estimated rho(Q)
    // would reject valid theta whenever the estimate errs high, and rho(Q)
    // can legitimately exceed the relevant radius when the taboo matrix has
    // blocks the excursion never visits.
    double s = std::exp(theta);
    int m = td.n - 1;
    if (m == 0 || td.Q.nnz() == 0) {
        // no excursion states (or excursions of length one only)
        double rc = 0.0;
        for (int i = 0; i < m; ++i) rc += td.r[i] * td.c[i];
        double h = s * td.b_zz + s * s * rc;
        if (h_prime) *h_prime = s * td.b_zz + 2.0 * s * s * rc;
        return h;
    }
    Eigen::VectorXd c = Eigen::Map<const Eigen::VectorXd>(td.c.data(), m);
    auto w = solve_resolvent(td.Q, s, c, false, true);
    if (!w) return std::nullopt;
    double rw = 0.0;
    for (int i = 0; i < m; ++i) rw += td.r[i] * (*w)[i];
    double h = s * td.b_zz + s * s * rw;
    if (h_prime) {
        // dh/ds = b_zz + 2 s r.w + s^2 r.(I - sQ)^{-1} Q w ; h' = s dh/ds
        std::vector<double> wv((*w).data(), (*w).data() + m);
        std::vector<double> qw = td.Q.apply(wv);
        Eigen::VectorXd qwe = Eigen::Map<const Eigen::VectorXd>(qw.data(), m);
        auto y = solve_resolvent(td.Q, s, qwe, false, true);
        if (!y) return std::nullopt;
        double ry = 0.0;
        for (int i = 0; i < m; ++i) ry += td.r[i] * (*y)[i];
        *h_prime = s * (td.b_zz + 2.0 * s * rw + s * s * ry);
    }
    return h;
}

ThetaSolution solve_theta(const TabooDecomposition& td, double tol) {
    double cap = td.rho_q > 0
                     ? -std::log(td.rho_q) - 1e-9
                     : std::numeric_limits<double>::infinity();

    // lower end of the bracket: h < 1 (h -> 0 as theta -> -inf)
    double lo = std::min(0.0, std::isfinite(cap) ? cap - 1.0 : 0.0);
    double step = 1.0;
    auto eval = [&](double th) { return cycle_transform_h(td, th); };
    for (;;) {
        auto h = eval(lo);
        if (h && *h < 1.0) break;
        lo -= step;
        step *= 2.0;
        if (step > 1e12)
            throw Error(ErrorKind::numeric, "failed to bracket h below 1");
    }

    // upper end: divergent or h >= 1
    double hi;
    bool saw_ge_one = false;
    if (std::isfinite(cap)) {
        hi = std::max(cap, lo + 1e-12);
        auto h = eval(hi);
        if (h && *h >= 1.0) saw_ge_one = true;
        if (h && *h < 1.0) {
            // rho_q estimate was conservative; push toward true divergence
            double ext = 1e-9;
            while (h && *h < 1.0 && ext < 1.0) {
                hi += ext;
                ext *= 4.0;
                h = eval(hi);
            }
            if (h && *h >= 1.0) saw_ge_one = true;
        }
    } else {
        hi = lo + 1.0;
        for (;;) {
            auto h = eval(hi);
            if (!h || *h >= 1.0) {
                saw_ge_one = saw_ge_one || (h && *h >= 1.0);
                break;
            }
            hi = lo + 2.0 * (hi - lo);
            if (hi - lo > 1e12)
                throw Error(ErrorKind::numeric,
                            "failed to bracket h above 1");
        }
    }

    double best_theta = lo;
    double best_res = std::numeric_limits<double>::infinity();
    {
        auto h = eval(lo);
        if (h) {
            best_res = std::abs(*h - 1.0);
        }
    }
    while (hi - lo > 1e-15 * std::max({1.0, std::abs(lo), std::abs(hi)})) {
        double mid = 0.5 * (lo + hi);
        auto h = eval(mid);
        if (!h) {
            hi = mid;
            continue;
        }
        double res = std::abs(*h - 1.0);
        if (res < best_res) {
            best_res = res;
            best_theta = mid;
        }
        if (*h >= 1.0) {
            saw_ge_one = true;
            hi = mid;
        } else {
            lo = mid;
        }
        if (res <= tol) break;
    }
    if (!saw_ge_one)
        throw Error(ErrorKind::a1_fail,
                    "A1 fails: sup_theta h(theta) < 1 on the convergence "
                    "domain (best residual " +
                        std::to_string(best_res) + ")");

    // one Newton polish (also evaluates A2's finiteness witness h')
    double hp = 0.0;
    auto h_at_best = cycle_transform_h(td, best_theta, &hp);
    if (h_at_best && hp > 0) {
        double cand = best_theta - (*h_at_best - 1.0) / hp;
        if (std::isfinite(cand)) {
            auto hc = eval(cand);
            if (hc && std::abs(*hc - 1.0) < best_res) {
                best_theta = cand;
                best_res = std::abs(*hc - 1.0);
                cycle_transform_h(td, best_theta, &hp);
            }
        }
    }
    return {best_theta, std::exp(-best_theta), best_res, hp};
}

PFSolution eigenvectors(const NonNegMatrix& B, const TabooDecomposition& td,
                        double theta) {
    int n = td.n;
    int m = n - 1;
    double s = std::exp(theta);
    PFSolution sol;
    sol.theta = theta;
    sol.lambda_star = std::exp(-theta);
    sol.z = td.z;
    sol.u_star.assign(n, 0.0);
    sol.eta_star.assign(n, 0.0);
    sol.u_star[td.z] = 1.0;
    sol.eta_star[td.z] = 1.0;
    if (m > 0) {
        Eigen::VectorXd c = Eigen::Map<const Eigen::VectorXd>(td.c.data(), m);
        Eigen::VectorXd r = Eigen::Map<const Eigen::VectorXd>(td.r.data(), m);
        auto u = solve_resolvent(td.Q, s, s * c, false, false);
        auto eta = solve_resolvent(td.Q, s, s * r, true, false);
        if (!u || !eta)
            throw Error(ErrorKind::numeric,
                        "eigenvector solve failed at theta = " +
                            std::to_string(theta));
        for (int k = 0; k < m; ++k) {
            if ((*u)[k] <= 0.0 || (*eta)[k] <= 0.0)
                throw Error(ErrorKind::numeric,
                            "non-positive eigenvector component at state " +
                                std::to_string(td.rest_states[k]) +
                                " (theta inaccurate or matrix reducible)");
            sol.u_star[td.rest_states[k]] = (*u)[k];
            sol.eta_star[td.rest_states[k]] = (*eta)[k];
        }
    }
    auto h = cycle_transform_h(td, theta);
    sol.h_residual = h ? std::abs(*h - 1.0)
                       : std::numeric_limits<double>::infinity();

    auto bu = B.apply(sol.u_star);
    auto etab = B.apply_left(sol.eta_star);
    double unorm = 0.0, enorm = 0.0, ures = 0.0, eres = 0.0;
    for (int i = 0; i < n; ++i) {
        unorm = std::max(unorm, std::abs(sol.u_star[i]));
        enorm = std::max(enorm, std::abs(sol.eta_star[i]));
        ures = std::max(ures,
                        std::abs(bu[i] - sol.lambda_star * sol.u_star[i]));
        eres = std::max(eres,
                        std::abs(etab[i] - sol.lambda_star * sol.eta_star[i]));
    }
    sol.eig_residual_u = ures / unorm;
    sol.eig_residual_eta = eres / enorm;
    return sol;
}

PFSolution solve_exact(const NonNegMatrix& B, std::optional<int> z,
                       double tol) {
    int zz = z.value_or(default_regeneration_state(B));
    auto td = taboo_decompose(B, zz);
    auto ts = solve_theta(td, tol);
    return eigenvectors(B, td, ts.theta);
}

Theorem3Gap check_theorem3_gap(const NonNegMatrix& B,
                               const TabooDecomposition& td) {
    Theorem3Gap g{};
    g.theta1 = -std::log(spectral_radius(B));
    g.theta2 = (td.n == 1 || td.Q.nnz() == 0 || td.rho_q <= 0)
                   ? std::numeric_limits<double>::infinity()
                   : -std::log(td.rho_q);
    g.satisfied = g.theta2 > g.theta1 + 1e-10;
    return g;
}

double solidarity_scan(const NonNegMatrix& B, double tol) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (int z = 0; z < B.size(); ++z) {
        auto ts = solve_theta(taboo_decompose(B, z), tol);
        lo = std::min(lo, ts.theta);
        hi = std::max(hi, ts.theta);
    }
    return hi - lo;
}

} // namespace pfr
