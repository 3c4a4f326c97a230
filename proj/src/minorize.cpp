#include "pfr/minorize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

namespace pfr {

namespace {

CertifyResult certify_matrix(const NonNegMatrix& M, int v, int m) {
    int n = M.size();
    auto dense = M.to_dense();
    auto row = [&](int i, int j) { return dense[std::size_t(i) * n + j]; };

    double c1 = std::numeric_limits<double>::infinity();
    double c2 = 0.0;
    for (int y = 0; y < n; ++y) {
        double base = row(v, y);
        if (base == 0.0) {
            for (int x = 0; x < n; ++x)
                if (row(x, y) > 0.0)
                    return {std::nullopt,
                            "support mismatch: B^m(" + std::to_string(x) +
                                ", " + std::to_string(y) + ") > 0 but B^m(" +
                                std::to_string(v) + ", " + std::to_string(y) +
                                ") = 0"};
            continue;
        }
        for (int x = 0; x < n; ++x) {
            double ratio = row(x, y) / base;
            c1 = std::min(c1, ratio);
            c2 = std::max(c2, ratio);
        }
    }
    if (!std::isfinite(c1) || c2 == 0.0)
        return {std::nullopt, "reference row is empty"};
    if (c1 == 0.0)
        return {std::nullopt,
                "c1 = 0: some row vanishes on supp B^m(v, .)"};

    MinorizationCertificate cert;
    cert.v = v;
    cert.m = m;
    cert.c1 = c1;
    cert.c2 = c2;
    double vsum = M.row_sums()[v];
    cert.delta = c1 * vsum;
    cert.psi.assign(n, 0.0);
    for (int y = 0; y < n; ++y) cert.psi[y] = row(v, y) / vsum;
    cert.Bm = M;

    std::vector<double> tilde = dense;
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y) {
            double& t = tilde[std::size_t(x) * n + y];
            t -= cert.delta * cert.psi[y];
            if (t < 0.0) {
                if (t < -1e-14)
                    return {std::nullopt,
                            "decomposition produced a negative entry " +
                                std::to_string(t)};
                t = 0.0; // floating-point dust
            }
        }
    cert.Btilde = NonNegMatrix::from_dense(n, tilde);
    return {std::move(cert), ""};
}

} // namespace

CertifyResult certify_A3(const NonNegMatrix& B, int v) {
    if (v < 0 || v >= B.size())
        throw Error(ErrorKind::domain, "reference state out of range");
    return certify_matrix(B, v, 1);
}

A3PrimeResult certify_A3prime(const NonNegMatrix& B, int m_max) {
    if (m_max < 1)
        throw Error(ErrorKind::domain, "m_max must be at least 1");
    A3PrimeResult out;
    int n = B.size();
    std::vector<double> power = B.to_dense();
    const std::vector<double> bdense = B.to_dense();
    auto multiply = [&](const std::vector<double>& A) {
        std::vector<double> C(std::size_t(n) * n, 0.0);
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k) {
                double a = A[std::size_t(i) * n + k];
                if (a == 0.0) continue;
                for (int j = 0; j < n; ++j)
                    C[std::size_t(i) * n + j] += a * bdense[std::size_t(k) * n + j];
            }
        return C;
    };
    for (int m = 1; m <= m_max; ++m) {
        if (m > 1) power = multiply(power);
        NonNegMatrix Bm;
        try {
            Bm = NonNegMatrix::from_dense(n, power);
        } catch (const Error& e) {
            out.diagnostics.push_back("m=" + std::to_string(m) + ": " +
                                      e.what());
            continue;
        }
        std::optional<MinorizationCertificate> best;
        std::string first_failure;
        for (int v = 0; v < n; ++v) {
            auto res = certify_matrix(Bm, v, m);
            if (res.cert) {
                if (!best || res.cert->c1 / res.cert->c2 >
                                 best->c1 / best->c2)
                    best = std::move(res.cert);
            } else if (first_failure.empty()) {
                first_failure = res.failure;
            }
        }
        if (best) {
            out.cert = std::move(best);
            return out;
        }
        out.diagnostics.push_back("m=" + std::to_string(m) + ": " +
                                  first_failure);
    }
    return out;
}

SplitCycleSample split_cycle(const MinorizationCertificate& cert,
                             const AugmentedChain& chain, CycleRng& rng,
                             std::uint32_t n_max, std::optional<int> start) {
    if (cert.m != 1)
        throw Error(ErrorKind::domain,
                    "split_cycle handles m = 1; use solve_via_split for the "
                    "block-chain lift");
    int n = chain.B.size();
    // cumulative psi for regeneration draws
    auto draw_psi = [&](CycleRng& r) {
        double u = r.next_double();
        double acc = 0.0;
        for (int y = 0; y < n; ++y) {
            acc += cert.psi[y];
            if (u < acc) return y;
        }
        return n - 1;
    };

    SplitCycleSample out;
    int x = start ? *start : draw_psi(rng);
    out.cycle.visits.emplace_back(x, 0u);
    for (std::uint32_t t = 1;; ++t) {
        double u = rng.next_double();
        out.cycle.tau = t;
        if (u < cert.delta) { // psi-regeneration ends the cycle
            out.cycle.survived = true;
            out.final_state = draw_psi(rng);
            return out;
        }
        // walk the B_tilde row; remaining mass is the kill probability
        double acc = cert.delta;
        auto cols = cert.Btilde.row_cols(x);
        auto vals = cert.Btilde.row_vals(x);
        int next = -1;
        for (std::size_t k = 0; k < cols.size(); ++k) {
            acc += vals[k];
            if (u < acc) {
                next = cols[k];
                break;
            }
        }
        if (next < 0) {
            out.final_state = -1; // ended in a kill
            return out;
        }
        if (t >= n_max) {
            out.final_state = next; // the capped move is not in visits
            out.cycle.truncated = true;
            return out;
        }
        out.cycle.visits.emplace_back(next, t);
        x = next;
    }
}

double theta_gap_bound(const MinorizationCertificate& cert, double theta1) {
    double ratio = cert.c1 / cert.c2;
    if (ratio >= 1.0 - 1e-15)
        return std::numeric_limits<double>::infinity();
    return theta1 - std::log1p(-ratio);
}

namespace {

// block cycle for the m-step lift: m one-step moves per block, retrospective
// regeneration coin delta psi(y) / B^m(x0, y)
RegenCycleSample sample_block_cycle(const MinorizationCertificate& cert,
                                    const ChainSampler& one_step,
                                    CycleRng& rng, std::uint32_t n_max_blocks,
                                    std::optional<int> start) {
    int n = one_step.size();
    auto draw_psi = [&](CycleRng& r) {
        double u = r.next_double();
        double acc = 0.0;
        for (int y = 0; y < n; ++y) {
            acc += cert.psi[y];
            if (u < acc) return y;
        }
        return n - 1;
    };
    RegenCycleSample out;
    int x = start ? *start : draw_psi(rng);
    out.visits.emplace_back(x, 0u);
    for (std::uint32_t k = 1;; ++k) {
        int cur = x;
        out.tau = k;
        for (int step = 0; step < cert.m; ++step) {
            cur = one_step.step(cur, rng);
            if (cur < 0) return out; // killed inside the block
        }
        double coin = cert.delta * cert.psi[cur] / cert.Bm.entry(x, cur);
        if (rng.next_double() < coin) {
            out.survived = true;
            return out;
        }
        if (k >= n_max_blocks) {
            out.truncated = true;
            return out;
        }
        out.visits.emplace_back(cur, k);
        x = cur;
    }
}

// h_psi(theta) = delta s psi (I - s B_tilde)^{-1} 1 with s = e^theta
std::optional<double> split_h(const MinorizationCertificate& cert,
                              const Eigen::MatrixXd& Btilde, double theta,
                              double rho_tilde) {
    double s = std::exp(theta);
    if (rho_tilde > 0 && s * rho_tilde >= 1.0 - 1e-12) return std::nullopt;
    int n = Btilde.rows();
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n) - s * Btilde;
    Eigen::VectorXd w = A.partialPivLu().solve(Eigen::VectorXd::Ones(n));
    if (!w.allFinite() || (w.array() < 0).any()) return std::nullopt;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += cert.psi[i] * w[i];
    return cert.delta * s * acc;
}

} // namespace

SplitSolution solve_via_split(const NonNegMatrix& B,
                              const MinorizationCertificate& cert,
                              SplitEngine engine, const SplitParams& params) {
    int n = B.size();
    int z = params.z_norm.value_or(default_regeneration_state(B));
    SplitSolution out;

    if (engine == SplitEngine::exact) {
        Eigen::MatrixXd Bt(n, n);
        {
            auto d = cert.Btilde.to_dense();
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) Bt(i, j) = d[std::size_t(i) * n + j];
        }
        double rho_tilde =
            cert.Btilde.nnz() == 0 ? 0.0 : spectral_radius(cert.Btilde);
        auto h = [&](double th) { return split_h(cert, Bt, th, rho_tilde); };

        double lo = 0.0, step = 1.0;
        while (true) {
            auto v = h(lo);
            if (v && *v < 1.0) break;
            lo -= step;
            step *= 2.0;
        }
        double cap = rho_tilde > 0
                         ? -std::log(rho_tilde) - 1e-9
                         : std::numeric_limits<double>::infinity();
        double hi;
        bool saw_ge_one = false;
        if (std::isfinite(cap)) {
            hi = std::max(cap, lo + 1e-12);
            auto v = h(hi);
            if (v && *v >= 1.0) saw_ge_one = true;
        } else {
            hi = lo + 1.0;
            for (;;) {
                auto v = h(hi);
                if (!v || *v >= 1.0) {
                    saw_ge_one = saw_ge_one || (v && *v >= 1.0);
                    break;
                }
                hi = lo + 2.0 * (hi - lo);
            }
        }
        double best = lo, best_res = std::numeric_limits<double>::infinity();
        while (hi - lo > 1e-15 * std::max(1.0, std::abs(lo))) {
            double mid = 0.5 * (lo + hi);
            auto v = h(mid);
            if (!v) {
                hi = mid;
                continue;
            }
            double res = std::abs(*v - 1.0);
            if (res < best_res) {
                best_res = res;
                best = mid;
            }
            if (*v >= 1.0) {
                saw_ge_one = true;
                hi = mid;
            } else {
                lo = mid;
            }
            if (res <= params.tol) break;
        }
        if (!saw_ge_one)
            throw Error(ErrorKind::a1_fail,
                        "split A1 fails: sup h_psi < 1 on the domain");
        out.theta_block = best;

        double s = std::exp(best);
        Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n) - s * Bt;
        Eigen::VectorXd u =
            A.partialPivLu().solve(Eigen::VectorXd::Ones(n)) * (s * cert.delta);
        Eigen::VectorXd psi(n);
        for (int i = 0; i < n; ++i) psi[i] = cert.psi[i];
        Eigen::VectorXd eta = A.transpose().partialPivLu().solve(psi);

        out.sol.z = z;
        out.sol.theta = best / cert.m;
        out.sol.lambda_star = std::exp(-best / cert.m);
        out.sol.h_residual = best_res;
        out.sol.u_star.assign(n, 0.0);
        out.sol.eta_star.assign(n, 0.0);
        for (int i = 0; i < n; ++i) {
            if (u[i] <= 0 || eta[i] <= 0)
                throw Error(ErrorKind::numeric,
                            "non-positive split eigenvector component");
            out.sol.u_star[i] = u[i] / u[z];
            out.sol.eta_star[i] = eta[i] / eta[z];
        }
    } else {
        auto chain = augment(B);
        ChainSampler sampler(chain);
        std::vector<RegenCycleSample> samples(params.n_cycles);
        for (std::uint64_t i = 0; i < params.n_cycles; ++i) {
            CycleRng rng(params.seed, i);
            if (cert.m == 1) {
                samples[i] =
                    split_cycle(cert, chain, rng, params.n_max).cycle;
            } else {
                samples[i] = sample_block_cycle(cert, sampler, rng,
                                                params.n_max, std::nullopt);
            }
        }
        auto saa = saa_solve_theta(samples, params.tol);
        out.theta_block = saa.theta_hat;
        out.ci_halfwidth = saa.ci_halfwidth;
        out.n_survived = saa.n_survived;
        out.sol.z = z;
        out.sol.theta = saa.theta_hat / cert.m;
        out.sol.lambda_star = std::exp(-saa.theta_hat / cert.m);
        out.sol.h_residual = 0.0;

        // u: cycles started at each state; eta: occupation over psi-cycles
        std::vector<double> u(n), eta(n);
        std::uint64_t per_state =
            std::max<std::uint64_t>(1, params.n_cycles / 10);
        for (int x = 0; x < n; ++x) {
            double sum = 0.0;
            for (std::uint64_t i = 0; i < per_state; ++i) {
                CycleRng rng(params.seed + 1, i * std::uint64_t(n) + x);
                RegenCycleSample s =
                    cert.m == 1
                        ? split_cycle(cert, chain, rng, params.n_max, x).cycle
                        : sample_block_cycle(cert, sampler, rng, params.n_max,
                                             x);
                if (s.survived) sum += std::exp(saa.theta_hat * s.tau);
            }
            u[x] = sum / static_cast<double>(per_state);
        }
        auto eta_est = estimate_eta(samples, saa.theta_hat, n);
        for (int x = 0; x < n; ++x) eta[x] = eta_est[x].value;
        out.sol.u_star.assign(n, 0.0);
        out.sol.eta_star.assign(n, 0.0);
        for (int i = 0; i < n; ++i) {
            out.sol.u_star[i] = u[i] / u[z];
            out.sol.eta_star[i] = eta[i] / eta[z];
        }
    }

    // residuals against B at the B-eigenvalue
    auto bu = B.apply(out.sol.u_star);
    auto etab = B.apply_left(out.sol.eta_star);
    double unorm = 0.0, enorm = 0.0, ures = 0.0, eres = 0.0;
    for (int i = 0; i < n; ++i) {
        unorm = std::max(unorm, std::abs(out.sol.u_star[i]));
        enorm = std::max(enorm, std::abs(out.sol.eta_star[i]));
        ures = std::max(
            ures, std::abs(bu[i] - out.sol.lambda_star * out.sol.u_star[i]));
        eres = std::max(eres, std::abs(etab[i] - out.sol.lambda_star *
                                                     out.sol.eta_star[i]));
    }
    out.sol.eig_residual_u = ures / unorm;
    out.sol.eig_residual_eta = eres / enorm;
    return out;
}

} // namespace pfr
