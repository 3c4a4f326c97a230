#include "pfr/birthdeath.hpp"

#include <cmath>

namespace pfr {

namespace {

void validate(const BirthDeathSpec& spec) {
    if (!(spec.p > 0.0 && spec.p < 1.0))
        throw Error(ErrorKind::domain, "p must lie strictly inside (0, 1)");
    if (spec.L < 2)
        throw Error(ErrorKind::domain, "truncation level L must be >= 2");
}

} // namespace

NonNegMatrix bd_matrix(const BirthDeathSpec& spec, UpperBoundary boundary) {
    validate(spec);
    double p = spec.p, q = 1.0 - spec.p;
    int L = spec.L;
    std::vector<Triplet> trip;
    // index i holds state x = i + 1; killing at 0 removes the down-step of
    // state 1
    for (int i = 0; i < L - 1; ++i) trip.push_back({i, i + 1, p});
    for (int i = 1; i < L; ++i) trip.push_back({i, i - 1, q});
    if (boundary == UpperBoundary::reflecting)
        trip.push_back({L - 1, L - 1, p});
    return NonNegMatrix::from_triplets(L, std::move(trip));
}

double closed_form_lambda(double p) {
    return 2.0 * std::sqrt(p * (1.0 - p));
}

double closed_form_u(double p, int x) {
    double q = 1.0 - p;
    return x * std::pow(q / p, 0.5 * x);
}

double closed_form_eta(double p, int x) {
    double q = 1.0 - p;
    return x * std::pow(p / q, 0.5 * x);
}

std::pair<double, double> quad_roots(double p, double lambda) {
    double q = 1.0 - p;
    double disc = lambda * lambda - 4.0 * p * q;
    if (disc < 0)
        throw Error(ErrorKind::domain,
                    "lambda below 2 sqrt(pq): roots are complex and no "
                    "nonnegative eigenvector exists");
    double root = std::sqrt(disc);
    return {(lambda - root) / (2.0 * p), (lambda + root) / (2.0 * p)};
}

double supercritical_u(double p, double lambda, int x) {
    double q = 1.0 - p;
    if (lambda <= 2.0 * std::sqrt(p * q))
        throw Error(ErrorKind::domain,
                    "supercritical eigenvector requires lambda > 2 sqrt(pq)");
    auto [z1, z2] = quad_roots(p, lambda);
    double a = -(z2 / z1) * (lambda - p * z2) / (lambda - p * z1);
    return a * std::pow(z1, x) + std::pow(z2, x);
}

double first_passage_pmf(double p, long n) {
    if (n < 0) throw Error(ErrorKind::domain, "n must be nonnegative");
    double q = 1.0 - p;
    if (n == 0) return q;
    double lg = std::lgamma(2.0 * n + 2.0) - std::lgamma(n + 2.0) -
                std::lgamma(n + 1.0) - std::log(2.0 * n + 1.0) +
                n * std::log(p) + (n + 1.0) * std::log(q);
    return std::exp(lg);
}

ConvergenceProbe convergence_param_probe(double p, double lambda, int L,
                                         int N, int x) {
    if (lambda <= 0) throw Error(ErrorKind::domain, "lambda must be positive");
    auto B = bd_matrix({p, L});
    if (x < 0 || x >= L)
        throw Error(ErrorKind::domain, "probe state out of range");
    std::vector<double> v(L, 0.0);
    v[x] = 1.0;
    ConvergenceProbe out;
    out.partial_sums.reserve(N + 1);
    double sum = 1.0; // n = 0 term: B^0(x,x) = 1
    out.partial_sums.push_back(sum);
    for (int n = 1; n <= N; ++n) {
        v = B.apply_left(v);
        for (auto& t : v) t /= lambda;
        sum += v[x];
        out.partial_sums.push_back(sum);
    }
    // increment ratio over the last decade of even steps (period-2 chain:
    // odd-step increments vanish)
    int hi = N, lo = std::max(2, N - N / 5);
    double inc_hi = out.partial_sums[hi] - out.partial_sums[hi - 2];
    double inc_lo = out.partial_sums[lo] - out.partial_sums[lo - 2];
    out.tail_ratio =
        inc_lo > 0 ? std::pow(inc_hi / inc_lo, 1.0 / (hi - lo)) : 0.0;
    return out;
}

} // namespace pfr
