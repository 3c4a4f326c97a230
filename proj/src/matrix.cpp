#include "pfr/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <sstream>

namespace pfr {

NonNegMatrix NonNegMatrix::from_triplets(int n, std::vector<Triplet> entries) {
    if (n <= 0)
        throw Error(ErrorKind::domain, "matrix dimension must be positive");
    for (const auto& t : entries) {
        if (t.row < 0 || t.row >= n || t.col < 0 || t.col >= n)
            throw Error(ErrorKind::parse,
                        "index out of range: (" + std::to_string(t.row) + ", " +
                            std::to_string(t.col) + ") for n = " +
                            std::to_string(n));
        if (t.value < 0)
            throw Error(ErrorKind::parse,
                        "negative weight at (" + std::to_string(t.row) + ", " +
                            std::to_string(t.col) + ")");
        if (t.value == 0)
            throw Error(ErrorKind::parse,
                        "explicit zero weight at (" + std::to_string(t.row) +
                            ", " + std::to_string(t.col) +
                            "); omit zero entries");
    }
    std::sort(entries.begin(), entries.end(),
              [](const Triplet& a, const Triplet& b) {
                  return std::tie(a.row, a.col) < std::tie(b.row, b.col);
              });
    for (std::size_t i = 1; i < entries.size(); ++i)
        if (entries[i].row == entries[i - 1].row &&
            entries[i].col == entries[i - 1].col)
            throw Error(ErrorKind::parse,
                        "duplicate entry (" + std::to_string(entries[i].row) +
                            ", " + std::to_string(entries[i].col) + ")");

    NonNegMatrix m;
    m.n_ = n;
    m.row_ptr_.assign(n + 1, 0);
    m.cols_.reserve(entries.size());
    m.vals_.reserve(entries.size());
    m.row_sums_.assign(n, 0.0);
    for (const auto& t : entries) {
        ++m.row_ptr_[t.row + 1];
        m.cols_.push_back(t.col);
        m.vals_.push_back(t.value);
        m.row_sums_[t.row] += t.value;
    }
    std::partial_sum(m.row_ptr_.begin(), m.row_ptr_.end(), m.row_ptr_.begin());
    return m;
}

NonNegMatrix NonNegMatrix::from_dense(int n, const std::vector<double>& dense,
                                      double drop_tol, double clamp_tol) {
    std::vector<Triplet> trip;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double w = dense[static_cast<std::size_t>(i) * n + j];
            if (w > drop_tol) {
                trip.push_back({i, j, w});
            } else if (w < -clamp_tol) {
                throw Error(ErrorKind::numeric,
                            "negative entry " + std::to_string(w) +
                                " in dense conversion at (" +
                                std::to_string(i) + ", " + std::to_string(j) +
                                ")");
            }
            // values in [-clamp_tol, drop_tol] are floating-point dust
        }
    return from_triplets(n, std::move(trip));
}

double NonNegMatrix::entry(int i, int j) const {
    auto cols = row_cols(i);
    auto it = std::lower_bound(cols.begin(), cols.end(), j);
    if (it == cols.end() || *it != j) return 0.0;
    return vals_[row_ptr_[i] + (it - cols.begin())];
}

double NonNegMatrix::max_row_sum() const {
    return row_sums_.empty()
               ? 0.0
               : *std::max_element(row_sums_.begin(), row_sums_.end());
}

std::vector<Triplet> NonNegMatrix::triplets() const {
    std::vector<Triplet> out;
    out.reserve(vals_.size());
    for (int i = 0; i < n_; ++i) {
        auto cols = row_cols(i);
        auto vals = row_vals(i);
        for (std::size_t k = 0; k < cols.size(); ++k)
            out.push_back({i, cols[k], vals[k]});
    }
    return out;
}

std::vector<double> NonNegMatrix::to_dense() const {
    std::vector<double> d(static_cast<std::size_t>(n_) * n_, 0.0);
    for (int i = 0; i < n_; ++i) {
        auto cols = row_cols(i);
        auto vals = row_vals(i);
        for (std::size_t k = 0; k < cols.size(); ++k)
            d[static_cast<std::size_t>(i) * n_ + cols[k]] = vals[k];
    }
    return d;
}

std::vector<double> NonNegMatrix::apply(const std::vector<double>& x) const {
    std::vector<double> y(n_, 0.0);
    for (int i = 0; i < n_; ++i) {
        auto cols = row_cols(i);
        auto vals = row_vals(i);
        double acc = 0.0;
        for (std::size_t k = 0; k < cols.size(); ++k)
            acc += vals[k] * x[cols[k]];
        y[i] = acc;
    }
    return y;
}

std::vector<double>
NonNegMatrix::apply_left(const std::vector<double>& x) const {
    std::vector<double> y(n_, 0.0);
    for (int i = 0; i < n_; ++i) {
        auto cols = row_cols(i);
        auto vals = row_vals(i);
        for (std::size_t k = 0; k < cols.size(); ++k)
            y[cols[k]] += x[i] * vals[k];
    }
    return y;
}

NonNegMatrix NonNegMatrix::scaled(double factor) const {
    if (factor <= 0)
        throw Error(ErrorKind::domain, "scale factor must be positive");
    NonNegMatrix m = *this;
    for (auto& v : m.vals_) v *= factor;
    for (auto& v : m.row_sums_) v *= factor;
    return m;
}

NonNegMatrix load_matrix(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    int n = -1;
    std::vector<Triplet> trip;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        if (n < 0) {
            if (!(ls >> n)) {
                // blank or comment-only line before the header
                ls.clear();
                std::string rest;
                if (ls.str().find_first_not_of(" \t\r\n") == std::string::npos)
                    { n = -1; continue; }
                throw Error(ErrorKind::parse,
                            "line " + std::to_string(lineno) +
                                ": expected state count");
            }
            std::string rest;
            if (ls >> rest)
                throw Error(ErrorKind::parse,
                            "line " + std::to_string(lineno) +
                                ": trailing content after state count");
            if (n <= 0)
                throw Error(ErrorKind::parse,
                            "line " + std::to_string(lineno) +
                                ": state count must be positive");
            continue;
        }
        int r, c;
        double w;
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        if (!(ls >> r >> c >> w))
            throw Error(ErrorKind::parse, "line " + std::to_string(lineno) +
                                              ": expected 'row col weight'");
        std::string rest;
        if (ls >> rest)
            throw Error(ErrorKind::parse, "line " + std::to_string(lineno) +
                                              ": trailing content");
        if (r < 0 || r >= n || c < 0 || c >= n)
            throw Error(ErrorKind::parse, "line " + std::to_string(lineno) +
                                              ": index out of range");
        if (w < 0)
            throw Error(ErrorKind::parse,
                        "negative weight at line " + std::to_string(lineno));
        if (w == 0)
            throw Error(ErrorKind::parse, "explicit zero weight at line " +
                                              std::to_string(lineno) +
                                              "; omit zero entries");
        trip.push_back({r, c, w});
    }
    if (n < 0) throw Error(ErrorKind::parse, "empty matrix file");
    try {
        return NonNegMatrix::from_triplets(n, std::move(trip));
    } catch (const Error& e) {
        throw Error(ErrorKind::parse, e.what());
    }
}

NormalizationResult normalize(const NonNegMatrix& G) {
    if (G.nnz() == 0)
        throw Error(ErrorKind::domain, "cannot normalize an all-zero matrix");
    double s = G.max_row_sum();
    // already sub-stochastic input keeps its natural killing rates
    if (s <= 1.0 + 1e-14) return {G, 1.0};
    return {G.scaled(1.0 / s), s};
}

namespace {

std::vector<std::vector<int>> adjacency(const NonNegMatrix& B,
                                        bool transpose) {
    std::vector<std::vector<int>> adj(B.size());
    for (int i = 0; i < B.size(); ++i)
        for (int j : B.row_cols(i))
            (transpose ? adj[j] : adj[i]).push_back(transpose ? i : j);
    return adj;
}

std::vector<char> reachable(const std::vector<std::vector<int>>& adj,
                            int from) {
    std::vector<char> seen(adj.size(), 0);
    std::queue<int> q;
    seen[from] = 1;
    q.push(from);
    while (!q.empty()) {
        int u = q.front();
        q.pop();
        for (int v : adj[u])
            if (!seen[v]) {
                seen[v] = 1;
                q.push(v);
            }
    }
    return seen;
}

} // namespace

GraphAnalysis analyze_graph(const NonNegMatrix& B) {
    GraphAnalysis out;
    auto fwd = adjacency(B, false);
    auto bwd = adjacency(B, true);
    auto from0 = reachable(fwd, 0);
    auto to0 = reachable(bwd, 0);
    out.irreducible = true;
    for (int v = 0; v < B.size() && out.irreducible; ++v) {
        if (!from0[v]) {
            out.irreducible = false;
            out.scc_witness = {0, v}; // no path 0 -> v
        } else if (!to0[v]) {
            out.irreducible = false;
            out.scc_witness = {v, 0}; // no path v -> 0
        }
    }

    // period = gcd over support edges u->v of (level(u) + 1 - level(v)),
    // levels from a rooted BFS
    std::vector<long> level(B.size(), -1);
    std::queue<int> q;
    level[0] = 0;
    q.push(0);
    while (!q.empty()) {
        int u = q.front();
        q.pop();
        for (int v : fwd[u])
            if (level[v] < 0) {
                level[v] = level[u] + 1;
                q.push(v);
            }
    }
    long g = 0;
    for (int u = 0; u < B.size(); ++u) {
        if (level[u] < 0) continue;
        for (int v : fwd[u])
            if (level[v] >= 0)
                g = std::gcd(g, std::abs(level[u] + 1 - level[v]));
    }
    out.period = g == 0 ? 1 : static_cast<int>(g);
    return out;
}

AugmentedChain augment(const NonNegMatrix& B) {
    std::vector<double> kill(B.size());
    for (int i = 0; i < B.size(); ++i) {
        double rs = B.row_sums()[i];
        if (rs > 1.0 + 1e-12)
            throw Error(ErrorKind::domain,
                        "row " + std::to_string(i) + " sum " +
                            std::to_string(rs) + " exceeds 1");
        kill[i] = std::clamp(1.0 - rs, 0.0, 1.0);
    }
    return {B, std::move(kill)};
}

double spectral_radius(const NonNegMatrix& B, double rel_tol, long max_iter) {
    int n = B.size();
    std::vector<double> x(n, 1.0);
    // sup_i ((B+I)x)_i / x_i bounds rho(B+I) above for ANY positive x, so
    // the running minimum of hi stays a rigorous upper bound even when the
    // lower bound cannot close (reducible support patterns)
    double best_hi = std::numeric_limits<double>::infinity();
    for (long it = 0; it < max_iter; ++it) {
        std::vector<double> y = B.apply(x);
        double lo = std::numeric_limits<double>::infinity();
        double hi = 0.0;
        double norm = 0.0;
        for (int i = 0; i < n; ++i) {
            y[i] += x[i]; // shifted iteration (B + I)
            double ratio = y[i] / x[i];
            lo = std::min(lo, ratio);
            hi = std::max(hi, ratio);
            norm = std::max(norm, y[i]);
        }
        // Collatz-Wielandt certificate for the shifted matrix
        if (hi - lo <= rel_tol * std::max(1.0, hi - 1.0))
            return 0.5 * (lo + hi) - 1.0;
        double prev = best_hi;
        best_hi = std::min(best_hi, hi);
        // reducible support: the bounds cannot close. Keep the rigorous
        // upper bound, but only give up after the iterate has mixed — on
        // banded support that takes a full graph diameter of steps.
        if (it > 2L * n + 100 && best_hi >= prev - 1e-15 * best_hi) break;
        for (int i = 0; i < n; ++i) x[i] = y[i] / norm;
    }
    return best_hi - 1.0;
}

std::vector<double> dominant_vector(const NonNegMatrix& B, double rel_tol,
                                    long max_iter) {
    int n = B.size();
    std::vector<double> x(n, 1.0);
    for (long it = 0; it < max_iter; ++it) {
        std::vector<double> y = B.apply(x);
        double norm = 0.0;
        for (int i = 0; i < n; ++i) {
            y[i] += x[i];
            norm = std::max(norm, y[i]);
        }
        double diff = 0.0;
        for (int i = 0; i < n; ++i) {
            y[i] /= norm;
            diff = std::max(diff, std::abs(y[i] - x[i]));
        }
        x.swap(y);
        if (diff <= rel_tol) break;
    }
    return x;
}

} // namespace pfr
