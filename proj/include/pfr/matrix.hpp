#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pfr/errors.hpp"

namespace pfr {

struct Triplet {
    int row;
    int col;
    double value;
};

// Sparse nonnegative matrix in CSR form. Entries are strictly positive;
// explicit zeros are rejected at construction.
class NonNegMatrix {
  public:
    NonNegMatrix() = default;

    // Validates indices, positivity, and uniqueness of (row, col) pairs.
    static NonNegMatrix from_triplets(int n, std::vector<Triplet> entries);

    // Builds from a dense row-major buffer, keeping entries > drop_tol.
    // Entries in [-clamp_tol, drop_tol] are dropped; anything below
    // -clamp_tol is an error.
    static NonNegMatrix from_dense(int n, const std::vector<double>& dense,
                                   double drop_tol = 0.0,
                                   double clamp_tol = 1e-14);

    int size() const { return n_; }
    int nnz() const { return static_cast<int>(vals_.size()); }

    double entry(int i, int j) const; // 0 when absent

    std::span<const int> row_cols(int i) const {
        return {cols_.data() + row_ptr_[i],
                static_cast<std::size_t>(row_ptr_[i + 1] - row_ptr_[i])};
    }
    std::span<const double> row_vals(int i) const {
        return {vals_.data() + row_ptr_[i],
                static_cast<std::size_t>(row_ptr_[i + 1] - row_ptr_[i])};
    }

    const std::vector<double>& row_sums() const { return row_sums_; }
    double max_row_sum() const;

    std::vector<Triplet> triplets() const;
    std::vector<double> to_dense() const; // row-major n*n

    // y = B x
    std::vector<double> apply(const std::vector<double>& x) const;
    // y = x B
    std::vector<double> apply_left(const std::vector<double>& x) const;

    NonNegMatrix scaled(double factor) const;

  private:
    int n_ = 0;
    std::vector<int> row_ptr_{0};
    std::vector<int> cols_;
    std::vector<double> vals_;
    std::vector<double> row_sums_;
};

struct NormalizationResult {
    NonNegMatrix B; // sub-stochastic
    double s;       // G = s * B
};

struct AugmentedChain {
    NonNegMatrix B;
    std::vector<double> kill_prob; // per-state jump probability to Delta
};

struct GraphAnalysis {
    bool irreducible = false;
    int period = 1;
    // (a, b) with no a -> b path, present when reducible
    std::optional<std::pair<int, int>> scc_witness;
};

// Coordinate text format: first nonblank line n, then "row col weight" lines;
// '#' starts a comment.
NonNegMatrix load_matrix(const std::string& text);

NormalizationResult normalize(const NonNegMatrix& G);

GraphAnalysis analyze_graph(const NonNegMatrix& B);

AugmentedChain augment(const NonNegMatrix& B);

// Spectral radius of a nonnegative matrix by power iteration on B + I
// (the shift makes the iteration converge for periodic support patterns).
// Collatz-Wielandt bounds give the stopping certificate on irreducible
// matrices; on reducible ones the estimate falls back to norm-ratio
// convergence.
double spectral_radius(const NonNegMatrix& B, double rel_tol = 1e-10,
                       long max_iter = 100000);

// Dominant-direction vector of an irreducible B (power iteration on B + I,
// normalized to unit max entry).
std::vector<double> dominant_vector(const NonNegMatrix& B,
                                    double rel_tol = 1e-12,
                                    long max_iter = 1000000);

} // namespace pfr
