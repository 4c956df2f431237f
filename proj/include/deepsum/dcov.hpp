#pragma once

#include <cstdint>
#include <vector>

#include "deepsum/matrix.hpp"

namespace deepsum {

// Empirical distance covariance estimators.
//
// With a_ij = |Z_i - Z_j|, b_ij = |Y_i - Y_j|, A_i = sum_j a_ij, B_i = sum_j b_ij:
//
//   V-statistic  (training):  S1 + S2 - 2 S3
//     S1 = (1/n^2) sum_ij a_ij b_ij
//     S2 = (1/n^2 sum_ij a_ij) (1/n^2 sum_ij b_ij)
//     S3 = (1/n^3) sum_i A_i B_i
//
//   Combinatorial form (reported utilities):  T1 + T2 - T3
//     T1 = sum_{i<j} a_ij b_ij / C(n,2)
//     T2 = (sum_{i<j} a_ij / C(n,2)) (sum_{i<j} b_ij / C(n,2))
//     T3 = 2 * mean over ordered distinct triples (i,j,u) of a_ij b_iu
//
// Both are evaluated in O(n^2) from per-row sums. The row loop may run under
// OpenMP; the per-row partials are always reduced serially in ascending row
// order, so the result is bit-identical for any thread count and matches the
// serial:: reference exactly.

enum class DcovKind { VStatistic, UStatistic };

struct DcovValue {
    double value = 0.0;
    DcovKind kind = DcovKind::VStatistic;
};

// Per-row sums shared by both estimators.
struct DcovRowSums {
    std::vector<double> ab;  // sum_j a_ij b_ij
    std::vector<double> a;   // A_i
    std::vector<double> b;   // B_i
};

DcovRowSums dcov_row_sums(const Matrix& Z, const Matrix& Y);
double dcov_v_from_sums(const DcovRowSums& s);
double dcov_u_from_sums(const DcovRowSums& s);

DcovValue dcov_v(const Matrix& Z, const Matrix& Y);
DcovValue dcov_u(const Matrix& Z, const Matrix& Y);

// dcov_v(Z,Y) / sqrt(dcov_v(Z,Z) dcov_v(Y,Y)); 0 when either marginal term is 0.
double dcor(const Matrix& Z, const Matrix& Y);

// Exact gradient of dcov_v(Z, Y) with respect to Z:
//   grad_i = (2/n^2) sum_j Bc_ij (Z_i - Z_j) / a_ij
// where Bc is the double-centred b. Pairs with a_ij < 1e-12 contribute 0.
Matrix dcov_grad(const Matrix& Z, const Matrix& Y);

struct PermutationTest {
    double observed = 0.0;              // dcov_u(Z, Y)
    double threshold = 0.0;             // (1 - level) quantile of the permuted statistics
    std::vector<double> permuted;       // one statistic per permutation, draw order
};

// Quantile rule: the ceil((1 - level) * m)-th smallest of m permuted statistics.
double upper_quantile(std::vector<double> values, double level);

PermutationTest perm_test(const Matrix& Z, const Matrix& Y, std::size_t num_perms, double level,
                          std::uint64_t seed);
double perm_threshold(const Matrix& Z, const Matrix& Y, std::size_t num_perms, double level,
                      std::uint64_t seed);

constexpr double kZeroDistance = 1e-12;

namespace serial {
// Single-threaded reference kernels; same reduction order as the parallel ones.
DcovRowSums dcov_row_sums(const Matrix& Z, const Matrix& Y);
DcovValue dcov_v(const Matrix& Z, const Matrix& Y);
DcovValue dcov_u(const Matrix& Z, const Matrix& Y);
Matrix dcov_grad(const Matrix& Z, const Matrix& Y);
}  // namespace serial

}  // namespace deepsum
