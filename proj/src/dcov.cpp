#include "deepsum/dcov.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "deepsum/error.hpp"
#include "deepsum/rng.hpp"

namespace deepsum {

namespace {

constexpr std::size_t kParallelMinRows = 256;

inline double dist(const double* x, const double* y, std::size_t d) noexcept {
    if (d == 1) return std::fabs(x[0] - y[0]);
    double s = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
        const double t = x[c] - y[c];
        s += t * t;
    }
    return std::sqrt(s);
}

void check_pair(const Matrix& Z, const Matrix& Y, std::size_t min_n, const char* who) {
    if (Z.rows() != Y.rows())
        throw ShapeError(std::string(who) + ": row counts differ (" + std::to_string(Z.rows()) +
                         " vs " + std::to_string(Y.rows()) + ")");
    if (Z.rows() < min_n)
        throw InsufficientSamplesError(std::string(who) + ": need at least " +
                                       std::to_string(min_n) + " samples, got " +
                                       std::to_string(Z.rows()));
    if (Z.cols() == 0 || Y.cols() == 0) throw ShapeError(std::string(who) + ": zero-width input");
    if (!Z.all_finite() || !Y.all_finite())
        throw DataError(std::string(who) + ": non-finite input");
}

template <bool Parallel>
DcovRowSums row_sums_impl(const Matrix& Z, const Matrix& Y) {
    const std::size_t n = Z.rows(), dz = Z.cols(), dy = Y.cols();
    DcovRowSums s{std::vector<double>(n), std::vector<double>(n), std::vector<double>(n)};
    const double* zp = Z.flat().data();
    const double* yp = Y.flat().data();
    const long nn = static_cast<long>(n);
#pragma omp parallel for schedule(static) if (Parallel && n >= kParallelMinRows)
    for (long ii = 0; ii < nn; ++ii) {
        const std::size_t i = static_cast<std::size_t>(ii);
        double ab = 0.0, sa = 0.0, sb = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double a = dist(zp + i * dz, zp + j * dz, dz);
            const double b = dist(yp + i * dy, yp + j * dy, dy);
            ab += a * b;
            sa += a;
            sb += b;
        }
        s.ab[i] = ab;
        s.a[i] = sa;
        s.b[i] = sb;
    }
    return s;
}

template <bool Parallel>
Matrix grad_impl(const Matrix& Z, const Matrix& Y) {
    check_pair(Z, Y, 2, "dcov_grad");
    const std::size_t n = Z.rows(), dz = Z.cols(), dy = Y.cols();
    const double* zp = Z.flat().data();
    const double* yp = Y.flat().data();
    const long nn = static_cast<long>(n);

    std::vector<double> B(n);
#pragma omp parallel for schedule(static) if (Parallel && n >= kParallelMinRows)
    for (long ii = 0; ii < nn; ++ii) {
        const std::size_t i = static_cast<std::size_t>(ii);
        double sb = 0.0;
        for (std::size_t j = 0; j < n; ++j) sb += dist(yp + i * dy, yp + j * dy, dy);
        B[i] = sb;
    }
    double total = 0.0;
    for (double v : B) total += v;

    const double nd = static_cast<double>(n);
    const double grand = total / (nd * nd);
    const double scale = 2.0 / (nd * nd);
    Matrix G(n, dz);
#pragma omp parallel for schedule(static) if (Parallel && n >= kParallelMinRows)
    for (long ii = 0; ii < nn; ++ii) {
        const std::size_t i = static_cast<std::size_t>(ii);
        const double* zi = zp + i * dz;
        double* gi = &G(i, 0);
        const double Bi = B[i] / nd;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const double* zj = zp + j * dz;
            const double a = dist(zi, zj, dz);
            if (a < kZeroDistance) continue;
            const double bc = dist(yp + i * dy, yp + j * dy, dy) - Bi - B[j] / nd + grand;
            const double w = scale * bc / a;
            for (std::size_t c = 0; c < dz; ++c) gi[c] += w * (zi[c] - zj[c]);
        }
    }
    return G;
}

}  // namespace

double dcov_v_from_sums(const DcovRowSums& s) {
    using real = long double;
    const real n = static_cast<real>(s.ab.size());
    real s_ab = 0.0L, s_a = 0.0L, s_b = 0.0L, s_AB = 0.0L;
    for (std::size_t i = 0; i < s.ab.size(); ++i) {
        s_ab += s.ab[i];
        s_a += s.a[i];
        s_b += s.b[i];
        s_AB += real(s.a[i]) * s.b[i];
    }
    const real n2 = n * n;
    return static_cast<double>(s_ab / n2 + (s_a / n2) * (s_b / n2) - 2.0L * s_AB / (n2 * n));
}

double dcov_u_from_sums(const DcovRowSums& s) {
    // Extended precision: the three terms are O(1) and nearly cancel under independence.
    using real = long double;
    const real n = static_cast<real>(s.ab.size());
    real s_ab = 0.0L, s_a = 0.0L, s_b = 0.0L, s_tri = 0.0L;
    for (std::size_t i = 0; i < s.ab.size(); ++i) {
        s_ab += s.ab[i];
        s_a += s.a[i];
        s_b += s.b[i];
        s_tri += real(s.a[i]) * s.b[i] - s.ab[i];  // drops j == u; a_ii = b_ii = 0 handles the rest
    }
    const real pairs = n * (n - 1.0L);  // ordered pairs = 2 C(n,2)
    const real triples = pairs * (n - 2.0L);
    return static_cast<double>(s_ab / pairs + (s_a / pairs) * (s_b / pairs) - 2.0L * s_tri / triples);
}

DcovRowSums dcov_row_sums(const Matrix& Z, const Matrix& Y) { return row_sums_impl<true>(Z, Y); }

DcovValue dcov_v(const Matrix& Z, const Matrix& Y) {
    check_pair(Z, Y, 2, "dcov_v");
    return {dcov_v_from_sums(row_sums_impl<true>(Z, Y)), DcovKind::VStatistic};
}

DcovValue dcov_u(const Matrix& Z, const Matrix& Y) {
    check_pair(Z, Y, 3, "dcov_u");
    return {dcov_u_from_sums(row_sums_impl<true>(Z, Y)), DcovKind::UStatistic};
}

double dcor(const Matrix& Z, const Matrix& Y) {
    const double zy = dcov_v(Z, Y).value;
    const double zz = dcov_v(Z, Z).value;
    const double yy = dcov_v(Y, Y).value;
    if (zz <= 0.0 || yy <= 0.0) return 0.0;
    return std::clamp(zy / std::sqrt(zz * yy), 0.0, 1.0);
}

Matrix dcov_grad(const Matrix& Z, const Matrix& Y) { return grad_impl<true>(Z, Y); }

double upper_quantile(std::vector<double> values, double level) {
    if (values.empty()) throw ConfigError("upper_quantile: no values");
    std::sort(values.begin(), values.end());
    const double m = static_cast<double>(values.size());
    auto k = static_cast<std::size_t>(std::ceil((1.0 - level) * m - 1e-12));
    k = std::clamp<std::size_t>(k, 1, values.size());
    return values[k - 1];
}

PermutationTest perm_test(const Matrix& Z, const Matrix& Y, std::size_t num_perms, double level,
                          std::uint64_t seed) {
    if (num_perms < 19) throw ConfigError("perm_threshold: need at least 19 permutations");
    if (!(level > 0.0 && level < 1.0)) throw ConfigError("perm_threshold: level must be in (0,1)");
    check_pair(Z, Y, 3, "perm_threshold");

    const std::size_t n = Z.rows();
    const long nn = static_cast<long>(n);
    // Distance matrices are materialised once; each permutation is then a gather.
    Matrix a(n, n), b(n, n);
#pragma omp parallel for schedule(static) if (n >= kParallelMinRows)
    for (long ii = 0; ii < nn; ++ii) {
        const std::size_t i = static_cast<std::size_t>(ii);
        for (std::size_t j = 0; j < n; ++j) {
            a(i, j) = dist(&Z(i, 0), &Z(j, 0), Z.cols());
            b(i, j) = dist(&Y(i, 0), &Y(j, 0), Y.cols());
        }
    }
    DcovRowSums base{std::vector<double>(n), std::vector<double>(n), std::vector<double>(n)};
    for (std::size_t i = 0; i < n; ++i) {
        double ab = 0.0, sa = 0.0, sb = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            ab += a(i, j) * b(i, j);
            sa += a(i, j);
            sb += b(i, j);
        }
        base.ab[i] = ab;
        base.a[i] = sa;
        base.b[i] = sb;
    }

    PermutationTest out;
    out.observed = dcov_u_from_sums(base);
    out.permuted.reserve(num_perms);
    Rng rng(seed);
    DcovRowSums ps{std::vector<double>(n), base.a, std::vector<double>(n)};
    for (std::size_t p = 0; p < num_perms; ++p) {
        const auto pi = rng.permutation(n);
#pragma omp parallel for schedule(static) if (n >= kParallelMinRows)
        for (long ii = 0; ii < nn; ++ii) {
            const std::size_t i = static_cast<std::size_t>(ii);
            const double* brow = &b(pi[i], 0);
            const double* arow = &a(i, 0);
            double ab = 0.0;
            for (std::size_t j = 0; j < n; ++j) ab += arow[j] * brow[pi[j]];
            ps.ab[i] = ab;
            ps.b[i] = base.b[pi[i]];
        }
        out.permuted.push_back(dcov_u_from_sums(ps));
    }
    out.threshold = upper_quantile(out.permuted, level);
    return out;
}

double perm_threshold(const Matrix& Z, const Matrix& Y, std::size_t num_perms, double level,
                      std::uint64_t seed) {
    return perm_test(Z, Y, num_perms, level, seed).threshold;
}

namespace serial {

DcovRowSums dcov_row_sums(const Matrix& Z, const Matrix& Y) { return row_sums_impl<false>(Z, Y); }

DcovValue dcov_v(const Matrix& Z, const Matrix& Y) {
    check_pair(Z, Y, 2, "dcov_v");
    return {dcov_v_from_sums(row_sums_impl<false>(Z, Y)), DcovKind::VStatistic};
}

DcovValue dcov_u(const Matrix& Z, const Matrix& Y) {
    check_pair(Z, Y, 3, "dcov_u");
    return {dcov_u_from_sums(row_sums_impl<false>(Z, Y)), DcovKind::UStatistic};
}

Matrix dcov_grad(const Matrix& Z, const Matrix& Y) { return grad_impl<false>(Z, Y); }

}  // namespace serial

}  // namespace deepsum
