#include "deepsum/matrix.hpp"

#include <cmath>
#include <string>

#include "deepsum/error.hpp"

namespace deepsum {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_)
        throw ShapeError("matrix data length " + std::to_string(data_.size()) + " != " +
                         std::to_string(rows_) + "x" + std::to_string(cols_));
}

bool Matrix::all_finite() const noexcept {
    for (double v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

Matrix take_rows(const Matrix& m, std::span<const std::size_t> idx) {
    Matrix out(idx.size(), m.cols());
    for (std::size_t r = 0; r < idx.size(); ++r) {
        if (idx[r] >= m.rows()) throw ShapeError("row index out of range");
        auto src = m.row(idx[r]);
        auto dst = out.row(r);
        std::copy(src.begin(), src.end(), dst.begin());
    }
    return out;
}

Matrix hconcat(std::span<const Matrix> parts) {
    if (parts.empty()) return {};
    const std::size_t n = parts.front().rows();
    std::size_t cols = 0;
    for (const auto& p : parts) {
        if (p.rows() != n) throw ShapeError("hconcat: row counts differ");
        cols += p.cols();
    }
    Matrix out(n, cols);
    for (std::size_t r = 0; r < n; ++r) {
        std::size_t c0 = 0;
        for (const auto& p : parts) {
            auto src = p.row(r);
            std::copy(src.begin(), src.end(), out.row(r).begin() + static_cast<std::ptrdiff_t>(c0));
            c0 += p.cols();
        }
    }
    return out;
}

std::vector<double> column_means(const Matrix& m) {
    std::vector<double> mu(m.cols(), 0.0);
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c) mu[c] += m(r, c);
    for (double& v : mu) v /= static_cast<double>(m.rows());
    return mu;
}

Matrix covariance(const Matrix& m) {
    const auto mu = column_means(m);
    const std::size_t d = m.cols();
    Matrix cov(d, d);
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t a = 0; a < d; ++a) {
            const double da = m(r, a) - mu[a];
            for (std::size_t b = a; b < d; ++b) cov(a, b) += da * (m(r, b) - mu[b]);
        }
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = a; b < d; ++b) {
            cov(a, b) /= static_cast<double>(m.rows());
            cov(b, a) = cov(a, b);
        }
    return cov;
}

}  // namespace deepsum
