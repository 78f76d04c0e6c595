#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "tengraph/error.hpp"

namespace tengraph {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Shape = std::vector<std::size_t>;

/// Dense N-way array of doubles stored row-major (last index fastest).
///
/// Modes are 0-based throughout the library: a data tensor of extents
/// b x T x N x D has its time mode at index 1 and its node mode at index 2.
class DenseTensor {
public:
    DenseTensor() = default;
    explicit DenseTensor(Shape shape, double fill = 0.0);
    DenseTensor(Shape shape, std::vector<double> values);

    static DenseTensor from_matrix(const Matrix& m);

    const Shape& shape() const noexcept { return shape_; }
    const Shape& strides() const noexcept { return strides_; }
    std::size_t rank() const noexcept { return shape_.size(); }
    std::size_t extent(std::size_t mode) const;
    std::size_t size() const noexcept { return values_.size(); }

    std::span<const double> data() const noexcept { return values_; }
    std::span<double> data() noexcept { return values_; }

    template <class... I>
    double& operator()(I... idx) noexcept {
        return values_[offset_of(static_cast<std::size_t>(idx)...)];
    }
    template <class... I>
    double operator()(I... idx) const noexcept {
        return values_[offset_of(static_cast<std::size_t>(idx)...)];
    }

    double at(std::span<const std::size_t> index) const;
    double& at(std::span<const std::size_t> index);

    /// Rank-2 tensor as a matrix.
    Matrix to_matrix() const;

    bool all_finite() const noexcept;
    double frobenius_norm() const noexcept;

    friend bool operator==(const DenseTensor&, const DenseTensor&) = default;

private:
    template <class... I>
    std::size_t offset_of(I... idx) const noexcept {
        std::size_t off = 0;
        std::size_t mode = 0;
        ((off += idx * strides_[mode++]), ...);
        return off;
    }

    void compute_strides();

    Shape shape_;
    Shape strides_;
    std::vector<double> values_;
};

std::size_t shape_size(const Shape& shape) noexcept;

/// Largest absolute entrywise difference. Throws ShapeError on mismatch.
double max_abs_diff(const DenseTensor& a, const DenseTensor& b);
/// ||a - b||_F / max(||b||_F, tiny).
double relative_error(const DenseTensor& a, const DenseTensor& b);

DenseTensor operator+(const DenseTensor& a, const DenseTensor& b);
DenseTensor operator-(const DenseTensor& a, const DenseTensor& b);
DenseTensor operator*(double s, const DenseTensor& a);

/// result[.., i_mode = a, ..] = sum_b m(a, b) * x[.., i_mode = b, ..]
DenseTensor mode_n_product(const DenseTensor& x, const Matrix& m, std::size_t mode);

/// Mode-n unfolding. Row index is i_mode; the column index enumerates the
/// remaining modes in cyclic order mode+1, ..., rank-1, 0, ..., mode-1 with
/// the last of those varying fastest.
Matrix unfold(const DenseTensor& x, std::size_t mode);
/// Inverse of unfold for a tensor of the given shape.
DenseTensor fold(const Matrix& m, const Shape& shape, std::size_t mode);

struct SvdResult {
    Matrix u;  ///< rows x p, orthonormal columns
    Vector s;  ///< p singular values, non-increasing
    Matrix v;  ///< cols x p, orthonormal columns
};

/// Thin SVD (p = min(rows, cols)) by one-sided Jacobi rotations.
///
/// Sign convention: the largest-magnitude entry of every left singular
/// vector is non-negative. Columns belonging to zero singular values are
/// completed to an orthonormal set. Throws NumericalError when the sweep
/// cap is exhausted.
SvdResult svd(const Matrix& m);

struct HosvdFactorization {
    DenseTensor core;
    std::vector<Matrix> factors;
};

HosvdFactorization truncated_hosvd(const DenseTensor& x, std::span<const std::size_t> ranks);
HosvdFactorization truncated_hosvd(const DenseTensor& x, std::initializer_list<std::size_t> ranks);
DenseTensor reconstruct(const HosvdFactorization& f);

/// Leading `rank` left singular vectors of m.
Matrix leading_left_singular_vectors(const Matrix& m, std::size_t rank);

/// Numerically stable softmax of every row.
Matrix row_softmax(const Matrix& m);
DenseTensor relu(const DenseTensor& x);
Matrix relu(const Matrix& m);

}  // namespace tengraph
