#include "tengraph/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace tengraph {

std::size_t shape_size(const Shape& shape) noexcept {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

namespace {

std::string shape_string(const Shape& s) {
    std::string out = "(";
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) out += "x";
        out += std::to_string(s[i]);
    }
    return out + ")";
}

void require_same_shape(const DenseTensor& a, const DenseTensor& b, const char* what) {
    if (a.shape() != b.shape()) {
        throw ShapeError(std::string(what) + ": shape mismatch " + shape_string(a.shape()) +
                         " vs " + shape_string(b.shape()));
    }
}

}  // namespace

DenseTensor::DenseTensor(Shape shape, double fill) : shape_(std::move(shape)) {
    for (auto e : shape_) {
        if (e == 0) throw ShapeError("DenseTensor: extents must be positive, got " + shape_string(shape_));
    }
    values_.assign(shape_size(shape_), fill);
    compute_strides();
}

DenseTensor::DenseTensor(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
    for (auto e : shape_) {
        if (e == 0) throw ShapeError("DenseTensor: extents must be positive, got " + shape_string(shape_));
    }
    if (shape_size(shape_) != values_.size()) {
        throw ShapeError("DenseTensor: " + std::to_string(values_.size()) +
                         " values do not fill shape " + shape_string(shape_));
    }
    compute_strides();
}

void DenseTensor::compute_strides() {
    strides_.assign(shape_.size(), 1);
    for (std::size_t i = shape_.size(); i-- > 1;) strides_[i - 1] = strides_[i] * shape_[i];
}

DenseTensor DenseTensor::from_matrix(const Matrix& m) {
    DenseTensor t({static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())});
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) t(i, j) = m(i, j);
    return t;
}

std::size_t DenseTensor::extent(std::size_t mode) const {
    if (mode >= shape_.size()) {
        throw ShapeError("mode " + std::to_string(mode) + " out of range for rank " +
                         std::to_string(shape_.size()));
    }
    return shape_[mode];
}

double DenseTensor::at(std::span<const std::size_t> index) const {
    std::size_t off = 0;
    for (std::size_t i = 0; i < index.size(); ++i) off += index[i] * strides_[i];
    return values_[off];
}

double& DenseTensor::at(std::span<const std::size_t> index) {
    std::size_t off = 0;
    for (std::size_t i = 0; i < index.size(); ++i) off += index[i] * strides_[i];
    return values_[off];
}

Matrix DenseTensor::to_matrix() const {
    if (rank() != 2) throw ShapeError("to_matrix: tensor of rank " + std::to_string(rank()));
    Matrix m(shape_[0], shape_[1]);
    for (std::size_t i = 0; i < shape_[0]; ++i)
        for (std::size_t j = 0; j < shape_[1]; ++j) m(i, j) = (*this)(i, j);
    return m;
}

bool DenseTensor::all_finite() const noexcept {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double DenseTensor::frobenius_norm() const noexcept {
    double s = 0.0;
    for (double v : values_) s += v * v;
    return std::sqrt(s);
}

double max_abs_diff(const DenseTensor& a, const DenseTensor& b) {
    require_same_shape(a, b, "max_abs_diff");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
    return m;
}

double relative_error(const DenseTensor& a, const DenseTensor& b) {
    require_same_shape(a, b, "relative_error");
    double num = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a.data()[i] - b.data()[i];
        num += d * d;
    }
    return std::sqrt(num) / std::max(b.frobenius_norm(), 1e-300);
}

DenseTensor operator+(const DenseTensor& a, const DenseTensor& b) {
    require_same_shape(a, b, "operator+");
    DenseTensor r = a;
    for (std::size_t i = 0; i < r.size(); ++i) r.data()[i] += b.data()[i];
    return r;
}

DenseTensor operator-(const DenseTensor& a, const DenseTensor& b) {
    require_same_shape(a, b, "operator-");
    DenseTensor r = a;
    for (std::size_t i = 0; i < r.size(); ++i) r.data()[i] -= b.data()[i];
    return r;
}

DenseTensor operator*(double s, const DenseTensor& a) {
    DenseTensor r = a;
    for (double& v : r.data()) v *= s;
    return r;
}

DenseTensor mode_n_product(const DenseTensor& x, const Matrix& m, std::size_t mode) {
    const std::size_t extent = x.extent(mode);
    if (static_cast<std::size_t>(m.cols()) != extent) {
        throw ShapeError("mode_n_product: matrix has " + std::to_string(m.cols()) +
                         " columns but mode " + std::to_string(mode) + " has extent " +
                         std::to_string(extent));
    }
    Shape out_shape = x.shape();
    out_shape[mode] = static_cast<std::size_t>(m.rows());
    DenseTensor out(out_shape);

    std::size_t outer = 1;
    for (std::size_t i = 0; i < mode; ++i) outer *= x.shape()[i];
    const std::size_t inner = x.strides()[mode];
    const std::size_t rows = out_shape[mode];

    const double* src = x.data().data();
    double* dst = out.data().data();
    for (std::size_t o = 0; o < outer; ++o) {
        const double* xs = src + o * extent * inner;
        double* ys = dst + o * rows * inner;
        for (std::size_t a = 0; a < rows; ++a) {
            double* yrow = ys + a * inner;
            for (std::size_t b = 0; b < extent; ++b) {
                const double w = m(a, b);
                if (w == 0.0) continue;
                const double* xrow = xs + b * inner;
                for (std::size_t i = 0; i < inner; ++i) yrow[i] += w * xrow[i];
            }
        }
    }
    return out;
}

namespace {

// Column index of a multi-index under the cyclic unfolding convention.
std::size_t unfold_column(const Shape& shape, std::span<const std::size_t> idx, std::size_t mode) {
    const std::size_t r = shape.size();
    std::size_t col = 0;
    for (std::size_t step = 1; step < r; ++step) {
        const std::size_t k = (mode + step) % r;
        col = col * shape[k] + idx[k];
    }
    return col;
}

template <class F>
void for_each_index(const Shape& shape, F&& f) {
    std::vector<std::size_t> idx(shape.size(), 0);
    const std::size_t total = shape_size(shape);
    for (std::size_t n = 0; n < total; ++n) {
        f(std::span<const std::size_t>(idx), n);
        for (std::size_t k = shape.size(); k-- > 0;) {
            if (++idx[k] < shape[k]) break;
            idx[k] = 0;
        }
    }
}

}  // namespace

Matrix unfold(const DenseTensor& x, std::size_t mode) {
    const std::size_t rows = x.extent(mode);
    Matrix m(rows, x.size() / rows);
    for_each_index(x.shape(), [&](std::span<const std::size_t> idx, std::size_t flat) {
        m(idx[mode], unfold_column(x.shape(), idx, mode)) = x.data()[flat];
    });
    return m;
}

DenseTensor fold(const Matrix& m, const Shape& shape, std::size_t mode) {
    if (mode >= shape.size()) throw ShapeError("fold: mode out of range");
    const std::size_t total = shape_size(shape);
    if (static_cast<std::size_t>(m.rows()) != shape[mode] ||
        static_cast<std::size_t>(m.size()) != total) {
        throw ShapeError("fold: " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                         " matrix does not match shape " + shape_string(shape) + " along mode " +
                         std::to_string(mode));
    }
    DenseTensor x(shape);
    for_each_index(shape, [&](std::span<const std::size_t> idx, std::size_t flat) {
        x.data()[flat] = m(idx[mode], unfold_column(shape, idx, mode));
    });
    return x;
}

namespace {

constexpr int kMaxJacobiSweeps = 100;

// One-sided Jacobi on a tall (rows >= cols) matrix.
SvdResult jacobi_svd_tall(const Matrix& m) {
    const Eigen::Index rows = m.rows();
    const Eigen::Index cols = m.cols();
    Matrix a = m;
    Matrix v = Matrix::Identity(cols, cols);
    // Dot products of length `rows` carry O(rows * eps) relative rounding.
    const double tol = std::numeric_limits<double>::epsilon() * static_cast<double>(std::max<Eigen::Index>(rows, 4));

    const double scale = std::numeric_limits<double>::epsilon() * a.norm();
    const double negligible = scale * scale * static_cast<double>(rows);
    bool converged = cols < 2;
    for (int sweep = 0; sweep < kMaxJacobiSweeps && !converged; ++sweep) {
        bool rotated = false;
        for (Eigen::Index i = 0; i + 1 < cols; ++i) {
            for (Eigen::Index j = i + 1; j < cols; ++j) {
                const double alpha = a.col(i).squaredNorm();
                const double beta = a.col(j).squaredNorm();
                const double gamma = a.col(i).dot(a.col(j));
                // Columns at rounding level of the whole matrix carry no
                // signal; rotating them never settles.
                if (alpha <= negligible || beta <= negligible) continue;
                if (std::abs(gamma) <= tol * std::sqrt(alpha * beta)) continue;
                rotated = true;
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (Eigen::Index r = 0; r < rows; ++r) {
                    const double ai = a(r, i);
                    const double aj = a(r, j);
                    a(r, i) = c * ai - s * aj;
                    a(r, j) = s * ai + c * aj;
                }
                for (Eigen::Index r = 0; r < cols; ++r) {
                    const double vi = v(r, i);
                    const double vj = v(r, j);
                    v(r, i) = c * vi - s * vj;
                    v(r, j) = s * vi + c * vj;
                }
            }
        }
        converged = !rotated;
    }
    if (!converged) {
        throw NumericalError("svd: Jacobi iteration did not converge for " + std::to_string(rows) +
                             "x" + std::to_string(cols) + " matrix");
    }

    Vector s(cols);
    for (Eigen::Index i = 0; i < cols; ++i) s(i) = a.col(i).norm();

    std::vector<Eigen::Index> order(cols);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto x, auto y) { return s(x) > s(y); });

    SvdResult out;
    out.s.resize(cols);
    out.u = Matrix::Zero(rows, cols);
    out.v.resize(cols, cols);
    const double smax = cols > 0 ? s(order[0]) : 0.0;
    const double zero_cut = smax * 1e-13 * static_cast<double>(std::max(rows, cols));
    std::vector<Eigen::Index> deficient;
    for (Eigen::Index k = 0; k < cols; ++k) {
        const Eigen::Index src = order[k];
        out.s(k) = s(src);
        out.v.col(k) = v.col(src);
        if (s(src) > zero_cut && s(src) > 0.0) {
            out.u.col(k) = a.col(src) / s(src);
        } else {
            deficient.push_back(k);
        }
    }
    // Complete the left basis for (numerically) zero singular values.
    Eigen::Index candidate = 0;
    for (Eigen::Index k : deficient) {
        for (; candidate < rows; ++candidate) {
            Vector e = Vector::Unit(rows, candidate);
            for (int pass = 0; pass < 2; ++pass) {
                for (Eigen::Index q = 0; q < cols; ++q) {
                    if (q == k) continue;
                    e -= out.u.col(q).dot(e) * out.u.col(q);
                }
            }
            const double n = e.norm();
            if (n > 1e-6) {
                out.u.col(k) = e / n;
                ++candidate;
                break;
            }
        }
    }
    return out;
}

void apply_sign_convention(SvdResult& r) {
    for (Eigen::Index k = 0; k < r.u.cols(); ++k) {
        Eigen::Index arg = 0;
        r.u.col(k).cwiseAbs().maxCoeff(&arg);
        if (r.u(arg, k) < 0.0) {
            r.u.col(k) *= -1.0;
            r.v.col(k) *= -1.0;
        }
    }
}

}  // namespace

SvdResult svd(const Matrix& m) {
    if (!m.allFinite()) throw NumericalError("svd: non-finite entries");
    SvdResult r;
    if (m.rows() >= m.cols()) {
        r = jacobi_svd_tall(m);
    } else {
        SvdResult t = jacobi_svd_tall(m.transpose());
        r.u = std::move(t.v);
        r.s = std::move(t.s);
        r.v = std::move(t.u);
    }
    apply_sign_convention(r);
    return r;
}

Matrix leading_left_singular_vectors(const Matrix& m, std::size_t rank) {
    if (rank > static_cast<std::size_t>(m.rows())) {
        throw ShapeError("leading_left_singular_vectors: rank " + std::to_string(rank) +
                         " exceeds row count " + std::to_string(m.rows()));
    }
    // Thin SVD of a wide matrix only exposes min(rows, cols) vectors; pad
    // with zero columns so every requested direction exists.
    if (static_cast<std::size_t>(m.cols()) < rank) {
        Matrix padded = Matrix::Zero(m.rows(), rank);
        padded.leftCols(m.cols()) = m;
        return svd(padded).u.leftCols(rank);
    }
    return svd(m).u.leftCols(rank);
}

HosvdFactorization truncated_hosvd(const DenseTensor& x, std::span<const std::size_t> ranks) {
    if (ranks.size() != x.rank()) {
        throw ShapeError("truncated_hosvd: " + std::to_string(ranks.size()) + " ranks for a rank-" +
                         std::to_string(x.rank()) + " tensor");
    }
    HosvdFactorization f;
    for (std::size_t mode = 0; mode < x.rank(); ++mode) {
        if (ranks[mode] < 1 || ranks[mode] > x.extent(mode)) {
            throw ShapeError("truncated_hosvd: rank " + std::to_string(ranks[mode]) + " invalid for mode " +
                             std::to_string(mode) + " of extent " + std::to_string(x.extent(mode)));
        }
        f.factors.push_back(leading_left_singular_vectors(unfold(x, mode), ranks[mode]));
    }
    f.core = x;
    for (std::size_t mode = 0; mode < x.rank(); ++mode) {
        f.core = mode_n_product(f.core, f.factors[mode].transpose(), mode);
    }
    return f;
}

HosvdFactorization truncated_hosvd(const DenseTensor& x, std::initializer_list<std::size_t> ranks) {
    const std::vector<std::size_t> r(ranks);
    return truncated_hosvd(x, std::span<const std::size_t>(r));
}

DenseTensor reconstruct(const HosvdFactorization& f) {
    DenseTensor x = f.core;
    for (std::size_t mode = 0; mode < f.factors.size(); ++mode) x = mode_n_product(x, f.factors[mode], mode);
    return x;
}

Matrix row_softmax(const Matrix& m) {
    Matrix out(m.rows(), m.cols());
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        const double mx = m.row(i).maxCoeff();
        double sum = 0.0;
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            out(i, j) = std::exp(m(i, j) - mx);
            sum += out(i, j);
        }
        out.row(i) /= sum;
    }
    return out;
}

DenseTensor relu(const DenseTensor& x) {
    DenseTensor r = x;
    for (double& v : r.data()) v = std::max(v, 0.0);
    return r;
}

Matrix relu(const Matrix& m) { return m.cwiseMax(0.0); }

}  // namespace tengraph
