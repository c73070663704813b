#include "tobitkf/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <utility>

namespace tobitkf {

namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw DimensionError(std::string(op) + ": shape mismatch " + a.shape() + " vs " +
                             b.shape());
    }
}

void require_same_size(const Vector& a, const Vector& b, const char* op) {
    if (a.size() != b.size()) {
        throw DimensionError(std::string(op) + ": length mismatch " + std::to_string(a.size()) +
                             " vs " + std::to_string(b.size()));
    }
}

}  // namespace

SingularMatrixError::SingularMatrixError(std::size_t pivot, double magnitude)
    : std::runtime_error("singular matrix: pivot " + std::to_string(pivot) + " has magnitude " +
                         std::to_string(magnitude)),
      pivot_(pivot),
      magnitude_(magnitude) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& row : rows) {
        if (row.size() != cols_) {
            throw DimensionError("ragged matrix initializer");
        }
        data_.insert(data_.end(), row.begin(), row.end());
    }
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        m(i, i) = 1.0;
    }
    return m;
}

Matrix Matrix::diagonal(std::span<const double> diag) {
    Matrix m(diag.size(), diag.size());
    for (std::size_t i = 0; i < diag.size(); ++i) {
        m(i, i) = diag[i];
    }
    return m;
}

Matrix Matrix::diagonal(const Vector& diag) { return diagonal(diag.data()); }

Matrix Matrix::column(const Vector& v) {
    Matrix m(v.size(), 1);
    for (std::size_t i = 0; i < v.size(); ++i) {
        m(i, 0) = v[i];
    }
    return m;
}

std::string Matrix::shape() const {
    return "(" + std::to_string(rows_) + "x" + std::to_string(cols_) + ")";
}

Matrix Matrix::transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r) {
        for (std::size_t c = 0; c < cols_; ++c) {
            t(c, r) = (*this)(r, c);
        }
    }
    return t;
}

double Matrix::trace() const {
    double t = 0.0;
    for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) {
        t += (*this)(i, i);
    }
    return t;
}

Vector Matrix::diag() const {
    Vector d(std::min(rows_, cols_));
    for (std::size_t i = 0; i < d.size(); ++i) {
        d[i] = (*this)(i, i);
    }
    return d;
}

double Matrix::norm_inf() const {
    double best = 0.0;
    for (std::size_t r = 0; r < rows_; ++r) {
        double sum = 0.0;
        for (std::size_t c = 0; c < cols_; ++c) {
            sum += std::abs((*this)(r, c));
        }
        best = std::max(best, sum);
    }
    return best;
}

double Matrix::max_abs() const {
    double best = 0.0;
    for (double v : data_) {
        best = std::max(best, std::abs(v));
    }
    return best;
}

bool Matrix::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Matrix& Matrix::operator+=(const Matrix& o) {
    require_same_shape(*this, o, "add");
    for (std::size_t i = 0; i < data_.size(); ++i) {
        data_[i] += o.data_[i];
    }
    return *this;
}

Matrix& Matrix::operator-=(const Matrix& o) {
    require_same_shape(*this, o, "subtract");
    for (std::size_t i = 0; i < data_.size(); ++i) {
        data_[i] -= o.data_[i];
    }
    return *this;
}

Matrix& Matrix::operator*=(double s) {
    for (double& v : data_) {
        v *= s;
    }
    return *this;
}

double Vector::squared_norm() const {
    return std::inner_product(data_.begin(), data_.end(), data_.begin(), 0.0);
}

double Vector::norm() const { return std::sqrt(squared_norm()); }

bool Vector::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Vector& Vector::operator+=(const Vector& o) {
    require_same_size(*this, o, "add");
    for (std::size_t i = 0; i < data_.size(); ++i) {
        data_[i] += o.data_[i];
    }
    return *this;
}

Vector& Vector::operator-=(const Vector& o) {
    require_same_size(*this, o, "subtract");
    for (std::size_t i = 0; i < data_.size(); ++i) {
        data_[i] -= o.data_[i];
    }
    return *this;
}

Vector& Vector::operator*=(double s) {
    for (double& v : data_) {
        v *= s;
    }
    return *this;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator*(Matrix a, double s) { return a *= s; }
Matrix operator*(double s, Matrix a) { return a *= s; }
Vector operator+(Vector a, const Vector& b) { return a += b; }
Vector operator-(Vector a, const Vector& b) { return a -= b; }
Vector operator*(Vector a, double s) { return a *= s; }
Vector operator*(double s, Vector a) { return a *= s; }

Matrix mat_mul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw DimensionError("mat_mul: cannot multiply " + a.shape() + " by " + b.shape());
    }
    Matrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            for (std::size_t j = 0; j < b.cols(); ++j) {
                out(i, j) += aik * b(k, j);
            }
        }
    }
    return out;
}

Vector mat_vec(const Matrix& a, const Vector& x) {
    if (a.cols() != x.size()) {
        throw DimensionError("mat_vec: cannot multiply " + a.shape() + " by vector of length " +
                             std::to_string(x.size()));
    }
    Vector out(a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double sum = 0.0;
        for (std::size_t k = 0; k < a.cols(); ++k) {
            sum += a(i, k) * x[k];
        }
        out[i] = sum;
    }
    return out;
}

Matrix operator*(const Matrix& a, const Matrix& b) { return mat_mul(a, b); }
Vector operator*(const Matrix& a, const Vector& x) { return mat_vec(a, x); }

Matrix outer(const Vector& x) {
    Matrix m(x.size(), x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        for (std::size_t j = 0; j < x.size(); ++j) {
            m(i, j) = x[i] * x[j];
        }
    }
    return m;
}

Matrix solve(const Matrix& a, const Matrix& b) {
    if (!a.is_square()) {
        throw DimensionError("solve: coefficient matrix is not square " + a.shape());
    }
    if (b.rows() != a.rows()) {
        throw DimensionError("solve: right-hand side " + b.shape() + " does not match " +
                             a.shape());
    }
    const std::size_t n = a.rows();
    const std::size_t nrhs = b.cols();
    const double tol = 1e-12 * a.norm_inf();
    Matrix lu = a;
    Matrix x = b;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(lu(r, col)) > std::abs(lu(pivot, col))) {
                pivot = r;
            }
        }
        const double mag = std::abs(lu(pivot, col));
        if (!(mag > tol) || mag == 0.0) {
            throw SingularMatrixError(col, mag);
        }
        if (pivot != col) {
            for (std::size_t c = 0; c < n; ++c) {
                std::swap(lu(col, c), lu(pivot, c));
            }
            for (std::size_t c = 0; c < nrhs; ++c) {
                std::swap(x(col, c), x(pivot, c));
            }
        }
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = lu(r, col) / lu(col, col);
            if (f == 0.0) {
                continue;
            }
            for (std::size_t c = col; c < n; ++c) {
                lu(r, c) -= f * lu(col, c);
            }
            for (std::size_t c = 0; c < nrhs; ++c) {
                x(r, c) -= f * x(col, c);
            }
        }
    }
    for (std::size_t ri = n; ri-- > 0;) {
        for (std::size_t c = 0; c < nrhs; ++c) {
            double sum = x(ri, c);
            for (std::size_t k = ri + 1; k < n; ++k) {
                sum -= lu(ri, k) * x(k, c);
            }
            x(ri, c) = sum / lu(ri, ri);
        }
    }
    return x;
}

Vector solve(const Matrix& a, const Vector& b) {
    const Matrix x = solve(a, Matrix::column(b));
    Vector out(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) {
        out[i] = x(i, 0);
    }
    return out;
}

Matrix symmetrize(const Matrix& m) {
    if (!m.is_square()) {
        throw DimensionError("symmetrize: matrix is not square " + m.shape());
    }
    Matrix s(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            s(i, j) = 0.5 * (m(i, j) + m(j, i));
        }
    }
    return s;
}

SymmetricEigen eigen_symmetric(const Matrix& m) {
    if (!m.is_square()) {
        throw DimensionError("eigen_symmetric: matrix is not square " + m.shape());
    }
    const std::size_t n = m.rows();
    Matrix a = symmetrize(m);
    Matrix v = Matrix::identity(n);
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                total += a(i, j) * a(i, j);
                if (i != j) {
                    off += a(i, j) * a(i, j);
                }
            }
        }
        if (off <= 1e-30 * total || off == 0.0) {
            break;
        }
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) {
                    continue;
                }
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p);
                    const double vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });
    SymmetricEigen out{Vector(n), Matrix(n, n)};
    for (std::size_t k = 0; k < n; ++k) {
        out.values[k] = a(order[k], order[k]);
        for (std::size_t r = 0; r < n; ++r) {
            out.vectors(r, k) = v(r, order[k]);
        }
    }
    return out;
}

double min_eigenvalue(const Matrix& m) {
    if (m.rows() == 0) {
        return 0.0;
    }
    return eigen_symmetric(m).values[0];
}

Matrix symmetrize_psd(const Matrix& m, double floor) {
    const Matrix sym = symmetrize(m);
    const std::size_t n = sym.rows();
    const auto eig = eigen_symmetric(sym);
    bool clipped = false;
    for (std::size_t k = 0; k < n; ++k) {
        clipped = clipped || eig.values[k] < floor;
    }
    // Reconstruction would only add rounding noise to an already valid matrix.
    if (!clipped) {
        return sym;
    }
    Matrix out(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        const double lambda = std::max(eig.values[k], floor);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                out(i, j) += lambda * eig.vectors(i, k) * eig.vectors(j, k);
            }
        }
    }
    return symmetrize(out);
}

Matrix cholesky_psd(const Matrix& m) {
    if (!m.is_square()) {
        throw DimensionError("cholesky_psd: matrix is not square " + m.shape());
    }
    const std::size_t n = m.rows();
    const double tol = 1e-12 * std::max(m.max_abs(), 1e-300);
    Matrix l(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double d = m(j, j);
        for (std::size_t k = 0; k < j; ++k) {
            d -= l(j, k) * l(j, k);
        }
        if (d < -tol) {
            throw std::domain_error("cholesky_psd: matrix is not positive semidefinite (pivot " +
                                    std::to_string(j) + " = " + std::to_string(d) + ")");
        }
        if (d <= tol) {
            // Rank-deficient direction: the remaining column must vanish too.
            for (std::size_t i = j + 1; i < n; ++i) {
                double s = m(i, j);
                for (std::size_t k = 0; k < j; ++k) {
                    s -= l(i, k) * l(j, k);
                }
                if (std::abs(s) > std::sqrt(tol) * std::sqrt(std::max(m.max_abs(), 1e-300))) {
                    throw std::domain_error(
                        "cholesky_psd: matrix is not positive semidefinite (column " +
                        std::to_string(j) + ")");
                }
            }
            continue;
        }
        const double ljj = std::sqrt(d);
        l(j, j) = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = m(i, j);
            for (std::size_t k = 0; k < j; ++k) {
                s -= l(i, k) * l(j, k);
            }
            l(i, j) = s / ljj;
        }
    }
    return l;
}

}  // namespace tobitkf
