#include "ddes/linalg.hpp"

#include "ddes/errors.hpp"
#include "ddes/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace ddes::linalg {

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix& Matrix::operator+=(const Matrix& o) {
    if (rows_ != o.rows_ || cols_ != o.cols_) throw ContractError("matrix shape mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
}

Matrix& Matrix::operator-=(const Matrix& o) {
    if (rows_ != o.rows_ || cols_ != o.cols_) throw ContractError("matrix shape mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
}

Matrix& Matrix::operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
}

void Matrix::matvec(const double* x, double* y) const {
    kernels::matvec(data_.data(), rows_, cols_, x, y);
}

Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw ContractError("matrix shape mismatch");
    Matrix c(a.rows(), b.cols(), 0.0);
    // ikj order keeps the inner update contiguous
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double* crow = c.data() + i * c.cols();
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            kernels::axpy(aik, b.data() + k * b.cols(), crow, b.cols());
        }
    }
    return c;
}

Matrix operator+(Matrix a, const Matrix& b) {
    a += b;
    return a;
}

Matrix operator-(Matrix a, const Matrix& b) {
    a -= b;
    return a;
}

Matrix operator*(Matrix a, double s) {
    a *= s;
    return a;
}

Matrix transpose(const Matrix& a) {
    Matrix t(a.cols(), a.rows());
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = 0; c < a.cols(); ++c) t(c, r) = a(r, c);
    return t;
}

double one_norm(const Matrix& a) {
    double best = 0.0;
    for (std::size_t c = 0; c < a.cols(); ++c) {
        double s = 0.0;
        for (std::size_t r = 0; r < a.rows(); ++r) s += std::abs(a(r, c));
        best = std::max(best, s);
    }
    return best;
}

double frobenius_norm(const Matrix& a) {
    return std::sqrt(kernels::sum_sq(a.data(), a.rows() * a.cols()));
}

namespace {

// Largest eigenvalue of a symmetric matrix by cyclic Jacobi rotations.
double jacobi_max_eigenvalue(Matrix s) {
    const std::size_t n = s.rows();
    if (n == 0) return 0.0;
    if (n == 1) return s(0, 0);
    const double scale = std::max(frobenius_norm(s), 1e-300);
    for (int sweep = 0; sweep < 60; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p + 1 < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += s(p, q) * s(p, q);
        if (std::sqrt(off) < 1e-15 * scale) break;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = s(p, q);
                if (std::abs(apq) < 1e-300) continue;
                const double theta = (s(q, q) - s(p, p)) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double sn = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double skp = s(k, p), skq = s(k, q);
                    s(k, p) = c * skp - sn * skq;
                    s(k, q) = sn * skp + c * skq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double spk = s(p, k), sqk = s(q, k);
                    s(p, k) = c * spk - sn * sqk;
                    s(q, k) = sn * spk + c * sqk;
                }
            }
        }
    }
    double best = s(0, 0);
    for (std::size_t i = 1; i < n; ++i) best = std::max(best, s(i, i));
    return best;
}

} // namespace

double spectral_norm(const Matrix& a) {
    Matrix s = transpose(a) * a;
    const double lam = jacobi_max_eigenvalue(std::move(s));
    return std::sqrt(std::max(lam, 0.0));
}

Lu lu_factor(Matrix a) {
    if (a.rows() != a.cols()) throw ContractError("lu_factor requires a square matrix");
    const std::size_t n = a.rows();
    Lu f{std::move(a), std::vector<int>(n), false};
    Matrix& m = f.lu;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        double best = std::abs(m(k, k));
        for (std::size_t r = k + 1; r < n; ++r) {
            if (std::abs(m(r, k)) > best) {
                best = std::abs(m(r, k));
                piv = r;
            }
        }
        f.piv[k] = static_cast<int>(piv);
        if (best == 0.0) {
            f.singular = true;
            continue;
        }
        if (piv != k)
            for (std::size_t c = 0; c < n; ++c) std::swap(m(k, c), m(piv, c));
        const double inv = 1.0 / m(k, k);
        for (std::size_t r = k + 1; r < n; ++r) {
            const double l = m(r, k) * inv;
            m(r, k) = l;
            if (l != 0.0) kernels::axpy(-l, m.data() + k * n + (k + 1), m.data() + r * n + (k + 1),
                                        n - k - 1);
        }
    }
    return f;
}

void lu_solve(const Lu& f, double* b) {
    if (f.singular) throw ContractError("singular matrix in lu_solve");
    const Matrix& m = f.lu;
    const std::size_t n = m.rows();
    // Row interchanges first, then the two triangular solves; interleaving
    // them corrupts entries that a later pivot swap still has to move.
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t p = static_cast<std::size_t>(f.piv[k]);
        if (p != k) std::swap(b[k], b[p]);
    }
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t r = k + 1; r < n; ++r) b[r] -= m(r, k) * b[k];
    }
    for (std::size_t k = n; k-- > 0;) {
        for (std::size_t c = k + 1; c < n; ++c) b[k] -= m(k, c) * b[c];
        b[k] /= m(k, k);
    }
}

Matrix lu_solve(const Lu& f, const Matrix& b) {
    Matrix x = b;
    std::vector<double> col(b.rows());
    for (std::size_t c = 0; c < b.cols(); ++c) {
        for (std::size_t r = 0; r < b.rows(); ++r) col[r] = b(r, c);
        lu_solve(f, col.data());
        for (std::size_t r = 0; r < b.rows(); ++r) x(r, c) = col[r];
    }
    return x;
}

Matrix inverse(const Matrix& a) {
    return lu_solve(lu_factor(a), Matrix::identity(a.rows()));
}

Matrix expm(const Matrix& a) {
    if (a.rows() != a.cols()) throw ContractError("expm requires a square matrix");
    const std::size_t n = a.rows();
    if (n == 0) return a;
    if (n > 1536) throw ContractError("expm supports desk-scale matrices only");

    static const double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                               1187353796428800.0,  129060195264000.0,   10559470521600.0,
                               670442572800.0,      33522128640.0,       1323241920.0,
                               40840800.0,          960960.0,            16380.0,
                               182.0,               1.0};
    const double theta13 = 5.371920351148152;

    Matrix as = a;
    int squarings = 0;
    const double nrm = one_norm(a);
    if (nrm > theta13) {
        squarings = static_cast<int>(std::ceil(std::log2(nrm / theta13)));
        as *= std::pow(2.0, -squarings);
    }

    const Matrix i = Matrix::identity(n);
    const Matrix a2 = as * as;
    const Matrix a4 = a2 * a2;
    const Matrix a6 = a4 * a2;

    Matrix u_inner = a6 * b[13] + a4 * b[11] + a2 * b[9];
    Matrix u = as * (a6 * u_inner + a6 * b[7] + a4 * b[5] + a2 * b[3] + i * b[1]);
    Matrix v_inner = a6 * b[12] + a4 * b[10] + a2 * b[8];
    Matrix v = a6 * v_inner + a6 * b[6] + a4 * b[4] + a2 * b[2] + i * b[0];

    Matrix r = lu_solve(lu_factor(v - u), v + u);
    for (int s = 0; s < squarings; ++s) r = r * r;
    return r;
}

void phi_exp(const Matrix& a, double h, Matrix& e, Matrix& p1, Matrix& p2) {
    if (a.rows() != a.cols()) throw ContractError("phi_exp requires a square matrix");
    if (!(h > 0.0)) throw ContractError("phi_exp requires h > 0");
    const std::size_t n = a.rows();
    Matrix w(3 * n, 3 * n, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) w(r, c) = h * a(r, c);
        w(r, n + r) = h;
        w(n + r, 2 * n + r) = h;
    }
    const Matrix ew = expm(w);
    e = Matrix(n, n);
    p1 = Matrix(n, n);
    p2 = Matrix(n, n);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
            e(r, c) = ew(r, c);
            p1(r, c) = ew(r, n + c) / h;
            p2(r, c) = ew(r, 2 * n + c) / (h * h);
        }
    }
}

namespace {

double phi_series(double z, int shift) {
    // sum_{k>=0} z^k / (k + shift)!
    double term = 1.0;
    for (int j = 1; j < shift; ++j) term /= static_cast<double>(j + 1);
    double sum = term;
    for (int k = 1; k < 40; ++k) {
        term *= z / static_cast<double>(k + shift);
        sum += term;
        if (std::abs(term) < 1e-20 * std::abs(sum)) break;
    }
    return sum;
}

} // namespace

double phi1(double z) {
    if (std::abs(z) < 0.5) return phi_series(z, 1);
    return std::expm1(z) / z;
}

double phi2(double z) {
    if (std::abs(z) < 0.5) return phi_series(z, 2);
    return (std::expm1(z) - z) / (z * z);
}

} // namespace ddes::linalg
