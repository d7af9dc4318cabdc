#pragma once

#include <cstddef>
#include <vector>

namespace ddes::linalg {

// Dense row-major real matrix. Sized for desk-scale problems (dims <= 512).
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    Matrix& operator+=(const Matrix& o);
    Matrix& operator-=(const Matrix& o);
    Matrix& operator*=(double s);

    // y = A x
    void matvec(const double* x, double* y) const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(Matrix a, double s);

Matrix transpose(const Matrix& a);
double one_norm(const Matrix& a);
double frobenius_norm(const Matrix& a);
// Largest singular value, via cyclic Jacobi on A^T A.
double spectral_norm(const Matrix& a);

struct Lu {
    Matrix lu;
    std::vector<int> piv;
    bool singular = false;
};

Lu lu_factor(Matrix a);
void lu_solve(const Lu& f, double* b);
Matrix lu_solve(const Lu& f, const Matrix& b);
Matrix inverse(const Matrix& a);

// Matrix exponential, Pade order 13 with scaling and squaring.
Matrix expm(const Matrix& a);

// e = exp(hA), p1 = phi1(hA), p2 = phi2(hA), extracted from one augmented
// exponential exp(h [[A,I,0],[0,0,I],[0,0,0]]).
void phi_exp(const Matrix& a, double h, Matrix& e, Matrix& p1, Matrix& p2);

// phi1(z) = (e^z - 1)/z and phi2(z) = (e^z - 1 - z)/z^2 with a series branch
// near zero so small steps stay fully accurate.
double phi1(double z);
double phi2(double z);

} // namespace ddes::linalg
