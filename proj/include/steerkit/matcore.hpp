#pragma once

// Dense complex matrix/vector primitives shared by all steerkit modules.
// Everything here is a pure function of its inputs; matrices are small
// (<= 32x32 in practice) so we use dense Eigen throughout.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace steerkit {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using Ket = Eigen::VectorXcd;

inline constexpr double HERM_TOL = 1e-10;
inline constexpr double NORM_TOL = 1e-10;
inline constexpr double PSD_TOL = 1e-9;

inline ComplexMatrix identity(Eigen::Index d) {
    return ComplexMatrix::Identity(d, d);
}

/// Largest deviation from Hermiticity, max_ij |A_ij - conj(A_ji)|.
inline double hermiticity_defect(const ComplexMatrix& m) {
    if (m.rows() != m.cols()) {
        throw std::invalid_argument("hermiticity_defect: matrix not square");
    }
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

inline bool is_hermitian(const ComplexMatrix& m, double tol = HERM_TOL) {
    return m.rows() == m.cols() && hermiticity_defect(m) <= tol;
}

inline void require_hermitian(const ComplexMatrix& m, const char* where) {
    if (!is_hermitian(m)) {
        throw std::invalid_argument(std::string(where) +
                                    ": input not Hermitian within tolerance");
    }
}

/// Tensor (Kronecker) product.
inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
    ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

/// Trace out the first tensor factor of an operator on C^dA (x) C^dB.
inline ComplexMatrix partial_trace_A(const ComplexMatrix& m, Eigen::Index dA,
                                     Eigen::Index dB) {
    if (m.rows() != dA * dB || m.cols() != dA * dB) {
        throw std::invalid_argument("partial_trace_A: dimension mismatch");
    }
    ComplexMatrix out = ComplexMatrix::Zero(dB, dB);
    for (Eigen::Index i = 0; i < dA; ++i) {
        out += m.block(i * dB, i * dB, dB, dB);
    }
    return out;
}

/// Transpose in the fixed computational basis (no conjugation).
inline ComplexMatrix transpose(const ComplexMatrix& m) {
    return m.transpose();
}

/// Operator norm of a Hermitian matrix (largest |eigenvalue|).
inline double op_norm_hermitian(const ComplexMatrix& m) {
    require_hermitian(m, "op_norm_hermitian");
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(m,
                                                        Eigen::EigenvaluesOnly);
    const auto& ev = solver.eigenvalues();
    return std::max(std::abs(ev.minCoeff()), std::abs(ev.maxCoeff()));
}

/// Eigenvector for the largest eigenvalue of a Hermitian matrix.
inline Ket top_eigenvector(const ComplexMatrix& m) {
    require_hermitian(m, "top_eigenvector");
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(m);
    return solver.eigenvectors().col(m.rows() - 1);
}

inline bool is_psd(const ComplexMatrix& m, double tol = PSD_TOL) {
    require_hermitian(m, "is_psd");
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(m,
                                                        Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff() >= -tol;
}

inline ComplexMatrix projector(const Ket& v) {
    return v * v.adjoint();
}

inline bool is_normalized(const Ket& v, double tol = NORM_TOL) {
    return std::abs(v.squaredNorm() - 1.0) <= tol;
}

}  // namespace steerkit
