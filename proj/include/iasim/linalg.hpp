// SPDX-License-Identifier: Apache-2.0
//
// iasim - interference alignment link-level simulator and analytic SINR toolkit
// Copyright (C) 2026 The iasim authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef IASIM_LINALG_HPP
#define IASIM_LINALG_HPP

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace iasim
{

using cd = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;

// Raised when a channel draw produces a (numerically) singular matrix that a
// linear receiver would have to invert. Such draws have probability zero under
// continuous fading; callers discard and count them.
class DegenerateDraw : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

namespace linalg
{

// Rotate v so its first non-negligible component is real and positive.
inline void fix_phase_first_nonzero(Eigen::Ref<ComplexVector> v, double eps = 1e-12)
{
    const double scale = v.norm();
    for (Eigen::Index q = 0; q < v.size(); ++q)
    {
        const double mag = std::abs(v(q));
        if (mag > eps * scale)
        {
            v *= std::conj(v(q)) / mag;
            return;
        }
    }
}

// Rotate v so its largest-magnitude component is real and positive.
// Used when comparing sampled eigenvectors against moment formulas.
inline void fix_phase_largest(Eigen::Ref<ComplexVector> v)
{
    Eigen::Index best = 0;
    v.cwiseAbs().maxCoeff(&best);
    const double mag = std::abs(v(best));
    if (mag > 0.0)
        v *= std::conj(v(best)) / mag;
}

// Eigen-decomposition of a Hermitian matrix.
// Eigenvalues ascending; each eigenvector phase-normalized (first nonzero
// component real positive) so results are deterministic.
struct HermitianEigen
{
    RealVector values;
    ComplexMatrix vectors;
};

inline HermitianEigen eigh(const ComplexMatrix &A)
{
    if (A.rows() != A.cols())
        throw std::invalid_argument("eigh: matrix must be square");
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(A);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("eigh: eigen-decomposition did not converge");
    HermitianEigen out{solver.eigenvalues(), solver.eigenvectors()};
    for (Eigen::Index c = 0; c < out.vectors.cols(); ++c)
        fix_phase_first_nonzero(out.vectors.col(c));
    return out;
}

inline RealVector eigvalsh(const ComplexMatrix &A)
{
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(A, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("eigvalsh: eigen-decomposition did not converge");
    return solver.eigenvalues();
}

// Orthonormal basis of the column span of A (thin QR, R with positive real diagonal).
// Applied to a complex Gaussian matrix this yields a Haar-distributed frame.
inline ComplexMatrix orthonormalize(const ComplexMatrix &A)
{
    const Eigen::Index n = A.rows(), k = A.cols();
    Eigen::HouseholderQR<ComplexMatrix> qr(A);
    ComplexMatrix Q = qr.householderQ() * ComplexMatrix::Identity(n, k);
    const ComplexMatrix &R = qr.matrixQR();
    for (Eigen::Index j = 0; j < k; ++j)
    {
        const double mag = std::abs(R(j, j));
        if (mag > 0.0)
            Q.col(j) *= R(j, j) / mag;
    }
    return Q;
}

inline ComplexMatrix hstack(const ComplexMatrix &A, const ComplexMatrix &B)
{
    if (A.rows() != B.rows())
        throw std::invalid_argument("hstack: row counts differ (" + std::to_string(A.rows()) + " vs " +
                                    std::to_string(B.rows()) + ")");
    ComplexMatrix out(A.rows(), A.cols() + B.cols());
    out << A, B;
    return out;
}

// Projector onto the orthogonal complement of span(C); C must have orthonormal columns.
inline ComplexMatrix complement_projector(const ComplexMatrix &C)
{
    return ComplexMatrix::Identity(C.rows(), C.rows()) - C * C.adjoint();
}

inline double hermitian_defect(const ComplexMatrix &A)
{
    return (A - A.adjoint()).cwiseAbs().maxCoeff();
}

// ||X^H X - I||_F
inline double orthonormality_defect(const ComplexMatrix &X)
{
    return (X.adjoint() * X - ComplexMatrix::Identity(X.cols(), X.cols())).norm();
}

inline double trace_real(const ComplexMatrix &A) { return A.trace().real(); }

} // namespace linalg
} // namespace iasim

#endif
