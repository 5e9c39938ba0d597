#include "qnewton/spectral.hpp"

#include <cmath>

#include "qnewton/errors.hpp"

namespace qnewton {
namespace {

constexpr double kSingularRelTol = 1e-14;

void require_finite(const Matrix& a) {
    if (!a.allFinite()) throw InvalidInput("matrix has non-finite entries");
}

}  // namespace

SymMatrix::SymMatrix(const Matrix& a) {
    if (a.rows() != a.cols()) throw InvalidInput("SymMatrix requires a square matrix");
    entries_ = (a + a.transpose()) * 0.5;
}

SymMatrix SymMatrix::identity(Eigen::Index dim) { return SymMatrix(Matrix::Identity(dim, dim)); }

SymMatrix SymMatrix::diagonal(const Vector& diag) { return SymMatrix(Matrix(diag.asDiagonal())); }

SymMatrix SymMatrix::shifted(double shift) const {
    SymMatrix out = *this;
    out.entries_.diagonal().array() += shift;
    return out;
}

SpectralDecomposition eigh(const SymMatrix& a) {
    require_finite(a.matrix());
    if (a.dim() == 0) return {Vector(), Matrix()};
    Eigen::SelfAdjointEigenSolver<Matrix> solver(a.matrix(), Eigen::ComputeEigenvectors);
    if (solver.info() != Eigen::Success) throw InvalidInput("eigendecomposition did not converge");
    return {solver.eigenvalues(), solver.eigenvectors()};
}

double minsp(const SpectralDecomposition& eig) { return eig.eigenvalues.cwiseAbs().minCoeff(); }

double minsp(const SymMatrix& a) {
    require_finite(a.matrix());
    Eigen::SelfAdjointEigenSolver<Matrix> solver(a.matrix(), Eigen::EigenvaluesOnly);
    return solver.eigenvalues().cwiseAbs().minCoeff();
}

Vector reflected_solve(const SpectralDecomposition& eig, double frobenius, const Vector& b) {
    if (b.size() != eig.eigenvalues.size()) throw InvalidInput("reflected_solve: dimension mismatch");
    const double floor = kSingularRelTol * std::max(1.0, frobenius);
    const Vector abs_vals = eig.eigenvalues.cwiseAbs();
    if (abs_vals.minCoeff() <= floor) throw SingularMatrix("reflected_solve: matrix is singular");
    const Vector coeffs = (eig.eigenvectors.transpose() * b).cwiseQuotient(abs_vals);
    return eig.eigenvectors * coeffs;
}

Vector reflected_solve(const SymMatrix& a, const Vector& b) {
    return reflected_solve(eigh(a), a.frobenius_norm(), b);
}

bool is_negative_definite(const SymMatrix& m, double tol) {
    require_finite(m.matrix());
    Eigen::SelfAdjointEigenSolver<Matrix> solver(m.matrix(), Eigen::EigenvaluesOnly);
    return solver.eigenvalues().maxCoeff() < -tol;
}

}  // namespace qnewton
