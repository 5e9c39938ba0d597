#pragma once

// Dense symmetric eigen-utilities shared by every solver: eigendecomposition,
// the minimum absolute eigenvalue (minsp) and the sign-reflected linear solve
// w = |A|^{-1} b, where |A| has the eigenvalues of A replaced by |lambda|.

#include <Eigen/Dense>

namespace qnewton {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Square matrix that is exactly symmetric. Construction replaces the input
// by (A + A^T) / 2, which is bit-exactly symmetric since addition commutes.
class SymMatrix {
public:
    SymMatrix() = default;
    explicit SymMatrix(const Matrix& a);

    static SymMatrix identity(Eigen::Index dim);
    static SymMatrix diagonal(const Vector& diag);

    Eigen::Index dim() const noexcept { return entries_.rows(); }
    const Matrix& matrix() const noexcept { return entries_; }
    double operator()(Eigen::Index i, Eigen::Index j) const { return entries_(i, j); }

    double frobenius_norm() const { return entries_.norm(); }

    // A + shift * Id
    SymMatrix shifted(double shift) const;

private:
    Matrix entries_;
};

struct SpectralDecomposition {
    Vector eigenvalues;   // ascending
    Matrix eigenvectors;  // column i pairs with eigenvalues(i)
};

SpectralDecomposition eigh(const SymMatrix& a);

// min |lambda| over the spectrum.
double minsp(const SymMatrix& a);
double minsp(const SpectralDecomposition& eig);

// Solves A v = b and flips the component of v in the negative eigenspace.
// Throws SingularMatrix when some |lambda| <= 1e-14 * max(1, ||A||_F).
Vector reflected_solve(const SymMatrix& a, const Vector& b);
Vector reflected_solve(const SpectralDecomposition& eig, double frobenius, const Vector& b);

// True iff the largest eigenvalue is below -tol.
bool is_negative_definite(const SymMatrix& m, double tol);

}  // namespace qnewton
