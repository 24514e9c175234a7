#pragma once
// Dense linear-algebra substrate: thin SVD with numerical rank, projection
// onto the row space of X, and null-space witnesses for non-identifiability.

#include <Eigen/Dense>

#include <filesystem>
#include <utility>

namespace projridge {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// n×p design matrix with finite entries. Column-major, so each covariate
// column is contiguous.
class DesignMatrix {
 public:
  DesignMatrix() = default;
  explicit DesignMatrix(Matrix entries);

  const Matrix& entries() const { return entries_; }
  Eigen::Index n() const { return entries_.rows(); }
  Eigen::Index p() const { return entries_.cols(); }

 private:
  Matrix entries_;
};

// X = P·diag(d)·Q′ truncated at the numerical rank r.
//   P: n×r, orthonormal columns; d: r singular values, strictly decreasing
//   order (non-increasing), all above the rank tolerance; Q: p×r.
// Sign convention: the largest-magnitude entry of every column of P is
// nonnegative (first one on ties).
class SvdFactorization {
 public:
  SvdFactorization(Matrix P, Vector d, Matrix Q);

  const Matrix& P() const { return P_; }
  const Vector& d() const { return d_; }
  const Matrix& Q() const { return Q_; }
  Eigen::Index rank() const { return d_.size(); }
  Eigen::Index n() const { return P_.rows(); }
  Eigen::Index p() const { return Q_.rows(); }

  // X·v through the factors, without the original matrix.
  Vector apply(const Vector& v) const;
  // Q·Q′·v
  Vector project(const Vector& v) const;
  // ‖v − QQ′v‖
  double row_space_residual(const Vector& v) const;

 private:
  Matrix P_;
  Vector d_;
  Matrix Q_;
};

struct SpectralDiagnostics {
  double lambda_min_pos = 0.0;  // smallest positive eigenvalue of X′X
  double lambda_max = 0.0;      // largest eigenvalue of X′X
  Eigen::Index rank = 0;
};

// Singular values s_j with s_j > max(n,p)·eps·s_max count toward the rank.
double rank_tolerance(Eigen::Index n, Eigen::Index p, double s_max);

// Thin SVD via Householder QR of the long side followed by an SVD of the
// small square factor. Throws input_error("rank zero design") for X = 0.
SvdFactorization factorize(const DesignMatrix& X);

// θ = QQ′β; throws input_error on length mismatch.
Vector project(const Vector& beta, const SvdFactorization& F);

// β₁ = β, β₂ = β + z with z a unit vector orthogonal to the row space, so
// Xβ₁ = Xβ₂ while β₁ ≠ β₂. Requires p > r.
std::pair<Vector, Vector> nonidentifiable_pair(const SvdFactorization& F, const Vector& beta);

SpectralDiagnostics spectral_diagnostics(const SvdFactorization& F);

// Plain CSV, no header, one row per line. Ragged rows, non-numeric cells and
// empty input raise input_error with the 1-based line number.
Matrix read_matrix_csv(const std::filesystem::path& path);
Matrix parse_matrix_csv(const std::string& text);
// A vector file may be a single column or a single row.
Vector read_vector_csv(const std::filesystem::path& path);
// 17 significant digits so that a re-read reproduces the doubles exactly.
void write_matrix_csv(const std::filesystem::path& path, const Matrix& m);
void write_vector_csv(const std::filesystem::path& path, const Vector& v);

std::string format_double(double x);

}  // namespace projridge
