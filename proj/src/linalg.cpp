#include "projridge/linalg.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "projridge/error.hpp"

namespace projridge {

DesignMatrix::DesignMatrix(Matrix entries) : entries_(std::move(entries)) {
  if (entries_.rows() < 1 || entries_.cols() < 1) throw input_error("design matrix must have n >= 1 and p >= 1");
  if (!entries_.allFinite()) throw input_error("design matrix has non-finite entries");
}

SvdFactorization::SvdFactorization(Matrix P, Vector d, Matrix Q) : P_(std::move(P)), d_(std::move(d)), Q_(std::move(Q)) {
  if (P_.cols() != d_.size() || Q_.cols() != d_.size())
    throw input_error("factor shapes disagree with the number of singular values");
}

Vector SvdFactorization::apply(const Vector& v) const {
  const Vector coef = d_.cwiseProduct(Q_.transpose() * v);
  return P_ * coef;
}

Vector SvdFactorization::project(const Vector& v) const { return Q_ * (Q_.transpose() * v); }

double SvdFactorization::row_space_residual(const Vector& v) const { return (v - project(v)).norm(); }

double rank_tolerance(Eigen::Index n, Eigen::Index p, double s_max) {
  return static_cast<double>(std::max(n, p)) * std::numeric_limits<double>::epsilon() * s_max;
}

SvdFactorization factorize(const DesignMatrix& X) {
  const Matrix& A = X.entries();
  const Eigen::Index n = A.rows();
  const Eigen::Index p = A.cols();
  if (A.cwiseAbs().maxCoeff() == 0.0) throw input_error("rank zero design");

  Matrix U;
  Matrix V;
  Vector s;
  if (p >= n) {
    // X′ = Qr·R  ⇒  X = R′·Qr′, and R′ = U·S·W′ gives P = U, Q = Qr·W.
    Eigen::HouseholderQR<Matrix> qr(A.transpose());
    const Matrix R = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
    Matrix Qr = Matrix::Identity(p, n);
    Qr.applyOnTheLeft(qr.householderQ());
    Eigen::BDCSVD<Matrix> svd(R.transpose(), Eigen::ComputeFullU | Eigen::ComputeFullV);
    U = svd.matrixU();
    s = svd.singularValues();
    V = Qr * svd.matrixV();
  } else {
    // X = Qx·R, R = U·S·W′ gives P = Qx·U, Q = W.
    Eigen::HouseholderQR<Matrix> qr(A);
    const Matrix R = qr.matrixQR().topRows(p).triangularView<Eigen::Upper>();
    Matrix Qx = Matrix::Identity(n, p);
    Qx.applyOnTheLeft(qr.householderQ());
    Eigen::BDCSVD<Matrix> svd(R, Eigen::ComputeFullU | Eigen::ComputeFullV);
    U = Qx * svd.matrixU();
    s = svd.singularValues();
    V = svd.matrixV();
  }

  const double tol = rank_tolerance(n, p, s(0));
  Eigen::Index r = 0;
  while (r < s.size() && s(r) > tol) ++r;
  if (r == 0) throw input_error("rank zero design");

  Matrix P = U.leftCols(r);
  Matrix Q = V.leftCols(r);
  for (Eigen::Index j = 0; j < r; ++j) {
    Eigen::Index imax = 0;
    P.col(j).cwiseAbs().maxCoeff(&imax);
    if (P(imax, j) < 0.0) {
      P.col(j) *= -1.0;
      Q.col(j) *= -1.0;
    }
  }
  return SvdFactorization(std::move(P), s.head(r), std::move(Q));
}

Vector project(const Vector& beta, const SvdFactorization& F) {
  if (beta.size() != F.p())
    throw input_error("dimension mismatch: beta has length " + std::to_string(beta.size()) + ", expected " +
                      std::to_string(F.p()));
  return F.project(beta);
}

std::pair<Vector, Vector> nonidentifiable_pair(const SvdFactorization& F, const Vector& beta) {
  if (beta.size() != F.p()) throw input_error("dimension mismatch in nonidentifiable_pair");
  if (F.p() == F.rank()) throw input_error("design has full column rank; beta identifiable");

  // Probe with the coordinate axis least represented in the row space, then
  // orthogonalize twice against Q.
  Eigen::Index k = 0;
  F.Q().rowwise().squaredNorm().minCoeff(&k);
  Vector z = Vector::Unit(F.p(), k);
  for (int pass = 0; pass < 2; ++pass) z -= F.Q() * (F.Q().transpose() * z);
  const double nz = z.norm();
  if (!(nz > 0.0)) throw numerical_error("failed to construct a null-space direction");
  z /= nz;
  return {beta, beta + z};
}

SpectralDiagnostics spectral_diagnostics(const SvdFactorization& F) {
  SpectralDiagnostics out;
  out.rank = F.rank();
  out.lambda_max = F.d()(0) * F.d()(0);
  const double dmin = F.d()(F.rank() - 1);
  out.lambda_min_pos = dmin * dmin;
  return out;
}

// ---- CSV ------------------------------------------------------------------

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_cell(const std::string& raw, std::size_t line) {
  const std::string cell = trim(raw);
  if (cell.empty()) throw input_error("csv parse error at line " + std::to_string(line) + ": empty cell");
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(cell.c_str(), &end);
  if (end != cell.c_str() + cell.size() || errno == ERANGE || !std::isfinite(v))
    throw input_error("csv parse error at line " + std::to_string(line) + ": not a finite number: '" + cell + "'");
  return v;
}

}  // namespace

Matrix parse_matrix_csv(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    std::vector<double> row;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) row.push_back(parse_cell(cell, lineno));
    if (!line.empty() && trim(line).back() == ',') row.push_back(parse_cell("", lineno));
    if (!rows.empty() && row.size() != rows.front().size())
      throw input_error("csv parse error at line " + std::to_string(lineno) + ": expected " +
                        std::to_string(rows.front().size()) + " columns, found " + std::to_string(row.size()));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw input_error("csv parse error at line 1: empty file");
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
  return m;
}

Matrix read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_matrix_csv(buf.str());
}

Vector read_vector_csv(const std::filesystem::path& path) {
  const Matrix m = read_matrix_csv(path);
  if (m.cols() == 1) return m.col(0);
  if (m.rows() == 1) return m.row(0).transpose();
  throw input_error(path.string() + ": expected a single row or column");
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_matrix_csv(const std::filesystem::path& path, const Matrix& m) {
  std::ofstream out(path);
  if (!out) throw input_error("cannot write " + path.string());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
  if (!out) throw input_error("write failed: " + path.string());
}

void write_vector_csv(const std::filesystem::path& path, const Vector& v) { write_matrix_csv(path, Matrix(v)); }

}  // namespace projridge
