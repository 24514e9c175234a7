#include "projridge/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "projridge/error.hpp"
#include "projridge/rng.hpp"

namespace projridge {

std::string to_string(StudyId s) {
  switch (s) {
    case StudyId::I: return "I";
    case StudyId::II: return "II";
    case StudyId::III: return "III";
    case StudyId::IV: return "IV";
    case StudyId::custom: return "custom";
  }
  return "custom";
}

std::string to_string(DesignKind k) {
  switch (k) {
    case DesignKind::equicorrelated: return "equicorrelated";
    case DesignKind::banded: return "banded";
    case DesignKind::latin_hypercube: return "latin_hypercube";
    case DesignKind::csv: return "csv";
    case DesignKind::block_orthogonal: return "block_orthogonal";
  }
  return "csv";
}

StudyId parse_study(const std::string& s) {
  if (s == "I") return StudyId::I;
  if (s == "II") return StudyId::II;
  if (s == "III") return StudyId::III;
  if (s == "IV") return StudyId::IV;
  if (s == "custom") return StudyId::custom;
  throw input_error("unknown study '" + s + "' (expected I, II, III, IV or custom)");
}

DesignKind parse_design_kind(const std::string& s) {
  for (DesignKind k : {DesignKind::equicorrelated, DesignKind::banded, DesignKind::latin_hypercube, DesignKind::csv,
                       DesignKind::block_orthogonal})
    if (to_string(k) == s) return k;
  throw input_error("unknown design kind '" + s + "'");
}

void StudyConfig::validate() const {
  if (n < 2 || p < 1) throw input_error("study needs n >= 2 and p >= 1");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw input_error("sigma must be positive");
  if (replications < 1) throw input_error("replications must be positive");
  make_beta(p, beta_spec);
  if (design_source.kind == DesignKind::equicorrelated && !(design_source.rho >= 0.0 && design_source.rho < 1.0))
    throw input_error("rho must lie in [0, 1)");
  if (design_source.kind == DesignKind::banded && (!(std::fabs(design_source.base) < 1.0) || design_source.band < 0))
    throw input_error("banded design needs |base| < 1 and band >= 0");
  if (design_source.kind == DesignKind::csv && design_source.path.empty())
    throw input_error("csv design needs a path");
  if (design_source.kind == DesignKind::block_orthogonal &&
      (design_source.block < 1 || design_source.block >= n || design_source.block > p))
    throw input_error("block_orthogonal needs 1 <= block < n and block <= p");
}

std::vector<BetaEntry> study_beta(StudyId study) {
  std::vector<BetaEntry> out;
  if (study == StudyId::III) {
    for (long j = 1; j <= 15; ++j) out.push_back({j, 0.2 * static_cast<double>(j)});
  } else if (study != StudyId::custom) {
    for (long j = 1; j <= 20; ++j) out.push_back({j, 1.0 + 0.1 * static_cast<double>(j)});
  }
  return out;
}

StudyConfig preset(StudyId study, long n, long p) {
  StudyConfig c;
  c.study = study;
  c.n = n;
  c.p = p;
  c.beta_spec = study_beta(study);
  switch (study) {
    case StudyId::I:
      c.sigma = 10.0;
      c.design_source.kind = DesignKind::equicorrelated;
      c.design_source.rho = 0.75;
      break;
    case StudyId::II:
      c.sigma = 10.0;
      c.design_source.kind = DesignKind::banded;
      c.design_source.base = 0.5;
      c.design_source.band = 10;
      break;
    case StudyId::III:
      c.sigma = 8.0;
      c.design_source.kind = DesignKind::latin_hypercube;
      break;
    case StudyId::IV:
      c.sigma = 10.0;
      c.design_source.kind = DesignKind::latin_hypercube;
      break;
    case StudyId::custom:
      break;
  }
  return c;
}

DesignMatrix gen_equicorrelated(long n, long p, double rho, std::uint64_t seed) {
  if (!(rho >= 0.0 && rho < 1.0)) throw input_error("rho must lie in [0, 1)");
  if (n < 1 || p < 1) throw input_error("n and p must be positive");
  rng::Stream s(seed, rng::Purpose::design, 0);
  const double a = std::sqrt(rho);
  const double b = std::sqrt(1.0 - rho);
  Matrix X(n, p);
  for (long i = 0; i < n; ++i) {
    const double common = a * s.normal();
    for (long j = 0; j < p; ++j) X(i, j) = common + b * s.normal();
  }
  return DesignMatrix(std::move(X));
}

Matrix banded_covariance(long p, double base, int band) {
  Matrix S = Matrix::Zero(p, p);
  for (long k = 0; k < p; ++k)
    for (long l = std::max(0L, k - band); l <= std::min(p - 1, k + static_cast<long>(band)); ++l)
      S(k, l) = std::pow(base, static_cast<double>(std::labs(k - l)));
  return S;
}

BandedDesign gen_banded(long n, long p, double base, int band, std::uint64_t seed) {
  if (!(std::fabs(base) < 1.0) || band < 0) throw input_error("banded design needs |base| < 1 and band >= 0");
  if (n < 1 || p < 1) throw input_error("n and p must be positive");
  Matrix root;
  double clip = 0.0;
  if (band == 0) {
    root = Matrix::Identity(p, p);
  } else {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(banded_covariance(p, base, band));
    Vector ev = eig.eigenvalues();
    clip = std::max(0.0, -ev.minCoeff());
    ev = ev.cwiseMax(0.0).cwiseSqrt();
    root = eig.eigenvectors() * ev.asDiagonal() * eig.eigenvectors().transpose();
  }
  rng::Stream s(seed, rng::Purpose::design, 0);
  Matrix Z(n, p);
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < p; ++j) Z(i, j) = s.normal();
  return {DesignMatrix(Z * root), clip};
}

DesignMatrix gen_latin_hypercube(long n, long p, std::uint64_t seed) {
  if (n < 2 || p < 1) throw input_error("latin hypercube needs n >= 2 and p >= 1");
  rng::Stream s(seed, rng::Purpose::design, 0);
  Matrix X(n, p);
  std::vector<double> levels(static_cast<std::size_t>(n));
  for (long j = 0; j < p; ++j) {
    for (long i = 0; i < n; ++i) levels[i] = 6.0 * static_cast<double>(i + 1) / static_cast<double>(n) - 3.0;
    for (std::size_t i = levels.size() - 1; i > 0; --i) std::swap(levels[i], levels[s.below(i + 1)]);
    for (long i = 0; i < n; ++i) X(i, j) = levels[i];
  }
  return DesignMatrix(std::move(X));
}

DesignMatrix gen_block_orthogonal(long n, long p, long block, std::uint64_t seed) {
  if (block < 1 || block >= n || block > p) throw input_error("block_orthogonal needs 1 <= block < n and block <= p");
  rng::Stream s(seed, rng::Purpose::design, 0);
  Matrix X(n, p);
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < p; ++j) X(i, j) = s.normal();
  if (block < p) {
    Eigen::HouseholderQR<Matrix> qr(X.leftCols(block));
    Matrix Qa = Matrix::Identity(n, block);
    Qa.applyOnTheLeft(qr.householderQ());
    auto rest = X.rightCols(p - block);
    for (int pass = 0; pass < 2; ++pass) rest -= Qa * (Qa.transpose() * rest);
  }
  return DesignMatrix(std::move(X));
}

DesignMatrix load_design_csv(const std::filesystem::path& path) { return DesignMatrix(read_matrix_csv(path)); }

Vector make_beta(long p, const std::vector<BetaEntry>& spec) {
  Vector beta = Vector::Zero(p);
  std::set<long> seen;
  for (const BetaEntry& e : spec) {
    if (e.index < 1 || e.index > p)
      throw input_error("beta index " + std::to_string(e.index) + " outside 1.." + std::to_string(p));
    if (!seen.insert(e.index).second) throw input_error("duplicate beta index " + std::to_string(e.index));
    if (!std::isfinite(e.value)) throw input_error("beta value must be finite");
    beta(e.index - 1) = e.value;
  }
  return beta;
}

Vector gen_noise(long n, double sigma, std::uint64_t master_seed, std::uint64_t replication) {
  if (!(sigma > 0.0)) throw input_error("sigma must be positive");
  rng::Stream s(master_seed, rng::Purpose::noise, replication);
  Vector e(n);
  for (long i = 0; i < n; ++i) e(i) = sigma * s.normal();
  return e;
}

GeneratedInstance make_instance(const StudyConfig& cfg) {
  cfg.validate();
  const DesignSource& src = cfg.design_source;
  std::string label;
  double clip = 0.0;
  std::vector<std::string> warnings;

  auto build = [&]() -> DesignMatrix {
    if (cfg.study == StudyId::III && !src.path.empty()) {
      label = "NOLH fixture " + src.path;
      return load_design_csv(src.path);
    }
    switch (src.kind) {
      case DesignKind::equicorrelated:
        label = "equicorrelated rho=" + format_double(src.rho);
        return gen_equicorrelated(cfg.n, cfg.p, src.rho, cfg.master_seed);
      case DesignKind::banded: {
        label = "banded base=" + format_double(src.base) + " band=" + std::to_string(src.band);
        BandedDesign bd = gen_banded(cfg.n, cfg.p, src.base, src.band, cfg.master_seed);
        clip = bd.max_clip;
        if (clip > 1e-12) warnings.push_back("banded covariance indefinite; clipped eigenvalue magnitude " + format_double(clip));
        return std::move(bd.X);
      }
      case DesignKind::latin_hypercube:
        label = cfg.study == StudyId::III ? "latin hypercube substitute for NOLH(" + std::to_string(cfg.n) + "," +
                                                std::to_string(cfg.p) + ")"
                                          : "latin hypercube";
        return gen_latin_hypercube(cfg.n, cfg.p, cfg.master_seed);
      case DesignKind::csv:
        label = "csv " + src.path;
        return load_design_csv(src.path);
      case DesignKind::block_orthogonal:
        label = "block orthogonal block=" + std::to_string(src.block);
        return gen_block_orthogonal(cfg.n, cfg.p, src.block, cfg.master_seed);
    }
    throw input_error("unknown design source");
  };

  DesignMatrix X = build();
  if (X.n() != cfg.n || X.p() != cfg.p)
    throw input_error("design is " + std::to_string(X.n()) + "x" + std::to_string(X.p()) + ", config says " +
                      std::to_string(cfg.n) + "x" + std::to_string(cfg.p));
  SvdFactorization F = factorize(X);
  Vector beta = make_beta(cfg.p, cfg.beta_spec);
  Vector theta = project(beta, F);
  return GeneratedInstance{std::move(X), std::move(F), std::move(beta), std::move(theta), cfg.sigma, label, clip,
                           std::move(warnings)};
}

}  // namespace projridge
