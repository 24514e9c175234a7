#pragma once
// Seeded generation of simulation designs, regression vectors and noise.
//
// Everything here is a pure function of its arguments: designs draw from the
// counter stream (seed, design, 0), noise for replication r from
// (seed, noise, r).

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "projridge/linalg.hpp"

namespace projridge {

enum class StudyId { I, II, III, IV, custom };
enum class DesignKind { equicorrelated, banded, latin_hypercube, csv, block_orthogonal };

std::string to_string(StudyId s);
std::string to_string(DesignKind k);
StudyId parse_study(const std::string& s);
DesignKind parse_design_kind(const std::string& s);

struct DesignSource {
  DesignKind kind = DesignKind::equicorrelated;
  double rho = 0.75;  // equicorrelated
  double base = 0.5;  // banded: Σ_kl = base^|k−l| for |k−l| <= band
  int band = 10;
  long block = 5;     // block_orthogonal: size of the isolated leading block
  std::string path;   // csv (or the NOLH fixture for study III)

  bool operator==(const DesignSource&) const = default;
};

struct BetaEntry {
  long index = 1;  // 1-based
  double value = 0.0;

  bool operator==(const BetaEntry&) const = default;
};

struct StudyConfig {
  StudyId study = StudyId::I;
  long n = 30;
  long p = 100;
  double sigma = 10.0;
  std::vector<BetaEntry> beta_spec;
  DesignSource design_source;
  std::uint64_t master_seed = 20120101;
  long replications = 100;

  void validate() const;
  bool operator==(const StudyConfig&) const = default;
};

// Paper settings for studies I–IV at the given (n, p).
//   I   equicorrelated ρ = 0.75, σ = 10, β_j = 1 + 0.1j for j <= 20
//   II  banded 0.5^|k−l| truncated at |k−l| <= 10; σ and β as in I
//   III NOLH(n, p) from design_source.path when given, otherwise a Latin
//       hypercube stand-in; σ = 8, β = (0.2, 0.4, ..., 3.0) then zeros
//   IV  Latin hypercube on {6i/n − 3}; σ and β as in I
StudyConfig preset(StudyId study, long n, long p);

std::vector<BetaEntry> study_beta(StudyId study);

DesignMatrix gen_equicorrelated(long n, long p, double rho, std::uint64_t seed);

struct BandedDesign {
  DesignMatrix X;
  double max_clip = 0.0;  // largest negative eigenvalue of Σ that was clipped to 0 (magnitude)
};
Matrix banded_covariance(long p, double base, int band);
BandedDesign gen_banded(long n, long p, double base, int band, std::uint64_t seed);

// Column j is an independent uniform permutation of {6i/n − 3 : i = 1..n}.
DesignMatrix gen_latin_hypercube(long n, long p, std::uint64_t seed);

// Leading `block` Gaussian columns, the remaining columns Gaussian and then
// projected off the span of the leading block, so X′X is block diagonal and
// every β supported on the leading block is its own projection.
DesignMatrix gen_block_orthogonal(long n, long p, long block, std::uint64_t seed);

DesignMatrix load_design_csv(const std::filesystem::path& path);

Vector make_beta(long p, const std::vector<BetaEntry>& spec);

Vector gen_noise(long n, double sigma, std::uint64_t master_seed, std::uint64_t replication);

// Optional replacement for Gaussian errors: (n, sigma, master_seed, replication) -> ε.
using NoiseHook = std::function<Vector(long, double, std::uint64_t, std::uint64_t)>;

struct GeneratedInstance {
  DesignMatrix X;
  SvdFactorization F;
  Vector beta;
  Vector theta;
  double sigma = 0.0;
  std::string design_label;
  double max_clip = 0.0;
  std::vector<std::string> warnings;
};

GeneratedInstance make_instance(const StudyConfig& cfg);

}  // namespace projridge
