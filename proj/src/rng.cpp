#include "projridge/rng.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <cmath>

#include "projridge/error.hpp"

namespace projridge::rng {

namespace {

constexpr std::uint32_t kM0 = 0xD2511F53u;
constexpr std::uint32_t kM1 = 0xCD9E8D57u;
constexpr std::uint32_t kW0 = 0x9E3779B9u;
constexpr std::uint32_t kW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t prod = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(prod >> 32);
  lo = static_cast<std::uint32_t>(prod);
}

inline Counter round(const Counter& c, const Key& k) {
  std::uint32_t hi0, lo0, hi1, lo1;
  mulhilo(kM0, c[0], hi0, lo0);
  mulhilo(kM1, c[2], hi1, lo1);
  return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

}  // namespace

Counter philox4x32_10(Counter ctr, Key key) {
  ctr = round(ctr, key);
  for (int r = 1; r < 10; ++r) {
    key[0] += kW0;
    key[1] += kW1;
    ctr = round(ctr, key);
  }
  return ctr;
}

Stream::Stream(std::uint64_t master_seed, Purpose purpose, std::uint64_t index)
    : key_{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32)},
      index_lo_(static_cast<std::uint32_t>(index)),
      tag_((static_cast<std::uint32_t>(purpose) << 24) | static_cast<std::uint32_t>((index >> 32) & 0xffffffu)) {
  if ((index >> 56) != 0) throw input_error("stream index out of range");
}

void Stream::refill() {
  const Counter out = philox4x32_10(
      {static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32), index_lo_, tag_}, key_);
  ++block_;
  buf_[0] = (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
  buf_[1] = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
  pos_ = 0;
}

std::uint64_t Stream::next_u64() {
  if (pos_ == 2) refill();
  return buf_[pos_++];
}

// 52 bits so that k + 0.5 is exact for every k: the result lies in
// [2^-53, 1 - 2^-53] and is symmetric about 1/2.
double Stream::uniform() { return (static_cast<double>(next_u64() >> 12) + 0.5) * 0x1.0p-52; }

double Stream::normal() { return normal_quantile(uniform()); }

std::uint64_t Stream::below(std::uint64_t bound) {
  if (bound == 0) throw input_error("below(0)");
  unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      m = static_cast<unsigned __int128>(next_u64()) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

double normal_quantile(double u) { return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * u); }

}  // namespace projridge::rng
