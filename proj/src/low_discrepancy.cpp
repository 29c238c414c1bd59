#include "flatnet/low_discrepancy.hpp"

#include <limits>
#include <stdexcept>

namespace flatnet {

bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t p = 2; p * p <= n; ++p)
    if (n % p == 0) return false;
  return true;
}

std::vector<std::uint64_t> first_primes(int count) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t n = 2; static_cast<int>(out.size()) < count; ++n)
    if (is_prime(n)) out.push_back(n);
  return out;
}

double bit_reversal(std::uint64_t alpha, std::uint64_t rho) {
  if (rho < 2) throw std::invalid_argument("bit_reversal: base must be >= 2");
  // Digits accumulate into an integer numerator over rho^digits so the
  // result is rounded once; very long expansions fall back to a running sum.
  std::uint64_t num = 0, scale = 1;
  std::uint64_t a = alpha;
  for (; a > 0 && scale <= std::numeric_limits<std::uint64_t>::max() / rho; a /= rho) {
    num = num * rho + a % rho;
    scale *= rho;
  }
  if (a == 0) {
    // Both operands exact as doubles: one correctly rounded division.
    if (scale <= (std::uint64_t{1} << 53)) return static_cast<double>(num) / static_cast<double>(scale);
    return static_cast<double>(static_cast<long double>(num) / static_cast<long double>(scale));
  }

  long double r = 0, w = 1;
  for (a = alpha; a > 0; a /= rho) {
    w /= static_cast<long double>(rho);
    r += static_cast<long double>(a % rho) * w;
  }
  return static_cast<double>(r);
}

MatrixX<double> van_der_corput(std::int64_t n) {
  if (n < 1) throw std::invalid_argument("van_der_corput: n must be >= 1");
  MatrixX<double> pts(2, n);
  for (std::int64_t i = 0; i < n; ++i) {
    pts(0, i) = static_cast<double>(i) / static_cast<double>(n);
    pts(1, i) = bit_reversal(static_cast<std::uint64_t>(i), 2);
  }
  return pts;
}

std::uint64_t primorial(int m) {
  if (m < 0) throw std::invalid_argument("primorial: m must be >= 0");
  std::uint64_t r = 1;
  for (std::uint64_t p : first_primes(m)) {
    if (r > std::numeric_limits<std::uint64_t>::max() / p) throw std::overflow_error("primorial: overflow");
    r *= p;
  }
  return r;
}

MatrixX<double> halton_hammersley(std::int64_t n, int d) {
  if (n < 1) throw std::invalid_argument("halton_hammersley: n must be >= 1");
  if (d < 2) throw std::invalid_argument("halton_hammersley: d must be >= 2");
  const auto primes = first_primes(d - 1);
  MatrixX<double> pts(d, n);
  for (std::int64_t i = 0; i < n; ++i) {
    for (int c = 0; c < d - 1; ++c) pts(c, i) = bit_reversal(static_cast<std::uint64_t>(i), primes[c]);
    pts(d - 1, i) = static_cast<double>(i) / static_cast<double>(n);
  }
  return pts;
}

}  // namespace flatnet
