#pragma once

#include "flatnet/types.hpp"

#include <cstdint>

namespace flatnet {

bool is_prime(std::uint64_t n);

/// The first `count` primes.
std::vector<std::uint64_t> first_primes(int count);

/// Digit reversal: alpha = sum b_i rho^i  ->  sum b_i rho^{-(i+1)}.
double bit_reversal(std::uint64_t alpha, std::uint64_t rho = 2);

/// p_i = (i/n, br_2(i)), i = 0..n-1, one point per column.
MatrixX<double> van_der_corput(std::int64_t n);

/// Product of the first m primes; throws on 64-bit overflow.
std::uint64_t primorial(int m);

/// p_i = (br_{rho_1}(i), ..., br_{rho_{d-1}}(i), i/n), i = 0..n-1, one point per column.
MatrixX<double> halton_hammersley(std::int64_t n, int d);

}  // namespace flatnet
