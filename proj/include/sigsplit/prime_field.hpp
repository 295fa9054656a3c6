#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace sigsplit {

// Deterministic Miller-Rabin, valid over the full 64-bit range.
bool is_prime(std::uint64_t n);

// Prime factorization (trial division + Brent's rho), factors ascending.
std::vector<std::pair<std::uint64_t, int>> factorize(std::uint64_t n);

// Arithmetic in Z/M for prime M. Values live in [0, M).
class PrimeField {
  public:
    // Throws std::invalid_argument if modulus is not prime.
    explicit PrimeField(std::uint64_t modulus);

    std::uint64_t modulus() const { return m_; }

    std::uint64_t reduce(std::uint64_t a) const { return a % m_; }
    std::uint64_t add(std::uint64_t a, std::uint64_t b) const {
        const std::uint64_t s = a + b;
        return s >= m_ ? s - m_ : s;
    }
    std::uint64_t sub(std::uint64_t a, std::uint64_t b) const {
        return a >= b ? a - b : a + m_ - b;
    }
    std::uint64_t neg(std::uint64_t a) const { return a == 0 ? 0 : m_ - a; }
    std::uint64_t mul(std::uint64_t a, std::uint64_t b) const {
        return static_cast<std::uint64_t>(
            static_cast<unsigned __int128>(a) * b % m_);
    }
    std::uint64_t pow(std::uint64_t base, std::uint64_t exp) const;
    std::uint64_t inv(std::uint64_t a) const;  // throws on a == 0

    bool operator==(const PrimeField&) const = default;

  private:
    std::uint64_t m_;
};

}  // namespace sigsplit
