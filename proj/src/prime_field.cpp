#include "sigsplit/prime_field.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace sigsplit {

namespace {

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
    return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

std::uint64_t powmod(std::uint64_t base, std::uint64_t exp, std::uint64_t m) {
    std::uint64_t r = 1 % m;
    base %= m;
    while (exp) {
        if (exp & 1) r = mulmod(r, base, m);
        base = mulmod(base, base, m);
        exp >>= 1;
    }
    return r;
}

// Brent's cycle-finding variant of Pollard's rho. n odd composite, not a
// prime power of interest below the trial-division bound.
std::uint64_t pollard_brent(std::uint64_t n, std::uint64_t c) {
    std::uint64_t x = 2, y = 2, d = 1, saved = 2;
    std::uint64_t power = 1, lam = 1;
    auto step = [&](std::uint64_t v) { return (mulmod(v, v, n) + c) % n; };
    while (d == 1) {
        if (power == lam) {
            x = y;
            power <<= 1;
            lam = 0;
        }
        std::uint64_t q = 1;
        const std::uint64_t batch = std::min<std::uint64_t>(128, power - lam);
        saved = y;
        for (std::uint64_t i = 0; i < batch; ++i) {
            y = step(y);
            q = mulmod(q, x > y ? x - y : y - x, n);
        }
        lam += batch;
        d = std::gcd(q, n);
    }
    if (d == n) {
        // A factor was folded into the batch product; replay one by one.
        y = saved;
        do {
            y = step(y);
            d = std::gcd(x > y ? x - y : y - x, n);
        } while (d == 1);
    }
    return d;
}

void factor_rec(std::uint64_t n, std::vector<std::uint64_t>& out) {
    if (n == 1) return;
    if (is_prime(n)) {
        out.push_back(n);
        return;
    }
    std::uint64_t d = n;
    for (std::uint64_t c = 1; d == n; ++c) d = pollard_brent(n, c);
    factor_rec(d, out);
    factor_rec(n / d, out);
}

}  // namespace

bool is_prime(std::uint64_t n) {
    if (n < 2) return false;
    for (std::uint64_t p : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL,
                            19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
        if (n % p == 0) return n == p;
    }
    std::uint64_t d = n - 1;
    int s = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        ++s;
    }
    // This base set is deterministic for all n < 3.3e24.
    for (std::uint64_t a : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL,
                            19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
        std::uint64_t x = powmod(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool composite = true;
        for (int i = 1; i < s; ++i) {
            x = mulmod(x, x, n);
            if (x == n - 1) {
                composite = false;
                break;
            }
        }
        if (composite) return false;
    }
    return true;
}

std::vector<std::pair<std::uint64_t, int>> factorize(std::uint64_t n) {
    std::vector<std::uint64_t> primes;
    for (std::uint64_t p : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL}) {
        while (n % p == 0) {
            primes.push_back(p);
            n /= p;
        }
    }
    if (n > 1) factor_rec(n, primes);
    std::sort(primes.begin(), primes.end());

    std::vector<std::pair<std::uint64_t, int>> out;
    for (std::uint64_t p : primes) {
        if (!out.empty() && out.back().first == p) {
            ++out.back().second;
        } else {
            out.emplace_back(p, 1);
        }
    }
    return out;
}

PrimeField::PrimeField(std::uint64_t modulus) : m_(modulus) {
    if (!is_prime(modulus)) {
        throw std::invalid_argument("field modulus " + std::to_string(modulus) +
                                    " is not prime");
    }
}

std::uint64_t PrimeField::pow(std::uint64_t base, std::uint64_t exp) const {
    return powmod(base % m_, exp, m_);
}

std::uint64_t PrimeField::inv(std::uint64_t a) const {
    if (a % m_ == 0) throw std::invalid_argument("inverse of zero");
    return pow(a, m_ - 2);
}

}  // namespace sigsplit
