#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include <gmpxx.h>
#include <json.hpp>

#include "sigsplit/prime_field.hpp"

namespace sigsplit {

// Element of F_{M^K} in the power basis {1, a, ..., a^(K-1)}.
// coeffs has exactly K entries, each reduced mod M, low degree first.
struct ExtElement {
    std::vector<std::uint64_t> coeffs;
    bool operator==(const ExtElement&) const = default;
};

// F_{M^K} as F_M[x]/(m(x)) for a monic primitive m of degree K. The
// residue of x is then a generator of the multiplicative group, i.e. the
// primitive element the signature construction exponentiates.
//
// Immutable after construction; all operations are const and pure.
class ExtField {
  public:
    // Validates that min_poly (low degree first, K+1 coefficients) is
    // monic, irreducible and primitive over F_M. Throws otherwise.
    ExtField(PrimeField base, std::vector<std::uint64_t> min_poly);

    // Deterministic search for the lexicographically first primitive
    // polynomial x^K - d_{K-1} x^{K-1} - ... - d_0, the tuple
    // (d_0, ..., d_{K-1}) running through base-M counter order. For K=1
    // this yields x - g with g the smallest primitive root mod M.
    static ExtField find_primitive(std::uint64_t m, unsigned degree);

    const PrimeField& base() const { return base_; }
    unsigned degree() const { return degree_; }
    const std::vector<std::uint64_t>& min_poly() const { return min_poly_; }
    // M^K - 1, the multiplicative group order.
    const mpz_class& group_order() const { return group_order_; }

    ExtElement zero() const;
    ExtElement one() const;
    ExtElement generator() const;  // residue of x
    ExtElement from_base(std::uint64_t value) const;

    bool is_zero(const ExtElement& e) const;
    ExtElement add(const ExtElement& a, const ExtElement& b) const;
    ExtElement sub(const ExtElement& a, const ExtElement& b) const;
    ExtElement mul(const ExtElement& a, const ExtElement& b) const;
    ExtElement pow(const ExtElement& a, const mpz_class& exp) const;
    ExtElement pow(const ExtElement& a, std::uint64_t exp) const;

    bool operator==(const ExtField& other) const {
        return base_ == other.base_ && min_poly_ == other.min_poly_;
    }

    nlohmann::json to_json() const;
    static ExtField from_json(const nlohmann::json& j);

  private:
    void check_element(const ExtElement& e) const;
    ExtElement reduce(std::vector<std::uint64_t> poly) const;

    PrimeField base_;
    unsigned degree_;
    std::vector<std::uint64_t> min_poly_;
    mpz_class group_order_;
};

// Baby-step/giant-step table over the full multiplicative group of a
// field whose order fits desk scale. Construction is O(sqrt(order)) in
// time and memory; lookups are O(sqrt(order)) multiplications.
class DiscreteLog {
  public:
    explicit DiscreteLog(const ExtField& field);

    // The unique s in [0, M^K - 1) with a^s = target, a the residue of x.
    // Throws std::invalid_argument for target = 0.
    mpz_class log(const ExtElement& target) const;

  private:
    const ExtField* field_;
    std::uint64_t order_;
    std::uint64_t step_;
    ExtElement giant_;
    std::unordered_map<std::string, std::uint64_t> baby_;
};

// All r in F_M with poly(r) = 0, multiplicities included, ascending.
// poly is monic of degree >= 1, low degree first. Exhaustive scan over
// the base field; multiplicities via repeated division by (x - r).
std::vector<std::uint64_t> roots_in_base_field(
    const PrimeField& fm, const std::vector<std::uint64_t>& poly);

}  // namespace sigsplit
