#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <vector>

#include <gmpxx.h>
#include <json.hpp>

#include "sigsplit/ext_field.hpp"

namespace sigsplit {

// Per-user signature: q-ary symbols, symbols[0] always 1 so that integer
// column sums expose the number of transmitters directly.
struct SignatureWord {
    std::vector<std::uint32_t> symbols;
    bool operator==(const SignatureWord&) const = default;
};

// Symbol-wise integer sums of a set of signature words. sums[0] equals
// the number of contributing users.
struct ColumnSums {
    std::vector<std::uint64_t> sums;
    bool operator==(const ColumnSums&) const = default;
    auto operator<=>(const ColumnSums&) const = default;
};

ColumnSums sum_signature_words(std::span<const SignatureWord> words,
                               std::size_t sig_len);

// Raised by the decoder when the observed count exceeds the decodable
// threshold; the caller must treat the slot as a collision.
struct NotDecodableError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Symbols per signature: the count symbol plus enough q-ary digits for
// any exponent below M^K - 1.
std::size_t signature_length(std::uint64_t m, unsigned k, std::uint32_t q);

// K-out-of-M signature codebook built from discrete logarithms in
// F_{M^K}: user i maps to the base-field element b_i = i - 1 and to the
// exponent s_i solving a^{s_i} = a + b_i for the primitive element a.
// The integer column sums of any <= K distinct signature words identify
// the contributing users uniquely.
//
// For K = 1 the element with a + b_i = 0 has no exponent, so exactly one
// user is left without a signature and s_i = 0 can occur; for K >= 2 all
// M users are covered and 0 < s_i < M^K - 1 holds.
class SignatureCodebook {
  public:
    static SignatureCodebook build(std::uint64_t m, unsigned k,
                                   std::uint32_t q);

    const ExtField& field() const { return field_; }
    std::uint64_t user_count() const { return field_.base().modulus(); }
    unsigned threshold() const { return field_.degree(); }  // K
    std::uint32_t q() const { return q_; }
    std::size_t sig_len() const { return sig_len_; }

    const std::map<int, mpz_class>& assignments() const { return s_; }
    bool has_user(int user) const { return s_.contains(user); }
    std::vector<int> users() const;

    SignatureWord encode_signature(int user) const;

    // Bit-equivalent signature length sig_len * log2(q); never exceeds
    // (K + 2) log2(M).
    double signature_bits() const;

    // Number of transmitters in the slot the sums came from. Exact for
    // any count, including 0 and counts above the threshold.
    static std::uint64_t decode_count(const ColumnSums& sums);

    // Algebraic decoder: recovers the contributing user set from integer
    // column sums when 1 <= count <= K. Throws std::invalid_argument on
    // an empty slot, NotDecodableError when count > K, and
    // std::logic_error when the sums are inconsistent with any user set
    // (a protocol-logic bug, never a channel event in this model).
    std::vector<int> decode_active_set(const ColumnSums& sums) const;

    // Independent oracle: scans all C(M, L) candidate subsets and checks
    // uniqueness of the match by completing the scan.
    std::vector<int> brute_force_decode(const ColumnSums& sums) const;

    nlohmann::json to_json() const;
    static SignatureCodebook from_json(const nlohmann::json& j);

  private:
    SignatureCodebook(ExtField field, std::uint32_t q, std::size_t sig_len,
                      std::map<int, mpz_class> s);
    void validate() const;

    ExtField field_;
    std::uint32_t q_;
    std::size_t sig_len_;
    std::map<int, mpz_class> s_;
};

}  // namespace sigsplit
