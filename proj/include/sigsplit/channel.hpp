#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sigsplit/signature_code.hpp"

namespace sigsplit {

// One slot's transmission: signature followed by a fixed-length payload
// of q-ary data symbols.
struct UserWord {
    SignatureWord signature;
    std::vector<std::uint32_t> data;
};

// What the receiver learns from one slot: integer column sums over the
// signature segment, mod-q column sums over the data segment.
struct SlotObservation {
    ColumnSums sig_sums;
    std::vector<std::uint32_t> data_sum;
    bool operator==(const SlotObservation&) const = default;
};

// Ideal noiseless adder-channel front end. The physical layer is assumed
// to deliver the q-ary sum of all simultaneous transmissions error-free,
// and the signature segment is additionally lifted to integer sums.
class AdderChannel {
  public:
    AdderChannel(std::uint32_t q, std::size_t sig_len, std::size_t data_len);

    std::uint32_t q() const { return q_; }
    std::size_t sig_len() const { return sig_len_; }
    std::size_t data_len() const { return data_len_; }

    // Symbol-wise sums over all words; an empty collection yields the
    // all-zero observation. Throws on length mismatches.
    SlotObservation transmit_slot(std::span<const UserWord> words) const;

  private:
    std::uint32_t q_;
    std::size_t sig_len_;
    std::size_t data_len_;
};

// Coordinate-wise (sum - known) mod q; inverts one known contribution of
// a stored mod-q superposition.
std::vector<std::uint32_t> subtract_data(std::span<const std::uint32_t> sum,
                                         std::span<const std::uint32_t> known,
                                         std::uint32_t q);

}  // namespace sigsplit
