#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <random>
#include <variant>
#include <vector>

#include "sigsplit/channel.hpp"
#include "sigsplit/signature_code.hpp"

namespace sigsplit {

struct SystemParams {
    std::uint64_t m = 0;         // user population, prime
    unsigned k = 1;              // decodable-collision threshold
    std::uint32_t q = 2;         // transmission alphabet, prime <= m
    double activation_prob = 0;  // per-user packet probability at the beacon
    double power = 2;            // average power constraint, > 1
    unsigned payload_bits = 1;   // data bits per packet
    std::uint64_t seed = 0;

    void validate() const;  // throws std::invalid_argument
    // q-ary symbols needed to carry payload_bits.
    std::size_t data_symbols() const;
};

// Receiver broadcast ending a slot.
struct FeedbackEmpty {};
struct FeedbackResolved {
    std::vector<int> active_set;  // decoded transmitters, ascending
    std::vector<int> schedule;    // next |active|-1 singleton slots
};
struct FeedbackCollision {};  // too many transmitters: split now
struct FeedbackAck {
    int user;
};
using FeedbackMessage = std::variant<FeedbackEmpty, FeedbackResolved,
                                     FeedbackCollision, FeedbackAck>;

struct SlotRecord {
    std::uint64_t slot;   // 1-based slot index
    std::uint64_t group;  // contention-tree node the slot served
    std::vector<int> transmitters;
    SlotObservation observation;
    FeedbackMessage feedback;
};

struct ResolutionResult {
    std::uint64_t slots_used = 0;
    std::map<int, std::vector<std::uint32_t>> payloads;
    std::vector<SlotRecord> transcript;
};

using ActiveSet = std::map<int, std::vector<std::uint32_t>>;  // user -> payload

// Runs one full contention period over the initially active users:
// groups transmit slot by slot; up to k simultaneous users are decoded
// from one observation and drained via k-1 scheduled singletons plus one
// mod-q subtraction; larger groups split uniformly into two subgroups
// resolved depth-first. Every slot counts, including empty-subgroup
// slots. Deterministic given params.seed.
ResolutionResult run_contention(const SystemParams& params,
                                const SignatureCodebook& codebook,
                                const ActiveSet& active);

struct SlotCountSample {
    double mean = 0;
    double std_error = 0;
    std::uint64_t trials = 0;
};

// Monte Carlo estimate of the expected slot count for l initially active
// users under threshold k, over the abstract splitting process (no
// codebook involved): a group of size j <= k costs max(j, 1) slots, a
// larger group costs one slot plus its two random halves.
SlotCountSample simulate_slot_count(unsigned l, unsigned k,
                                    std::uint64_t trials, std::uint64_t seed);

// Independent Bernoulli(p) activity draw per user, ascending ids.
std::vector<int> sample_active_set(const SystemParams& params,
                                   std::mt19937_64& rng);

// One JSON record per slot: index, group, transmitters, sums, feedback.
void write_event_log(std::ostream& os, const ResolutionResult& result);

}  // namespace sigsplit
