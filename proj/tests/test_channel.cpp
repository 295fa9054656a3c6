#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "sigsplit/channel.hpp"
#include "sigsplit/rng.hpp"

using namespace sigsplit;

namespace {

UserWord random_word(std::mt19937_64& rng, std::uint32_t q,
                     std::size_t sig_len, std::size_t d_len) {
    UserWord w;
    w.signature.symbols.assign(sig_len, 0);
    w.signature.symbols[0] = 1;
    for (std::size_t j = 1; j < sig_len; ++j) {
        w.signature.symbols[j] =
            static_cast<std::uint32_t>(uniform_below(rng, q));
    }
    w.data.resize(d_len);
    for (auto& v : w.data) {
        v = static_cast<std::uint32_t>(uniform_below(rng, q));
    }
    return w;
}

}  // namespace

TEST_CASE("empty and singleton slots") {
    const AdderChannel ch(2, 4, 3);
    const auto empty = ch.transmit_slot({});
    CHECK(empty.sig_sums.sums == std::vector<std::uint64_t>{0, 0, 0, 0});
    CHECK(empty.data_sum == std::vector<std::uint32_t>{0, 0, 0});

    std::mt19937_64 rng = seeded_stream(3, 0);
    const UserWord w = random_word(rng, 2, 4, 3);
    const auto single = ch.transmit_slot(std::vector<UserWord>{w});
    for (std::size_t j = 0; j < 4; ++j) {
        CHECK(single.sig_sums.sums[j] == w.signature.symbols[j]);
    }
    CHECK(single.data_sum == w.data);
}

TEST_CASE("binary data superposition is the XOR") {
    const AdderChannel ch(2, 3, 5);
    std::mt19937_64 rng = seeded_stream(4, 1);
    const UserWord a = random_word(rng, 2, 3, 5);
    const UserWord b = random_word(rng, 2, 3, 5);
    const auto obs = ch.transmit_slot(std::vector<UserWord>{a, b});
    CHECK(obs.sig_sums.sums[0] == 2);
    for (std::size_t j = 0; j < 5; ++j) {
        CHECK(obs.data_sum[j] == (a.data[j] ^ b.data[j]));
    }
    // XOR-ing one word back out recovers the other.
    CHECK(subtract_data(obs.data_sum, b.data, 2) == a.data);
}

TEST_CASE("subtraction inverts one contribution") {
    std::mt19937_64 rng = seeded_stream(5, 2);
    const std::uint32_t q = 5;
    std::vector<std::uint32_t> a(8), b(8), zero(8, 0);
    for (auto& v : a) v = static_cast<std::uint32_t>(uniform_below(rng, q));
    for (auto& v : b) v = static_cast<std::uint32_t>(uniform_below(rng, q));

    std::vector<std::uint32_t> sum(8);
    for (std::size_t j = 0; j < 8; ++j) sum[j] = (a[j] + b[j]) % q;

    CHECK(subtract_data(sum, zero, q) == sum);
    CHECK(subtract_data(sum, b, q) == a);
    CHECK(subtract_data(sum, a, q) == b);
    CHECK_THROWS_AS(subtract_data(sum, std::vector<std::uint32_t>(7, 0), q),
                    std::invalid_argument);
}

TEST_CASE("slot observations are order-invariant and additive") {
    const std::uint32_t q = 3;
    const AdderChannel ch(q, 5, 6);
    std::mt19937_64 rng = seeded_stream(6, 3);

    std::vector<UserWord> words;
    for (int i = 0; i < 6; ++i) words.push_back(random_word(rng, q, 5, 6));

    const auto obs = ch.transmit_slot(words);
    std::vector<UserWord> shuffled = words;
    for (std::size_t i = shuffled.size(); i-- > 1;) {
        std::swap(shuffled[i], shuffled[uniform_below(rng, i + 1)]);
    }
    CHECK(ch.transmit_slot(shuffled) == obs);

    // Any partition's parts recombine to the whole, mod q on data.
    const std::size_t cut = 1 + uniform_below(rng, 4);
    std::vector<UserWord> left(words.begin(), words.begin() + cut);
    std::vector<UserWord> right(words.begin() + cut, words.end());
    const auto obs_l = ch.transmit_slot(left);
    const auto obs_r = ch.transmit_slot(right);
    for (std::size_t j = 0; j < 5; ++j) {
        CHECK(obs.sig_sums.sums[j] ==
              obs_l.sig_sums.sums[j] + obs_r.sig_sums.sums[j]);
    }
    for (std::size_t j = 0; j < 6; ++j) {
        CHECK(obs.data_sum[j] == (obs_l.data_sum[j] + obs_r.data_sum[j]) % q);
    }

    // Removing all but one user by subtraction recovers that user's data.
    for (std::size_t drop = 0; drop < words.size(); ++drop) {
        std::vector<UserWord> rest;
        for (std::size_t i = 0; i < words.size(); ++i) {
            if (i != drop) rest.push_back(words[i]);
        }
        CHECK(subtract_data(obs.data_sum, ch.transmit_slot(rest).data_sum, q) ==
              words[drop].data);
    }
}

TEST_CASE("length mismatches are rejected") {
    const AdderChannel ch(2, 4, 3);
    std::mt19937_64 rng = seeded_stream(7, 4);
    UserWord bad_sig = random_word(rng, 2, 5, 3);
    UserWord bad_data = random_word(rng, 2, 4, 2);
    CHECK_THROWS_AS(ch.transmit_slot(std::vector<UserWord>{bad_sig}),
                    std::invalid_argument);
    CHECK_THROWS_AS(ch.transmit_slot(std::vector<UserWord>{bad_data}),
                    std::invalid_argument);
}
