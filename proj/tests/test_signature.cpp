#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <set>

#include "sigsplit/rng.hpp"
#include "sigsplit/signature_code.hpp"

using namespace sigsplit;

namespace {

ColumnSums sums_of(const SignatureCodebook& cb, const std::vector<int>& users) {
    std::vector<SignatureWord> words;
    for (int u : users) words.push_back(cb.encode_signature(u));
    return sum_signature_words(words, cb.sig_len());
}

template <class Fn>
void for_each_subset(const std::vector<int>& ids, unsigned max_size, Fn&& fn) {
    const int n = static_cast<int>(ids.size());
    for (int mask = 1; mask < (1 << n); ++mask) {
        if (static_cast<unsigned>(__builtin_popcount(mask)) > max_size) continue;
        std::vector<int> subset;
        for (int i = 0; i < n; ++i) {
            if (mask & (1 << i)) subset.push_back(ids[i]);
        }
        fn(subset);
    }
}

}  // namespace

TEST_CASE("codebook construction parameters") {
    const auto cb = SignatureCodebook::build(7, 2, 2);
    CHECK(cb.sig_len() == 7);  // ceil(log2 48) + 1
    CHECK(cb.signature_bits() == doctest::Approx(7.0));
    CHECK(cb.signature_bits() <= 4 * std::log2(7.0));
    CHECK(cb.assignments().size() == 7);

    CHECK_THROWS_AS(SignatureCodebook::build(6, 2, 2), std::invalid_argument);
    CHECK_THROWS_AS(SignatureCodebook::build(7, 2, 11), std::invalid_argument);
    CHECK_THROWS_AS(SignatureCodebook::build(7, 2, 4), std::invalid_argument);
}

TEST_CASE("threshold one covers all users but the one without a logarithm") {
    const auto cb = SignatureCodebook::build(5, 1, 2);
    const std::map<int, mpz_class> expect{{1, 1}, {2, 3}, {3, 2}, {5, 0}};
    CHECK(cb.assignments() == expect);
    CHECK_FALSE(cb.has_user(4));
    CHECK_THROWS_AS(cb.encode_signature(4), std::invalid_argument);

    std::set<mpz_class> distinct;
    for (const auto& [u, s] : cb.assignments()) distinct.insert(s);
    CHECK(distinct.size() == 4);
}

TEST_CASE("signature words are count-prefixed digit expansions") {
    // In F_17 the exponent of user 3 is 5 = 0b0101 over 4 digit positions.
    const auto cb = SignatureCodebook::build(17, 1, 2);
    CHECK(cb.sig_len() == 5);
    REQUIRE(cb.has_user(3));
    CHECK(cb.assignments().at(3) == 5);
    CHECK(cb.encode_signature(3).symbols ==
          std::vector<std::uint32_t>{1, 0, 1, 0, 1});

    for (int user : cb.users()) {
        const SignatureWord w = cb.encode_signature(user);
        CHECK(w.symbols[0] == 1);
        // Re-assembling the digits recovers the exponent.
        mpz_class s = 0;
        for (std::size_t j = 1; j < w.symbols.size(); ++j) {
            s = s * cb.q() + w.symbols[j];
        }
        CHECK(s == cb.assignments().at(user));
    }
}

TEST_CASE("exponent sums are unique per cardinality and words decode") {
    const auto cb = SignatureCodebook::build(7, 3, 2);
    const auto ids = cb.users();
    REQUIRE(ids.size() == 7);

    std::set<ColumnSums> vectors;
    std::map<std::size_t, std::set<mpz_class>> sums_by_size;
    std::size_t checked = 0;
    for_each_subset(ids, 3, [&](const std::vector<int>& subset) {
        ++checked;
        CHECK(vectors.insert(sums_of(cb, subset)).second);
        mpz_class t = 0;
        for (int u : subset) t += cb.assignments().at(u);
        CHECK(sums_by_size[subset.size()].insert(t).second);
        CHECK(cb.decode_active_set(sums_of(cb, subset)) == subset);
    });
    CHECK(checked == 63);  // C(7,1) + C(7,2) + C(7,3)
}

TEST_CASE("decode_count reads the counter column") {
    const auto cb = SignatureCodebook::build(7, 3, 2);
    ColumnSums zeros;
    zeros.sums.assign(cb.sig_len(), 0);
    CHECK(SignatureCodebook::decode_count(zeros) == 0);
    CHECK(SignatureCodebook::decode_count(sums_of(cb, {4})) == 1);
    // Counts above the threshold are still exact.
    CHECK(SignatureCodebook::decode_count(sums_of(cb, {1, 2, 3, 5, 7})) == 5);
}

TEST_CASE("decoder error paths") {
    const auto cb = SignatureCodebook::build(7, 3, 2);
    ColumnSums zeros;
    zeros.sums.assign(cb.sig_len(), 0);
    CHECK_THROWS_AS(cb.decode_active_set(zeros), std::invalid_argument);
    CHECK_THROWS_AS(cb.decode_active_set(sums_of(cb, {1, 2, 3, 4})),
                    NotDecodableError);

    // Tampering with a digit column leaves no consistent explanation.
    ColumnSums bad = sums_of(cb, {2, 5});
    bad.sums[3] += 1;
    CHECK_THROWS_AS(cb.decode_active_set(bad), std::logic_error);
}

TEST_CASE("brute force oracle agrees with the algebraic decoder") {
    const auto cb = SignatureCodebook::build(31, 3, 2);
    const auto ids = cb.users();
    std::mt19937_64 rng = seeded_stream(2024, 5);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t size = 1 + uniform_below(rng, 3);
        std::set<int> chosen;
        while (chosen.size() < size) {
            chosen.insert(ids[uniform_below(rng, ids.size())]);
        }
        const std::vector<int> subset(chosen.begin(), chosen.end());
        const ColumnSums sums = sums_of(cb, subset);
        CHECK(cb.decode_active_set(sums) == subset);
        CHECK(cb.brute_force_decode(sums) == subset);
    }
}

TEST_CASE("brute force flags corrupted counters") {
    const auto cb = SignatureCodebook::build(7, 3, 2);
    CHECK(cb.brute_force_decode(sums_of(cb, {6})) == std::vector<int>{6});

    ColumnSums bad = sums_of(cb, {2, 5});
    bad.sums[0] = 3;  // wrong count
    CHECK_THROWS_AS(cb.brute_force_decode(bad), std::runtime_error);
}

TEST_CASE("digit reconstruction is linear in the exponents") {
    const auto cb = SignatureCodebook::build(31, 3, 2);
    const auto ids = cb.users();
    std::mt19937_64 rng = seeded_stream(99, 6);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t size = 1 + uniform_below(rng, 8);
        std::set<int> chosen;
        while (chosen.size() < size) {
            chosen.insert(ids[uniform_below(rng, ids.size())]);
        }
        const std::vector<int> subset(chosen.begin(), chosen.end());
        const ColumnSums sums = sums_of(cb, subset);

        mpz_class from_columns = 0;
        for (std::size_t j = 1; j < cb.sig_len(); ++j) {
            from_columns = from_columns * cb.q() + sums.sums[j];
        }
        mpz_class direct = 0;
        for (int u : subset) direct += cb.assignments().at(u);
        CHECK(from_columns == direct);
    }
}

TEST_CASE("signature length bound holds across the parameter grid") {
    // (M=5, K=2, q=5): ceil(log5 24) + 1 = 3 symbols.
    const auto cb = SignatureCodebook::build(5, 2, 5);
    CHECK(cb.sig_len() == 3);
    CHECK(cb.signature_bits() == doctest::Approx(3 * std::log2(5.0)));

    CHECK(SignatureCodebook::build(5, 1, 5).sig_len() == 2);

    for (std::uint64_t m : {5ULL, 7ULL, 11ULL}) {
        for (unsigned k : {1u, 2u, 3u}) {
            for (std::uint32_t q : {2u, 3u, 5u}) {
                if (q > m) continue;
                const auto book = SignatureCodebook::build(m, k, q);
                CHECK(book.signature_bits() <=
                      (k + 2) * std::log2(static_cast<double>(m)));
            }
        }
    }
}

TEST_CASE("codebook serialization") {
    const auto cb = SignatureCodebook::build(11, 2, 3);
    const auto j = cb.to_json();
    const auto back = SignatureCodebook::from_json(j);
    CHECK(back.assignments() == cb.assignments());
    CHECK(back.sig_len() == cb.sig_len());
    for (int u : cb.users()) {
        CHECK(back.encode_signature(u) == cb.encode_signature(u));
    }

    // A tampered exponent no longer satisfies a^s = a + b.
    auto bad = j;
    bad["signatures"][0]["s"] = "7";
    CHECK_THROWS_AS(SignatureCodebook::from_json(bad), std::invalid_argument);
}
