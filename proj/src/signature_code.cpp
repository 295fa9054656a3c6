#include "sigsplit/signature_code.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace sigsplit {

ColumnSums sum_signature_words(std::span<const SignatureWord> words,
                               std::size_t sig_len) {
    ColumnSums out;
    out.sums.assign(sig_len, 0);
    for (const auto& w : words) {
        if (w.symbols.size() != sig_len) {
            throw std::invalid_argument("signature word length mismatch");
        }
        for (std::size_t j = 0; j < sig_len; ++j) out.sums[j] += w.symbols[j];
    }
    return out;
}

std::size_t signature_length(std::uint64_t m, unsigned k, std::uint32_t q) {
    mpz_class order;
    mpz_ui_pow_ui(order.get_mpz_t(), m, k);
    order -= 1;
    std::size_t digits = 0;
    mpz_class reach = 1;
    while (reach < order) {
        reach *= q;
        ++digits;
    }
    return digits + 1;
}

SignatureCodebook::SignatureCodebook(ExtField field, std::uint32_t q,
                                     std::size_t sig_len,
                                     std::map<int, mpz_class> s)
    : field_(std::move(field)), q_(q), sig_len_(sig_len), s_(std::move(s)) {
    validate();
}

SignatureCodebook SignatureCodebook::build(std::uint64_t m, unsigned k,
                                           std::uint32_t q) {
    if (!is_prime(q)) {
        throw std::invalid_argument("alphabet size q must be prime");
    }
    if (q > m) {
        throw std::invalid_argument("alphabet size q must not exceed M");
    }
    ExtField field = ExtField::find_primitive(m, k);
    DiscreteLog dlog(field);
    const ExtElement a = field.generator();

    std::map<int, mpz_class> s;
    for (std::uint64_t user = 1; user <= m; ++user) {
        const ExtElement target = field.add(a, field.from_base(user - 1));
        if (field.is_zero(target)) continue;  // only possible for K = 1
        s.emplace(static_cast<int>(user), dlog.log(target));
    }
    return SignatureCodebook(std::move(field), q,
                             signature_length(m, k, q), std::move(s));
}

void SignatureCodebook::validate() const {
    if (!is_prime(q_) || q_ > field_.base().modulus()) {
        throw std::invalid_argument("invalid signature alphabet");
    }
    if (sig_len_ != signature_length(field_.base().modulus(),
                                     field_.degree(), q_)) {
        throw std::invalid_argument("signature length mismatch");
    }
    const unsigned k = field_.degree();
    const std::uint64_t m = field_.base().modulus();
    if (s_.size() + (k == 1 ? 1 : 0) != m) {
        throw std::invalid_argument("codebook does not cover the user set");
    }
    const ExtElement a = field_.generator();
    std::vector<mpz_class> seen;
    for (const auto& [user, s] : s_) {
        if (user < 1 || static_cast<std::uint64_t>(user) > m) {
            throw std::invalid_argument("user id out of range");
        }
        if (s < 0 || s >= field_.group_order() ||
            (k >= 2 && s == 0)) {
            throw std::invalid_argument("signature exponent out of range");
        }
        const ExtElement expect =
            field_.add(a, field_.from_base(static_cast<std::uint64_t>(user) - 1));
        if (!(field_.pow(a, s) == expect)) {
            throw std::invalid_argument(
                "signature exponent inconsistent with the field");
        }
        seen.push_back(s);
    }
    std::sort(seen.begin(), seen.end());
    if (std::adjacent_find(seen.begin(), seen.end()) != seen.end()) {
        throw std::invalid_argument("signature exponents are not distinct");
    }
}

std::vector<int> SignatureCodebook::users() const {
    std::vector<int> out;
    out.reserve(s_.size());
    for (const auto& [user, s] : s_) out.push_back(user);
    return out;
}

SignatureWord SignatureCodebook::encode_signature(int user) const {
    auto it = s_.find(user);
    if (it == s_.end()) {
        throw std::invalid_argument("unknown user id " + std::to_string(user));
    }
    SignatureWord w;
    w.symbols.assign(sig_len_, 0);
    w.symbols[0] = 1;
    mpz_class rest = it->second;
    for (std::size_t pos = sig_len_; pos-- > 1 && rest != 0;) {
        w.symbols[pos] =
            static_cast<std::uint32_t>(mpz_class(rest % q_).get_ui());
        rest /= q_;
    }
    return w;
}

double SignatureCodebook::signature_bits() const {
    const double bits =
        static_cast<double>(sig_len_) * std::log2(static_cast<double>(q_));
    const double cap =
        (field_.degree() + 2) *
        std::log2(static_cast<double>(field_.base().modulus()));
    if (bits > cap) {
        throw std::logic_error("signature length exceeds its length bound");
    }
    return bits;
}

std::uint64_t SignatureCodebook::decode_count(const ColumnSums& sums) {
    if (sums.sums.empty()) {
        throw std::invalid_argument("column sums are empty");
    }
    return sums.sums[0];
}

std::vector<int> SignatureCodebook::decode_active_set(
    const ColumnSums& sums) const {
    if (sums.sums.size() != sig_len_) {
        throw std::invalid_argument("column sums length mismatch");
    }
    const std::uint64_t count = decode_count(sums);
    if (count == 0) {
        throw std::invalid_argument("empty slot has no active set");
    }
    const unsigned k = field_.degree();
    if (count > k) {
        throw NotDecodableError("slot with " + std::to_string(count) +
                                " transmitters exceeds the threshold " +
                                std::to_string(k));
    }
    const auto l = static_cast<unsigned>(count);

    // Column sums are linear, so the digit columns reassemble the exact
    // integer sum of the contributing exponents; no carries occur.
    mpz_class t = 0;
    for (std::size_t j = 1; j < sig_len_; ++j) {
        t = t * q_ + sums.sums[j];
    }

    // a^t = prod (a + b_i), the value at a of the monic degree-l
    // polynomial with roots -b_i.
    const ExtElement e = field_.pow(field_.generator(), t);

    std::vector<std::uint64_t> p;
    if (l < k) {
        // Coefficients are read straight off the power basis.
        for (unsigned j = l + 1; j < k; ++j) {
            if (e.coeffs[j] != 0) {
                throw std::logic_error("column sums are not a sum of " +
                                       std::to_string(l) + " signatures");
            }
        }
        if (e.coeffs[l] != 1) {
            throw std::logic_error("column sums are not a sum of " +
                                   std::to_string(l) + " signatures");
        }
        p.assign(e.coeffs.begin(), e.coeffs.begin() + l + 1);
    } else {
        // l == k: the product polynomial is the minimal polynomial plus
        // the residue representing e.
        p.assign(k + 1, 0);
        const PrimeField& fm = field_.base();
        for (unsigned j = 0; j < k; ++j) {
            p[j] = fm.add(field_.min_poly()[j], e.coeffs[j]);
        }
        p[k] = 1;
    }

    const PrimeField& fm = field_.base();
    const std::vector<std::uint64_t> roots = roots_in_base_field(fm, p);
    std::vector<int> active;
    for (std::uint64_t r : roots) {
        active.push_back(static_cast<int>(fm.neg(r)) + 1);
    }
    std::sort(active.begin(), active.end());
    const bool distinct =
        std::adjacent_find(active.begin(), active.end()) == active.end();
    if (active.size() != l || !distinct) {
        throw std::logic_error("decoded product does not split into " +
                               std::to_string(l) + " distinct users");
    }

    // Cross-check by re-encoding; rejects sums that were never a genuine
    // superposition of codebook words.
    std::vector<SignatureWord> words;
    for (int user : active) words.push_back(encode_signature(user));
    if (!(sum_signature_words(words, sig_len_) == sums)) {
        throw std::logic_error("column sums fail re-encoding verification");
    }
    return active;
}

std::vector<int> SignatureCodebook::brute_force_decode(
    const ColumnSums& sums) const {
    if (sums.sums.size() != sig_len_) {
        throw std::invalid_argument("column sums length mismatch");
    }
    const std::uint64_t count = decode_count(sums);
    if (count == 0) {
        throw std::invalid_argument("empty slot has no active set");
    }
    if (count > field_.degree()) {
        throw NotDecodableError("count exceeds the decodable threshold");
    }

    const std::vector<int> ids = users();
    const auto l = static_cast<std::size_t>(count);
    if (l > ids.size()) {
        throw std::runtime_error("no user subset matches the column sums");
    }

    std::vector<SignatureWord> words;
    words.reserve(ids.size());
    for (int user : ids) words.push_back(encode_signature(user));

    std::vector<std::size_t> pick(l);
    for (std::size_t i = 0; i < l; ++i) pick[i] = i;

    std::vector<std::vector<int>> matches;
    for (;;) {
        ColumnSums acc;
        acc.sums.assign(sig_len_, 0);
        for (std::size_t i : pick) {
            for (std::size_t j = 0; j < sig_len_; ++j) {
                acc.sums[j] += words[i].symbols[j];
            }
        }
        if (acc == sums) {
            std::vector<int> subset;
            for (std::size_t i : pick) subset.push_back(ids[i]);
            matches.push_back(std::move(subset));
        }
        // next combination
        std::size_t i = l;
        while (i-- > 0) {
            if (pick[i] + (l - i) < ids.size()) {
                ++pick[i];
                for (std::size_t j = i + 1; j < l; ++j) pick[j] = pick[j - 1] + 1;
                break;
            }
            if (i == 0) {
                if (matches.empty()) {
                    throw std::runtime_error(
                        "no user subset matches the column sums");
                }
                if (matches.size() > 1) {
                    throw std::logic_error(
                        "multiple subsets match: codebook uniqueness violated");
                }
                return matches.front();
            }
        }
    }
}

nlohmann::json SignatureCodebook::to_json() const {
    nlohmann::json sig = nlohmann::json::array();
    for (const auto& [user, s] : s_) {
        sig.push_back({{"user", user}, {"s", s.get_str()}});
    }
    return nlohmann::json{{"m", field_.base().modulus()},
                          {"k", field_.degree()},
                          {"q", q_},
                          {"field", field_.to_json()},
                          {"sig_len", sig_len_},
                          {"signatures", std::move(sig)}};
}

SignatureCodebook SignatureCodebook::from_json(const nlohmann::json& j) {
    ExtField field = ExtField::from_json(j.at("field"));
    if (j.at("m").get<std::uint64_t>() != field.base().modulus() ||
        j.at("k").get<unsigned>() != field.degree()) {
        throw std::invalid_argument("codebook header disagrees with field");
    }
    std::map<int, mpz_class> s;
    for (const auto& entry : j.at("signatures")) {
        const int user = entry.at("user").get<int>();
        const mpz_class value(entry.at("s").get<std::string>());
        if (!s.emplace(user, value).second) {
            throw std::invalid_argument("duplicate user in codebook");
        }
    }
    return SignatureCodebook(std::move(field), j.at("q").get<std::uint32_t>(),
                             j.at("sig_len").get<std::size_t>(), std::move(s));
}

}  // namespace sigsplit
