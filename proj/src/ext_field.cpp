#include "sigsplit/ext_field.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

namespace sigsplit {

namespace {

using Poly = std::vector<std::uint64_t>;  // low degree first

Poly& trim(Poly& p) {
    while (p.size() > 1 && p.back() == 0) p.pop_back();
    return p;
}

Poly poly_mul(const PrimeField& f, const Poly& a, const Poly& b) {
    Poly r(a.size() + b.size() - 1, 0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] == 0) continue;
        for (std::size_t j = 0; j < b.size(); ++j) {
            r[i + j] = f.add(r[i + j], f.mul(a[i], b[j]));
        }
    }
    return r;
}

// Remainder of a modulo the monic polynomial mod.
Poly poly_rem(const PrimeField& f, Poly a, const Poly& mod) {
    const std::size_t k = mod.size() - 1;
    while (a.size() > k) {
        const std::uint64_t top = a.back();
        a.pop_back();
        if (top == 0) continue;
        for (std::size_t j = 0; j < k; ++j) {
            a[a.size() - k + j] =
                f.sub(a[a.size() - k + j], f.mul(top, mod[j]));
        }
    }
    while (a.size() < k) a.push_back(0);
    return a;
}

Poly poly_mulmod(const PrimeField& f, const Poly& a, const Poly& b,
                 const Poly& mod) {
    return poly_rem(f, poly_mul(f, a, b), mod);
}

Poly poly_powmod(const PrimeField& f, Poly base, std::uint64_t exp,
                 const Poly& mod) {
    Poly r(mod.size() - 1, 0);
    r[0] = 1;
    base = poly_rem(f, std::move(base), mod);
    while (exp) {
        if (exp & 1) r = poly_mulmod(f, r, base, mod);
        base = poly_mulmod(f, base, base, mod);
        exp >>= 1;
    }
    return r;
}

Poly poly_gcd(const PrimeField& f, Poly a, Poly b) {
    trim(a);
    trim(b);
    while (!(b.size() == 1 && b[0] == 0)) {
        // reduce a mod b (b need not be monic)
        const std::uint64_t lead_inv = f.inv(b.back());
        while (a.size() >= b.size() && !(a.size() == 1 && a[0] == 0)) {
            if (a.back() == 0) {
                a.pop_back();
                if (a.empty()) a.push_back(0);
                continue;
            }
            const std::uint64_t c = f.mul(a.back(), lead_inv);
            const std::size_t shift = a.size() - b.size();
            for (std::size_t j = 0; j < b.size(); ++j) {
                a[shift + j] = f.sub(a[shift + j], f.mul(c, b[j]));
            }
            trim(a);
            if (a.size() == 1 && a[0] == 0) break;
        }
        std::swap(a, b);
    }
    return a;
}

bool is_irreducible(const PrimeField& f, const Poly& candidate) {
    const std::size_t k = candidate.size() - 1;
    if (k == 1) return true;
    const std::uint64_t m = f.modulus();

    // x^(M^j) mod candidate for j = 1..K via repeated Frobenius.
    Poly x(k, 0);
    x[1] = 1;
    std::vector<Poly> frob(k + 1);
    frob[0] = x;
    for (std::size_t j = 1; j <= k; ++j) {
        frob[j] = poly_powmod(f, frob[j - 1], m, candidate);
    }
    if (trim(frob[k]) != trim(frob[0])) return false;

    for (const auto& [prime, mult] : factorize(k)) {
        (void)mult;
        Poly diff = frob[k / prime];
        diff.resize(std::max<std::size_t>(diff.size(), 2), 0);
        diff[1] = f.sub(diff[1], 1);
        Poly g = poly_gcd(f, diff, candidate);
        if (!(g.size() == 1)) return false;
    }
    return true;
}

std::string element_key(const ExtElement& e) {
    std::string key(e.coeffs.size() * sizeof(std::uint64_t), '\0');
    std::memcpy(key.data(), e.coeffs.data(), key.size());
    return key;
}

}  // namespace

ExtField::ExtField(PrimeField base, std::vector<std::uint64_t> min_poly)
    : base_(base), min_poly_(std::move(min_poly)) {
    if (min_poly_.size() < 2) {
        throw std::invalid_argument("minimal polynomial must have degree >= 1");
    }
    degree_ = static_cast<unsigned>(min_poly_.size() - 1);
    for (auto& c : min_poly_) c = base_.reduce(c);
    if (min_poly_.back() != 1) {
        throw std::invalid_argument("minimal polynomial must be monic");
    }

    mpz_ui_pow_ui(group_order_.get_mpz_t(), base_.modulus(), degree_);
    group_order_ -= 1;

    if (!is_irreducible(base_, min_poly_)) {
        throw std::invalid_argument("minimal polynomial is not irreducible");
    }

    // Primitivity: the residue of x must have order M^K - 1. Checked via
    // the prime factorization of the group order, which must fit 64 bits.
    if (!group_order_.fits_ulong_p()) {
        throw std::invalid_argument(
            "field order exceeds the supported construction scale");
    }
    const std::uint64_t n = group_order_.get_ui();
    const ExtElement a = generator();
    if (is_zero(a)) {
        throw std::invalid_argument("residue of x is zero");
    }
    if (!(pow(a, n) == one())) {
        throw std::invalid_argument("minimal polynomial is not primitive");
    }
    for (const auto& [prime, mult] : factorize(n)) {
        (void)mult;
        if (pow(a, n / prime) == one()) {
            throw std::invalid_argument("minimal polynomial is not primitive");
        }
    }
}

ExtField ExtField::find_primitive(std::uint64_t m, unsigned degree) {
    if (degree < 1) throw std::invalid_argument("extension degree must be >= 1");
    PrimeField base(m);  // validates primality

    mpz_class count;
    mpz_ui_pow_ui(count.get_mpz_t(), m, degree);
    if (!mpz_class(count - 1).fits_ulong_p()) {
        throw std::invalid_argument(
            "field order exceeds the supported construction scale");
    }
    const std::uint64_t n = mpz_class(count - 1).get_ui();
    const auto factors = factorize(n);

    // Candidate x^K - d_{K-1} x^{K-1} - ... - d_0, (d_0,...,d_{K-1}) in
    // base-M counter order.
    std::vector<std::uint64_t> d(degree, 0);
    for (std::uint64_t t = 0;; ++t) {
        std::uint64_t tt = t;
        bool overflow = false;
        for (unsigned j = 0; j < degree; ++j) {
            d[j] = tt % m;
            tt /= m;
        }
        if (tt != 0) overflow = true;
        if (overflow) break;

        Poly candidate(degree + 1, 0);
        for (unsigned j = 0; j < degree; ++j) candidate[j] = base.neg(d[j]);
        candidate[degree] = 1;

        if (!is_irreducible(base, candidate)) continue;

        // Order check on the residue of x without constructing the field.
        Poly x{0, 1};
        Poly residue = poly_rem(base, x, candidate);
        if (trim(residue).size() == 1 && residue[0] == 0) continue;
        Poly one_poly(degree, 0);
        one_poly[0] = 1;
        bool primitive = poly_powmod(base, Poly{0, 1}, n, candidate) == one_poly;
        for (std::size_t i = 0; primitive && i < factors.size(); ++i) {
            if (poly_powmod(base, Poly{0, 1}, n / factors[i].first,
                            candidate) == one_poly) {
                primitive = false;
            }
        }
        if (primitive) return ExtField(base, std::move(candidate));
    }
    // Primitive polynomials exist for every prime M and K >= 1.
    throw std::logic_error("primitive polynomial search exhausted");
}

ExtElement ExtField::zero() const {
    return ExtElement{std::vector<std::uint64_t>(degree_, 0)};
}

ExtElement ExtField::one() const {
    ExtElement e = zero();
    e.coeffs[0] = 1;
    return e;
}

ExtElement ExtField::generator() const {
    return reduce({0, 1});
}

ExtElement ExtField::from_base(std::uint64_t value) const {
    ExtElement e = zero();
    e.coeffs[0] = base_.reduce(value);
    return e;
}

bool ExtField::is_zero(const ExtElement& e) const {
    check_element(e);
    for (auto c : e.coeffs) {
        if (c != 0) return false;
    }
    return true;
}

void ExtField::check_element(const ExtElement& e) const {
    if (e.coeffs.size() != degree_) {
        throw std::invalid_argument("element does not belong to this field");
    }
}

ExtElement ExtField::reduce(std::vector<std::uint64_t> poly) const {
    for (auto& c : poly) c = base_.reduce(c);
    poly = poly_rem(base_, std::move(poly), min_poly_);
    return ExtElement{std::move(poly)};
}

ExtElement ExtField::add(const ExtElement& a, const ExtElement& b) const {
    check_element(a);
    check_element(b);
    ExtElement r = a;
    for (unsigned i = 0; i < degree_; ++i) {
        r.coeffs[i] = base_.add(r.coeffs[i], b.coeffs[i]);
    }
    return r;
}

ExtElement ExtField::sub(const ExtElement& a, const ExtElement& b) const {
    check_element(a);
    check_element(b);
    ExtElement r = a;
    for (unsigned i = 0; i < degree_; ++i) {
        r.coeffs[i] = base_.sub(r.coeffs[i], b.coeffs[i]);
    }
    return r;
}

ExtElement ExtField::mul(const ExtElement& a, const ExtElement& b) const {
    check_element(a);
    check_element(b);
    return ExtElement{
        poly_rem(base_, poly_mul(base_, a.coeffs, b.coeffs), min_poly_)};
}

ExtElement ExtField::pow(const ExtElement& a, std::uint64_t exp) const {
    check_element(a);
    ExtElement r = one();
    ExtElement base = a;
    while (exp) {
        if (exp & 1) r = mul(r, base);
        base = mul(base, base);
        exp >>= 1;
    }
    return r;
}

ExtElement ExtField::pow(const ExtElement& a, const mpz_class& exp) const {
    check_element(a);
    if (exp < 0) throw std::invalid_argument("exponent must be non-negative");
    if (exp.fits_ulong_p()) return pow(a, exp.get_ui());
    ExtElement r = one();
    ExtElement base = a;
    const mp_bitcnt_t bits = mpz_sizeinbase(exp.get_mpz_t(), 2);
    for (mp_bitcnt_t i = 0; i < bits; ++i) {
        if (mpz_tstbit(exp.get_mpz_t(), i)) r = mul(r, base);
        base = mul(base, base);
    }
    return r;
}

nlohmann::json ExtField::to_json() const {
    return nlohmann::json{{"m", base_.modulus()},
                          {"k", degree_},
                          {"min_poly", min_poly_}};
}

ExtField ExtField::from_json(const nlohmann::json& j) {
    return ExtField(PrimeField(j.at("m").get<std::uint64_t>()),
                    j.at("min_poly").get<std::vector<std::uint64_t>>());
}

DiscreteLog::DiscreteLog(const ExtField& field) : field_(&field) {
    if (!field.group_order().fits_ulong_p()) {
        throw std::invalid_argument(
            "group order exceeds the supported discrete-log scale");
    }
    order_ = field.group_order().get_ui();
    step_ = static_cast<std::uint64_t>(std::ceil(std::sqrt(
        static_cast<double>(order_))));
    if (step_ == 0) step_ = 1;
    while (step_ * step_ < order_) ++step_;

    const ExtElement a = field.generator();
    ExtElement cur = field.one();
    baby_.reserve(step_);
    for (std::uint64_t j = 0; j < step_; ++j) {
        baby_.emplace(element_key(cur), j);
        cur = field.mul(cur, a);
    }
    giant_ = field.pow(a, order_ - step_ % order_);  // a^(-step)
}

mpz_class DiscreteLog::log(const ExtElement& target) const {
    if (field_->is_zero(target)) {
        throw std::invalid_argument("zero has no discrete logarithm");
    }
    ExtElement cur = target;
    for (std::uint64_t i = 0; i * step_ <= order_; ++i) {
        auto it = baby_.find(element_key(cur));
        if (it != baby_.end()) {
            return mpz_class((i * step_ + it->second) % order_);
        }
        cur = field_->mul(cur, giant_);
    }
    throw std::logic_error("discrete logarithm not found in a cyclic group");
}

std::vector<std::uint64_t> roots_in_base_field(
    const PrimeField& fm, const std::vector<std::uint64_t>& poly) {
    if (poly.size() < 2 || fm.reduce(poly.back()) != 1) {
        throw std::invalid_argument("polynomial must be monic of degree >= 1");
    }
    Poly p = poly;
    for (auto& c : p) c = fm.reduce(c);

    std::vector<std::uint64_t> roots;
    for (std::uint64_t r = 0; r < fm.modulus(); ++r) {
        for (;;) {
            if (p.size() < 2) break;
            // Horner evaluation and synthetic division in one pass.
            std::uint64_t acc = 0;
            Poly quotient(p.size() - 1, 0);
            for (std::size_t i = p.size(); i-- > 0;) {
                acc = fm.add(fm.mul(acc, r), p[i]);
                if (i > 0) quotient[i - 1] = acc;
            }
            if (acc != 0) break;
            roots.push_back(r);
            p = std::move(quotient);
        }
    }
    return roots;
}

}  // namespace sigsplit
