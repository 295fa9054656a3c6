#include "sigsplit/analysis.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "sigsplit/signature_code.hpp"

namespace sigsplit::analysis {

namespace {

constexpr double kTailMass = 1e-12;  // binomial tail truncation threshold

double log_choose(double n, double k) {
    return std::lgamma(n + 1) - std::lgamma(k + 1) - std::lgamma(n - k + 1);
}

bool is_positive_integer(double v) {
    return v >= 1 && v == std::floor(v) && v <= 1e7;
}

// I_x(a, b) for positive integers via the binomial identity
//   I_x(a, b) = sum_{j=a}^{n} C(n, j) x^j (1-x)^(n-j),  n = a + b - 1.
// Summed over whichever of the two symmetric forms has fewer terms.
double reg_inc_beta_int(double x, long a, long b) {
    if (b > a) return 1.0 - reg_inc_beta_int(1.0 - x, b, a);
    const long n = a + b - 1;
    double total = 0;
    for (long j = a; j <= n; ++j) {
        total += std::exp(log_choose(static_cast<double>(n),
                                     static_cast<double>(j)) +
                          static_cast<double>(j) * std::log(x) +
                          static_cast<double>(n - j) * std::log1p(-x));
    }
    return std::min(total, 1.0);
}

}  // namespace

mpq_class alpha_star(unsigned k) {
    if (k < 1) throw std::invalid_argument("threshold must be >= 1");
    return 1 + mpq_class(1, k);
}

mpq_class beta_star(unsigned k) {
    if (k < 1) throw std::invalid_argument("threshold must be >= 1");
    mpz_class pow2k;
    mpz_ui_pow_ui(pow2k.get_mpz_t(), 2, k);
    mpq_class out = 1;
    out += mpq_class(1, mpz_class((k + 1) * (pow2k - 1)));
    out += mpq_class(2, k + 1);
    out += mpq_class(1, k);
    out.canonicalize();
    return out;
}

SlotCountTable::SlotCountTable(unsigned k, unsigned l_max)
    : k_(k), l_max_(l_max) {
    if (k < 1) throw std::invalid_argument("threshold must be >= 1");
    values_.reserve(l_max + 1);
    values_.emplace_back(1);  // an empty group still consumes its slot
    mpz_class pow2, choose;
    for (unsigned l = 1; l <= l_max; ++l) {
        if (l <= k) {
            values_.emplace_back(l);
            continue;
        }
        // S(L) (1 - 2^(1-L)) = 1 + 2^(1-L) sum_{j<L} C(L,j) S(j)
        mpq_class acc = 0;
        for (unsigned j = 0; j < l; ++j) {
            mpz_bin_uiui(choose.get_mpz_t(), l, j);
            acc += choose * values_[j];
        }
        mpz_ui_pow_ui(pow2.get_mpz_t(), 2, l - 1);
        const mpq_class half_weight(1, pow2);  // 2^(1-L)
        mpq_class value = (1 + half_weight * acc) / (1 - half_weight);
        value.canonicalize();
        values_.push_back(std::move(value));
    }
}

const mpq_class& SlotCountTable::expected_slots(unsigned l) const {
    if (l >= values_.size()) {
        throw std::out_of_range("slot-count table does not reach that L");
    }
    return values_[l];
}

double SlotCountTable::expected_slots_d(unsigned l) const {
    return expected_slots(l).get_d();
}

BoundsReport check_bounds(const SlotCountTable& table) {
    const unsigned k = table.threshold();
    const mpq_class alpha = alpha_star(k);
    const mpq_class beta = beta_star(k);
    BoundsReport report;
    for (unsigned l = k + 1; l <= table.l_max(); ++l) {
        BoundRow row{l, alpha * l - 1, table.expected_slots(l), beta * l - 1,
                     false};
        row.holds = row.lower <= row.exact && row.exact <= row.upper;
        report.all_hold = report.all_hold && row.holds;
        report.rows.push_back(std::move(row));
    }
    return report;
}

double q_dist(std::uint64_t m, double p, std::uint64_t l) {
    if (l > m) throw std::invalid_argument("active count exceeds population");
    if (!(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument("probability out of range");
    }
    if (p == 0.0) return l == 0 ? 1.0 : 0.0;
    if (p == 1.0) return l == m ? 1.0 : 0.0;
    const auto md = static_cast<double>(m);
    const auto ld = static_cast<double>(l);
    return std::exp(log_choose(md, ld) + ld * std::log(p) +
                    (md - ld) * std::log1p(-p));
}

double q_hat(std::uint64_t m, double p, std::uint64_t l) {
    if (l == 0) return 0.0;
    const double q0 = q_dist(m, p, 0);
    return q_dist(m, p, l) / (1.0 - q0);
}

namespace detail {

// Lentz's method for the standard continued fraction of I_x(a, b).
double reg_inc_beta_cf(double x, double a, double b) {
    const double tiny = 1e-300;
    const double eps = 1e-15;
    auto contfrac = [&](double aa, double bb, double xx) {
        double c = 1.0;
        double d = 1.0 - (aa + bb) * xx / (aa + 1.0);
        if (std::fabs(d) < tiny) d = tiny;
        d = 1.0 / d;
        double h = d;
        for (int mstep = 1; mstep <= 300; ++mstep) {
            const double md = mstep;
            double num = md * (bb - md) * xx /
                         ((aa + 2 * md - 1) * (aa + 2 * md));
            d = 1.0 + num * d;
            if (std::fabs(d) < tiny) d = tiny;
            c = 1.0 + num / c;
            if (std::fabs(c) < tiny) c = tiny;
            d = 1.0 / d;
            h *= d * c;
            num = -(aa + md) * (aa + bb + md) * xx /
                  ((aa + 2 * md) * (aa + 2 * md + 1));
            d = 1.0 + num * d;
            if (std::fabs(d) < tiny) d = tiny;
            c = 1.0 + num / c;
            if (std::fabs(c) < tiny) c = tiny;
            d = 1.0 / d;
            const double delta = d * c;
            h *= delta;
            if (std::fabs(delta - 1.0) < eps) break;
        }
        return h;
    };
    const double front = std::exp(a * std::log(x) + b * std::log1p(-x) +
                                  std::lgamma(a + b) - std::lgamma(a) -
                                  std::lgamma(b)) /
                         a;
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * contfrac(a, b, x);
    }
    const double front_c = std::exp(b * std::log1p(-x) + a * std::log(x) +
                                    std::lgamma(a + b) - std::lgamma(a) -
                                    std::lgamma(b)) /
                           b;
    return 1.0 - front_c * contfrac(b, a, 1.0 - x);
}

}  // namespace detail

double reg_inc_beta(double x, double a, double b) {
    if (!(a > 0.0 && b > 0.0)) {
        throw std::invalid_argument("beta parameters must be positive");
    }
    if (!(x >= 0.0 && x <= 1.0)) {
        throw std::invalid_argument("beta argument must lie in [0, 1]");
    }
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    if (is_positive_integer(a) && is_positive_integer(b)) {
        return reg_inc_beta_int(x, static_cast<long>(a), static_cast<long>(b));
    }
    return detail::reg_inc_beta_cf(x, a, b);
}

double avg_res_rate_bound(std::uint64_t m, double p, unsigned k) {
    if (k >= m) throw std::invalid_argument("threshold must be below M");
    if (!(p > 0.0 && p < 1.0)) {
        throw std::invalid_argument("probability must lie in (0, 1)");
    }
    const double beta = beta_star(k).get_d();
    const double q0 = q_dist(m, p, 0);
    const double mass_low = reg_inc_beta(1.0 - p, static_cast<double>(m - k),
                                         static_cast<double>(k + 1));
    const double mass_high = reg_inc_beta(p, static_cast<double>(k + 1),
                                          static_cast<double>(m - k));
    const double value =
        (beta * mass_low + mass_high - q0 * beta) / ((1.0 - q0) * beta);
    return std::max(0.0, value);
}

double r_plnc(double power) {
    if (!(power > 0.0)) throw std::invalid_argument("power must be positive");
    return power >= 1.0 ? 0.5 * std::log2(power) : 0.0;
}

NetRateBounds net_rate_bounds(std::uint64_t m, double p, unsigned k,
                              double power, double payload_bits) {
    if (payload_bits < 1) {
        throw std::invalid_argument("payload must be >= 1 bit");
    }
    const double beta = beta_star(k).get_d();
    const double rate = r_plnc(power);
    const double overhead =
        payload_bits /
        ((k + 2) * std::log2(static_cast<double>(m)) + payload_bits);

    NetRateBounds out;
    const double active_mass = 1.0 - q_dist(m, p, 0);
    double mass_seen = 0;
    std::uint64_t l = 1;
    for (; l <= m; ++l) {
        const double q = q_dist(m, p, l);
        mass_seen += q;
        const auto ld = static_cast<double>(l);
        const double relaxed = ld / (beta * ld - 1.0);
        out.lower += q * (l <= k ? 1.0 : relaxed);
        out.lower_printed += q * relaxed;
        out.upper += q * 0.5 * std::log2(1.0 + ld * power);
        if (active_mass - mass_seen < kTailMass && ld > p * m) break;
    }
    const double tail = std::max(0.0, active_mass - mass_seen);
    // Largest per-term factor any of the truncated sums could still add.
    const double max_factor =
        std::max({1.0, 1.0 / (beta - 1.0),
                  0.5 * std::log2(1.0 + static_cast<double>(m) * power)});
    out.truncation_error = tail * std::max(max_factor * rate * overhead,
                                           max_factor);
    out.lower *= rate * overhead;
    out.lower_printed *= rate * overhead;
    return out;
}

RateReport make_rate_report(const SlotCountTable& table, std::uint64_t m,
                            std::uint32_t q, double p, double power,
                            double payload_bits) {
    RateReport report;
    report.plnc_rate = r_plnc(power);
    report.signature_bits =
        static_cast<double>(signature_length(m, table.threshold(), q)) *
        std::log2(static_cast<double>(q));
    report.channel_uses_per_slot =
        report.plnc_rate > 0
            ? (report.signature_bits + payload_bits) / report.plnc_rate
            : std::numeric_limits<double>::infinity();

    report.res_rate.assign(table.l_max() + 1, 0.0);
    report.net_rate.assign(table.l_max() + 1, 0.0);
    for (unsigned l = 1; l <= table.l_max(); ++l) {
        report.res_rate[l] =
            static_cast<double>(l) / table.expected_slots_d(l);
        report.net_rate[l] =
            report.channel_uses_per_slot == 0 ||
                    !std::isfinite(report.channel_uses_per_slot)
                ? 0.0
                : report.res_rate[l] * payload_bits /
                      report.channel_uses_per_slot;
    }
    report.avg_res_rate_lower = avg_res_rate_bound(m, p, table.threshold());
    report.net = net_rate_bounds(m, p, table.threshold(), power, payload_bits);
    return report;
}

}  // namespace sigsplit::analysis
