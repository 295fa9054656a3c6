#pragma once

#include <cstdint>
#include <vector>

#include <gmpxx.h>

namespace sigsplit::analysis {

// Linear-regime slope bound coefficients for the expected slot count
// under threshold k.
mpq_class alpha_star(unsigned k);  // 1 + 1/k
mpq_class beta_star(unsigned k);   // 1 + 1/((k+1)(2^k-1)) + 2/(k+1) + 1/k

// Exact expected slot counts S(L) for the uniform binary splitting
// process: S(0) = 1, S(L) = L for 1 <= L <= k, and for L > k
//   S(L) = 1 + sum_j C(L,j) 2^-L (S(j) + S(L-j)),
// solved for S(L) by moving the j in {0, L} terms to the left. Computed
// by dynamic programming in exact rational arithmetic.
class SlotCountTable {
  public:
    SlotCountTable(unsigned k, unsigned l_max);

    unsigned threshold() const { return k_; }
    unsigned l_max() const { return l_max_; }
    const mpq_class& expected_slots(unsigned l) const;
    double expected_slots_d(unsigned l) const;

  private:
    unsigned k_;
    unsigned l_max_;
    std::vector<mpq_class> values_;
};

struct BoundRow {
    unsigned l;
    mpq_class lower;  // alpha* L - 1
    mpq_class exact;  // S(L)
    mpq_class upper;  // beta* L - 1
    bool holds;
};

struct BoundsReport {
    bool all_hold = true;
    std::vector<BoundRow> rows;  // one row per L in (k, l_max]
};

// Exact sandwich check of the slot-count bounds against the table.
BoundsReport check_bounds(const SlotCountTable& table);

// P(L active users out of m) for independent Bernoulli(p) activity;
// log-domain evaluation, stable for large m.
double q_dist(std::uint64_t m, double p, std::uint64_t l);
// Same, conditioned on at least one active user.
double q_hat(std::uint64_t m, double p, std::uint64_t l);

// Regularized incomplete beta function I_x(a, b). Positive integer (a, b)
// take the exact binomial-sum path; other arguments fall back to a
// Lentz-style continued fraction.
double reg_inc_beta(double x, double a, double b);

namespace detail {
// Continued-fraction evaluation, exposed for cross-checking the paths.
double reg_inc_beta_cf(double x, double a, double b);
}  // namespace detail

// Closed-form lower bound on the expected number of users resolved per
// slot, averaged over the activity distribution conditioned on L > 0.
// Clamped at zero.
double avg_res_rate_bound(std::uint64_t m, double p, unsigned k);

// Computation rate of the physical layer: (1/2) log2 P for P >= 1, else 0.
double r_plnc(double power);

struct NetRateBounds {
    // Lower bound with the below-threshold terms at their exact rate
    // L/S(L) = 1; this is the form the averaged-rate proof uses and the
    // one that stays below the upper bound.
    double lower = 0;
    // Same sum with L/(beta* L - 1) applied to every L >= 1. Kept for
    // reference; for small L that factor exceeds the exact rate 1, so
    // large-k evaluations of this variant can overshoot the upper bound.
    double lower_printed = 0;
    // Full-knowledge multi-access ceiling sum q(L) (1/2) log2(1 + L P).
    double upper = 0;
    // Bound on the contribution of the truncated binomial tail.
    double truncation_error = 0;
};

// Averaged net-rate bounds in bits per channel use for payload size
// payload_bits, accounting for signature overhead via the length bound
// (k+2) log2(m) and for the physical layer via r_plnc.
NetRateBounds net_rate_bounds(std::uint64_t m, double p, unsigned k,
                              double power, double payload_bits);

// Per-L and averaged rates for one parameter point.
struct RateReport {
    std::vector<double> res_rate;  // res_rate[L] = L / S(L), index 0 unused
    std::vector<double> net_rate;  // net_rate[L] = res_rate[L] * D / N
    double avg_res_rate_lower = 0;
    NetRateBounds net;
    double plnc_rate = 0;
    double signature_bits = 0;         // N_w for the actual codebook length
    double channel_uses_per_slot = 0;  // N = (N_w + D) / R_plnc
};

RateReport make_rate_report(const SlotCountTable& table, std::uint64_t m,
                            std::uint32_t q, double p, double power,
                            double payload_bits);

}  // namespace sigsplit::analysis
