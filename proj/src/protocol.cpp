#include "sigsplit/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

#include "sigsplit/rng.hpp"

namespace sigsplit {

void SystemParams::validate() const {
    if (!is_prime(m)) throw std::invalid_argument("M must be prime");
    if (k < 1) throw std::invalid_argument("K must be >= 1");
    if (!is_prime(q) || q > m) {
        throw std::invalid_argument("q must be prime and at most M");
    }
    if (!(activation_prob > 0.0 && activation_prob < 1.0)) {
        throw std::invalid_argument("activation probability must be in (0,1)");
    }
    if (!(power > 1.0)) throw std::invalid_argument("power must exceed 1");
    if (payload_bits < 1) throw std::invalid_argument("payload must be >= 1 bit");
}

std::size_t SystemParams::data_symbols() const {
    return static_cast<std::size_t>(
        std::ceil(payload_bits / std::log2(static_cast<double>(q))));
}

namespace {

struct Group {
    std::uint64_t id;
    std::vector<int> members;  // ascending
};

}  // namespace

ResolutionResult run_contention(const SystemParams& params,
                                const SignatureCodebook& codebook,
                                const ActiveSet& active) {
    if (active.empty()) {
        throw std::invalid_argument("contention starts with at least one user");
    }
    const std::size_t d_len = params.data_symbols();
    for (const auto& [user, payload] : active) {
        if (!codebook.has_user(user)) {
            throw std::invalid_argument("active user " + std::to_string(user) +
                                        " has no signature");
        }
        if (payload.size() != d_len) {
            throw std::invalid_argument("payload length mismatch for user " +
                                        std::to_string(user));
        }
    }

    const AdderChannel channel(params.q, codebook.sig_len(), d_len);

    // One split-bit stream per user, seeded only by (seed, user id), so a
    // user's draws do not depend on what the other users do.
    std::map<int, std::mt19937_64> split_rng;
    auto split_bit = [&](int user) {
        auto [it, fresh] = split_rng.try_emplace(
            user, seeded_stream(params.seed, static_cast<std::uint64_t>(user)));
        (void)fresh;
        return uniform_bit(it->second);
    };

    ResolutionResult result;
    std::uint64_t next_group_id = 0;
    std::vector<Group> pending;  // LIFO: back() contends next
    {
        Group root{next_group_id++, {}};
        for (const auto& [user, payload] : active) root.members.push_back(user);
        pending.push_back(std::move(root));
    }

    auto transmit = [&](const Group& group, const std::vector<int>& who) {
        std::vector<UserWord> words;
        words.reserve(who.size());
        for (int user : who) {
            words.push_back(
                UserWord{codebook.encode_signature(user), active.at(user)});
        }
        SlotRecord rec;
        rec.slot = ++result.slots_used;
        rec.group = group.id;
        rec.transmitters = who;
        rec.observation = channel.transmit_slot(words);
        return rec;
    };

    while (!pending.empty()) {
        Group group = std::move(pending.back());
        pending.pop_back();

        SlotRecord rec = transmit(group, group.members);
        const std::uint64_t count =
            SignatureCodebook::decode_count(rec.observation.sig_sums);
        if (count != group.members.size()) {
            throw std::logic_error("slot count disagrees with the group size");
        }

        if (count == 0) {
            rec.feedback = FeedbackEmpty{};
            result.transcript.push_back(std::move(rec));
            continue;
        }

        if (count <= params.k) {
            std::vector<int> decoded =
                codebook.decode_active_set(rec.observation.sig_sums);
            if (decoded != group.members) {
                throw std::logic_error(
                    "decoded active set disagrees with the transmitting group");
            }
            // The receiver schedules all but the highest-numbered user;
            // that user's payload falls out of the stored sum.
            std::vector<int> schedule(decoded.begin(), decoded.end() - 1);
            std::vector<std::uint32_t> residual = rec.observation.data_sum;
            rec.feedback = FeedbackResolved{decoded, schedule};
            result.transcript.push_back(std::move(rec));

            for (int user : schedule) {
                SlotRecord single = transmit(group, {user});
                result.payloads[user] = single.observation.data_sum;
                residual = subtract_data(residual, single.observation.data_sum,
                                         params.q);
                single.feedback = FeedbackAck{user};
                result.transcript.push_back(std::move(single));
            }
            result.payloads[decoded.back()] = std::move(residual);
            continue;
        }

        // Collision: every member draws {1,2}; group 1 contends first,
        // group 2 right after its subtree completes.
        rec.feedback = FeedbackCollision{};
        result.transcript.push_back(std::move(rec));

        Group first{next_group_id++, {}};
        Group second{next_group_id++, {}};
        for (int user : group.members) {
            (split_bit(user) ? second : first).members.push_back(user);
        }
        pending.push_back(std::move(second));
        pending.push_back(std::move(first));
    }
    return result;
}

SlotCountSample simulate_slot_count(unsigned l, unsigned k,
                                    std::uint64_t trials, std::uint64_t seed) {
    if (l < 1) throw std::invalid_argument("at least one active user required");
    if (trials < 1) throw std::invalid_argument("at least one trial required");

    double sum = 0;
    double sum_sq = 0;
    std::vector<unsigned> stack;
    for (std::uint64_t t = 0; t < trials; ++t) {
        std::mt19937_64 rng = seeded_stream(seed, t);
        std::uint64_t slots = 0;
        stack.assign(1, l);
        while (!stack.empty()) {
            const unsigned j = stack.back();
            stack.pop_back();
            if (j <= k) {
                slots += std::max(j, 1u);
                continue;
            }
            slots += 1;
            unsigned to_first = 0;
            for (unsigned i = 0; i < j; ++i) to_first += !uniform_bit(rng);
            stack.push_back(j - to_first);
            stack.push_back(to_first);
        }
        const auto x = static_cast<double>(slots);
        sum += x;
        sum_sq += x * x;
    }

    SlotCountSample out;
    out.trials = trials;
    out.mean = sum / static_cast<double>(trials);
    if (trials > 1) {
        const double n = static_cast<double>(trials);
        const double var = std::max(0.0, (sum_sq - sum * sum / n) / (n - 1));
        out.std_error = std::sqrt(var / n);
    }
    return out;
}

std::vector<int> sample_active_set(const SystemParams& params,
                                   std::mt19937_64& rng) {
    std::vector<int> active;
    for (std::uint64_t user = 1; user <= params.m; ++user) {
        if (uniform_unit(rng) < params.activation_prob) {
            active.push_back(static_cast<int>(user));
        }
    }
    return active;
}

void write_event_log(std::ostream& os, const ResolutionResult& result) {
    for (const auto& rec : result.transcript) {
        nlohmann::json j{{"slot", rec.slot},
                         {"group", rec.group},
                         {"transmitters", rec.transmitters},
                         {"sig_sums", rec.observation.sig_sums.sums},
                         {"data_sum", rec.observation.data_sum}};
        if (std::holds_alternative<FeedbackEmpty>(rec.feedback)) {
            j["feedback"] = {{"type", "empty"}};
        } else if (const auto* res =
                       std::get_if<FeedbackResolved>(&rec.feedback)) {
            j["feedback"] = {{"type", "resolved"},
                             {"active_set", res->active_set},
                             {"schedule", res->schedule}};
        } else if (std::holds_alternative<FeedbackCollision>(rec.feedback)) {
            j["feedback"] = {{"type", "collision"}};
        } else {
            j["feedback"] = {{"type", "ack"},
                             {"user", std::get<FeedbackAck>(rec.feedback).user}};
        }
        os << j.dump() << '\n';
    }
}

}  // namespace sigsplit
