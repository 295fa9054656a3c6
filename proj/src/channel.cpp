#include "sigsplit/channel.hpp"

#include <stdexcept>

namespace sigsplit {

AdderChannel::AdderChannel(std::uint32_t q, std::size_t sig_len,
                           std::size_t data_len)
    : q_(q), sig_len_(sig_len), data_len_(data_len) {
    if (q < 2) throw std::invalid_argument("alphabet size must be >= 2");
    if (sig_len < 1) throw std::invalid_argument("signature length must be >= 1");
}

SlotObservation AdderChannel::transmit_slot(
    std::span<const UserWord> words) const {
    SlotObservation obs;
    obs.sig_sums.sums.assign(sig_len_, 0);
    obs.data_sum.assign(data_len_, 0);
    for (const auto& w : words) {
        if (w.signature.symbols.size() != sig_len_ ||
            w.data.size() != data_len_) {
            throw std::invalid_argument("word length mismatch in slot");
        }
        for (std::size_t j = 0; j < sig_len_; ++j) {
            obs.sig_sums.sums[j] += w.signature.symbols[j];
        }
        for (std::size_t j = 0; j < data_len_; ++j) {
            obs.data_sum[j] = (obs.data_sum[j] + w.data[j]) % q_;
        }
    }
    return obs;
}

std::vector<std::uint32_t> subtract_data(std::span<const std::uint32_t> sum,
                                         std::span<const std::uint32_t> known,
                                         std::uint32_t q) {
    if (sum.size() != known.size()) {
        throw std::invalid_argument("data vector length mismatch");
    }
    std::vector<std::uint32_t> out(sum.size());
    for (std::size_t j = 0; j < sum.size(); ++j) {
        out[j] = (sum[j] + q - known[j] % q) % q;
    }
    return out;
}

}  // namespace sigsplit
