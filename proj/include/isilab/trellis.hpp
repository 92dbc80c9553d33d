#pragma once

#include <span>
#include <vector>

#include "isilab/errors.hpp"

namespace isilab {

using StateIndex = int;

struct Transition {
    StateIndex prev;
    StateIndex next;
    double symbol;  // the input symbol driving prev -> next
};

// BPSK channel-state trellis. A state is the window of the last `memory`
// transmitted symbols; states are indexed by mapping -1 -> bit 0, +1 -> bit 1
// with the most recent symbol as the most significant bit. The classifier
// label space in the learned-likelihood path uses the same encoding, so
// network outputs line up with state indices by construction.
class Trellis {
public:
    explicit Trellis(int memory) : memory_(memory) {
        if (memory_ < 1) throw InvalidParameter("Trellis: memory must be >= 1");
        if (memory_ > 20) throw InvalidParameter("Trellis: memory above 20 is not supported");
        num_states_ = 1 << memory_;
        windows_.resize(static_cast<std::size_t>(num_states_) * memory_);
        for (StateIndex s = 0; s < num_states_; ++s)
            for (int j = 0; j < memory_; ++j)
                windows_[static_cast<std::size_t>(s) * memory_ + j] =
                    ((s >> (memory_ - 1 - j)) & 1) ? 1.0 : -1.0;
        transitions_.reserve(static_cast<std::size_t>(num_states_) * kAlphabetSize);
        for (StateIndex prev = 0; prev < num_states_; ++prev)
            for (int bit = 0; bit < kAlphabetSize; ++bit)
                transitions_.push_back(
                    {prev, successor(prev, bit), bit ? 1.0 : -1.0});
    }

    int memory() const { return memory_; }
    int alphabet_size() const { return kAlphabetSize; }
    int num_states() const { return num_states_; }
    const std::vector<Transition>& transitions() const { return transitions_; }

    static StateIndex state_index(std::span<const double> window) {
        const int L = static_cast<int>(window.size());
        if (L < 1 || L > 20) throw InvalidParameter("state_index: window length must be in 1..20");
        StateIndex s = 0;
        for (int j = 0; j < L; ++j) {
            double x = window[static_cast<std::size_t>(j)];
            if (x != 1.0 && x != -1.0)
                throw InvalidParameter("state_index: symbol outside {-1,+1}");
            s |= (x > 0.0 ? 1 : 0) << (L - 1 - j);
        }
        return s;
    }

    // Window (x_t, ..., x_{t-L+1}) encoded by state s; inverse of state_index.
    std::span<const double> state_window(StateIndex s) const {
        check_state(s);
        return {windows_.data() + static_cast<std::size_t>(s) * memory_,
                static_cast<std::size_t>(memory_)};
    }

    // State reached from s when the new symbol carries `newest_bit`.
    StateIndex successor(StateIndex s, int newest_bit) const {
        return (newest_bit << (memory_ - 1)) | (s >> 1);
    }

    // The two states that can precede s; `oldest_bit` selects which symbol
    // falls out of the window.
    StateIndex predecessor(StateIndex s, int oldest_bit) const {
        const StateIndex mask = (1 << (memory_ - 1)) - 1;
        return ((s & mask) << 1) | oldest_bit;
    }

    // Bit of the most recent symbol in state s (the symbol that drove the
    // transition into s).
    int driving_bit(StateIndex s) const { return s >> (memory_ - 1); }

    // mu = sum_l h_l x_{t-l+1} for the symbol window encoded by s.
    double state_mean(StateIndex s, std::span<const double> taps) const {
        check_state(s);
        if (static_cast<int>(taps.size()) != memory_)
            throw InvalidParameter("state_mean: tap row length != trellis memory");
        const double* w = windows_.data() + static_cast<std::size_t>(s) * memory_;
        double mu = 0.0;
        for (int l = 0; l < memory_; ++l) mu += taps[static_cast<std::size_t>(l)] * w[l];
        return mu;
    }

private:
    static constexpr int kAlphabetSize = 2;  // BPSK only

    void check_state(StateIndex s) const {
        if (s < 0 || s >= num_states_) throw InvalidParameter("Trellis: state index out of range");
    }

    int memory_;
    int num_states_;
    std::vector<double> windows_;  // num_states x memory, decoded symbol windows
    std::vector<Transition> transitions_;
};

inline Trellis build_trellis(int memory) { return Trellis(memory); }

}  // namespace isilab
