#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "somflow/rng.hpp"
#include "somflow/vec.hpp"

namespace somflow {

struct Transition {
    Vec state;
    Vec action;
    double reward = 0.0;
    Vec next_state;
    bool done = false;
};

/// Fixed-capacity ring with FIFO overwrite and uniform sampling.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
        if (capacity == 0) throw std::invalid_argument("ReplayBuffer: capacity must be positive");
        storage_.reserve(std::min<std::size_t>(capacity, 1 << 20));
    }

    std::size_t capacity() const { return capacity_; }
    std::size_t size() const { return storage_.size(); }

    void push(Transition t) {
        if (storage_.size() < capacity_) {
            storage_.push_back(std::move(t));
        } else {
            storage_[cursor_] = std::move(t);
        }
        cursor_ = (cursor_ + 1) % capacity_;
    }

    const Transition& at(std::size_t i) const { return storage_[i]; }

    const Transition& sample(Rng& rng) const {
        if (storage_.empty()) throw std::logic_error("ReplayBuffer: sample from empty buffer");
        return storage_[rng.integer(storage_.size())];
    }

    std::vector<Transition> sample_batch(std::size_t n, Rng& rng) const {
        if (storage_.size() < n) throw std::logic_error("ReplayBuffer: not enough transitions");
        std::vector<Transition> batch;
        batch.reserve(n);
        for (std::size_t i = 0; i < n; ++i) batch.push_back(sample(rng));
        return batch;
    }

private:
    std::size_t capacity_;
    std::size_t cursor_ = 0;
    std::vector<Transition> storage_;
};

}  // namespace somflow
