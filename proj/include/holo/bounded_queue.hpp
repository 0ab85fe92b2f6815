#pragma once

#include <cstddef>
#include <deque>
#include <optional>
#include <stdexcept>

namespace holo {

// FIFO that never grows past its capacity: pushing onto a full queue evicts
// the oldest element. Not synchronized; owners serialize access.
template <typename T>
class BoundedQueue {
public:
    explicit BoundedQueue(std::size_t capacity) : capacity_(capacity) {
        if (capacity_ == 0) throw std::invalid_argument("BoundedQueue capacity must be positive");
    }

    // Returns true when an element had to be dropped.
    bool push(T value) {
        bool dropped = false;
        if (items_.size() == capacity_) {
            items_.pop_front();
            ++dropped_total_;
            dropped = true;
        }
        items_.push_back(std::move(value));
        return dropped;
    }

    std::optional<T> pop() {
        if (items_.empty()) return std::nullopt;
        T v = std::move(items_.front());
        items_.pop_front();
        return v;
    }

    bool empty() const { return items_.empty(); }
    std::size_t size() const { return items_.size(); }
    std::size_t capacity() const { return capacity_; }
    std::size_t dropped_total() const { return dropped_total_; }

private:
    std::size_t capacity_;
    std::deque<T> items_;
    std::size_t dropped_total_ = 0;
};

} // namespace holo
