#ifndef EBHMM_SEQUENCE_HPP
#define EBHMM_SEQUENCE_HPP

#include <vector>

#include "ebhmm/errors.hpp"
#include "ebhmm/types.hpp"

namespace ebhmm {

// Group-level event ordering: position -> feature index, a permutation of
// {0..I-1}. An individual at stage k has undergone the events at positions
// 0..k-1.
class EventSequence {
 public:
  EventSequence() = default;

  explicit EventSequence(std::vector<int> order) : order_(std::move(order)) {
    rebuild_inverse();
  }

  static EventSequence identity(int n) {
    std::vector<int> order(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    return EventSequence(std::move(order));
  }

  int size() const { return static_cast<int>(order_.size()); }
  int feature_at(int position) const { return order_[static_cast<std::size_t>(position)]; }
  int position_of(int feature) const { return positions_[static_cast<std::size_t>(feature)]; }
  const std::vector<int>& order() const { return order_; }

  // Remove the event for `feature` and re-insert it at `position`,
  // shifting the others.
  EventSequence with_feature_at(int feature, int position) const {
    std::vector<int> next;
    next.reserve(order_.size());
    for (int f : order_) {
      if (f != feature) next.push_back(f);
    }
    next.insert(next.begin() + position, feature);
    return EventSequence(std::move(next));
  }

  bool operator==(const EventSequence& other) const { return order_ == other.order_; }
  bool operator!=(const EventSequence& other) const { return !(*this == other); }

 private:
  void rebuild_inverse() {
    const int n = size();
    positions_.assign(order_.size(), -1);
    for (int p = 0; p < n; ++p) {
      const int f = order_[static_cast<std::size_t>(p)];
      if (f < 0 || f >= n || positions_[static_cast<std::size_t>(f)] != -1) {
        throw ArgumentError("event sequence is not a permutation of {0..I-1}");
      }
      positions_[static_cast<std::size_t>(f)] = p;
    }
  }

  std::vector<int> order_;
  std::vector<int> positions_;
};

}  // namespace ebhmm

#endif
