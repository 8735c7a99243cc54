// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace deepauto::data {

/// Boundaries of a chronological 4:1:1 split of N items:
/// train = [0, train_end), val = [train_end, val_end), test = [val_end, N).
struct SplitBounds {
  std::size_t train_end = 0;
  std::size_t val_end = 0;
  std::size_t total = 0;

  std::size_t train_size() const noexcept { return train_end; }
  std::size_t val_size() const noexcept { return val_end - train_end; }
  std::size_t test_size() const noexcept { return total - val_end; }
};

/// floor(4N/6) train, floor(N/6) validation, remainder test. Throws
/// DataError for N < 6.
SplitBounds split_4_1_1(std::size_t n);

template <class T>
struct Partition {
  std::vector<T> train, val, test;
};

/// Splits items already ordered by anchor time; no shuffling.
template <class T>
Partition<T> split_4_1_1(std::vector<T> items) {
  const SplitBounds b = split_4_1_1(items.size());
  Partition<T> p;
  auto first = std::make_move_iterator(items.begin());
  p.train.assign(first, first + static_cast<std::ptrdiff_t>(b.train_end));
  p.val.assign(first + static_cast<std::ptrdiff_t>(b.train_end), first + static_cast<std::ptrdiff_t>(b.val_end));
  p.test.assign(first + static_cast<std::ptrdiff_t>(b.val_end), std::make_move_iterator(items.end()));
  return p;
}

}  // namespace deepauto::data
