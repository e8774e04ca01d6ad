#ifndef FSEB_ENGINE_DATASET_HPP
#define FSEB_ENGINE_DATASET_HPP

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fseb/error.hpp"

namespace fseb {

/// Target/complement partition of the unit indices 0..n-1.
///
/// The complement is what hyperparameters get fitted on, so it must keep at
/// least two units; together with a nonempty target set that means n >= 3.
class HoldoutSplit {
public:
  HoldoutSplit(std::size_t n, std::vector<std::size_t> targets) : n_(n) {
    if (n < 3)
      throw InsufficientDataError("holdout split needs n >= 3, got " + std::to_string(n));
    std::sort(targets.begin(), targets.end());
    targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
    if (targets.empty())
      throw DomainError("holdout split: target set is empty");
    if (targets.back() >= n)
      throw DomainError("holdout split: target index " + std::to_string(targets.back()) +
                        " out of range for n = " + std::to_string(n));
    if (n - targets.size() < 2)
      throw InsufficientDataError("holdout split: complement must keep at least 2 units");
    targets_ = std::move(targets);
    complement_.reserve(n - targets_.size());
    std::size_t t = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (t < targets_.size() && targets_[t] == i)
        ++t;
      else
        complement_.push_back(i);
    }
  }

  static HoldoutSplit single(std::size_t n, std::size_t i) { return {n, {i}}; }

  [[nodiscard]] std::size_t n() const { return n_; }
  [[nodiscard]] std::span<const std::size_t> targets() const { return targets_; }
  [[nodiscard]] std::span<const std::size_t> complement() const { return complement_; }
  [[nodiscard]] bool is_target(std::size_t i) const {
    return std::binary_search(targets_.begin(), targets_.end(), i);
  }

private:
  std::size_t n_;
  std::vector<std::size_t> targets_;
  std::vector<std::size_t> complement_;
};

/// Ordered per-unit observations. Immutable once built.
template <class Record>
class Dataset {
public:
  Dataset() = default;
  explicit Dataset(std::vector<Record> records) : records_(std::move(records)) {}

  [[nodiscard]] std::size_t size() const { return records_.size(); }
  [[nodiscard]] const Record& operator[](std::size_t i) const { return records_.at(i); }
  [[nodiscard]] std::span<const Record> records() const { return records_; }

  [[nodiscard]] std::vector<Record> gather(std::span<const std::size_t> idx) const {
    std::vector<Record> out;
    out.reserve(idx.size());
    for (std::size_t i : idx)
      out.push_back(records_.at(i));
    return out;
  }
  [[nodiscard]] std::vector<Record> targets(const HoldoutSplit& s) const {
    check(s);
    return gather(s.targets());
  }
  [[nodiscard]] std::vector<Record> complement(const HoldoutSplit& s) const {
    check(s);
    return gather(s.complement());
  }

private:
  void check(const HoldoutSplit& s) const {
    if (s.n() != records_.size())
      throw DomainError("holdout split built for n = " + std::to_string(s.n()) +
                        " applied to dataset of size " + std::to_string(records_.size()));
  }
  std::vector<Record> records_;
};

} // namespace fseb

#endif
