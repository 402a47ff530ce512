#include "raretype/partition.hpp"

#include <algorithm>
#include <map>
#include <string_view>
#include <unordered_map>

#include "raretype/error.hpp"

namespace raretype {

SetPartition::SetPartition(std::size_t n, std::vector<std::vector<std::size_t>> blocks)
    : n_(n), blocks_(std::move(blocks)) {
  std::vector<bool> seen(n + 1, false);
  std::size_t covered = 0;
  for (auto& block : blocks_) {
    if (block.empty()) throw DomainError("set partition: empty block");
    std::sort(block.begin(), block.end());
    for (std::size_t e : block) {
      if (e == 0 || e > n) throw DomainError("set partition: element out of range 1..n");
      if (seen[e]) throw DomainError("set partition: element appears in two blocks");
      seen[e] = true;
      ++covered;
    }
  }
  if (covered != n) throw DomainError("set partition: blocks do not cover 1..n");
  std::sort(blocks_.begin(), blocks_.end(),
            [](const auto& x, const auto& y) { return x.front() < y.front(); });
}

std::vector<std::size_t> SetPartition::block_sizes() const {
  std::vector<std::size_t> sizes;
  sizes.reserve(blocks_.size());
  for (const auto& b : blocks_) sizes.push_back(b.size());
  return sizes;
}

IntegerPartition::IntegerPartition(std::vector<std::uint64_t> a, std::vector<std::uint64_t> r)
    : a_(std::move(a)), r_(std::move(r)) {
  if (a_.size() != r_.size()) throw DomainError("integer partition: a and r differ in length");
  for (std::size_t j = 0; j < a_.size(); ++j) {
    if (a_[j] == 0) throw DomainError("integer partition: block size must be positive");
    if (r_[j] == 0) throw DomainError("integer partition: repetition count must be positive");
    if (j > 0 && a_[j] <= a_[j - 1])
      throw DomainError("integer partition: a must be strictly increasing");
    n_ += a_[j] * r_[j];
    k_ += r_[j];
  }
}

IntegerPartition IntegerPartition::from_block_sizes(const std::vector<std::uint64_t>& sizes) {
  std::map<std::uint64_t, std::uint64_t> counts;
  for (std::uint64_t s : sizes) {
    if (s == 0) throw DomainError("integer partition: block size must be positive");
    ++counts[s];
  }
  std::vector<std::uint64_t> a, r;
  a.reserve(counts.size());
  r.reserve(counts.size());
  for (const auto& [size, count] : counts) {
    a.push_back(size);
    r.push_back(count);
  }
  return IntegerPartition(std::move(a), std::move(r));
}

std::uint64_t IntegerPartition::singletons() const noexcept {
  return (!a_.empty() && a_.front() == 1) ? r_.front() : 0;
}

std::vector<std::uint64_t> IntegerPartition::block_sizes_descending() const {
  std::vector<std::uint64_t> sizes;
  sizes.reserve(k_);
  for (std::size_t j = a_.size(); j-- > 0;)
    sizes.insert(sizes.end(), r_[j], a_[j]);
  return sizes;
}

std::uint64_t IntegerPartition::count_of(std::uint64_t size) const noexcept {
  auto it = std::lower_bound(a_.begin(), a_.end(), size);
  if (it == a_.end() || *it != size) return 0;
  return r_[static_cast<std::size_t>(it - a_.begin())];
}

SetPartition reduce_sample(const LabeledSample& sample) {
  if (sample.labels.empty()) throw DomainError("reduce_sample: empty sample");
  std::unordered_map<std::string_view, std::size_t> block_of;
  std::vector<std::vector<std::size_t>> blocks;
  for (std::size_t i = 0; i < sample.labels.size(); ++i) {
    auto [it, inserted] = block_of.try_emplace(sample.labels[i], blocks.size());
    if (inserted) blocks.emplace_back();
    blocks[it->second].push_back(i + 1);
  }
  // First-occurrence order is already least-element order.
  return SetPartition(sample.labels.size(), std::move(blocks));
}

SetPartition augment(const SetPartition& partition, AugmentMode mode) {
  auto blocks = partition.blocks();
  const std::size_t n = partition.n();
  if (mode == AugmentMode::kSuspectOnly) {
    blocks.push_back({n + 1});
    return SetPartition(n + 1, std::move(blocks));
  }
  blocks.push_back({n + 1, n + 2});
  return SetPartition(n + 2, std::move(blocks));
}

IntegerPartition augment(const IntegerPartition& partition, AugmentMode mode) {
  auto sizes = partition.block_sizes_descending();
  sizes.push_back(mode == AugmentMode::kSuspectOnly ? 1 : 2);
  return IntegerPartition::from_block_sizes(sizes);
}

IntegerPartition to_integer_partition(const SetPartition& partition) {
  std::vector<std::uint64_t> sizes;
  sizes.reserve(partition.num_blocks());
  for (const auto& b : partition.blocks()) sizes.push_back(b.size());
  return IntegerPartition::from_block_sizes(sizes);
}

PartitionEnumerator::PartitionEnumerator(std::size_t n, std::size_t cap) : n_(n) {
  if (n == 0) throw DomainError("enumerate_partitions: n must be at least 1");
  if (n > cap)
    throw DomainError("enumerate_partitions: n=" + std::to_string(n) + " exceeds cap " +
                      std::to_string(cap));
  rgs_.assign(n_, 0);
  prefix_max_.assign(n_, 0);
}

bool PartitionEnumerator::advance() {
  // Increment the rightmost position that can grow: rgs[i] <= max(rgs[0..i-1]) + 1.
  for (std::size_t i = n_; i-- > 1;) {
    if (rgs_[i] <= prefix_max_[i - 1]) {
      ++rgs_[i];
      prefix_max_[i] = std::max(prefix_max_[i - 1], rgs_[i]);
      for (std::size_t t = i + 1; t < n_; ++t) {
        rgs_[t] = 0;
        prefix_max_[t] = prefix_max_[i];
      }
      return true;
    }
  }
  return false;
}

std::optional<SetPartition> PartitionEnumerator::next() {
  if (done_) return std::nullopt;
  if (!started_) {
    started_ = true;
  } else if (!advance()) {
    done_ = true;
    return std::nullopt;
  }
  return set_partition_from_labels(rgs_);
}

std::vector<SetPartition> enumerate_partitions(std::size_t n, std::size_t cap) {
  PartitionEnumerator e(n, cap);
  std::vector<SetPartition> out;
  while (auto p = e.next()) out.push_back(std::move(*p));
  return out;
}

SetPartition set_partition_from_labels(const std::vector<std::size_t>& labels) {
  std::unordered_map<std::size_t, std::size_t> block_of;
  std::vector<std::vector<std::size_t>> blocks;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto [it, inserted] = block_of.try_emplace(labels[i], blocks.size());
    if (inserted) blocks.emplace_back();
    blocks[it->second].push_back(i + 1);
  }
  return SetPartition(labels.size(), std::move(blocks));
}

}  // namespace raretype
