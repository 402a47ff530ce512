#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace raretype {

/// Observed categorical labels X_1..X_n. Only equality between labels is
/// ever consulted; the label text itself carries no information.
struct LabeledSample {
  std::vector<std::string> labels;
};

/// Partition of {1..n} into nonempty disjoint blocks. Elements are 1-based.
/// Blocks are kept sorted internally and ordered by least element, so two
/// equal partitions always compare equal.
class SetPartition {
 public:
  SetPartition() = default;

  /// Validates coverage of {1..n} and canonicalizes the block order.
  /// Throws DomainError on empty blocks, overlaps or gaps.
  SetPartition(std::size_t n, std::vector<std::vector<std::size_t>> blocks);

  std::size_t n() const noexcept { return n_; }
  std::size_t num_blocks() const noexcept { return blocks_.size(); }
  const std::vector<std::vector<std::size_t>>& blocks() const noexcept { return blocks_; }

  /// Block sizes in canonical block order.
  std::vector<std::size_t> block_sizes() const;

  friend bool operator==(const SetPartition&, const SetPartition&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<std::vector<std::size_t>> blocks_;
};

/// Multiset of block sizes in compact form: a holds the distinct sizes in
/// strictly increasing order and r their multiplicities.
class IntegerPartition {
 public:
  IntegerPartition() = default;

  /// Throws DomainError unless a is strictly increasing and positive, r is
  /// positive and both have the same length.
  IntegerPartition(std::vector<std::uint64_t> a, std::vector<std::uint64_t> r);

  /// Builds (a, r) from an unordered list of positive block sizes.
  static IntegerPartition from_block_sizes(const std::vector<std::uint64_t>& sizes);

  const std::vector<std::uint64_t>& a() const noexcept { return a_; }
  const std::vector<std::uint64_t>& r() const noexcept { return r_; }

  std::size_t num_classes() const noexcept { return a_.size(); }  // J
  std::uint64_t n() const noexcept { return n_; }
  std::uint64_t num_blocks() const noexcept { return k_; }  // k
  std::uint64_t singletons() const noexcept;                  // s1

  bool empty() const noexcept { return a_.empty(); }

  /// Block sizes as a nonincreasing sequence.
  std::vector<std::uint64_t> block_sizes_descending() const;

  /// Multiplicity of block size `size` (0 if absent).
  std::uint64_t count_of(std::uint64_t size) const noexcept;

  friend bool operator==(const IntegerPartition&, const IntegerPartition&) = default;

 private:
  std::vector<std::uint64_t> a_;
  std::vector<std::uint64_t> r_;
  std::uint64_t n_ = 0;
  std::uint64_t k_ = 0;
};

enum class AugmentMode {
  kSuspectOnly,      // Db+: suspect n+1 alone in a new block
  kSuspectAndTrace,  // Db++: suspect n+1 and crime trace n+2 share a new block
};

/// Equivalence classes of positions under label equality.
/// Throws DomainError on an empty sample.
SetPartition reduce_sample(const LabeledSample& sample);

SetPartition augment(const SetPartition& partition, AugmentMode mode);

/// Integer-partition counterpart of augment(): adds a singleton, or a pair.
IntegerPartition augment(const IntegerPartition& partition, AugmentMode mode);

IntegerPartition to_integer_partition(const SetPartition& partition);

/// Streams every set partition of {1..n} exactly once, via restricted
/// growth strings. Single consumer.
class PartitionEnumerator {
 public:
  static constexpr std::size_t kDefaultCap = 12;

  /// Throws DomainError if n == 0 or n > cap.
  explicit PartitionEnumerator(std::size_t n, std::size_t cap = kDefaultCap);

  /// Next partition, or nullopt once all Bell(n) partitions were produced.
  std::optional<SetPartition> next();

  /// Restricted growth string of the most recent partition (0-based block
  /// labels per element).
  const std::vector<std::size_t>& growth_string() const noexcept { return rgs_; }

 private:
  bool advance();

  std::size_t n_;
  std::vector<std::size_t> rgs_;
  std::vector<std::size_t> prefix_max_;
  bool started_ = false;
  bool done_ = false;
};

/// Collects the whole enumeration. Intended for small n in tests.
std::vector<SetPartition> enumerate_partitions(std::size_t n,
                                               std::size_t cap = PartitionEnumerator::kDefaultCap);

/// Partition whose blocks are given by 0-based block labels per element.
SetPartition set_partition_from_labels(const std::vector<std::size_t>& labels);

}  // namespace raretype
