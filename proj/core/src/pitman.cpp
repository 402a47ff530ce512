#include "raretype/pitman.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "raretype/error.hpp"
#include "raretype/random.hpp"

namespace raretype {

bool PdParams::valid(double alpha, double theta) noexcept {
  return std::isfinite(alpha) && std::isfinite(theta) && alpha > 0.0 && alpha < 1.0 &&
         theta > -alpha;
}

PdParams::PdParams(double alpha, double theta) : alpha_(alpha), theta_(theta) {
  if (!valid(alpha, theta))
    throw DomainError("PdParams: require 0 < alpha < 1 and theta > -alpha (got alpha=" +
                      std::to_string(alpha) + ", theta=" + std::to_string(theta) + ")");
}

PopulationVector::PopulationVector(std::vector<double> probs, std::uint64_t pop_size)
    : probs_(std::move(probs)), pop_size_(pop_size) {
  if (probs_.empty()) throw DomainError("PopulationVector: empty");
  if (pop_size_ == 0) throw DomainError("PopulationVector: population size must be positive");
  double sum = 0.0;
  for (std::size_t i = 0; i < probs_.size(); ++i) {
    if (!(probs_[i] > 0.0)) throw DomainError("PopulationVector: entries must be positive");
    if (i > 0 && probs_[i] > probs_[i - 1])
      throw DomainError("PopulationVector: entries must be nonincreasing");
    sum += probs_[i];
  }
  if (std::abs(sum - 1.0) > kSumTolerance)
    throw DomainError("PopulationVector: entries must sum to 1");
}

std::uint64_t PopulationVector::carriers(std::size_t i) const noexcept {
  return static_cast<std::uint64_t>(std::llround(static_cast<double>(pop_size_) * probs_[i]));
}

SetPartition SeatingPlan::to_set_partition() const {
  std::vector<std::size_t> labels(assignments.begin(), assignments.end());
  return set_partition_from_labels(labels);
}

IntegerPartition SeatingPlan::to_integer_partition() const {
  return IntegerPartition::from_block_sizes(table_counts);
}

double log_rising_factorial(double x, std::uint64_t count, double step) {
  double acc = 0.0;
  for (std::uint64_t i = 0; i < count; ++i) {
    const double factor = x + static_cast<double>(i) * step;
    if (!(factor > 0.0))
      throw DomainError("log_rising_factorial: nonpositive factor " + std::to_string(factor));
    acc += std::log(factor);
  }
  return acc;
}

double eppf_log(const IntegerPartition& partition, const PdParams& params) {
  if (partition.empty()) throw DomainError("eppf_log: empty partition");
  const double alpha = params.alpha();
  const double theta = params.theta();
  double value = log_rising_factorial(theta + alpha, partition.num_blocks() - 1, alpha) -
                 log_rising_factorial(theta + 1.0, partition.n() - 1, 1.0);
  const auto& a = partition.a();
  const auto& r = partition.r();
  for (std::size_t j = 0; j < a.size(); ++j)
    value += static_cast<double>(r[j]) * log_rising_factorial(1.0 - alpha, a[j] - 1, 1.0);
  return value;
}

std::vector<double> crp_predictive(std::span<const std::uint64_t> table_counts,
                                   const PdParams& params) {
  const std::size_t k = table_counts.size();
  std::vector<double> probs(k + 1);
  if (k == 0) {
    probs[0] = 1.0;
    return probs;
  }
  const double alpha = params.alpha();
  const double theta = params.theta();
  const double n = static_cast<double>(
      std::accumulate(table_counts.begin(), table_counts.end(), std::uint64_t{0}));
  const double denom = n + theta;
  for (std::size_t i = 0; i < k; ++i) {
    if (table_counts[i] == 0) throw DomainError("crp_predictive: empty table");
    probs[i] = (static_cast<double>(table_counts[i]) - alpha) / denom;
  }
  probs[k] = (theta + static_cast<double>(k) * alpha) / denom;
  return probs;
}

SeatingPlan crp_sample(std::size_t n, const PdParams& params, std::uint64_t seed) {
  if (n == 0) throw DomainError("crp_sample: n must be at least 1");
  const double alpha = params.alpha();
  const double theta = params.theta();
  Rng rng(seed);
  SeatingPlan plan;
  plan.assignments.reserve(n);
  plan.assignments.push_back(1);
  plan.table_counts.push_back(1);
  for (std::size_t t = 1; t < n; ++t) {
    const double k = static_cast<double>(plan.table_counts.size());
    const double total = static_cast<double>(t) + theta;
    const double u = rng.uniform01() * total;
    if (u < theta + k * alpha) {
      plan.table_counts.push_back(1);
      plan.assignments.push_back(plan.table_counts.size());
      continue;
    }
    // Existing table with probability proportional to n_i - alpha: propose a
    // table through a uniformly chosen earlier customer (proportional to n_i)
    // and accept with probability (n_i - alpha) / n_i.
    for (;;) {
      const std::size_t table = plan.assignments[rng.uniform_index(t)];
      const double count = static_cast<double>(plan.table_counts[table - 1]);
      if (rng.uniform01() * count < count - alpha) {
        ++plan.table_counts[table - 1];
        plan.assignments.push_back(table);
        break;
      }
    }
  }
  return plan;
}

GemDraw gem_stick_breaking(const PdParams& params, std::size_t m, std::uint64_t seed,
                           std::uint64_t pop_size) {
  if (m == 0) throw DomainError("gem_stick_breaking: truncation length must be at least 1");
  Rng rng(seed);
  std::vector<double> weights(m);
  double remaining = 1.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double v = rng.beta(1.0 - params.alpha(),
                              params.theta() + static_cast<double>(i + 1) * params.alpha());
    weights[i] = v * remaining;
    remaining *= 1.0 - v;
  }
  // Zero weights (underflow deep in the stick) cannot be represented.
  weights.erase(std::remove_if(weights.begin(), weights.end(), [](double w) { return !(w > 0.0); }),
                weights.end());
  if (weights.empty()) weights.push_back(1.0);
  std::sort(weights.begin(), weights.end(), std::greater<>());
  const double mass = std::accumulate(weights.begin(), weights.end(), 0.0);
  for (double& w : weights) w /= mass;
  return GemDraw{PopulationVector(std::move(weights), pop_size), remaining};
}

std::vector<std::pair<std::size_t, double>> powerlaw_reference(double alpha, std::size_t first,
                                                               std::size_t last) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("powerlaw_reference: need 0 < alpha < 1");
  if (first == 0 || last < first) throw DomainError("powerlaw_reference: bad index range");
  std::vector<std::pair<std::size_t, double>> out;
  out.reserve(last - first + 1);
  for (std::size_t i = first; i <= last; ++i)
    out.emplace_back(i, std::pow(static_cast<double>(i), -1.0 / alpha));
  return out;
}

namespace {

std::vector<double> relative_descending(std::vector<std::uint64_t> sizes) {
  if (sizes.empty()) throw DomainError("ranked_frequencies: empty input");
  std::sort(sizes.begin(), sizes.end(), std::greater<>());
  const double n =
      static_cast<double>(std::accumulate(sizes.begin(), sizes.end(), std::uint64_t{0}));
  std::vector<double> out;
  out.reserve(sizes.size());
  for (auto s : sizes) out.push_back(static_cast<double>(s) / n);
  return out;
}

}  // namespace

std::vector<double> ranked_frequencies(const SeatingPlan& plan) {
  return relative_descending(plan.table_counts);
}

std::vector<double> ranked_frequencies(const LabeledSample& sample) {
  const auto partition = reduce_sample(sample);
  const auto sizes = partition.block_sizes();
  return relative_descending(std::vector<std::uint64_t>(sizes.begin(), sizes.end()));
}

std::vector<double> ranked_frequencies(const IntegerPartition& partition) {
  return relative_descending(partition.block_sizes_descending());
}

}  // namespace raretype
