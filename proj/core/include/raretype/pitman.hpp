#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "raretype/partition.hpp"

namespace raretype {

/// Two-parameter Poisson-Dirichlet hyperparameters, 0 < alpha < 1 and
/// theta > -alpha. The alpha = 0 Dirichlet-process case is excluded.
class PdParams {
 public:
  /// Throws DomainError outside the open parameter domain.
  PdParams(double alpha, double theta);

  double alpha() const noexcept { return alpha_; }
  double theta() const noexcept { return theta_; }

  static bool valid(double alpha, double theta) noexcept;

 private:
  double alpha_;
  double theta_;
};

/// Finite truncation of ranked population frequencies with the population
/// size N. probs is nonincreasing, strictly positive and sums to 1.
class PopulationVector {
 public:
  static constexpr double kSumTolerance = 1e-12;

  PopulationVector(std::vector<double> probs, std::uint64_t pop_size);

  const std::vector<double>& probs() const noexcept { return probs_; }
  std::size_t size() const noexcept { return probs_.size(); }
  std::uint64_t pop_size() const noexcept { return pop_size_; }

  /// Population carriers of rank i (0-based), round(N * p_i).
  std::uint64_t carriers(std::size_t i) const noexcept;

 private:
  std::vector<double> probs_;
  std::uint64_t pop_size_;
};

struct SeatingPlan {
  std::vector<std::size_t> assignments;  // Y_t, 1-based table indices
  std::vector<std::uint64_t> table_counts;

  std::size_t num_customers() const noexcept { return assignments.size(); }
  std::size_t num_tables() const noexcept { return table_counts.size(); }

  SetPartition to_set_partition() const;
  IntegerPartition to_integer_partition() const;
};

struct GemDraw {
  PopulationVector population;
  double tail_mass;  // 1 - sum of the first m stick weights, before renormalization
};

/// log of prod_{i=0}^{count-1} (x + i*step); exactly 0 when count == 0.
/// Throws DomainError if any factor is nonpositive.
double log_rising_factorial(double x, std::uint64_t count, double step);

/// Log of the Pitman sampling formula for an exchangeable partition.
double eppf_log(const IntegerPartition& partition, const PdParams& params);

/// Seating probabilities for the next customer given current table sizes.
/// Entry k (last) is the new-table probability.
std::vector<double> crp_predictive(std::span<const std::uint64_t> table_counts,
                                   const PdParams& params);

/// Sequential Chinese-restaurant draw of n customers.
SeatingPlan crp_sample(std::size_t n, const PdParams& params, std::uint64_t seed);

/// GEM stick-breaking truncated to m sticks, sorted nonincreasing and
/// renormalized. pop_size is attached to the returned population.
GemDraw gem_stick_breaking(const PdParams& params, std::size_t m, std::uint64_t seed,
                           std::uint64_t pop_size = 1'000'000'000ULL);

/// (i, i^(-1/alpha)) for i in [first, last]. Slope -1/alpha on log-log axes.
std::vector<std::pair<std::size_t, double>> powerlaw_reference(double alpha, std::size_t first,
                                                               std::size_t last);

/// Block sizes over n, sorted nonincreasing.
std::vector<double> ranked_frequencies(const SeatingPlan& plan);
std::vector<double> ranked_frequencies(const LabeledSample& sample);
std::vector<double> ranked_frequencies(const IntegerPartition& partition);

}  // namespace raretype
