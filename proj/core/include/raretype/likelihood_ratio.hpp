#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "raretype/inference.hpp"
#include "raretype/partition.hpp"
#include "raretype/pitman.hpp"

namespace raretype {

// ---------------------------------------------------------------------------
// Plug-in and benchmark likelihood ratios
// ---------------------------------------------------------------------------

/// (n + 1 + theta) / (1 - alpha), n the database size.
double lr_empirical_bayes(std::uint64_t n, const PdParams& params);

/// n / E[phi]. Agrees exactly with lr_empirical_bayes when E[phi] is phi_MLE.
/// Throws DomainError unless 0 < phi_posterior_mean < 1.
double lr_posterior_form(double phi_posterior_mean, std::uint64_t n);

/// 1 / p_rank with a 1-based rank. Throws DomainError when out of range.
double lr_frequentist(const PopulationVector& population, std::size_t matched_rank);

// ---------------------------------------------------------------------------
// "True" LR given a known population vector
// ---------------------------------------------------------------------------

/// How the support constraint compares carriers round(N p_i) with a_chi(i).
enum class SupportRule {
  kAtLeast,  // round(N p_i) >= a_chi(i)
  kStrict,   // round(N p_i) >  a_chi(i)
};

/// Map from population ranks (0-based here) to sample classes: 0 for an
/// unobserved type, j for a type observed a_j times (1-based into a).
struct AssignmentVector {
  std::vector<std::uint32_t> chi;

  std::size_t size() const noexcept { return chi.size(); }
};

/// Checks class counts #{i : chi_i = j} = r_j and round(N p_i) against
/// a_chi(i) for every observed rank.
bool satisfies_constraints(const AssignmentVector& chi, const IntegerPartition& partition,
                           const PopulationVector& population,
                           SupportRule rule = SupportRule::kAtLeast);

/// Greedy start: classes in decreasing a_j take the most frequent free ranks
/// that can carry them. Throws InfeasibleError naming the first class that
/// cannot be filled.
AssignmentVector chi_init(const IntegerPartition& partition, const PopulationVector& population,
                          SupportRule rule = SupportRule::kAtLeast);

/// Metropolis factor for exchanging chi_i and chi_j (0-based ranks): the
/// likelihood of the swapped state over the current one, with a_0 = 0.
double mh_ratio(const AssignmentVector& chi, std::size_t i, std::size_t j,
                const IntegerPartition& partition, const PopulationVector& population);

struct MhConfig {
  std::uint64_t iterations = 100'000;
  std::uint64_t burn_in = 20'000;
  std::uint64_t thinning = 1'000;
  std::uint64_t seed = 0;
  std::size_t batches = 20;
  SupportRule support = SupportRule::kAtLeast;
  bool record_trace = false;

  /// Throws ConfigError unless burn_in < iterations and thinning >= 1.
  void validate() const;
};

struct MhTracePoint {
  std::uint64_t iteration;
  double singleton_mass;
};

struct MhResult {
  double lr = 0.0;
  double lr_stderr = 0.0;
  double log10_lr = 0.0;
  double log10_lr_stderr = 0.0;
  double mean_singleton_mass = 0.0;
  double singleton_mass_stderr = 0.0;  // batch means
  std::uint64_t retained = 0;
  double acceptance_rate = 0.0;
  std::vector<MhTracePoint> trace;  // retained states, when requested
};

/// Swap-proposal Metropolis-Hastings estimate of s1 / E[sum_{chi_i = 1} p_i]
/// for a Db+ partition. Throws DomainError when s1 == 0, InfeasibleError from
/// chi_init, and ConfigError for an invalid config.
MhResult lr_true_mh(const IntegerPartition& db_plus, const PopulationVector& population,
                    const MhConfig& config);

/// Pools independent chains: mean of the singleton-mass estimates and the
/// matching pooled standard error.
MhResult pool_chains(const std::vector<MhResult>& chains, std::uint64_t s1);

struct ExactEnumerationOptions {
  double candidate_cap = 2e6;
  SupportRule support = SupportRule::kAtLeast;
};

/// Multinomial upper bound m! / ((m - k)! prod r_j!) on the number of
/// assignments before the support constraint.
double assignment_candidate_bound(const IntegerPartition& partition, std::size_t m);

/// Exact s1 / E[sum_{chi_i = 1} p_i] by weighted enumeration of every valid
/// assignment. Throws EnumerationCapError when the candidate bound exceeds
/// the cap, InfeasibleError when no valid assignment exists.
double exact_true_lr(const IntegerPartition& db_plus, const PopulationVector& population,
                     const ExactEnumerationOptions& options = {});

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

struct LrReport {
  std::optional<double> log10_lr_eb;
  std::optional<double> log10_lr_true;
  std::optional<double> log10_lr_true_stderr;
  std::optional<double> log10_lr_freq;
  std::optional<double> diff1;  // log10_lr_eb - log10_lr_true
  std::optional<double> diff2;  // log10_lr_eb - log10_lr_freq
  std::optional<MleFit> fit;
  std::uint64_t database_size = 0;
  std::string diagnosis;
  std::vector<std::string> flags;
};

/// Fills diff1/diff2 from whichever operands exist and flags missing ones.
LrReport diff_metrics(LrReport report);

}  // namespace raretype
