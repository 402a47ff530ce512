#include "raretype/likelihood_ratio.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "raretype/error.hpp"
#include "raretype/random.hpp"

namespace raretype {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool supports(std::uint64_t carriers, std::uint64_t size, SupportRule rule) {
  return rule == SupportRule::kAtLeast ? carriers >= size : carriers > size;
}

// a_chi with the a_0 = 0 convention.
std::uint64_t class_size(const IntegerPartition& partition, std::uint32_t cls) {
  return cls == 0 ? 0 : partition.a()[cls - 1];
}

double singleton_mass(const AssignmentVector& chi, const IntegerPartition& partition,
                      const PopulationVector& population) {
  // Class 1 holds singletons only when a_1 == 1.
  if (partition.singletons() == 0) return 0.0;
  double mass = 0.0;
  for (std::size_t i = 0; i < chi.size(); ++i)
    if (chi.chi[i] == 1) mass += population.probs()[i];
  return mass;
}

}  // namespace

double lr_empirical_bayes(std::uint64_t n, const PdParams& params) {
  if (n == 0) throw DomainError("lr_empirical_bayes: n must be at least 1");
  return (static_cast<double>(n) + 1.0 + params.theta()) / (1.0 - params.alpha());
}

double lr_posterior_form(double phi_posterior_mean, std::uint64_t n) {
  if (!(phi_posterior_mean > 0.0))
    throw DomainError("lr_posterior_form: posterior mean of phi must be positive");
  if (!(phi_posterior_mean < 1.0))
    throw DomainError("lr_posterior_form: posterior mean of phi must be below 1");
  return static_cast<double>(n) / phi_posterior_mean;
}

double lr_frequentist(const PopulationVector& population, std::size_t matched_rank) {
  if (matched_rank == 0 || matched_rank > population.size())
    throw DomainError("lr_frequentist: rank " + std::to_string(matched_rank) +
                      " outside 1.." + std::to_string(population.size()));
  return 1.0 / population.probs()[matched_rank - 1];
}

bool satisfies_constraints(const AssignmentVector& chi, const IntegerPartition& partition,
                           const PopulationVector& population, SupportRule rule) {
  if (chi.size() != population.size()) return false;
  std::vector<std::uint64_t> counts(partition.num_classes() + 1, 0);
  for (std::size_t i = 0; i < chi.size(); ++i) {
    const auto cls = chi.chi[i];
    if (cls > partition.num_classes()) return false;
    ++counts[cls];
    if (cls > 0 && !supports(population.carriers(i), class_size(partition, cls), rule))
      return false;
  }
  for (std::size_t j = 1; j <= partition.num_classes(); ++j)
    if (counts[j] != partition.r()[j - 1]) return false;
  return true;
}

AssignmentVector chi_init(const IntegerPartition& partition, const PopulationVector& population,
                          SupportRule rule) {
  const std::size_t m = population.size();
  AssignmentVector chi{std::vector<std::uint32_t>(m, 0)};
  for (std::size_t j = partition.num_classes(); j >= 1; --j) {
    std::uint64_t needed = partition.r()[j - 1];
    const std::uint64_t size = partition.a()[j - 1];
    for (std::size_t i = 0; i < m && needed > 0; ++i) {
      if (chi.chi[i] != 0) continue;
      // Carriers are nonincreasing in rank; once one fails, all later ranks fail.
      if (!supports(population.carriers(i), size, rule)) break;
      chi.chi[i] = static_cast<std::uint32_t>(j);
      --needed;
    }
    if (needed > 0)
      throw InfeasibleError("chi_init: class " + std::to_string(j) + " (types observed " +
                                std::to_string(size) + " times, r=" +
                                std::to_string(partition.r()[j - 1]) +
                                ") cannot be assigned to population ranks",
                            j);
  }
  return chi;
}

double mh_ratio(const AssignmentVector& chi, std::size_t i, std::size_t j,
                const IntegerPartition& partition, const PopulationVector& population) {
  const double ei = static_cast<double>(class_size(partition, chi.chi.at(i)));
  const double ej = static_cast<double>(class_size(partition, chi.chi.at(j)));
  const double log_r =
      (ej - ei) * (std::log(population.probs()[i]) - std::log(population.probs()[j]));
  return std::exp(log_r);
}

void MhConfig::validate() const {
  if (!(burn_in < iterations)) throw ConfigError("MhConfig: burn_in must be below iterations");
  if (thinning < 1) throw ConfigError("MhConfig: thinning must be at least 1");
  if (batches < 1) throw ConfigError("MhConfig: batches must be at least 1");
}

MhResult lr_true_mh(const IntegerPartition& db_plus, const PopulationVector& population,
                    const MhConfig& config) {
  config.validate();
  const std::uint64_t s1 = db_plus.singletons();
  if (s1 == 0) throw DomainError("lr_true_mh: partition has no singleton (not a Db+ partition)");
  const std::uint64_t retained_expected = (config.iterations - config.burn_in) / config.thinning;
  if (retained_expected == 0) throw ConfigError("lr_true_mh: configuration retains no samples");

  AssignmentVector chi = chi_init(db_plus, population, config.support);
  const std::size_t m = population.size();
  std::vector<double> log_p(m);
  std::vector<std::uint64_t> carriers(m);
  std::vector<double> exponent(m);
  for (std::size_t i = 0; i < m; ++i) {
    log_p[i] = std::log(population.probs()[i]);
    carriers[i] = population.carriers(i);
    exponent[i] = static_cast<double>(class_size(db_plus, chi.chi[i]));
  }
  const bool movable =
      std::any_of(chi.chi.begin(), chi.chi.end(), [&](auto c) { return c != chi.chi.front(); });

  Rng rng(config.seed);
  MhResult result;
  std::vector<double> samples;
  samples.reserve(retained_expected);
  std::uint64_t accepted = 0;

  for (std::uint64_t t = 1; t <= config.iterations; ++t) {
    if (movable) {
      std::size_t i, j;
      do {
        i = rng.uniform_index(m);
        j = rng.uniform_index(m - 1);
        if (j >= i) ++j;
      } while (chi.chi[i] == chi.chi[j]);

      const auto ci = chi.chi[i], cj = chi.chi[j];
      const bool allowed = supports(carriers[i], class_size(db_plus, cj), config.support) &&
                           supports(carriers[j], class_size(db_plus, ci), config.support);
      if (allowed) {
        const double log_r = (exponent[j] - exponent[i]) * (log_p[i] - log_p[j]);
        if (log_r >= 0.0 || rng.uniform01() < std::exp(log_r)) {
          std::swap(chi.chi[i], chi.chi[j]);
          std::swap(exponent[i], exponent[j]);
          ++accepted;
        }
      }
    }
    if (t > config.burn_in && (t - config.burn_in) % config.thinning == 0) {
      const double mass = singleton_mass(chi, db_plus, population);
      samples.push_back(mass);
      if (config.record_trace) result.trace.push_back({t, mass});
    }
  }

  result.retained = samples.size();
  result.acceptance_rate =
      static_cast<double>(accepted) / static_cast<double>(config.iterations);
  const double mean =
      std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(samples.size());
  result.mean_singleton_mass = mean;

  const std::size_t batches = std::min<std::size_t>(config.batches, samples.size());
  if (batches >= 2) {
    const std::size_t batch_size = samples.size() / batches;
    const std::size_t offset = samples.size() - batch_size * batches;
    std::vector<double> means(batches);
    for (std::size_t b = 0; b < batches; ++b) {
      const auto first = samples.begin() + static_cast<std::ptrdiff_t>(offset + b * batch_size);
      means[b] = std::accumulate(first, first + static_cast<std::ptrdiff_t>(batch_size), 0.0) /
                 static_cast<double>(batch_size);
    }
    const double bm = std::accumulate(means.begin(), means.end(), 0.0) / static_cast<double>(batches);
    double ss = 0.0;
    for (double x : means) ss += (x - bm) * (x - bm);
    result.singleton_mass_stderr =
        std::sqrt(ss / static_cast<double>(batches - 1) / static_cast<double>(batches));
  } else {
    result.singleton_mass_stderr = kNaN;
  }

  const double s1d = static_cast<double>(s1);
  result.lr = s1d / mean;
  result.lr_stderr = s1d * result.singleton_mass_stderr / (mean * mean);
  result.log10_lr = std::log10(result.lr);
  result.log10_lr_stderr = result.singleton_mass_stderr / (mean * std::log(10.0));
  return result;
}

MhResult pool_chains(const std::vector<MhResult>& chains, std::uint64_t s1) {
  if (chains.empty()) throw ConfigError("pool_chains: no chains");
  MhResult pooled;
  double mean = 0.0, var = 0.0, acc = 0.0;
  for (const auto& c : chains) {
    mean += c.mean_singleton_mass;
    var += c.singleton_mass_stderr * c.singleton_mass_stderr;
    acc += c.acceptance_rate;
    pooled.retained += c.retained;
  }
  const double count = static_cast<double>(chains.size());
  mean /= count;
  pooled.mean_singleton_mass = mean;
  pooled.singleton_mass_stderr = std::sqrt(var) / count;
  pooled.acceptance_rate = acc / count;
  const double s1d = static_cast<double>(s1);
  pooled.lr = s1d / mean;
  pooled.lr_stderr = s1d * pooled.singleton_mass_stderr / (mean * mean);
  pooled.log10_lr = std::log10(pooled.lr);
  pooled.log10_lr_stderr = pooled.singleton_mass_stderr / (mean * std::log(10.0));
  return pooled;
}

double assignment_candidate_bound(const IntegerPartition& partition, std::size_t m) {
  const auto k = partition.num_blocks();
  if (k > m) return 0.0;
  double log_bound = std::lgamma(static_cast<double>(m) + 1.0) -
                     std::lgamma(static_cast<double>(m - k) + 1.0);
  for (auto r : partition.r()) log_bound -= std::lgamma(static_cast<double>(r) + 1.0);
  return std::exp(log_bound);
}

double exact_true_lr(const IntegerPartition& db_plus, const PopulationVector& population,
                     const ExactEnumerationOptions& options) {
  const std::uint64_t s1 = db_plus.singletons();
  if (s1 == 0) throw DomainError("exact_true_lr: partition has no singleton (not a Db+ partition)");
  const std::size_t m = population.size();
  const double bound = assignment_candidate_bound(db_plus, m);
  if (bound > options.candidate_cap)
    throw EnumerationCapError("exact_true_lr: " + std::to_string(bound) +
                              " candidate assignments exceed the cap; use lr_true_mh");

  // The greedy start is the most likely valid assignment; weights are taken
  // relative to it so none exceeds 1.
  const AssignmentVector start = chi_init(db_plus, population, options.support);
  std::vector<double> log_p(m);
  std::vector<std::uint64_t> carriers(m);
  double log_w_max = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    log_p[i] = std::log(population.probs()[i]);
    carriers[i] = population.carriers(i);
    log_w_max += static_cast<double>(class_size(db_plus, start.chi[i])) * log_p[i];
  }

  const std::size_t classes = db_plus.num_classes();
  std::vector<std::uint64_t> remaining(db_plus.r().begin(), db_plus.r().end());
  std::uint64_t remaining_total = db_plus.num_blocks();
  const bool class1_singletons = db_plus.a().front() == 1;

  double total_weight = 0.0;
  double weighted_mass = 0.0;

  auto visit = [&](auto&& self, std::size_t i, double log_w, double mass) -> void {
    if (remaining_total > m - i) return;
    if (i == m) {
      const double w = std::exp(log_w - log_w_max);
      total_weight += w;
      weighted_mass += w * mass;
      return;
    }
    if (remaining_total < m - i) self(self, i + 1, log_w, mass);
    for (std::size_t j = 1; j <= classes; ++j) {
      if (remaining[j - 1] == 0) continue;
      const std::uint64_t size = db_plus.a()[j - 1];
      if (!supports(carriers[i], size, options.support)) continue;
      --remaining[j - 1];
      --remaining_total;
      const double p = population.probs()[i];
      self(self, i + 1, log_w + static_cast<double>(size) * log_p[i],
           (j == 1 && class1_singletons) ? mass + p : mass);
      ++remaining[j - 1];
      ++remaining_total;
    }
  };
  visit(visit, 0, 0.0, 0.0);

  if (!(total_weight > 0.0)) throw InfeasibleError("exact_true_lr: no valid assignment", 0);
  return static_cast<double>(s1) / (weighted_mass / total_weight);
}

LrReport diff_metrics(LrReport report) {
  if (report.log10_lr_eb && report.log10_lr_true) {
    report.diff1 = *report.log10_lr_eb - *report.log10_lr_true;
  } else {
    report.diff1.reset();
    report.flags.emplace_back("diff1 unavailable: missing " +
                              std::string(report.log10_lr_eb ? "log10_lr_true" : "log10_lr_eb"));
  }
  if (report.log10_lr_eb && report.log10_lr_freq) {
    report.diff2 = *report.log10_lr_eb - *report.log10_lr_freq;
  } else {
    report.diff2.reset();
    report.flags.emplace_back("diff2 unavailable: missing " +
                              std::string(report.log10_lr_eb ? "log10_lr_freq" : "log10_lr_eb"));
  }
  return report;
}

}  // namespace raretype
