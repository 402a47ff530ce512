#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "raretype/inference.hpp"
#include "raretype/likelihood_ratio.hpp"
#include "raretype/partition.hpp"
#include "raretype/pitman.hpp"
#include "raretype/random.hpp"

namespace raretype {

enum class ProfileFormat { kTsv, kCsv };

/// Profiles compared by exact string equality. Each record joins the
/// selected columns with kFieldSeparator.
struct ProfileDatabase {
  static constexpr char kFieldSeparator = '\x1f';

  std::vector<std::string> records;
  std::string source;
  std::vector<std::string> loci;
  std::string notes;

  LabeledSample to_sample() const { return LabeledSample{records}; }
};

/// Reads a delimited profile table with a header row. An empty `columns`
/// selects every column. Throws ParseError (kEmptyFile, kMissingColumn,
/// kRaggedRow, kIo).
ProfileDatabase load_profiles(const std::filesystem::path& path, ProfileFormat format,
                              const std::vector<std::string>& columns = {});
ProfileDatabase parse_profiles(std::istream& in, ProfileFormat format,
                               const std::vector<std::string>& columns = {},
                               std::string source = "<stream>");

// ---------------------------------------------------------------------------
// Dutch Y-STR haplotype fixture
// ---------------------------------------------------------------------------

struct FixtureInfo {
  std::uint64_t n;         // sum a_j r_j of the printed vectors
  std::uint64_t n_stated;  // population size quoted alongside them
  std::uint64_t k;
  std::size_t classes;
};

/// The 28-class (a, r) summary of the Dutch haplotype frequencies.
IntegerPartition dutch_fixture();
FixtureInfo dutch_fixture_info();

// ---------------------------------------------------------------------------
// Finite populations
// ---------------------------------------------------------------------------

/// One type per block of `partition`: p_i = block size / n, N = n.
PopulationVector population_from_partition(const IntegerPartition& partition);

/// Population of individuals: carrier counts per type in rank order.
class FinitePopulation {
 public:
  explicit FinitePopulation(const IntegerPartition& partition);

  const std::vector<std::uint64_t>& counts() const noexcept { return counts_; }
  std::uint64_t size() const noexcept { return individuals_.size(); }
  const PopulationVector& frequencies() const noexcept { return frequencies_; }

  /// Type ranks (0-based) of `sample_size` individuals drawn without
  /// replacement.
  std::vector<std::size_t> sample(std::size_t sample_size, Rng& rng) const;

 private:
  std::vector<std::uint64_t> counts_;
  std::vector<std::size_t> individuals_;
  PopulationVector frequencies_;
};

/// Integer partition of a sample of type ranks.
IntegerPartition partition_of_types(const std::vector<std::size_t>& types);

// ---------------------------------------------------------------------------
// Single case
// ---------------------------------------------------------------------------

struct CaseOptions {
  FitOptions fit;
  std::optional<PopulationVector> population;  // enables the true-LR path
  std::optional<std::size_t> matched_rank;     // 1-based; enables LR_f
  MhConfig mh;
};

/// Reduce, append the suspect as a new singleton, fit on Db+, and evaluate
/// the plug-in LR; with a population also LR given p and LR_f.
LrReport run_case(const IntegerPartition& database, const CaseOptions& options = {});
LrReport run_case(const ProfileDatabase& database, const CaseOptions& options = {});

// ---------------------------------------------------------------------------
// Replicated experiment
// ---------------------------------------------------------------------------

struct ExperimentSpec {
  IntegerPartition population;        // each block: one type with that many carriers
  std::size_t sample_size = 101;      // database + suspect
  std::size_t replicates = 96;
  std::uint64_t seed = 0;
  MhConfig mh;
  FitOptions fit;
  std::size_t max_conditioning_attempts = 10'000;
  std::optional<std::size_t> threads;  // defaults to RARETYPE_THREADS or hardware

  void validate() const;
};

struct ExperimentRow {
  std::size_t replicate = 0;
  std::uint64_t seed = 0;
  std::size_t suspect_rank = 0;  // 1-based population rank of the suspect's type
  double alpha_hat = 0.0;
  double theta_hat = 0.0;
  bool converged = false;
  double log10_lr = 0.0;
  double log10_lr_true = 0.0;
  double log10_lr_true_stderr = 0.0;
  double log10_lr_freq = 0.0;
  double diff1 = 0.0;
  double diff2 = 0.0;
};

/// Min, quartiles, median, mean, max and sample sd. Quantiles interpolate
/// linearly between order statistics.
struct ColumnSummary {
  double min = 0.0, q1 = 0.0, median = 0.0, mean = 0.0, q3 = 0.0, max = 0.0, sd = 0.0;
  std::size_t count = 0;
};

ColumnSummary summarize(std::vector<double> values);

struct ExperimentResult {
  std::vector<ExperimentRow> rows;
  // Keyed by column name; computed over rows with converged fits.
  std::map<std::string, ColumnSummary> summary;
  std::size_t excluded_rows = 0;
};

inline const std::vector<std::string> kExperimentColumns = {
    "alpha_hat", "theta_hat", "log10_lr", "log10_lr_true", "log10_lr_freq", "diff1", "diff2"};

double experiment_column(const ExperimentRow& row, const std::string& column);

/// Summaries recomputed from rows, as run_experiment fills them.
std::map<std::string, ColumnSummary> summarize_rows(const std::vector<ExperimentRow>& rows,
                                                    std::size_t* excluded = nullptr);

/// Replicated rare-type cases drawn without replacement from a finite
/// population. Replicate r uses derive_seed(spec.seed, r); rows are ordered
/// by replicate index.
ExperimentResult run_experiment(const ExperimentSpec& spec);

/// Worker count from RARETYPE_THREADS, else hardware concurrency (min 1).
std::size_t default_thread_count();

}  // namespace raretype
