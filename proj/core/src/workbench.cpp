#include "raretype/workbench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <thread>

#include "raretype/error.hpp"
#include "raretype/random.hpp"

namespace raretype {
namespace {

std::vector<std::string> split(const std::string& line, char delim) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, delim)) fields.push_back(field);
  if (!line.empty() && line.back() == delim) fields.emplace_back();
  return fields;
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace

ProfileDatabase parse_profiles(std::istream& in, ProfileFormat format,
                               const std::vector<std::string>& columns, std::string source) {
  const char delim = format == ProfileFormat::kTsv ? '\t' : ',';
  std::string line;
  if (!std::getline(in, line))
    throw ParseError(ParseErrorKind::kEmptyFile, source + ": empty file (header row required)");
  strip_cr(line);
  const auto header = split(line, delim);

  std::vector<std::size_t> selected;
  ProfileDatabase db;
  db.source = std::move(source);
  if (columns.empty()) {
    selected.resize(header.size());
    std::iota(selected.begin(), selected.end(), std::size_t{0});
    db.loci = header;
  } else {
    for (const auto& name : columns) {
      auto it = std::find(header.begin(), header.end(), name);
      if (it == header.end())
        throw ParseError(ParseErrorKind::kMissingColumn, db.source + ": no column '" + name + "'");
      selected.push_back(static_cast<std::size_t>(it - header.begin()));
    }
    db.loci = columns;
  }

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split(line, delim);
    if (fields.size() != header.size())
      throw ParseError(ParseErrorKind::kRaggedRow,
                       db.source + ":" + std::to_string(line_no) + ": expected " +
                           std::to_string(header.size()) + " fields, found " +
                           std::to_string(fields.size()));
    std::string record;
    for (std::size_t c = 0; c < selected.size(); ++c) {
      if (c > 0) record.push_back(ProfileDatabase::kFieldSeparator);
      record += fields[selected[c]];
    }
    db.records.push_back(std::move(record));
  }
  if (db.records.empty())
    throw ParseError(ParseErrorKind::kEmptyFile, db.source + ": no profile records");
  return db;
}

ProfileDatabase load_profiles(const std::filesystem::path& path, ProfileFormat format,
                              const std::vector<std::string>& columns) {
  std::ifstream in(path);
  if (!in) throw ParseError(ParseErrorKind::kIo, "cannot open " + path.string());
  return parse_profiles(in, format, columns, path.string());
}

IntegerPartition dutch_fixture() {
  return IntegerPartition(
      {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 14, 15, 16, 17, 19, 20, 23, 24, 29, 35, 41, 46, 94,
       152, 168, 174},
      {356, 80, 31, 20, 13, 11, 5, 6, 3, 5, 4, 3, 2, 3, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 2, 1, 1, 1});
}

FixtureInfo dutch_fixture_info() {
  const auto f = dutch_fixture();
  // The accompanying text quotes n = 2037; the vectors themselves sum to 2085.
  return FixtureInfo{f.n(), 2037, f.num_blocks(), f.num_classes()};
}

PopulationVector population_from_partition(const IntegerPartition& partition) {
  if (partition.empty()) throw DomainError("population_from_partition: empty partition");
  const auto sizes = partition.block_sizes_descending();
  const double n = static_cast<double>(partition.n());
  std::vector<double> probs;
  probs.reserve(sizes.size());
  for (auto s : sizes) probs.push_back(static_cast<double>(s) / n);
  return PopulationVector(std::move(probs), partition.n());
}

FinitePopulation::FinitePopulation(const IntegerPartition& partition)
    : counts_(partition.block_sizes_descending()),
      frequencies_(population_from_partition(partition)) {
  individuals_.reserve(partition.n());
  for (std::size_t t = 0; t < counts_.size(); ++t)
    individuals_.insert(individuals_.end(), counts_[t], t);
}

std::vector<std::size_t> FinitePopulation::sample(std::size_t sample_size, Rng& rng) const {
  if (sample_size > individuals_.size())
    throw DomainError("FinitePopulation::sample: sample larger than population");
  // Partial Fisher-Yates on a copy.
  std::vector<std::size_t> pool = individuals_;
  for (std::size_t i = 0; i < sample_size; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.uniform_index(pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(sample_size);
  return pool;
}

IntegerPartition partition_of_types(const std::vector<std::size_t>& types) {
  if (types.empty()) throw DomainError("partition_of_types: empty sample");
  std::map<std::size_t, std::uint64_t> counts;
  for (auto t : types) ++counts[t];
  std::vector<std::uint64_t> sizes;
  sizes.reserve(counts.size());
  for (const auto& [type, count] : counts) sizes.push_back(count);
  return IntegerPartition::from_block_sizes(sizes);
}

LrReport run_case(const IntegerPartition& database, const CaseOptions& options) {
  if (database.empty()) throw DomainError("run_case: empty database");
  LrReport report;
  report.database_size = database.n();
  const auto db_plus = augment(database, AugmentMode::kSuspectOnly);

  FitOptions fit_options = options.fit;
  fit_options.phi_n = database.n();
  const MleFit fit = fit_mle(db_plus, fit_options);
  report.fit = fit;
  if (fit.converged) {
    report.log10_lr_eb = std::log10(lr_empirical_bayes(database.n(), fit.params()));
  } else {
    report.diagnosis = fit.diagnosis;
  }

  if (options.population) {
    const auto mh = lr_true_mh(db_plus, *options.population, options.mh);
    report.log10_lr_true = mh.log10_lr;
    report.log10_lr_true_stderr = mh.log10_lr_stderr;
    if (options.matched_rank)
      report.log10_lr_freq = std::log10(lr_frequentist(*options.population, *options.matched_rank));
  }
  if (report.log10_lr_true || report.log10_lr_freq) report = diff_metrics(std::move(report));
  return report;
}

LrReport run_case(const ProfileDatabase& database, const CaseOptions& options) {
  return run_case(to_integer_partition(reduce_sample(database.to_sample())), options);
}

void ExperimentSpec::validate() const {
  if (population.empty()) throw ConfigError("experiment: empty population");
  if (sample_size < 2) throw ConfigError("experiment: sample_size must be at least 2");
  if (sample_size > population.n())
    throw ConfigError("experiment: sample_size exceeds population size");
  if (replicates < 1) throw ConfigError("experiment: replicates must be at least 1");
  mh.validate();
}

ColumnSummary summarize(std::vector<double> values) {
  ColumnSummary s;
  s.count = values.size();
  if (values.empty()) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    s.min = s.q1 = s.median = s.mean = s.q3 = s.max = s.sd = nan;
    return s;
  }
  std::sort(values.begin(), values.end());
  auto quantile = [&](double q) {
    const double h = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
  };
  s.min = values.front();
  s.max = values.back();
  s.q1 = quantile(0.25);
  s.median = quantile(0.5);
  s.q3 = quantile(0.75);
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  } else {
    s.sd = 0.0;
  }
  return s;
}

double experiment_column(const ExperimentRow& row, const std::string& column) {
  if (column == "alpha_hat") return row.alpha_hat;
  if (column == "theta_hat") return row.theta_hat;
  if (column == "log10_lr") return row.log10_lr;
  if (column == "log10_lr_true") return row.log10_lr_true;
  if (column == "log10_lr_freq") return row.log10_lr_freq;
  if (column == "diff1") return row.diff1;
  if (column == "diff2") return row.diff2;
  throw DomainError("experiment_column: unknown column " + column);
}

std::map<std::string, ColumnSummary> summarize_rows(const std::vector<ExperimentRow>& rows,
                                                    std::size_t* excluded) {
  std::map<std::string, ColumnSummary> out;
  std::size_t skipped = 0;
  for (const auto& row : rows)
    if (!row.converged) ++skipped;
  for (const auto& column : kExperimentColumns) {
    std::vector<double> values;
    for (const auto& row : rows)
      if (row.converged) values.push_back(experiment_column(row, column));
    out[column] = summarize(std::move(values));
  }
  if (excluded) *excluded = skipped;
  return out;
}

std::size_t default_thread_count() {
  if (const char* env = std::getenv("RARETYPE_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

ExperimentRow run_replicate(const ExperimentSpec& spec, const FinitePopulation& population,
                            std::size_t replicate) {
  ExperimentRow row;
  row.replicate = replicate;
  row.seed = derive_seed(spec.seed, replicate);
  Rng rng(derive_seed(row.seed, 0));

  std::vector<std::size_t> types;
  bool rare = false;
  for (std::size_t attempt = 0; attempt < spec.max_conditioning_attempts && !rare; ++attempt) {
    types = population.sample(spec.sample_size, rng);
    const auto suspect = types.back();
    rare = std::find(types.begin(), types.end() - 1, suspect) == types.end() - 1;
  }
  if (!rare)
    throw ConfigError("experiment: no rare-type case after " +
                      std::to_string(spec.max_conditioning_attempts) +
                      " attempts; population too concentrated");

  const std::size_t suspect = types.back();
  row.suspect_rank = suspect + 1;
  const auto db_plus = partition_of_types(types);
  const std::uint64_t n_db = spec.sample_size - 1;

  FitOptions fit_options = spec.fit;
  fit_options.phi_n = n_db;
  const auto fit = fit_mle(db_plus, fit_options);
  row.alpha_hat = fit.alpha_hat;
  row.theta_hat = fit.theta_hat;
  row.converged = fit.converged;
  if (PdParams::valid(fit.alpha_hat, fit.theta_hat))
    row.log10_lr = std::log10(lr_empirical_bayes(n_db, fit.params()));
  else
    row.log10_lr = std::numeric_limits<double>::quiet_NaN();

  MhConfig mh = spec.mh;
  mh.seed = derive_seed(row.seed, 1);
  mh.record_trace = false;
  const auto chain = lr_true_mh(db_plus, population.frequencies(), mh);
  row.log10_lr_true = chain.log10_lr;
  row.log10_lr_true_stderr = chain.log10_lr_stderr;

  row.log10_lr_freq = std::log10(static_cast<double>(population.size()) /
                                 static_cast<double>(population.counts()[suspect]));
  row.diff1 = row.log10_lr - row.log10_lr_true;
  row.diff2 = row.log10_lr - row.log10_lr_freq;
  return row;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  const FinitePopulation population(spec.population);
  ExperimentResult result;
  result.rows.resize(spec.replicates);

  const std::size_t workers =
      std::min(spec.threads.value_or(default_thread_count()), spec.replicates);
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  auto work = [&](std::size_t w) {
    try {
      for (std::size_t r = next++; r < spec.replicates; r = next++)
        result.rows[r] = run_replicate(spec, population, r);
    } catch (...) {
      errors[w] = std::current_exception();
      next = spec.replicates;
    }
  };
  if (workers <= 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w);
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  result.summary = summarize_rows(result.rows, &result.excluded_rows);
  return result;
}

}  // namespace raretype
