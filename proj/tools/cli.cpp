#include "cli.hpp"

#include <cmath>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "raretype/raretype.hpp"

namespace raretype::cli {
namespace {

enum class Format { kDefault, kJson, kCsv };

struct Globals {
  std::uint64_t seed = 0;
  std::string format;
  std::string out_path;
  bool quiet = false;

  Format resolved(Format fallback) const {
    if (format == "json") return Format::kJson;
    if (format == "csv") return Format::kCsv;
    return fallback;
  }
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(ParseErrorKind::kIo, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ProfileFormat profile_format(const std::string& path, const std::string& requested) {
  if (requested == "csv") return ProfileFormat::kCsv;
  if (requested == "tsv") return ProfileFormat::kTsv;
  const auto ext = std::filesystem::path(path).extension().string();
  return ext == ".csv" ? ProfileFormat::kCsv : ProfileFormat::kTsv;
}

std::vector<std::string> split_columns(const std::string& spec) {
  std::vector<std::string> cols;
  if (spec.empty() || spec == "all") return cols;
  std::string item;
  std::istringstream ss(spec);
  while (std::getline(ss, item, ',')) cols.push_back(item);
  return cols;
}

// Where a partition comes from: a profile table, a partition JSON file, or
// the built-in fixture.
struct PartitionSource {
  std::string profiles;
  std::string delimiter;
  std::string columns;
  std::string partition;
  bool fixture = false;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--input", profiles, "Profile table (TSV/CSV with header row)");
    cmd->add_option("--delimiter", delimiter, "Profile table format: tsv or csv")
        ->check(CLI::IsMember({"tsv", "csv"}));
    cmd->add_option("--columns", columns, "Comma-separated locus columns, or 'all'");
    cmd->add_option("--partition", partition, "Partition JSON {\"a\":[...],\"r\":[...]}");
    cmd->add_flag("--fixture", fixture, "Use the built-in Dutch haplotype summary");
  }

  IntegerPartition load() const {
    const int given = (!profiles.empty()) + (!partition.empty()) + (fixture ? 1 : 0);
    if (given != 1)
      throw ConfigError("exactly one of --input, --partition, --fixture is required");
    if (fixture) return dutch_fixture();
    if (!partition.empty())
      return integer_partition_from_json(parse_json_text(read_file(partition), partition));
    const auto db = load_profiles(profiles, profile_format(profiles, delimiter),
                                  split_columns(columns));
    return to_integer_partition(reduce_sample(db.to_sample()));
  }
};

struct PopulationSource {
  std::string path;
  bool fixture = false;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--population", path,
                    "Population JSON: {\"probs\":[...],\"pop_size\":N} or an (a, r) partition");
    cmd->add_flag("--population-fixture", fixture, "Use the Dutch summary as the population");
  }

  bool given() const { return fixture || !path.empty(); }

  PopulationVector load() const {
    if (fixture == !path.empty())
      throw ConfigError("exactly one of --population, --population-fixture is required");
    if (fixture) return population_from_partition(dutch_fixture());
    return population_from_json(parse_json_text(read_file(path), path));
  }
};

struct MhOptions {
  std::uint64_t iterations = MhConfig{}.iterations;
  std::uint64_t burn_in = MhConfig{}.burn_in;
  std::uint64_t thinning = MhConfig{}.thinning;
  bool strict = false;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--iterations", iterations, "Metropolis-Hastings iterations")
        ->capture_default_str();
    cmd->add_option("--burn-in", burn_in, "Burn-in iterations")->capture_default_str();
    cmd->add_option("--thinning", thinning, "Thinning interval")->capture_default_str();
    cmd->add_flag("--strict-support", strict, "Require round(N p_i) > a instead of >=");
  }

  MhConfig config(std::uint64_t seed) const {
    MhConfig cfg;
    cfg.iterations = iterations;
    cfg.burn_in = burn_in;
    cfg.thinning = thinning;
    cfg.seed = seed;
    cfg.support = strict ? SupportRule::kStrict : SupportRule::kAtLeast;
    cfg.validate();
    return cfg;
  }
};

void write_key_values(std::ostream& out,
                      const std::vector<std::pair<std::string, std::optional<double>>>& kv) {
  out << "quantity,value\n";
  for (const auto& [k, v] : kv) out << k << ',' << (v ? format_number(*v) : "nan") << '\n';
}

void emit_report_csv(std::ostream& out, const LrReport& r) {
  write_key_values(out, {{"log10_lr_eb", r.log10_lr_eb},
                         {"log10_lr_true", r.log10_lr_true},
                         {"log10_lr_true_stderr", r.log10_lr_true_stderr},
                         {"log10_lr_freq", r.log10_lr_freq},
                         {"diff1", r.diff1},
                         {"diff2", r.diff2}});
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Likelihood ratios for rare-type matches under a two-parameter "
               "Poisson-Dirichlet prior",
               "raretype"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--seed", g.seed, "Seed for every stochastic step")->capture_default_str();
  app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--out", g.out_path, "Write output to PATH instead of stdout");
  app.add_flag("--quiet", g.quiet, "Suppress diagnostics on stderr");

  // reduce
  auto* reduce = app.add_subcommand("reduce", "Reduce a profile table to a partition");
  std::string reduce_input, reduce_delim, reduce_columns, reduce_augment = "none";
  bool reduce_set = false;
  reduce->add_option("--input", reduce_input, "Profile table")->required();
  reduce->add_option("--delimiter", reduce_delim)->check(CLI::IsMember({"tsv", "csv"}));
  reduce->add_option("--columns", reduce_columns, "Comma-separated locus columns, or 'all'");
  reduce->add_flag("--set", reduce_set, "Emit the set partition instead of (a, r)");
  reduce->add_option("--augment", reduce_augment, "none, suspect (Db+) or suspect-trace (Db++)")
      ->check(CLI::IsMember({"none", "suspect", "suspect-trace"}))
      ->capture_default_str();

  // fit
  auto* fit = app.add_subcommand("fit", "Maximum-likelihood (alpha, theta)");
  PartitionSource fit_src;
  fit_src.add_to(fit);
  std::optional<std::uint64_t> fit_phi_n;
  fit->add_option("--phi-n", fit_phi_n, "n used in phi (default: partition size)");

  // lr
  auto* lr = app.add_subcommand("lr", "Empirical-Bayes plug-in LR");
  std::optional<std::uint64_t> lr_n;
  std::optional<double> lr_alpha, lr_theta;
  PartitionSource lr_src;
  lr->add_option("--n", lr_n, "Database size");
  lr->add_option("--alpha", lr_alpha, "Discount parameter");
  lr->add_option("--theta", lr_theta, "Concentration parameter");
  lr_src.add_to(lr);

  // true-lr
  auto* true_lr = app.add_subcommand("true-lr", "LR given a known population vector");
  std::string true_partition, trace_path;
  bool true_exact = false;
  std::size_t true_chains = 1;
  PopulationSource true_pop;
  MhOptions true_mh;
  true_lr->add_option("--partition", true_partition, "Db+ partition JSON")->required();
  true_pop.add_to(true_lr);
  true_mh.add_to(true_lr);
  true_lr->add_option("--chains", true_chains, "Independent chains pooled")->capture_default_str();
  true_lr->add_flag("--exact", true_exact, "Exact enumeration instead of sampling");
  true_lr->add_option("--trace", trace_path, "Write retained chain states as CSV");

  // freq-lr
  auto* freq_lr = app.add_subcommand("freq-lr", "Frequentist benchmark LR 1/p_x");
  PopulationSource freq_pop;
  std::size_t freq_rank = 0;
  freq_pop.add_to(freq_lr);
  freq_lr->add_option("--rank", freq_rank, "1-based population rank of the matching type")
      ->required();

  // simulate
  auto* simulate = app.add_subcommand("simulate", "CRP or GEM draw with ranked frequencies");
  std::size_t sim_n = 0, sim_m = 1000;
  double sim_alpha = 0.0, sim_theta = 0.0;
  std::string sim_method = "crp";
  simulate->add_option("--n", sim_n, "Customers (crp)");
  simulate->add_option("--m", sim_m, "Truncation length (gem)")->capture_default_str();
  simulate->add_option("--alpha", sim_alpha)->required();
  simulate->add_option("--theta", sim_theta)->required();
  simulate->add_option("--method", sim_method)
      ->check(CLI::IsMember({"crp", "gem"}))
      ->capture_default_str();

  // surface
  auto* surface = app.add_subcommand("surface", "Relative log-likelihood grid in (phi, theta)");
  PartitionSource surf_src;
  SurfaceGridSpec surf_grid;
  surf_src.add_to(surface);
  surface->add_option("--points", surf_grid.points_per_axis, "Grid points per axis (odd)")
      ->capture_default_str();
  surface->add_option("--span", surf_grid.span_sd, "Half-width in standard deviations")
      ->capture_default_str();

  // experiment
  auto* experiment = app.add_subcommand("experiment", "Replicated rare-type cases");
  std::string exp_population;
  ExperimentSpec exp_spec;
  MhOptions exp_mh;
  std::optional<std::size_t> exp_threads;
  experiment->add_option("--population", exp_population,
                         "Population (a, r) JSON (default: Dutch summary)");
  experiment->add_option("--sample-size", exp_spec.sample_size, "Database size plus suspect")
      ->capture_default_str();
  experiment->add_option("--replicates", exp_spec.replicates)->capture_default_str();
  experiment->add_option("--threads", exp_threads, "Worker threads (default RARETYPE_THREADS)");
  exp_mh.add_to(experiment);

  // fixture
  auto* fixture = app.add_subcommand("fixture", "Print the Dutch haplotype (a, r) summary");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitInputError;
  }

  std::ostringstream buffer;
  int status = kExitOk;
  auto note = [&](const std::string& msg) {
    if (!g.quiet) err << msg << '\n';
  };

  try {
    if (reduce->parsed()) {
      const auto db = load_profiles(reduce_input, profile_format(reduce_input, reduce_delim),
                                    split_columns(reduce_columns));
      auto set = reduce_sample(db.to_sample());
      if (reduce_augment == "suspect") set = augment(set, AugmentMode::kSuspectOnly);
      if (reduce_augment == "suspect-trace") set = augment(set, AugmentMode::kSuspectAndTrace);
      const auto fmt = g.resolved(Format::kJson);
      if (reduce_set) {
        buffer << to_json(set).dump() << '\n';
      } else if (fmt == Format::kCsv) {
        write_partition_csv(buffer, to_integer_partition(set));
      } else {
        buffer << to_json(to_integer_partition(set)).dump() << '\n';
      }
    } else if (fit->parsed()) {
      const auto partition = fit_src.load();
      FitOptions opts;
      opts.phi_n = fit_phi_n;
      const auto result = fit_mle(partition, opts);
      if (g.resolved(Format::kJson) == Format::kCsv) {
        write_key_values(buffer, {{"alpha_hat", result.alpha_hat},
                                  {"theta_hat", result.theta_hat},
                                  {"phi_hat", result.phi_hat},
                                  {"loglik", result.loglik_at_max},
                                  {"converged", result.converged ? 1.0 : 0.0}});
      } else {
        buffer << to_json(result).dump(2) << '\n';
      }
      for (const auto& w : result.warnings) note("warning: " + w);
      if (!result.converged) {
        note("not converged: " + result.diagnosis);
        status = kExitNotConverged;
      }
    } else if (lr->parsed()) {
      LrReport report;
      if (lr_n || lr_alpha || lr_theta) {
        if (!(lr_n && lr_alpha && lr_theta))
          throw ConfigError("lr: --n, --alpha and --theta must be given together");
        report.database_size = *lr_n;
        report.log10_lr_eb = std::log10(lr_empirical_bayes(*lr_n, PdParams(*lr_alpha, *lr_theta)));
      } else {
        report = run_case(lr_src.load());
        if (!report.log10_lr_eb) {
          note("no LR: " + report.diagnosis);
          status = kExitNotConverged;
        }
      }
      if (g.resolved(Format::kJson) == Format::kCsv)
        emit_report_csv(buffer, report);
      else
        buffer << to_json(report).dump(2) << '\n';
    } else if (true_lr->parsed()) {
      const auto partition =
          integer_partition_from_json(parse_json_text(read_file(true_partition), true_partition));
      const auto population = true_pop.load();
      Json j;
      if (true_exact) {
        ExactEnumerationOptions opts;
        opts.support = true_mh.strict ? SupportRule::kStrict : SupportRule::kAtLeast;
        const double value = exact_true_lr(partition, population, opts);
        j = Json{{"method", "exact"}, {"lr", value}, {"log10_lr", std::log10(value)}};
      } else {
        if (true_chains < 1) throw ConfigError("true-lr: --chains must be at least 1");
        std::vector<MhResult> chains;
        for (std::size_t c = 0; c < true_chains; ++c) {
          auto cfg = true_mh.config(derive_seed(g.seed, c));
          cfg.record_trace = !trace_path.empty();
          chains.push_back(lr_true_mh(partition, population, cfg));
        }
        const auto result =
            chains.size() == 1 ? chains.front() : pool_chains(chains, partition.singletons());
        j = to_json(result);
        j["method"] = "metropolis-hastings";
        j["chains"] = true_chains;
        if (!trace_path.empty()) {
          std::ofstream trace(trace_path);
          if (!trace) throw ParseError(ParseErrorKind::kIo, "cannot write " + trace_path);
          write_trace_csv(trace, chains.front());
        }
      }
      if (g.resolved(Format::kJson) == Format::kCsv) {
        write_key_values(buffer, {{"log10_lr", j["log10_lr"].get<double>()}});
      } else {
        buffer << j.dump(2) << '\n';
      }
    } else if (freq_lr->parsed()) {
      const auto population = freq_pop.load();
      const double value = lr_frequentist(population, freq_rank);
      if (g.resolved(Format::kJson) == Format::kCsv)
        write_key_values(buffer, {{"lr", value}, {"log10_lr", std::log10(value)}});
      else
        buffer << Json{{"rank", freq_rank}, {"lr", value}, {"log10_lr", std::log10(value)}}.dump(2)
               << '\n';
    } else if (simulate->parsed()) {
      const PdParams params(sim_alpha, sim_theta);
      std::vector<double> ranked;
      Json j{{"method", sim_method}, {"alpha", sim_alpha}, {"theta", sim_theta}, {"seed", g.seed}};
      if (sim_method == "crp") {
        if (sim_n == 0) throw ConfigError("simulate: --n is required for crp");
        const auto plan = crp_sample(sim_n, params, g.seed);
        ranked = ranked_frequencies(plan);
        j["partition"] = to_json(plan.to_integer_partition());
      } else {
        const auto draw = gem_stick_breaking(params, sim_m, g.seed);
        ranked = draw.population.probs();
        j["tail_mass"] = draw.tail_mass;
      }
      if (g.resolved(Format::kCsv) == Format::kCsv) {
        write_ranked_with_reference_csv(buffer, ranked, sim_alpha);
      } else {
        j["rel_freq"] = ranked;
        Json ref = Json::array();
        for (const auto& [rank, value] : powerlaw_reference(sim_alpha, 1, ranked.size()))
          ref.push_back(value);
        j["ref_value"] = ref;
        buffer << j.dump() << '\n';
      }
    } else if (surface->parsed()) {
      const auto partition = surf_src.load();
      const auto result = fit_mle(partition);
      if (!result.converged) {
        note("not converged: " + result.diagnosis);
        status = kExitNotConverged;
      } else {
        const auto s = loglik_surface(partition, result, surf_grid);
        const auto sym = symmetry_diagnostic(s);
        if (g.resolved(Format::kCsv) == Format::kCsv)
          write_surface_csv(buffer, s);
        else
          buffer << to_json(s, sym).dump() << '\n';
        note("asymmetry score: " + format_number(sym.asymmetry_score));
      }
    } else if (experiment->parsed()) {
      exp_spec.population =
          exp_population.empty()
              ? dutch_fixture()
              : integer_partition_from_json(parse_json_text(read_file(exp_population), exp_population));
      exp_spec.seed = g.seed;
      exp_spec.mh = exp_mh.config(g.seed);
      exp_spec.threads = exp_threads;
      const auto result = run_experiment(exp_spec);
      if (g.resolved(Format::kJson) == Format::kCsv)
        write_experiment_csv(buffer, result);
      else
        buffer << to_json(result).dump(2) << '\n';
      if (result.excluded_rows > 0)
        note(std::to_string(result.excluded_rows) +
             " replicate(s) with non-converged fits excluded from summaries");
    } else if (fixture->parsed()) {
      const auto f = dutch_fixture();
      if (g.resolved(Format::kJson) == Format::kCsv)
        write_partition_csv(buffer, f);
      else
        buffer << to_json(f).dump() << '\n';
      const auto info = dutch_fixture_info();
      note("n=" + std::to_string(info.n) + " (quoted: " + std::to_string(info.n_stated) +
           "), k=" + std::to_string(info.k) + ", J=" + std::to_string(info.classes));
    }
  } catch (const InfeasibleError& e) {
    err << "infeasible: " << e.what() << '\n';
    return kExitNotConverged;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  }

  if (g.out_path.empty()) {
    out << buffer.str();
  } else {
    std::ofstream file(g.out_path, std::ios::binary);
    if (!file) {
      err << "error: cannot write " << g.out_path << '\n';
      return kExitInputError;
    }
    file << buffer.str();
  }
  return status;
}

}  // namespace raretype::cli
