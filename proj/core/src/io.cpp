#include "raretype/io.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "raretype/error.hpp"

namespace raretype {
namespace {

Json number(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

Json optional_number(const std::optional<double>& x) {
  return x ? number(*x) : Json(nullptr);
}

Json matrix(const Matrix2& m) {
  return Json::array({Json::array({number(m[0][0]), number(m[0][1])}),
                      Json::array({number(m[1][0]), number(m[1][1])})});
}

template <typename T>
std::vector<T> read_array(const Json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_array())
    throw ParseError(ParseErrorKind::kFormat, std::string("JSON: missing array '") + key + "'");
  try {
    return j.at(key).get<std::vector<T>>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(ParseErrorKind::kFormat, std::string("JSON: bad '") + key + "': " + e.what());
  }
}

}  // namespace

Json to_json(const IntegerPartition& partition) {
  return Json{{"a", partition.a()}, {"r", partition.r()}};
}

Json to_json(const SetPartition& partition) {
  return Json{{"n", partition.n()}, {"blocks", partition.blocks()}};
}

Json to_json(const PopulationVector& population) {
  return Json{{"probs", population.probs()}, {"pop_size", population.pop_size()}};
}

Json to_json(const MleFit& fit) {
  Json j{{"alpha_hat", number(fit.alpha_hat)},
         {"theta_hat", number(fit.theta_hat)},
         {"phi_hat", number(fit.phi_hat)},
         {"phi_n", fit.phi_n},
         {"loglik", number(fit.loglik_at_max)},
         {"hessian", matrix(fit.hessian)},
         {"hessian_coordinates", "phi,theta"},
         {"information", "observed information (central differences) in place of Fisher"},
         {"converged", fit.converged},
         {"iterations", fit.iterations},
         {"gradient_norm", number(fit.gradient_norm)},
         {"at_boundary", fit.at_boundary}};
  if (!fit.diagnosis.empty()) j["diagnosis"] = fit.diagnosis;
  if (!fit.warnings.empty()) j["warnings"] = fit.warnings;
  return j;
}

Json to_json(const MhResult& result) {
  return Json{{"lr", number(result.lr)},
              {"lr_stderr", number(result.lr_stderr)},
              {"log10_lr", number(result.log10_lr)},
              {"log10_lr_stderr", number(result.log10_lr_stderr)},
              {"mean_singleton_mass", number(result.mean_singleton_mass)},
              {"singleton_mass_stderr", number(result.singleton_mass_stderr)},
              {"retained", result.retained},
              {"acceptance_rate", number(result.acceptance_rate)}};
}

Json to_json(const LrReport& report) {
  Json j{{"database_size", report.database_size},
         {"log10_lr_eb", optional_number(report.log10_lr_eb)},
         {"lr_eb", report.log10_lr_eb ? number(std::pow(10.0, *report.log10_lr_eb)) : Json(nullptr)},
         {"log10_lr_true", optional_number(report.log10_lr_true)},
         {"log10_lr_true_stderr", optional_number(report.log10_lr_true_stderr)},
         {"log10_lr_freq", optional_number(report.log10_lr_freq)},
         {"diff1", optional_number(report.diff1)},
         {"diff2", optional_number(report.diff2)}};
  if (report.fit) j["fit"] = to_json(*report.fit);
  if (!report.diagnosis.empty()) j["diagnosis"] = report.diagnosis;
  if (!report.flags.empty()) j["flags"] = report.flags;
  return j;
}

Json to_json(const ColumnSummary& s) {
  return Json{{"min", number(s.min)},       {"q1", number(s.q1)}, {"median", number(s.median)},
              {"mean", number(s.mean)},     {"q3", number(s.q3)}, {"max", number(s.max)},
              {"sd", number(s.sd)},         {"count", s.count}};
}

Json to_json(const ExperimentResult& result) {
  Json rows = Json::array();
  for (const auto& r : result.rows)
    rows.push_back(Json{{"replicate", r.replicate},
                        {"seed", r.seed},
                        {"suspect_rank", r.suspect_rank},
                        {"alpha_hat", number(r.alpha_hat)},
                        {"theta_hat", number(r.theta_hat)},
                        {"converged", r.converged},
                        {"log10_lr", number(r.log10_lr)},
                        {"log10_lr_true", number(r.log10_lr_true)},
                        {"log10_lr_true_stderr", number(r.log10_lr_true_stderr)},
                        {"log10_lr_freq", number(r.log10_lr_freq)},
                        {"diff1", number(r.diff1)},
                        {"diff2", number(r.diff2)}});
  Json summary = Json::object();
  for (const auto& column : kExperimentColumns)
    if (auto it = result.summary.find(column); it != result.summary.end())
      summary[column] = to_json(it->second);
  return Json{{"rows", rows}, {"summary", summary}, {"excluded_rows", result.excluded_rows}};
}

Json to_json(const LoglikSurface& surface, const SymmetryReport& symmetry) {
  Json points = Json::array();
  for (const auto& p : surface.points)
    points.push_back(Json{{"phi", p.phi},
                          {"theta", p.theta},
                          {"rel_loglik", number(p.rel_loglik)},
                          {"gauss_overlay", number(p.gauss_overlay)},
                          {"valid", p.valid}});
  return Json{{"mode", {{"phi", surface.mode_phi}, {"theta", surface.mode_theta}}},
              {"phi_n", surface.phi_n},
              {"covariance", matrix(surface.covariance)},
              {"points_per_axis", surface.points_per_axis},
              {"asymmetry_score", number(symmetry.asymmetry_score)},
              {"pairs_compared", symmetry.pairs_compared},
              {"points", points}};
}

IntegerPartition integer_partition_from_json(const Json& j) {
  if (!j.is_object()) throw ParseError(ParseErrorKind::kFormat, "JSON: partition must be an object");
  return IntegerPartition(read_array<std::uint64_t>(j, "a"), read_array<std::uint64_t>(j, "r"));
}

SetPartition set_partition_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("n"))
    throw ParseError(ParseErrorKind::kFormat, "JSON: set partition needs 'n' and 'blocks'");
  return SetPartition(j.at("n").get<std::size_t>(),
                      read_array<std::vector<std::size_t>>(j, "blocks"));
}

PopulationVector population_from_json(const Json& j) {
  if (j.is_object() && j.contains("probs")) {
    if (!j.contains("pop_size"))
      throw ParseError(ParseErrorKind::kFormat, "JSON: population needs 'pop_size'");
    return PopulationVector(read_array<double>(j, "probs"), j.at("pop_size").get<std::uint64_t>());
  }
  return population_from_partition(integer_partition_from_json(j));
}

Json parse_json_text(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(ParseErrorKind::kFormat, source + ": " + e.what());
  }
}

std::string format_number(double x) {
  if (!std::isfinite(x)) return "nan";
  char buf[64];
  const double ax = std::abs(x);
  if (x == 0.0 || (ax >= 1e-3 && ax < 1e6))
    std::snprintf(buf, sizeof buf, "%.4f", x);
  else
    std::snprintf(buf, sizeof buf, "%.4e", x);
  return buf;
}

void write_ranked_csv(std::ostream& out, const std::vector<double>& rel_freq) {
  out << "rank,rel_freq\n";
  for (std::size_t i = 0; i < rel_freq.size(); ++i)
    out << (i + 1) << ',' << format_number(rel_freq[i]) << '\n';
}

void write_powerlaw_csv(std::ostream& out,
                        const std::vector<std::pair<std::size_t, double>>& ref) {
  out << "rank,ref_value\n";
  for (const auto& [rank, value] : ref) out << rank << ',' << format_number(value) << '\n';
}

void write_ranked_with_reference_csv(std::ostream& out, const std::vector<double>& rel_freq,
                                     double alpha) {
  out << "rank,rel_freq,ref_value\n";
  if (rel_freq.empty()) return;
  const auto ref = powerlaw_reference(alpha, 1, rel_freq.size());
  for (std::size_t i = 0; i < rel_freq.size(); ++i)
    out << (i + 1) << ',' << format_number(rel_freq[i]) << ',' << format_number(ref[i].second)
        << '\n';
}

void write_surface_csv(std::ostream& out, const LoglikSurface& surface) {
  out << "phi,theta,rel_loglik,gauss_overlay,valid\n";
  char phi[64];
  for (const auto& p : surface.points) {
    // phi spans a narrow band; keep more digits than the default.
    std::snprintf(phi, sizeof phi, "%.8f", p.phi);
    out << phi << ',' << format_number(p.theta) << ',' << format_number(p.rel_loglik) << ','
        << format_number(p.gauss_overlay) << ',' << (p.valid ? 1 : 0) << '\n';
  }
}

void write_experiment_csv(std::ostream& out, const ExperimentResult& result) {
  out << "replicate,seed,suspect_rank,alpha_hat,theta_hat,converged,log10_lr,log10_lr_true,"
         "log10_lr_true_stderr,log10_lr_freq,diff1,diff2\n";
  for (const auto& r : result.rows)
    out << r.replicate << ',' << r.seed << ',' << r.suspect_rank << ',' << format_number(r.alpha_hat)
        << ',' << format_number(r.theta_hat) << ',' << (r.converged ? 1 : 0) << ','
        << format_number(r.log10_lr) << ',' << format_number(r.log10_lr_true) << ','
        << format_number(r.log10_lr_true_stderr) << ',' << format_number(r.log10_lr_freq) << ','
        << format_number(r.diff1) << ',' << format_number(r.diff2) << '\n';
}

void write_trace_csv(std::ostream& out, const MhResult& result) {
  out << "iteration,singleton_mass\n";
  for (const auto& t : result.trace)
    out << t.iteration << ',' << format_number(t.singleton_mass) << '\n';
}

void write_partition_csv(std::ostream& out, const IntegerPartition& partition) {
  out << "a,r\n";
  for (std::size_t j = 0; j < partition.num_classes(); ++j)
    out << partition.a()[j] << ',' << partition.r()[j] << '\n';
}

}  // namespace raretype
