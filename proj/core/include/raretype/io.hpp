#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "raretype/inference.hpp"
#include "raretype/likelihood_ratio.hpp"
#include "raretype/partition.hpp"
#include "raretype/pitman.hpp"
#include "raretype/workbench.hpp"

namespace raretype {

using Json = nlohmann::ordered_json;

// JSON. Non-finite numbers are written as null.
Json to_json(const IntegerPartition& partition);  // {"a":[...],"r":[...]}
Json to_json(const SetPartition& partition);      // {"n":N,"blocks":[[...],...]}
Json to_json(const PopulationVector& population); // {"probs":[...],"pop_size":N}
Json to_json(const MleFit& fit);
Json to_json(const MhResult& result);
Json to_json(const LrReport& report);
Json to_json(const ColumnSummary& summary);
Json to_json(const ExperimentResult& result);
Json to_json(const LoglikSurface& surface, const SymmetryReport& symmetry);

/// Throws ParseError(kFormat) on malformed input; DomainError on invalid values.
IntegerPartition integer_partition_from_json(const Json& j);
SetPartition set_partition_from_json(const Json& j);

/// Accepts either {"probs":[...],"pop_size":N} or an (a, r) partition read as
/// a finite population.
PopulationVector population_from_json(const Json& j);

Json parse_json_text(const std::string& text, const std::string& source = "<input>");

// CSV. Numbers use format_number.
/// Fixed with 4 decimals when 1e-3 <= |x| < 1e6 (or x == 0), otherwise
/// scientific with 4 decimals; "nan" for non-finite values.
std::string format_number(double x);

void write_ranked_csv(std::ostream& out, const std::vector<double>& rel_freq);
void write_powerlaw_csv(std::ostream& out, const std::vector<std::pair<std::size_t, double>>& ref);
/// rank, rel_freq, ref_value; ref_value aligned by rank.
void write_ranked_with_reference_csv(std::ostream& out, const std::vector<double>& rel_freq,
                                     double alpha);
void write_surface_csv(std::ostream& out, const LoglikSurface& surface);
void write_experiment_csv(std::ostream& out, const ExperimentResult& result);
void write_trace_csv(std::ostream& out, const MhResult& result);
void write_partition_csv(std::ostream& out, const IntegerPartition& partition);

}  // namespace raretype
