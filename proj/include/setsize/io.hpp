#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include <json.hpp>

#include "setsize/estimators.hpp"
#include "setsize/experiments.hpp"
#include "setsize/fisher.hpp"
#include "setsize/sampling.hpp"

namespace setsize::io {

using Json = nlohmann::ordered_json;

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& text);
/// Parses text as JSON; syntax errors become DataError.
Json parse_json(const std::string& text, const std::string& what);

Json to_json(const SetSizeDistribution& theta);
SetSizeDistribution distribution_from_json(const Json& j);

Json to_json(const ObservedHistogram& hist);
ObservedHistogram histogram_from_json(const Json& j);

Json to_json(const EstimateResult& est);
Json to_json(const RegimeVerdict& verdict);
Json to_json(const CrlbReport& report);

/// Dumps with two-space indent and a trailing newline.
std::string dump(const Json& j);

struct EdgeListSource {
  std::string path;
  bool directed = true;
  bool dedupe = true;
};

/// In-degree histogram of an edge list as a set-size distribution. Nodes with
/// no incoming edge are dropped: every set has at least one element.
SetSizeDistribution ingest_degrees(std::istream& in, const EdgeListSource& src, std::optional<int> truncate_w);
SetSizeDistribution ingest_degrees(const EdgeListSource& src, std::optional<int> truncate_w);

void write_records_csv(std::ostream& out, const ExperimentResult& result);
void write_summary_csv(std::ostream& out, const ExperimentResult& result);
void write_grid_csv(std::ostream& out, const DensityGrid& grid);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

}  // namespace setsize::io
