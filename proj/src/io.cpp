#include "setsize/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>
#include <utility>

namespace setsize::io {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << text;
  if (!out) throw DataError("write failed: " + path);
}

Json parse_json(const std::string& text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw DataError(what + ": " + e.what());
  }
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

// JSON has no infinity; diverged values are written as strings.
Json number_or_text(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

Json bound_json(const BoundValue& b) { return number_or_text(b.value); }

template <class T>
T field(const Json& j, const char* key, const std::string& what) {
  if (!j.contains(key)) throw DataError(what + ": missing \"" + key + "\"");
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw DataError(what + ": bad \"" + key + "\": " + e.what());
  }
}

Json tail_json(const TailClass& tail) {
  Json t;
  t["class"] = tail_name(tail);
  if (const auto* e = std::get_if<Exponential>(&tail)) t["rate"] = e->rate;
  return t;
}

TailClass tail_from_json(const Json& t) {
  const auto name = field<std::string>(t, "class", "tail");
  if (name == "FasterThanExponential") return FasterThanExponential{};
  if (name == "SlowerThanExponential") return SlowerThanExponential{};
  if (name == "Exponential") return Exponential{field<double>(t, "rate", "tail")};
  throw DataError("tail: unknown class \"" + name + "\"");
}

}  // namespace

Json to_json(const SetSizeDistribution& theta) {
  Json j;
  j["W"] = theta.W();
  j["theta"] = theta.theta();
  if (theta.known_tail()) j["tail"] = tail_json(*theta.known_tail());
  return j;
}

SetSizeDistribution distribution_from_json(const Json& j) {
  auto theta = field<std::vector<double>>(j, "theta", "distribution");
  if (j.contains("W") && field<int>(j, "W", "distribution") != static_cast<int>(theta.size()))
    throw DataError("distribution: W does not match the length of theta");
  std::optional<TailClass> tail;
  if (j.contains("tail") && !j["tail"].is_null()) tail = tail_from_json(j["tail"]);
  return SetSizeDistribution(std::move(theta), tail);
}

Json to_json(const ObservedHistogram& hist) {
  Json j;
  j["W"] = hist.W;
  j["p"] = hist.p;
  j["N"] = hist.N;
  j["m_drawn"] = hist.m_drawn;
  j["counts"] = hist.counts;
  return j;
}

ObservedHistogram histogram_from_json(const Json& j) {
  ObservedHistogram hist;
  hist.counts = field<std::vector<long long>>(j, "counts", "histogram");
  hist.W = j.contains("W") ? field<int>(j, "W", "histogram") : static_cast<int>(hist.counts.size());
  hist.p = field<double>(j, "p", "histogram");
  long long total = 0;
  for (long long c : hist.counts) total += c;
  hist.N = j.contains("N") ? field<long long>(j, "N", "histogram") : total;
  hist.m_drawn = j.contains("m_drawn") ? field<long long>(j, "m_drawn", "histogram") : hist.N;
  hist.validate();
  return hist;
}

Json to_json(const EstimateResult& est) {
  Json j;
  j["theta_hat"] = est.theta_hat;
  j["phi_hat"] = est.phi_hat;
  j["log_likelihood"] = number_or_text(est.log_likelihood);
  j["iters"] = est.iters;
  j["converged"] = est.converged;
  j["floored"] = est.floored;
  if (est.phi_raw) j["phi_raw"] = *est.phi_raw;
  if (est.theta_raw) j["theta_raw"] = *est.theta_raw;
  return j;
}

Json to_json(const RegimeVerdict& verdict) {
  Json j;
  j["verdict"] = verdict_name(verdict.verdict);
  j["threshold_p"] = verdict.threshold_p;
  j["rationale"] = verdict.rationale;
  return j;
}

Json to_json(const CrlbReport& report) {
  Json j;
  j["W"] = report.W;
  j["p"] = report.p;
  j["N"] = report.n_observed;
  Json bounds = Json::array(), logs = Json::array();
  for (const auto& b : report.theta_bounds) {
    bounds.push_back(bound_json(b));
    logs.push_back(number_or_text(b.log10));
  }
  j["theta_bounds"] = std::move(bounds);
  j["theta_bounds_log10"] = std::move(logs);
  j["mean_theta_bound"] = bound_json(report.mean_theta_bound);
  j["mean_theta_bound_log10"] = number_or_text(report.mean_theta_bound.log10);
  j["mean_phi_bound"] = number_or_text(report.mean_phi_bound);
  j["divergence_sum"] = bound_json(report.divergence_sum);
  j["divergence_sum_log10"] = number_or_text(report.divergence_sum.log10);
  j["tail"] = report.tail;
  j["tail_heuristic"] = report.tail_heuristic;
  if (!report.tail_note.empty()) j["tail_note"] = report.tail_note;
  j["regime"] = report.regime ? to_json(*report.regime) : Json(nullptr);
  return j;
}

SetSizeDistribution ingest_degrees(std::istream& in, const EdgeListSource& src, std::optional<int> truncate_w) {
  std::unordered_map<std::string, int> ids;
  auto id_of = [&](const std::string& token) {
    auto [it, inserted] = ids.try_emplace(token, static_cast<int>(ids.size()));
    return it->second;
  };

  std::set<std::pair<int, int>> seen;
  std::vector<long long> in_degree;
  long long edges = 0;
  std::string line;
  for (long long line_no = 1; std::getline(in, line); ++line_no) {
    std::istringstream fields(line);
    std::string a, b, extra;
    if (!(fields >> a) || a[0] == '#') continue;
    if (!(fields >> b) || (fields >> extra && extra[0] != '#'))
      throw DataError("edge list line " + std::to_string(line_no) + ": expected \"src dst\"");
    int u = id_of(a), v = id_of(b);
    if (!src.directed && v < u) std::swap(u, v);
    if (src.dedupe && !seen.emplace(u, v).second) continue;
    in_degree.resize(ids.size(), 0);
    ++in_degree[static_cast<std::size_t>(v)];
    if (!src.directed && u != v) ++in_degree[static_cast<std::size_t>(u)];
    ++edges;
  }
  if (edges == 0) throw DataError("edge list has zero edges");

  std::map<long long, double> sizes;
  for (long long d : in_degree)
    if (d > 0) sizes[d] += 1.0;
  const int W = truncate_w ? *truncate_w : static_cast<int>(sizes.rbegin()->first);
  return truncate_at(sizes, W);
}

SetSizeDistribution ingest_degrees(const EdgeListSource& src, std::optional<int> truncate_w) {
  std::ifstream in(src.path);
  if (!in) throw DataError("cannot open " + src.path);
  return ingest_degrees(in, src, truncate_w);
}

void write_records_csv(std::ostream& out, const ExperimentResult& result) {
  out << "p,N,replicate,i,theta_i,theta_hat_i\n";
  for (const auto& r : result.records) {
    out << format_double(r.p) << ',' << r.N << ',' << r.replicate << ',' << r.i << ',' << format_double(r.theta_i) << ','
        << format_double(r.theta_hat_i) << '\n';
  }
}

void write_summary_csv(std::ostream& out, const ExperimentResult& result) {
  out << "p,N,nrmse_head,nrmse_tail\n";
  for (const auto& c : result.cells) {
    out << format_double(c.p) << ',' << c.N << ',' << format_double(c.nrmse_head) << ',' << format_double(c.nrmse_tail)
        << '\n';
  }
}

void write_grid_csv(std::ostream& out, const DensityGrid& grid) {
  out << "i,bin_lo,bin_hi,count\n";
  for (const auto& [i, row] : grid.counts) {
    for (int bin = 0; bin < static_cast<int>(row.size()); ++bin) {
      if (row[static_cast<std::size_t>(bin)] == 0) continue;
      out << i << ',' << format_double(DensityGrid::lower_edge(bin)) << ',' << format_double(DensityGrid::upper_edge(bin))
          << ',' << row[static_cast<std::size_t>(bin)] << '\n';
    }
  }
}

}  // namespace setsize::io
