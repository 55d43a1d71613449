#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <sys/wait.h>

#include "setsize/io.hpp"

using namespace setsize;
namespace fs = std::filesystem;

namespace {

SetSizeDistribution ingest(const std::string& text, bool directed = true, bool dedupe = true,
                           std::optional<int> w = std::nullopt) {
  std::istringstream in(text);
  return io::ingest_degrees(in, {"", directed, dedupe}, w);
}

fs::path scratch() {
  const auto dir = fs::temp_directory_path() / ("setsize_io_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir;
}

const char* cli_path() {
  if (const char* env = std::getenv("SETSIZE_CLI")) return env;
#ifdef SETSIZE_CLI
  return SETSIZE_CLI;
#else
  return nullptr;
#endif
}

int run_cli(const std::string& args, const fs::path& stdout_file) {
  const char* cli = cli_path();
  if (!cli) return -1;
  const std::string cmd = std::string(cli) + " " + args + " > " + stdout_file.string() + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Json, DistributionRoundTrip) {
  const auto theta = zipf(1.7, 40);
  const auto back = io::distribution_from_json(io::parse_json(io::dump(io::to_json(theta)), "t"));
  EXPECT_EQ(back.theta(), theta.theta());
  ASSERT_TRUE(back.known_tail());
  EXPECT_EQ(tail_name(*back.known_tail()), tail_name(*theta.known_tail()));

  const auto geo = geometric(0.3, 12);
  const auto j = io::to_json(geo);
  EXPECT_EQ(io::distribution_from_json(io::parse_json(io::dump(j), "t")).theta(), geo.theta());
  EXPECT_EQ(io::dump(io::to_json(io::distribution_from_json(j))), io::dump(j));
}

TEST(Json, HistogramRoundTripAndDefaults) {
  const auto hist = simulate(geometric(0.5, 8), {0.37, FixedPopulation{900}, 3});
  const auto back = io::histogram_from_json(io::parse_json(io::dump(io::to_json(hist)), "h"));
  EXPECT_EQ(back.counts, hist.counts);
  EXPECT_EQ(back.p, hist.p);
  EXPECT_EQ(back.N, hist.N);
  EXPECT_EQ(back.m_drawn, hist.m_drawn);

  const auto minimal = io::histogram_from_json(io::parse_json(R"({"p": 0.5, "counts": [3, 4]})", "h"));
  EXPECT_EQ(minimal.W, 2);
  EXPECT_EQ(minimal.N, 7);
  EXPECT_EQ(minimal.m_drawn, 7);
}

TEST(Json, MalformedInputsAreDataErrors) {
  EXPECT_THROW(io::parse_json("{not json", "x"), DataError);
  EXPECT_THROW(io::histogram_from_json(io::parse_json(R"({"counts": [1]})", "h")), DataError);
  EXPECT_THROW(io::histogram_from_json(io::parse_json(R"({"p": 0.5, "counts": [1], "N": 3})", "h")), DataError);
  EXPECT_THROW(io::distribution_from_json(io::parse_json(R"({"W": 3, "theta": [0.5, 0.5]})", "d")), DataError);
  EXPECT_THROW(io::distribution_from_json(io::parse_json(R"({"theta": "abc"})", "d")), DataError);
}

TEST(Json, DivergedBoundsWrittenAsText) {
  const auto report = crlb_report(zipf(2.0, 2000), 0.1, 1000);
  const auto j = io::to_json(report);
  EXPECT_TRUE(j["theta_bounds"][0].is_string());
  EXPECT_EQ(j["theta_bounds"][0], "inf");
  EXPECT_TRUE(j["theta_bounds_log10"][0].is_number());
}

TEST(FormatDouble, ShortestRoundTrip) {
  EXPECT_EQ(io::format_double(0.1), "0.1");
  EXPECT_EQ(io::format_double(1.5625), "1.5625");
  EXPECT_EQ(io::format_double(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_EQ(io::format_double(std::nan("")), "nan");
  const double v = 1.0 / 3.0;
  EXPECT_EQ(std::stod(io::format_double(v)), v);
}

TEST(Ingest, DirectedInDegrees) {
  const auto theta = ingest("a b\nc b\na d\n");
  EXPECT_EQ(theta.theta(), (std::vector<double>{0.5, 0.5}));
}

TEST(Ingest, CommentsBlankLinesAndDuplicates) {
  const std::string text = "# header\n\na b\na b  # again\nc b\n";
  EXPECT_EQ(ingest(text).theta(), (std::vector<double>{0.0, 1.0}));
  const auto kept = ingest(text, true, false);
  EXPECT_EQ(kept.W(), 3);
  EXPECT_EQ(kept[3], 1.0);
}

TEST(Ingest, Undirected) {
  // Degrees a=2, b=2, c=1, d=1.
  const auto theta = ingest("a b\nb c\na d\n", false);
  EXPECT_EQ(theta.theta(), (std::vector<double>{0.5, 0.5}));
  // Reversed duplicate collapses when undirected.
  EXPECT_EQ(ingest("a b\nb a\n", false).theta(), std::vector<double>{1.0});
}

TEST(Ingest, Truncate) {
  const auto theta = ingest("a b\nc b\na d\n", true, true, 1);
  EXPECT_EQ(theta.theta(), std::vector<double>{1.0});
}

TEST(Ingest, JsonRoundTripIsBitIdentical) {
  const auto theta = ingest("a b\nc b\na d\ne d\nf d\n");
  const auto back = io::distribution_from_json(io::parse_json(io::dump(io::to_json(theta)), "t"));
  EXPECT_EQ(back.theta(), theta.theta());
  EXPECT_EQ(theta.W(), 3);
  EXPECT_EQ(theta[1], 0.0);
}

TEST(Ingest, Errors) {
  try {
    ingest("a b\nlonely\n");
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
  EXPECT_THROW(ingest("a b c\n"), DataError);
  EXPECT_THROW(ingest("# nothing\n\n"), DataError);
  EXPECT_THROW(io::ingest_degrees({"/nonexistent/edges.txt"}, std::nullopt), DataError);
}

TEST(Csv, Writers) {
  SweepSpec spec{geometric(0.5, 3), {0.5}, {100}};
  spec.replicates = 2;
  const auto r = run_sweep(spec);
  std::ostringstream rec, sum, grid;
  io::write_records_csv(rec, r);
  io::write_summary_csv(sum, r);
  io::write_grid_csv(grid, r.cells[0].grid);
  const std::string records = rec.str(), summary = sum.str();
  EXPECT_EQ(records.rfind("p,N,replicate,i,theta_i,theta_hat_i\n", 0), 0u);
  EXPECT_EQ(std::count(records.begin(), records.end(), '\n'), 1 + 2 * 3);
  EXPECT_EQ(std::count(summary.begin(), summary.end(), '\n'), 2);
  long long total = 0;
  std::istringstream lines(grid.str());
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "i,bin_lo,bin_hi,count");
  while (std::getline(lines, line)) total += std::stoll(line.substr(line.rfind(',') + 1));
  EXPECT_EQ(total, 6);
}

TEST(Cli, ExitCodesAndCrlbExample) {
  if (!cli_path()) GTEST_SKIP() << "CLI path unknown";
  const auto dir = scratch();
  const auto out = dir / "out.json";

  EXPECT_EQ(run_cli("crlb --bogus", out), 1);
  EXPECT_EQ(run_cli("", out), 1);
  EXPECT_EQ(run_cli("crlb --p 0.5 --n 1", out), 1);  // no distribution
  EXPECT_EQ(run_cli("estimate --hist /nonexistent.json", out), 2);

  io::write_file((dir / "bad.json").string(), R"({"p": 0.5, "counts": [1, 2], "N": 9})");
  EXPECT_EQ(run_cli("estimate --hist " + (dir / "bad.json").string(), out), 2);

  io::write_file((dir / "d.json").string(), R"({"W": 2, "theta": [0.5, 0.5]})");
  ASSERT_EQ(run_cli("crlb --dist " + (dir / "d.json").string() + " --p 0.5 --n 1", out), 0);
  const auto j = io::parse_json(io::read_file(out.string()), "out");
  EXPECT_NEAR(j["theta_bounds"][0].get<double>(), 1.5625, 1e-12);
  EXPECT_NEAR(j["theta_bounds"][1].get<double>(), 1.5625, 1e-12);
  EXPECT_NEAR(j["mean_theta_bound"].get<double>(), 1.5625, 1e-12);
  EXPECT_NEAR(j["mean_phi_bound"].get<double>(), 1.44, 1e-12);

  io::write_file((dir / "h.json").string(), R"({"p": 1.0, "counts": [60, 40]})");
  ASSERT_EQ(run_cli("estimate --hist " + (dir / "h.json").string(), out), 0);
  const auto e = io::parse_json(io::read_file(out.string()), "out");
  EXPECT_EQ(e["theta_hat"][0].get<double>(), 0.6);
  EXPECT_EQ(e["theta_hat"][1].get<double>(), 0.4);

  ASSERT_EQ(run_cli("classify --family zipf --beta 2.5 --w 1000 --p 0.25", out), 0);
  const auto c = io::parse_json(io::read_file(out.string()), "out");
  EXPECT_EQ(c["verdict"], "Unrecoverable");
  EXPECT_EQ(c["threshold_p"].get<double>(), 0.5);

  const auto sim = dir / "sim.json";
  ASSERT_EQ(run_cli("simulate --dist " + (dir / "d.json").string() + " --p 1 --n 100 --seed 7", sim), 0);
  ASSERT_EQ(run_cli("estimate --method em --hist " + sim.string(), out), 0);
  const auto h = io::histogram_from_json(io::parse_json(io::read_file(sim.string()), "sim"));
  const auto est = io::parse_json(io::read_file(out.string()), "out");
  for (int j = 0; j < h.W; ++j)
    EXPECT_EQ(est["theta_hat"][j].get<double>(), static_cast<double>(h.counts[j]) / static_cast<double>(h.N));
  fs::remove_all(dir);
}
