#include <gtest/gtest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "fseb/cli/commands.hpp"
#include "fseb/io/csv.hpp"

namespace fs = std::filesystem;

namespace {

const std::string cli = FSEB_CLI_PATH;
const std::string src = FSEB_SOURCE_DIR;

struct Outcome {
  int code;
  std::string err;
};

fs::path scratch() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("fseb_cli_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome run(const std::string& args, const std::string& env = "") {
  const fs::path err = scratch() / "stderr.txt";
  const std::string cmd = env + " " + cli + " " + args + " > /dev/null 2> " + err.string();
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(err)};
}

std::string data(const std::string& name) { return src + "/data/" + name; }
std::string config(const std::string& name) { return src + "/configs/" + name; }
std::string out(const std::string& name) { return (scratch() / name).string(); }

} // namespace

TEST(CliExitCodes, Success) {
  EXPECT_EQ(run("ci --model pg --input " + data("pg_synthetic.csv") + " --output " +
                out("ci.csv")).code, 0);
  EXPECT_EQ(run("adjust --adjust bh --input " + data("pvalues.csv")).code, 0);
  EXPECT_EQ(run("--version").code, 0);
}

TEST(CliExitCodes, UsageAndSchemaErrorsAreTwo) {
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("frobnicate").code, 2);
  EXPECT_EQ(run("ci --input " + data("pg_synthetic.csv")).code, 2);   // --model missing
  EXPECT_EQ(run("ci --model xx --input " + data("pg_synthetic.csv")).code, 2);
  EXPECT_EQ(run("ci --model pg --alpha 1.5 --input " + data("pg_synthetic.csv")).code, 2);
  EXPECT_EQ(run("ci --model pg --adjust bh --input " + data("pg_synthetic.csv")).code, 2);
  EXPECT_EQ(run("ci --model pg --input /nonexistent.csv").code, 2);

  const Outcome schema = run("ci --model pg --input " + data("pg_bad_schema.csv"));
  EXPECT_EQ(schema.code, 2);
  EXPECT_NE(schema.err.find("index,x,w"), std::string::npos) << schema.err;

  const Outcome alpha = run("simulate --input " + config("bad_alpha.toml"));
  EXPECT_EQ(alpha.code, 2);
  EXPECT_NE(alpha.err.find("alpha"), std::string::npos) << alpha.err;
  EXPECT_NE(alpha.err.find("bad_alpha.toml:7"), std::string::npos) << alpha.err;

  EXPECT_EQ(run("validate --model pg --scenario nope").code, 2);
  EXPECT_EQ(run("validate --model pg --scenario table2-small --reps 10").code, 2);
}

TEST(CliExitCodes, DataErrorsAreThree) {
  const Outcome bad_m = run("test --input " + data("paired_bad_m.csv"));
  EXPECT_EQ(bad_m.code, 3);
  EXPECT_NE(bad_m.err.find("paired_bad_m.csv:3"), std::string::npos) << bad_m.err;

  const fs::path neg = scratch() / "neg.csv";
  std::ofstream(neg) << "index,x,w\n1,3,1.0\n2,-1,2.0\n3,4,1.5\n";
  EXPECT_EQ(run("ci --model pg --input " + neg.string()).code, 3);

  const fs::path tiny = scratch() / "tiny.csv";
  std::ofstream(tiny) << "index,x\n1,0.3\n2,1.2\n";
  EXPECT_EQ(run("ci --model nn --input " + tiny.string()).code, 3);
}

TEST(CliExitCodes, NumericalFailuresAreFour) {
  using fseb::cli::exit_code_for;
  EXPECT_EQ(exit_code_for(fseb::FitError("x")), 4);
  EXPECT_EQ(exit_code_for(fseb::cli::GuaranteeError("x")), 4);
  EXPECT_EQ(exit_code_for(fseb::BracketError("x", 0.0, 1.0)), 4);
  EXPECT_EQ(exit_code_for(fseb::io::DataError("x")), 3);
  EXPECT_EQ(exit_code_for(fseb::io::SchemaError("x")), 2);
}

TEST(Cli, SimulateIsByteIdenticalAcrossWorkerCounts) {
  const std::string a = out("sim_a.csv"), b = out("sim_b.csv");
  EXPECT_EQ(run("simulate --input " + config("single_rep.toml") + " --reps 20 --output " + a,
                "FSEB_THREADS=1").code, 0);
  EXPECT_EQ(run("simulate --input " + config("single_rep.toml") + " --reps 20 --output " + b,
                "FSEB_THREADS=4").code, 0);
  EXPECT_EQ(slurp(a), slurp(b));
  EXPECT_FALSE(slurp(a).empty());

  const auto meta = nlohmann::json::parse(slurp(a + ".json"));
  EXPECT_EQ(meta["command"], "simulate");
  EXPECT_EQ(meta["scenarios"][0]["seed"], 7);
  EXPECT_TRUE(meta.contains("wall_seconds"));
}

TEST(Cli, SimulateLogsSeedAndHonoursOverride) {
  const Outcome r = run("simulate --input " + config("single_rep.toml") + " --seed 99 --output " +
                    out("seeded.csv"));
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.err.find("seed=99"), std::string::npos) << r.err;
  const auto t = [&] {
    std::ifstream in(out("seeded.csv"));
    return fseb::io::read_csv(in);
  }();
  for (const auto& row : t.rows) {
    EXPECT_EQ(row.back(), "99");
    EXPECT_EQ(row[12], "1");
  }
}

TEST(Cli, CiOutputRoundTripsAndFlagsEveryRow) {
  const std::string path = out("ci_fcr.csv");
  ASSERT_EQ(run("ci --model pg --adjust fcr:1.5 --alpha 0.05 --input " +
                data("pg_synthetic.csv") + " --output " + path).code, 0);
  const std::string once = slurp(path);
  std::istringstream in(once);
  const auto t = fseb::io::read_csv(in);
  EXPECT_EQ(t.rows.size(), 72u);
  EXPECT_EQ(t.header.back(), "selected");
  std::ostringstream again;
  fseb::io::write_csv(again, t);
  EXPECT_EQ(again.str(), once);

  // three toy rows in, three rows out, twice the same
  const fs::path toy = scratch() / "toy.csv";
  std::ofstream(toy) << "index,x\n1,0.5\n2,-1.5\n3,2.25\n";
  ASSERT_EQ(run("ci --model nn --input " + toy.string() + " --output " + out("toy1.csv")).code, 0);
  ASSERT_EQ(run("ci --model nn --input " + toy.string() + " --output " + out("toy2.csv")).code, 0);
  EXPECT_EQ(slurp(out("toy1.csv")), slurp(out("toy2.csv")));
  std::istringstream tin(slurp(out("toy1.csv")));
  EXPECT_EQ(fseb::io::read_csv(tin).rows.size(), 3u);
}

TEST(Cli, ZeroCountIntervalsShrinkWithExposure) {
  const std::string path = out("ci_plain.csv");
  ASSERT_EQ(run("ci --model pg --input " + data("pg_synthetic.csv") + " --output " + path).code, 0);
  std::istringstream in(slurp(path));
  const auto t = fseb::io::read_csv(in);
  std::vector<std::pair<double, double>> zero;   // (w, width)
  for (std::size_t i = 0; i < t.rows.size(); ++i)
    if (t.rows[i][1] == "0") {
      EXPECT_EQ(t.rows[i][5], "0.000000");
      zero.emplace_back(fseb::io::parse_double(t, i, 2),
                        fseb::io::parse_double(t, i, 6) - fseb::io::parse_double(t, i, 5));
    }
  ASSERT_GE(zero.size(), 2u);
  std::sort(zero.begin(), zero.end());
  for (std::size_t k = 1; k < zero.size(); ++k)
    EXPECT_GT(zero[k - 1].second, zero[k].second);
}

TEST(Cli, TestCommandOnNullAndShiftedData) {
  const std::string ident = out("ident.csv");
  ASSERT_EQ(run("test --alpha 0.0005 --input " + data("paired_identical.csv") + " --output " +
                ident).code, 0);
  std::istringstream in(slurp(ident));
  const auto t = fseb::io::read_csv(in);
  const auto call = t.column("call_0.0005");
  ASSERT_TRUE(call.has_value());
  for (const auto& r : t.rows)
    EXPECT_EQ(r[*call], "0");

  const std::string shifted = out("shifted.csv");
  ASSERT_EQ(run("test --comparators --alpha 0.05 --window 10 --input " +
                data("paired_synthetic.csv") + " --output " + shifted).code, 0);
  std::istringstream sin(slurp(shifted));
  const auto s = fseb::io::read_csv(sin);
  EXPECT_TRUE(s.column("fisher_bh").has_value());
  EXPECT_TRUE(s.column("ma_0.05").has_value());
  std::istringstream cin(slurp(shifted + ".concordance.csv"));
  const auto c = fseb::io::read_csv(cin);
  ASSERT_EQ(c.rows.size(), 3u);
  for (std::size_t i = 0; i < c.rows.size(); ++i) {
    const double total = fseb::io::parse_double(c, i, 3) + fseb::io::parse_double(c, i, 4) +
                         fseb::io::parse_double(c, i, 5) + fseb::io::parse_double(c, i, 6);
    EXPECT_DOUBLE_EQ(total, 300.0);
  }

  // coverage filter drops sites
  ASSERT_EQ(run("test --min-m 20 --input " + data("paired_synthetic.csv") + " --output " +
                out("filtered.csv")).code, 0);
  std::istringstream fin(slurp(out("filtered.csv")));
  EXPECT_LT(fseb::io::read_csv(fin).rows.size(), 300u);
}

TEST(Cli, ValidateReportsAndRepeats) {
  const std::string a = out("val_a.csv"), b = out("val_b.csv");
  EXPECT_EQ(run("validate --model pg --scenario point-mass --reps 100 --output " + a).code, 0);
  EXPECT_EQ(run("validate --model pg --scenario point-mass --reps 100 --output " + b).code, 0);
  EXPECT_EQ(slurp(a), slurp(b));
  std::istringstream in(slurp(a));
  const auto t = fseb::io::read_csv(in);
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(t.rows[0][4], "1.000000");
  EXPECT_EQ(t.rows[0][5], "0.000000");
}

TEST(CliTrailingMean, WindowConvention) {
  const auto m = fseb::cli::detail::trailing_mean({1, 0, 1, 1, 0}, 2);
  EXPECT_EQ(m, (std::vector<double>{1.0, 0.5, 0.5, 1.0, 0.5}));
}
