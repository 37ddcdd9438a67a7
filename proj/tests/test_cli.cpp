#include "doctest.h"
#include "helpers.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "physfac/cli/app.hpp"
#include "physfac/cli/config.hpp"
#include "physfac/cli/csv.hpp"
#include "physfac/cli/report.hpp"
#include "physfac/error.hpp"

using namespace physfac;
using namespace physfac::cli;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "physfac");
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

class Scratch {
 public:
  Scratch() {
    dir_ = fs::temp_directory_path() / ("physfac_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir_);
  }
  ~Scratch() { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(path(name)) << text;
    return path(name);
  }

 private:
  fs::path dir_;
};

}  // namespace

TEST_CASE("help and parse errors") {
  CHECK(invoke({"--help"}).code == kExitOk);
  CHECK(invoke({}).code == kExitIoError);
  CHECK(invoke({"metrics", "--bogus"}).code == kExitIoError);
  CHECK(invoke({"metrics", "a.csv", "b.csv", "--format", "xml"}).code == kExitIoError);
}

TEST_CASE("signal CSV parsing") {
  std::istringstream plain("1\n2\n3\n");
  CHECK(read_signal_csv(plain).values == std::vector<double>{1, 2, 3});

  std::istringstream timed("time,value\n0,1\n0.04,2\n0.08,3\n");
  const auto s = read_signal_csv(timed);
  CHECK(s.values == std::vector<double>{1, 2, 3});
  REQUIRE(s.inferred_fs.has_value());
  CHECK(*s.inferred_fs == doctest::Approx(25.0));

  std::istringstream bad("1\n2\nabc\n4\n");
  try {
    read_signal_csv(bad);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("config round trip and rejection") {
  const RunConfig defaults;
  std::istringstream dumped(defaults.dump());
  CHECK(RunConfig::parse(dumped) == defaults);

  std::istringstream custom("[attention]\nvariant = grbf\nrank = 4\n[rng]\nseed = 99\n");
  const auto cfg = RunConfig::parse(custom);
  CHECK(cfg.attention.variant == "grbf");
  CHECK(cfg.attention.rank == 4);
  CHECK(cfg.seed == 99);
  std::istringstream again(cfg.dump());
  CHECK(RunConfig::parse(again) == cfg);

  std::istringstream unknown_key("[attention]\nflavour = tsfm\n");
  CHECK_THROWS_AS(RunConfig::parse(unknown_key), ParseError);
  std::istringstream unknown_section("[training]\nepochs = 3\n");
  CHECK_THROWS_AS(RunConfig::parse(unknown_section), ParseError);
  CHECK_THROWS_AS(RunConfig::load("/nonexistent/physfac.ini"), IoError);

  const auto printed = invoke({"config", "--print-defaults"});
  CHECK(printed.code == kExitOk);
  CHECK(printed.out == defaults.dump());
}

TEST_CASE("metrics subcommand") {
  Scratch tmp;
  const auto synth = invoke({"synth", "--kind", "pulse", "--fs", "25", "--duration", "60", "--with-time",
                             "-o", tmp.path("gt.csv")});
  REQUIRE(synth.code == kExitOk);

  SUBCASE("identical files") {
    const auto r = invoke({"metrics", tmp.path("gt.csv"), tmp.path("gt.csv")});
    REQUIRE(r.code == kExitOk);
    const auto j = Json::parse(r.out);
    CHECK(j["metrics"]["MAE"]["avg"].get<double>() == 0.0);
    CHECK(j["metrics"]["MACC"]["avg"].get<double>() == doctest::Approx(1.0));
    CHECK(j["fs"].get<double>() == 25.0);
    CHECK(dump_report(Json::parse(r.out)) == r.out);
  }
  SUBCASE("table output") {
    const auto r = invoke({"metrics", tmp.path("gt.csv"), tmp.path("gt.csv"), "--format", "table"});
    CHECK(r.code == kExitOk);
    CHECK(r.out.find("MAE") != std::string::npos);
  }
  SUBCASE("malformed file") {
    const auto bad = tmp.write("bad.csv", "0.1\n0.2\nnot-a-number\n");
    const auto r = invoke({"metrics", bad, tmp.path("gt.csv"), "--fs", "25"});
    CHECK(r.code == kExitIoError);
    CHECK(r.err.find("line 3") != std::string::npos);
  }
  SUBCASE("missing file") {
    CHECK(invoke({"metrics", tmp.path("none.csv"), tmp.path("gt.csv")}).code == kExitIoError);
  }
  SUBCASE("too short") {
    invoke({"synth", "--fs", "25", "--duration", "5", "-o", tmp.path("short.csv")});
    const auto r = invoke({"metrics", tmp.path("short.csv"), tmp.path("short.csv"), "--fs", "25"});
    CHECK(r.code == kExitDomainError);
    CHECK(r.err.find("too short") != std::string::npos);
  }
  SUBCASE("fs must be known") {
    invoke({"synth", "--fs", "25", "--duration", "20", "-o", tmp.path("plain.csv")});
    CHECK(invoke({"metrics", tmp.path("plain.csv"), tmp.path("plain.csv")}).code == kExitIoError);
    CHECK(invoke({"metrics", tmp.path("plain.csv"), tmp.path("plain.csv"), "--fs", "25", "--bandpass"}).code ==
          kExitOk);
  }
}

TEST_CASE("factorize subcommand") {
  Scratch tmp;
  std::ostringstream m;
  write_matrix_csv(m, testutil::random_nonneg(16, 8, 3));
  const auto input = tmp.write("v.csv", m.str());

  const auto fsam = invoke({"factorize", "--input", input, "--variant", "fsam", "--rank", "2"});
  REQUIRE(fsam.code == kExitOk);
  const auto j = Json::parse(fsam.out);
  CHECK(j["rank"].get<int>() == 2);
  CHECK(j["error_trace"].size() == 4);

  CHECK(invoke({"factorize", "--input", input, "--variant", "grbf", "--low-rank", tmp.path("lr.csv")}).code ==
        kExitOk);
  CHECK(read_matrix_csv_file(tmp.path("lr.csv")).rows() == 16);
  CHECK(invoke({"factorize", "--input", input, "--variant", "tsfm"}).code == kExitDomainError);
  CHECK(invoke({"factorize", "--input", input, "--variant", "fsam", "--rank", "9"}).code == kExitDomainError);
  CHECK(invoke({"factorize", "--input", input, "--variant", "mhsa"}).code == kExitDomainError);
}

TEST_CASE("attend subcommand reports a selectivity gap") {
  const auto r = invoke({"attend", "--seed", "3"});
  REQUIRE(r.code == kExitOk);
  const auto j = Json::parse(r.out);
  CHECK(j["csim"]["excited"]["gap"].get<double>() > 0.2);
  const auto omitted = Json::parse(invoke({"attend", "--seed", "3", "--omit-attention"}).out);
  CHECK(omitted["csim"]["excited"]["gap"] == omitted["csim"]["input"]["gap"]);
}

TEST_CASE("every subcommand is reproducible under --seed") {
  const std::vector<std::vector<std::string>> cmds{
      {"synth", "--kind", "embedding", "--noise", "0.3"},
      {"synth", "--kind", "resp", "--rate", "15", "--noise", "0.1"},
      {"attend", "--variant", "fsam"},
      {"demo-forward", "--resolution", "9", "--frames", "60", "--with-target"},
  };
  for (const auto& c : cmds) {
    auto a = c, b = c;
    a.insert(a.begin(), {"--seed", "7"});
    b.insert(b.begin(), {"--seed", "7"});
    const auto ra = invoke(a), rb = invoke(b);
    CHECK(ra.code == kExitOk);
    CHECK(ra.out == rb.out);
  }
}

TEST_CASE("bench") {
  const auto r = invoke({"bench", "--repeats", "2", "--resolution", "9", "--frames", "60"});
  REQUIRE(r.code == kExitOk);
  const auto j = Json::parse(r.out);
  CHECK(j["samples_ms"].size() == 2);
  CHECK(j["parameter_count"].get<std::size_t>() > 0);
  CHECK(invoke({"bench", "--repeats", "0"}).code == kExitDomainError);

  RunConfig small, large;
  small.model.resolution = 9;
  CHECK(bench_forward(small, 3).median_ms < bench_forward(large, 3).median_ms);
  CHECK(invoke({"bench", "--resolution", "10"}).code == kExitDomainError);
}

TEST_CASE("config from the environment") {
  Scratch tmp;
  const auto ini = tmp.write("run.ini", "[rng]\nseed = 1234\n");
  ::setenv(kConfigEnvVar, ini.c_str(), 1);
  const auto r = invoke({"config"});
  ::unsetenv(kConfigEnvVar);
  CHECK(r.code == kExitOk);
  CHECK(r.out.find("seed = 1234") != std::string::npos);

  const auto bad = tmp.write("bad.ini", "[rng]\nsalt = 1\n");
  CHECK(invoke({"--config", bad, "config"}).code == kExitIoError);
}
