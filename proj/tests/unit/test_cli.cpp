#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <locale>
#include <numbers>
#include <random>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "cli.hpp"
#include "esn2/esn_model.hpp"
#include "esn2/expected_info.hpp"
#include "esn2/likelihood.hpp"
#include "esn2/validation.hpp"
#include "../support/random_dp.hpp"

using namespace esn2;
namespace testing = esn2::testing;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "esn2");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path temp_file(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "esn2_cli_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

std::string write_file(const std::string& name, const std::string& text) {
  const auto path = temp_file(name);
  std::ofstream(path) << text;
  return path.string();
}

std::string write_dataset(const std::string& name, const Dataset& d) {
  std::ostringstream os;
  os << "y1,y2\n";
  for (std::size_t i = 0; i < d.size(); ++i) {
    os << cli::format_number(d.y1()[i]) << ',' << cli::format_number(d.y2()[i]) << '\n';
  }
  return write_file(name, os.str());
}

std::vector<std::vector<double>> parse_csv(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) {
      const auto v = cli::parse_number(cell);
      REQUIRE(v);
      row.push_back(*v);
    }
    rows.push_back(row);
  }
  return rows;
}

struct CommaDecimal : std::numpunct<char> {
  char do_decimal_point() const override { return ','; }
  char do_thousands_sep() const override { return '.'; }
  std::string do_grouping() const override { return "\3"; }
};

const std::string kReferenceDp = "0,0,1,0.6,1,2,3,1";

}  // namespace

TEST_CASE("numbers round-trip through 17 significant digits") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int i = 0; i < 2000; ++i) {
    const double v = std::ldexp(u(rng), static_cast<int>(rng() % 200) - 100);
    const auto back = cli::parse_number(cli::format_number(v));
    REQUIRE(back);
    CHECK(*back == v);
  }
  CHECK(cli::format_number(-0.5) == "-0.5");
  CHECK(cli::parse_number(" +1.5 ") == 1.5);
  CHECK_FALSE(cli::parse_number("1.5x"));
  CHECK_FALSE(cli::parse_number(""));
  CHECK_FALSE(cli::parse_number("1,5"));
}

TEST_CASE("output ignores the global locale") {
  const std::locale old = std::locale::global(std::locale(std::locale::classic(), new CommaDecimal));
  const Run r = run_cli({"eval", "moments", "--dp", kReferenceDp, "--format", "csv"});
  std::locale::global(old);
  CHECK(r.code == 0);
  const auto rows = parse_csv(r.out);
  REQUIRE(rows.size() == 3);
  const Moments2 m = moments_esn2(testing::reference_dp());
  CHECK(rows[0][0] == m.mean(0));
  CHECK(rows[2][1] == m.covariance(1, 1));
}

TEST_CASE("table reader") {
  std::istringstream with_header("y1,y2\n1,2\n\n3,4\n");
  const Dataset a = cli::read_table(with_header);
  CHECK(a.size() == 2);
  CHECK(a.y2()[1] == 4);

  std::istringstream bare("1,2\n-3e-2, 4\n");
  const Dataset b = cli::read_table(bare);
  CHECK(b.size() == 2);
  CHECK(b.y1()[1] == -0.03);

  auto message = [](const std::string& text) {
    std::istringstream in(text);
    try {
      cli::read_table(in);
    } catch (const cli::UsageError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  CHECK(message("1,2\n3,nan\n") == "row 2: non-finite value");
  CHECK(message("a,b\n1,2\n3,inf\n") == "row 3: non-finite value");
  CHECK(message("1,2\n1,2,3\n") == "row 2: expected two comma-separated columns");
  CHECK(message("1,2\nx,2\n") == "row 2: cells must be numbers");
  CHECK(message("y1,y2\n") == "data: no observations");
}

TEST_CASE("eval loglik of one observation at the origin") {
  const std::string data = write_file("origin.csv", "y1,y2\n0,0\n");
  const Run r = run_cli({"eval", "loglik", "--dp", "0,0,1,0,1,0,0,0", "--data", data});
  CHECK(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j["loglik"].get<double>() == doctest::Approx(-std::log(2 * std::numbers::pi)).epsilon(1e-15));
  CHECK(j["n"] == 1);
}

TEST_CASE("eval score and oinfo match the library bit for bit") {
  const std::string data = write_dataset("reference.csv", testing::reference_data());
  const ScoreVector s = score(testing::reference_dp(), testing::reference_data());

  const Run js = run_cli({"eval", "score", "--dp", kReferenceDp, "--data", data});
  REQUIRE(js.code == 0);
  const auto v = json::parse(js.out)["score"].get<std::vector<double>>();
  REQUIRE(v.size() == 8);
  for (int i = 0; i < 8; ++i) CHECK(v[i] == s(i));

  const Run cs = run_cli({"eval", "score", "--dp", kReferenceDp, "--data", data, "--format", "csv"});
  const auto row = parse_csv(cs.out);
  REQUIRE(row.size() == 1);
  for (int i = 0; i < 8; ++i) CHECK(row[0][i] == s(i));

  const Matrix8 o = observed_info(testing::reference_dp(), testing::reference_data()).values;
  const Run co = run_cli({"eval", "oinfo", "--dp", kReferenceDp, "--data", data, "--format", "csv"});
  const auto m = parse_csv(co.out);
  REQUIRE(m.size() == 8);
  for (int i = 0; i < 8; ++i) {
    REQUIRE(m[i].size() == 8);
    for (int j = 0; j < 8; ++j) CHECK(m[i][j] == o(i, j));
  }
}

TEST_CASE("eval einfo at the singular point") {
  const Run r = run_cli({"eval", "einfo", "--dp", "0,0,1,0,1,0,0,0"});
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j["expected_info"][7][7].get<double>() == 0);
  CHECK(j["converged"] == true);

  const Run starved = run_cli({"eval", "einfo", "--dp", kReferenceDp, "--max-evals", "200"});
  CHECK(starved.code == 3);

  const Run quad = run_cli({"eval", "einfo", "--dp", kReferenceDp, "--precision", "extended"});
  REQUIRE(quad.code == 0);
  const Matrix8 standard = expected_info(testing::reference_dp()).values;
  const json q = json::parse(quad.out);
  for (int i = 0; i < 8; ++i) {
    for (int k = 0; k < 8; ++k) {
      CHECK(q["expected_info"][i][k].get<double>() == doctest::Approx(standard(i, k)).epsilon(1e-8));
    }
  }
}

TEST_CASE("eval density at a point and over a file") {
  const Run p = run_cli({"eval", "density", "--dp", kReferenceDp, "--point", "0.7,-1.2"});
  REQUIRE(p.code == 0);
  CHECK(json::parse(p.out)["density"][0].get<double>() == density_esn2(0.7, -1.2, testing::reference_dp()));
  const std::string data = write_dataset("reference_d.csv", testing::reference_data());
  const Run f = run_cli({"eval", "density", "--dp", kReferenceDp, "--data", data, "--format", "csv"});
  CHECK(parse_csv(f.out).size() == 3);
}

TEST_CASE("dp flags merge and conflicts are rejected") {
  const std::string data = write_file("origin2.csv", "0,0\n");
  const Run named = run_cli({"eval", "loglik", "--tau", "0", "--alpha1", "0", "--data", data});
  CHECK(named.code == 0);
  const Run same = run_cli({"eval", "loglik", "--dp", "0,0,1,0,1,0,0,0", "--tau", "0", "--data", data});
  CHECK(same.code == 0);
  const Run conflict = run_cli({"eval", "loglik", "--dp", "0,0,1,0,1,0,0,0", "--tau", "1", "--data", data});
  CHECK(conflict.code == 2);
  CHECK(conflict.err.find("--tau") != std::string::npos);
  CHECK(run_cli({"eval", "loglik", "--dp", "0,0,1,0,1,0,0", "--data", data}).code == 2);
  CHECK(run_cli({"eval", "loglik", "--dp", "0,0,1,2,1,0,0,0", "--data", data}).code == 2);
  CHECK(run_cli({"eval", "loglik", "--dp", "0,0,1,0,1,0,0,0"}).code == 2);
  CHECK(run_cli({"eval", "loglik", "--omega12", "1"}).code == 2);
  CHECK(run_cli({"eval", "score", "--dp", "0,0,1,0,1,0,0,0", "--format", "xml"}).code == 2);
  CHECK(run_cli({"frobnicate"}).code == 2);
}

TEST_CASE("bad data rows are named") {
  const std::string data = write_file("bad.csv", "y1,y2\n1,2\n3,abc\n");
  const Run r = run_cli({"eval", "loglik", "--dp", "0,0,1,0,1,0,0,0", "--data", data});
  CHECK(r.code == 2);
  CHECK(r.err.find("row 3") != std::string::npos);
  CHECK(run_cli({"eval", "loglik", "--data", temp_file("missing.csv").string()}).code == 2);
}

TEST_CASE("det-scan writes one row per grid point") {
  const Run one = run_cli({"det-scan", "--sweep", "tau", "--from", "1", "--to", "1", "--points", "1",
                           "--dp", "0,0,1,0,1,1,0,0"});
  REQUIRE(one.code == 0);
  std::istringstream lines(one.out);
  std::string header, row, extra;
  std::getline(lines, header);
  std::getline(lines, row);
  CHECK(header == "param,value,det,min_eig,converged");
  CHECK(row.rfind("tau,1,", 0) == 0);
  CHECK(row.ends_with(",true"));
  CHECK_FALSE(std::getline(lines, extra));

  const auto path = temp_file("scan.csv").string();
  const Run to_file = run_cli({"det-scan", "--sweep", "alpha2", "--from", "-1", "--to", "1", "--points",
                               "3", "--dp", kReferenceDp, "--out", path});
  CHECK(to_file.code == 0);
  CHECK(to_file.out.empty());
  std::ifstream in(path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(std::count(text.begin(), text.end(), '\n') == 4);

  CHECK(run_cli({"det-scan", "--sweep", "omega12", "--from", "0", "--to", "1", "--points", "3"}).code == 2);
  CHECK(run_cli({"det-scan", "--sweep", "tau", "--from", "1", "--to", "0", "--points", "3"}).code == 2);
  CHECK(run_cli({"det-scan", "--sweep", "tau", "--from", "0", "--to", "1", "--points", "0"}).code == 2);
}

TEST_CASE("det-scan minimum sits at alpha1 = 0 in the uncorrelated family") {
  for (const char* tau : {"-2", "0", "2"}) {
    CAPTURE(tau);
    const std::string dp = std::string("0,0,1,0,1,0,0,") + tau;
    const Run r = run_cli({"det-scan", "--sweep", "alpha1", "--from", "-4", "--to", "4", "--points", "81",
                           "--dp", dp, "--precision", "extended"});
    REQUIRE(r.code == 0);
    std::istringstream lines(r.out);
    std::string line;
    std::getline(lines, line);
    double best_value = 0.0, best_det = INFINITY;
    std::size_t rows = 0;
    while (std::getline(lines, line)) {
      ++rows;
      const auto cells = parse_csv(line.substr(line.find(',') + 1, line.rfind(',') - line.find(',') - 1));
      if (cells[0][1] < best_det) {
        best_det = cells[0][1];
        best_value = cells[0][0];
      }
    }
    CHECK(rows == 81);
    CHECK(std::fabs(best_value) < 0.05);
  }
}

TEST_CASE("fit recovers simulated parameters within five standard errors") {
  const DpParams truth{0, 0, 1, 0.5, 1, 1.5, -1, 0.5};
  const std::string data = write_dataset("sim.csv", sample_esn2(truth, 10000, RngSeed{7}));
  const Run r = run_cli({"fit", "--data", data});
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j["converged"] == true);
  REQUIRE(j["std_errors"].is_object());
  for (std::size_t i = 0; i < kNumParams; ++i) {
    const char* name = param_names()[i];
    CAPTURE(name);
    const double est = j["dp_hat"][name].get<double>();
    const double se = j["std_errors"][name].get<double>();
    CHECK(se > 0);
    CHECK(std::fabs(est - truth.to_array()[i]) < 5 * se);
  }
}

TEST_CASE("fit reports null standard errors at a singular estimate") {
  const std::string data = write_dataset("sym.csv", sample_esn2(DpParams{}, 200, RngSeed{3}));
  const Run r = run_cli({"fit", "--data", data, "--dp", "0,0,1,0,1,0,0,0", "--max-iter", "0"});
  CHECK(r.code == 4);
  const json j = json::parse(r.out);
  CHECK(j["converged"] == false);
  CHECK(j["std_errors"].is_null());
  CHECK(j["warning"].get<std::string>().find("singular") != std::string::npos);
}

TEST_CASE("fit needs five rows") {
  const std::string data = write_file("three.csv", "1,2\n2,1\n0,0\n");
  CHECK(run_cli({"fit", "--data", data}).code == 2);
}

TEST_CASE("standard errors from an information matrix") {
  Matrix8 info = Matrix8::Identity() * 4.0;
  const auto se = cli::standard_errors(info, 100);
  REQUIRE(se);
  CHECK((*se - ParamVector::Constant(0.05)).cwiseAbs().maxCoeff() < 1e-15);
  CHECK_FALSE(cli::standard_errors(expected_info(DpParams{}).values, 100));
  info(3, 3) = -1.0;
  CHECK_FALSE(cli::standard_errors(info, 100));
}

TEST_CASE("moment start is a valid parameter") {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 10; ++k) {
    const DpParams dp = testing::random_dp(rng);
    const DpParams start = cli::moment_start(sample_esn2(dp, 500, RngSeed{static_cast<std::uint64_t>(k)}));
    CHECK(is_valid(start));
  }
}

TEST_CASE("check passes and catches a perturbed alpha1-alpha2 entry") {
  const Run ok = run_cli({"check", "--level", "fast"});
  CHECK(ok.code == 0);
  CHECK(ok.out.find("FAIL") == std::string::npos);
  const Run bad = run_cli({"check", "--perturb-i67", "1.1", "--format", "json"});
  CHECK(bad.code == 1);
  CHECK(json::parse(bad.out)["passed"] == false);
}

TEST_CASE("executable exit codes") {
  auto status = [](const std::string& args) {
    const std::string cmd = std::string(ESN2_EXE) + " " + args + " >/dev/null 2>&1";
    const int raw = std::system(cmd.c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  };
  CHECK(status("--help") == 0);
  CHECK(status("eval moments --dp 0,0,1,0.6,1,2,3,1") == 0);
  CHECK(status("eval moments --dp 0,0,1,0.6,1") == 2);
  CHECK(status("") == 2);
}
