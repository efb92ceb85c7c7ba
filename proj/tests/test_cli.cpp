#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "vlab/cli.hpp"
#include "vlab/report_io.hpp"

using namespace vlab;
using nlohmann::json;

namespace {

struct Outcome {
  int code;
  std::string out, err;
};

Outcome cli(std::vector<std::string> args) {
  args.insert(args.begin(), "vlab");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

// Runs the installed binary; returns exit status and standard output.
Outcome binary(const std::string& args) {
  const char* bin = std::getenv("VLAB_BIN");
  if (!bin) return {-1, "", "VLAB_BIN not set"};
  std::string cmd = std::string(bin) + " " + args + " 2>/dev/null";
  FILE* p = popen(cmd.c_str(), "r");
  std::string out;
  std::array<char, 4096> buf{};
  while (std::size_t n = fread(buf.data(), 1, buf.size(), p)) out.append(buf.data(), n);
  int status = pclose(p);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out, ""};
}

std::filesystem::path temp_file(const std::string& name, const std::string& content) {
  auto p = std::filesystem::temp_directory_path() / name;
  std::ofstream(p) << content;
  return p;
}

}  // namespace

TEST(Cli, ModularThetaJson) {
  auto o = cli({"identity", "modular", "--preset", "theta-zeta", "--x", "1.0", "--tol", "1e-9", "--out", "json"});
  ASSERT_EQ(o.code, exit_pass) << o.err;
  auto j = json::parse(o.out);
  ASSERT_EQ(j.size(), 1u);
  EXPECT_LT(j[0].at("residual").get<real>(), 1e-9);
  EXPECT_TRUE(j[0].at("passed").get<bool>());
}

TEST(Cli, KernelText) {
  auto o = cli({"kernel", "--kind", "Z", "--alphas", "1", "--betas", "0", "--x", "2.0"});
  ASSERT_EQ(o.code, exit_pass) << o.err;
  EXPECT_NEAR(std::stod(o.out), std::exp(-2.0), 1e-13);
  EXPECT_EQ(o.out.rfind("0.135335", 0), 0u);
}

TEST(Cli, KernelCsvAndJson) {
  auto c = cli({"kernel", "--kind", "Y", "--alphas", "1,1", "--betas", "0,0", "--x", "1,2", "--out", "csv"});
  ASSERT_EQ(c.code, exit_pass) << c.err;
  std::istringstream is(c.out);
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "kind,x,value_re,value_im,error");
  int rows = 0;
  while (std::getline(is, line)) rows += !line.empty();
  EXPECT_EQ(rows, 2);
  auto j = cli({"kernel", "--kind", "Z", "--alphas", "1", "--betas", "0", "--x", "0.5", "--out", "json"});
  ASSERT_EQ(j.code, exit_pass);
  EXPECT_NO_THROW((void)json::parse(j.out));
}

TEST(Cli, RieszDivisorDefaultTolerance) {
  auto o = cli({"identity", "riesz", "--preset", "divisor", "--rho", "2", "--x", "10.5"});
  ASSERT_EQ(o.code, exit_pass) << o.err;
  auto r = report_from_json(json::parse(o.out)[0]);
  EXPECT_DOUBLE_EQ(r.tol, 1e-4);
  EXPECT_LT(r.residual, 1e-4 * std::max(1.0, std::abs(r.lhs)));
}

TEST(Cli, FunctionalEquationPoints) {
  auto o = cli({"identity", "fe", "--preset", "theta-zeta", "--s", "0.8+2i,3", "--tol", "1e-6"});
  ASSERT_EQ(o.code, exit_pass) << o.err;
  auto j = json::parse(o.out);
  ASSERT_EQ(j.size(), 2u);
  EXPECT_EQ(complex_from_json(j[0].at("s")), cplx(0.8, 2.0));
}

TEST(Cli, CsvSchema) {
  auto o = cli({"identity", "modular", "--preset", "divisor", "--x", "0.7,1.3", "--out", "csv"});
  ASSERT_EQ(o.code, exit_pass) << o.err;
  std::istringstream is(o.out);
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "identity,x_or_s,rho,lhs_re,lhs_im,rhs_re,rhs_im,residual,terms_lhs,terms_rhs,trunc_est,passed");
  int rows = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    ++rows;
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 11);
    EXPECT_EQ(line.substr(line.rfind(',') + 1), "true");
  }
  EXPECT_EQ(rows, 2);
}

TEST(Cli, JsonRoundTrip) {
  for (const char* which : {"modular", "aux", "riesz"}) {
    std::vector<std::string> args{"identity", which, "--preset", "r2", "--x", "0.9,1.7"};
    if (std::string(which) == "riesz") args.insert(args.end(), {"--rho", "3", "--tol", "1e-5"});
    auto o = cli(args);
    ASSERT_EQ(o.code, exit_pass) << which << ": " << o.err;
    for (const auto& e : json::parse(o.out)) {
      IdentityReport r = report_from_json(e);
      EXPECT_EQ(to_json(r), e);
      EXPECT_EQ(report_from_json(to_json(r)), r);
    }
  }
}

TEST(Cli, DeterministicOutput) {
  std::vector<std::string> args{"identity", "riesz", "--preset", "theta-zeta", "--rho", "1", "--x", "7.3", "--out", "csv"};
  EXPECT_EQ(cli(args).out, cli(args).out);
}

TEST(Cli, ConfigFileWithPreset) {
  auto path = temp_file("vlab_cfg_preset.json", R"({
    "series": {"preset": "sigma-k", "params": {"k": 2, "n_max": 2000}},
    "identity": "modular",
    "points": [0.8, 1.2],
    "tol": 1e-7,
    "output": {"format": "json"}
  })");
  auto o = cli({"identity", "modular", "--config", path.string()});
  ASSERT_EQ(o.code, exit_pass) << o.err;
  EXPECT_EQ(json::parse(o.out).size(), 2u);
}

TEST(Cli, ConfigFileWithCustomSeries) {
  // theta series written out by hand: lambda_n = n, a_n = 1, Gamma(s/2) with Q = pi^{-1/2}
  auto path = temp_file("vlab_cfg_custom.json", R"({
    "series": {"custom": {
      "delta": 1.0, "Q": 0.5641895835477563, "alphas": [0.5], "betas": [0.0],
      "a": {"generator": "ones"}, "n_max": 400,
      "sigma_a": 1.0, "sigma_b": 1.0,
      "poles": [{"at": 1.0, "order": 1}],
      "continuation": "theta-zeta"
    }},
    "identity": "modular",
    "points": [1.0],
    "tol": 1e-9
  })");
  auto o = cli({"identity", "modular", "--config", path.string()});
  ASSERT_EQ(o.code, exit_pass) << o.err;
  auto r = report_from_json(json::parse(o.out)[0]);
  EXPECT_LT(r.residual, 1e-9);
}

TEST(Cli, CustomSeriesMustDeclareAbscissae) {
  json j = {{"delta", 1.0}, {"Q", 1.0}, {"alphas", {0.5}}, {"betas", {0.0}}, {"a", {{"generator", "ones"}}}};
  EXPECT_THROW((void)custom_series(j), ConfigError);
}

TEST(Cli, OutputFile) {
  auto path = std::filesystem::temp_directory_path() / "vlab_out.csv";
  std::filesystem::remove(path);
  auto o = cli({"identity", "modular", "--preset", "theta-zeta", "--x", "1", "--out", "csv", "--output", path.string()});
  ASSERT_EQ(o.code, exit_pass) << o.err;
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header.rfind("identity,", 0), 0u);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(cli({"identity", "modular", "--preset", "nope", "--x", "1"}).code, exit_error);
  EXPECT_EQ(cli({"identity", "modular", "--preset", "theta-zeta", "--x", "-1"}).code, exit_error);
  EXPECT_EQ(cli({"identity", "riesz", "--preset", "theta-zeta", "--rho", "0", "--x", "2.5"}).code, exit_error);
  EXPECT_EQ(cli({"bogus"}).code, exit_error);
  // an unreachable tolerance is an identity failure, not an error
  EXPECT_EQ(cli({"identity", "riesz", "--preset", "divisor", "--rho", "1", "--x", "10.5", "--tol", "1e-15"}).code,
            exit_identity_failure);
}

TEST(Cli, CatalogList) {
  auto o = cli({"catalog", "list", "--out", "json"});
  ASSERT_EQ(o.code, exit_pass);
  EXPECT_EQ(json::parse(o.out).size(), preset_names().size());
}

TEST(Cli, AsymptoticTable) {
  auto o = cli({"asympt", "--preset", "r2", "--rho", "1", "--x", "500,1000", "--out", "csv"});
  ASSERT_EQ(o.code, exit_pass) << o.err;
  EXPECT_EQ(o.out.rfind("x,quad_re,quad_im,asym_re,asym_im,window_rel_error", 0), 0u);
}

TEST(Cli, ParseHelpers) {
  EXPECT_EQ(parse_complex("2.5-1i"), cplx(2.5, -1.0));
  EXPECT_EQ(parse_complex("-i"), cplx(0.0, -1.0));
  EXPECT_EQ(parse_complex("3"), cplx(3.0, 0.0));
  EXPECT_EQ(parse_complex("1e-3+2e1i"), cplx(1e-3, 20.0));
  EXPECT_THROW((void)parse_complex("abc"), ConfigError);
  EXPECT_EQ(split_list("1,2,,3"), (std::vector<std::string>{"1", "2", "3"}));
}

TEST(Binary, ExitStatusAndBytes) {
  if (!std::getenv("VLAB_BIN")) GTEST_SKIP() << "VLAB_BIN not set";
  auto a = binary("identity modular --preset theta-zeta --x 1.0 --tol 1e-9 --out json");
  EXPECT_EQ(a.code, 0);
  auto b = binary("identity modular --preset theta-zeta --x 1.0 --tol 1e-9 --out json");
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(binary("identity modular --preset nope --x 1").code, 1);
  EXPECT_EQ(binary("identity riesz --preset divisor --rho 1 --x 10.5 --tol 1e-15").code, 2);
  auto k = binary("kernel --kind Z --alphas 1 --betas 0 --x 2.0");
  EXPECT_EQ(k.out.rfind("0.135335", 0), 0u);
}
