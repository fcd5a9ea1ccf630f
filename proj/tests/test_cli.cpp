#include "doctest.h"

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "config.hpp"
#include "report.hpp"
#include "suites.hpp"

using namespace g2glue;
using namespace g2glue::cli;

namespace {

RunConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in, "test.cfg");
}

std::string parse_error(const std::string& text) {
  try {
    parse(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "g2glue_test_cli";
  std::filesystem::create_directories(dir);
  return dir / name;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(G2GLUE_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

json without_timing(json j) {
  j.erase("timing");
  return j;
}

}  // namespace

TEST_CASE("an empty file gives the defaults") {
  const RunConfig c = parse("");
  const RunConfig d = default_config();
  CHECK(c.torus.n == 6);
  CHECK(c.torus.eps == 1e-2);
  CHECK(c.torus.seed == 7);
  CHECK(c.torus.tol == 1e-8);
  CHECK(c.kummer.t_list == d.kummer.t_list);
  CHECK(c.kummer.b2 == 0);
  CHECK(c.cone.from == "-4");
  CHECK(c.rates.beta == "-eps");
  CHECK(c.output.path.empty());
  CHECK(c.output.format == Format::Json);
  CHECK(parse("# only a comment\n\n   ; another\n").eh.samples == d.eh.samples);
}

TEST_CASE("key = value lines under sections") {
  const RunConfig c = parse("[torus]\neps = 1e-2\nn=4 # trailing comment\nmode = cg\nfallback = false\n"
                            "[kummer]\nt_list = 0.01, 0.005\n[output]\nformat = both\npath = out/run\n"
                            "[rates]\nbeta = -1/20\nalpha = 1/10\n");
  CHECK(c.torus.eps == 1e-2);
  CHECK(c.torus.n == 4);
  CHECK(c.torus.mode == torus::OperatorMode::CurvedCg);
  CHECK_FALSE(c.torus.fallback);
  CHECK(c.kummer.t_list == std::vector<double>{0.01, 0.005});
  CHECK(c.output.format == Format::Both);
  CHECK(c.output.path == "out/run");
  CHECK(c.rates.beta == "-1/20");
}

TEST_CASE("domain violations name the key and the line") {
  const std::string e = parse_error("[kummer]\nbeta = -5\n");
  CHECK(e.find("test.cfg:2") != std::string::npos);
  CHECK(e.find("kummer.beta") != std::string::npos);
  CHECK(parse_error("[kummer]\nbeta = 0\n").find("kummer.beta") != std::string::npos);
  CHECK(parse_error("[rates]\nbeta = -4\n").find("rates.beta") != std::string::npos);
  CHECK(parse_error("[torus]\nn = 5\n").find("torus.n") != std::string::npos);
  CHECK(parse_error("[torus]\neps = 0.6\n").find("torus.eps") != std::string::npos);
  CHECK(parse_error("[torus]\ntol = 0\n").find("torus.tol") != std::string::npos);
  CHECK(parse_error("[torus]\nmode = newton\n").find("torus.mode") != std::string::npos);
  CHECK(parse_error("[kummer]\nt_list = 0.1, 0.4\n").find("kummer.t_list") != std::string::npos);
  CHECK(parse_error("[torus]\neps = abc\n").find("expected a number") != std::string::npos);
}

TEST_CASE("grammar errors report the line number") {
  CHECK(parse_error("[torus]\nepsilon = 1\n").find("test.cfg:2: unknown key 'torus.epsilon'") != std::string::npos);
  CHECK(parse_error("\n[solver]\n").find("test.cfg:2: unknown section") != std::string::npos);
  CHECK(parse_error("eps = 1\n").find("test.cfg:1") != std::string::npos);
  CHECK(parse_error("[torus]\n\neps\n").find("test.cfg:3") != std::string::npos);
  CHECK(parse_error("[torus\n").find("test.cfg:1") != std::string::npos);
  CHECK(parse_error("[torus]\neps = 0.1\neps = 0.2\n").find("test.cfg:3: duplicate") != std::string::npos);
  CHECK(parse_error("[torus]\neps =\n").find("test.cfg:2") != std::string::npos);
}

TEST_CASE("cross-key validation") {
  CHECK(parse_error("[eh]\nr_min = 10\nr_max = 5\n").find("eh.r_max") != std::string::npos);
  CHECK(parse_error("[cone]\nfrom = 0\nto = -1\n").find("cone.to") != std::string::npos);
}

TEST_CASE("later values override file values") {
  RunConfig c = parse("[torus]\neps = 2e-2\n");
  set_value(c, "torus.eps", "3e-2", "option --eps");
  CHECK(c.torus.eps == 3e-2);
  CHECK_THROWS_AS(set_value(c, "torus.nope", "1", "option"), ConfigError);
  const auto keys = known_keys();
  for (const char* k : {"eh.samples", "cone.degree", "rates.b", "kummer.beta", "torus.eps", "output.format"})
    CHECK(std::find(keys.begin(), keys.end(), k) != keys.end());
}

TEST_CASE("a missing configuration file is an I/O error") {
  CHECK_THROWS_AS(load_config("/nonexistent/g2glue.cfg"), IoError);
}

TEST_CASE("report serialisation") {
  Report r;
  r.suite = "demo";
  r.add(verdict("ok", true, 1.0, 1.0, 0.1, "first statement"));
  r.add(verdict("bad, \"quoted\"", false, 2.0, 1.0, 0.1, "second statement"));
  r.add(reported("info", json::array({1, 2}), "third statement"));
  r.timing["total"] = 0.5;
  CHECK_FALSE(r.ok());
  const json j = to_json(r);
  CHECK(j["schema"] == kReportSchema);
  CHECK(j["status"] == "fail");
  CHECK(j["checks"].size() == 3);
  CHECK(j["checks"][2]["status"] == "reported");
  REQUIRE(j["failed"].size() == 1);
  CHECK(j["failed"][0]["anchor"] == "second statement");
  CHECK(j["environment"].contains("version"));
  CHECK(j["environment"]["threads"].get<int>() >= 1);

  const std::string csv = checks_csv(r);
  CHECK(csv.rfind("# g2glue.checks/1\nname,status,measured,expected,tolerance,anchor\n", 0) == 0);
  CHECK(csv.find("\"bad, \"\"quoted\"\"\",fail,2.0,1.0,0.1,second statement") != std::string::npos);
  CHECK(summary(r).find("(violates: second statement)") != std::string::npos);
}

TEST_CASE("atomic writes") {
  const auto p = scratch("atomic.txt");
  write_atomic(p, "first");
  write_atomic(p, "second");
  CHECK(slurp(p) == "second");
  for (const auto& e : std::filesystem::directory_iterator(p.parent_path()))
    CHECK(e.path().filename().string().find(".tmp.") == std::string::npos);
  CHECK_THROWS_AS(write_atomic("/nonexistent/dir/file.json", "x"), IoError);

  Report r;
  r.suite = "demo";
  r.tables.push_back({"rows", "g2glue.rows/1", "a,b\n1,2\n"});
  OutputSettings out{scratch("demo").string(), Format::Both};
  CHECK(write_outputs(r, out).size() == 3);
  CHECK(slurp(scratch("demo.rows.csv")) == "# g2glue.rows/1\na,b\n1,2\n");
  out.format = Format::Json;
  CHECK(write_outputs(r, out).size() == 1);
  out.path.clear();
  CHECK(write_outputs(r, out).empty());
}

TEST_CASE("suite examples") {
  const RunConfig d = default_config();
  const Report f = kummer_fixed_points(d);
  CHECK(f.ok());
  CHECK(f.data["counts"]["alpha"] == 16);
  CHECK(f.data["counts"]["alpha*beta*gamma"] == 0);
  CHECK(f.data["components"].size() == 12);

  RunConfig c = d;
  c.cone.degree = 2;
  c.cone.from = "-4";
  c.cone.to = "0";
  const Report rates = cone_rates(c);
  CHECK(rates.data["rates"] == json{{"-2", 6}});
  CHECK(rates.ok());

  c.torus.eps = 0.0;
  const Report t = torus_solve(c);
  CHECK(t.data["iterations"] == 0);
  CHECK(t.data["residual"] == 0.0);
  CHECK(t.ok());

  const Report jk = rates_jk(d);
  CHECK_FALSE(jk.ok());
  for (const auto& chk : jk.checks)
    if (chk.status == Status::Fail) CHECK_FALSE(chk.anchor.empty());
}

TEST_CASE("reports are deterministic apart from timing") {
  RunConfig c = default_config();
  c.torus.n = 4;
  c.torus.fallback = false;
  CHECK(without_timing(to_json(torus_solve(c))).dump() == without_timing(to_json(torus_solve(c))).dump());
  c.eh.samples = 50;
  CHECK(without_timing(to_json(eh_verify(c))).dump() == without_timing(to_json(eh_verify(c))).dump());
}

TEST_CASE("command line exit codes") {
  CHECK(run_cli("kummer fixed-points") == 0);
  CHECK(run_cli("cone rates --degree 2 --from -4 --to 0") == 0);
  CHECK(run_cli("rates jk") == 1);
  CHECK(run_cli("torus solve --bogus") == 2);
  CHECK(run_cli("torus solve --n 5") == 2);
  CHECK(run_cli("rates jk --beta -5") == 2);
  CHECK(run_cli("--config /nonexistent/g2glue.cfg kummer fixed-points") == 3);
  CHECK(run_cli("-o /nonexistent/dir/out kummer fixed-points") == 3);
  CHECK(run_cli("") == 2);
  const std::string env = "G2GLUE_THREADS=0 ";
  CHECK(std::system((env + G2GLUE_CLI + " kummer fixed-points > /dev/null 2>&1").c_str()) != 0);
}

TEST_CASE("command line flags override the configuration file") {
  const auto cfg = scratch("run.cfg");
  {
    std::ofstream os(cfg);
    os << "[torus]\neps = 2e-2\nn = 4\n[output]\nformat = both\n";
  }
  const auto prefix = scratch("cli_run");
  REQUIRE(run_cli("--config " + cfg.string() + " -o " + prefix.string() + " torus solve --eps 0") == 0);
  const json j = json::parse(slurp(prefix.string() + ".json"));
  CHECK(j["data"]["config"]["eps"] == 0.0);
  CHECK(j["data"]["config"]["n"] == 4);
  CHECK(j["data"]["iterations"] == 0);
  CHECK(std::filesystem::exists(prefix.string() + ".csv"));
  CHECK(std::filesystem::exists(prefix.string() + ".history.csv"));
}
