#include "support.hpp"

#include "opfgrad/cli.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace opfgrad;
using namespace testing;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "opfgrad");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST_CASE("solve at the bundled load") {
  const Run r = run({"solve", "--case", case9_path()});
  REQUIRE(r.code == kExitOk);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["status"] == "Optimal");
  CHECK(j["binding_set"]["canonical"] == "G1L|B3L");
  CHECK(j["binding_set"]["rank_certificate"] == 12);
  CHECK(j["objective"].get<double>() == doctest::Approx(2.06034).epsilon(1e-5));
  for (const auto& [key, value] : j["residuals"].items()) CHECK(value.get<double>() <= 1e-9);
  for (const auto& m : j["duals"]["mu_plus"]) CHECK_FALSE(std::signbit(m.get<double>()));
}

TEST_CASE("usage errors exit with 1") {
  const Run neg = run({"solve", "--case", case9_path(), "--load", "4=-1"});
  CHECK(neg.code == kExitUsage);
  CHECK(neg.err.find("load must be positive") != std::string::npos);
  CHECK(run({"solve", "--case", case9_path(), "--bogus"}).code == kExitUsage);
  CHECK(run({"solve"}).code == kExitUsage);
  CHECK(run({"solve", "--case", "/nonexistent/case.json"}).code == kExitUsage);
  CHECK(run({"solve", "--case", case9_path(), "--load", "42=1"}).code == kExitUsage);
  CHECK(run({"--help"}).code == kExitOk);
}

TEST_CASE("infeasible load exits with 2 and still reports") {
  const Run r = run({"solve", "--case", case9_path(), "--load", "4=9,7=9"});
  CHECK(r.code == kExitInfeasible);
  CHECK(nlohmann::json::parse(r.out)["status"] == "Infeasible");
}

TEST_CASE("sensitivity") {
  const Run r = run({"sensitivity", "--case", case9_path(), "--gen", "1", "--load-bus", "9"});
  REQUIRE(r.code == kExitOk);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["value"].get<double>() == 1.3244274809160315);
  CHECK(j["S_G"] == nlohmann::json::array({2}));
  CHECK(j["S_B"] == nlohmann::json::array({5}));
  const Run csv = run({"sensitivity", "--case", case9_path(), "--format", "csv"});
  CHECK(std::count(csv.out.begin(), csv.out.end(), '\n') == 19);
}

TEST_CASE("outputs are byte identical across runs") {
  const std::vector<std::string> cmd{"scan-load", "--case", case9_path(), "--axis-a", "4",
                                     "--axis-b", "7", "--resolution", "12", "--threads", "3"};
  const Run a = run(cmd), b = run(cmd);
  CHECK(a.code == kExitOk);
  CHECK(a.out == b.out);
  const Run c = run({"enumerate", "--case", case9_path()});
  CHECK(c.out == run({"enumerate", "--case", case9_path()}).out);
  const auto combos = nlohmann::json::parse(c.out);
  CHECK(combos["count"] == 66);
  CHECK(combos["independent"] == 60);
}

TEST_CASE("out writes to a file") {
  const auto path = std::filesystem::temp_directory_path() / "opfgrad_cli_out.json";
  const Run r = run({"jacobian", "--case", case9_path(), "--out", path.string()});
  CHECK(r.code == kExitOk);
  CHECK(r.out.empty());
  std::ifstream in(path);
  const auto j = nlohmann::json::parse(in);
  std::filesystem::remove(path);
  CHECK(j["J"].size() == 3u);
}

TEST_CASE("case info and combos") {
  const Run r = run({"case-info", "--case", case9_path()});
  REQUIRE(r.code == kExitOk);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["n_gen"] == 3);
  CHECK(j["branches"].size() == 9u);
  CHECK(run({"jacobian", "--case", case9_path(), "--gens", "2", "--branches", "9"}).code ==
        kExitInfeasible);
  CHECK(run({"construct", "--case", case9_path(), "--gens", "1", "--branches", "3"}).code == kExitOk);
  const Run fd = run({"fd-check", "--case", case9_path()});
  CHECK(fd.code == kExitOk);
}
