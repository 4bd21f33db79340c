#include <catch2/catch.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace {

std::string cli_path() {
  const char* p = std::getenv("RUINKIT_CLI");
  REQUIRE(p != nullptr);
  return p;
}

struct RunResult {
  int code;
  std::string out;
};

RunResult run(const std::string& args) {
  std::string out_file = "cli_test_out.tmp";
  std::string cmd = args + " > " + out_file + " 2> cli_test_err.tmp";
  int code = std::system(cmd.c_str());
  std::ifstream in(out_file);
  std::ostringstream ss;
  ss << in.rdbuf();
  return {WEXITSTATUS(code), ss.str()};
}

}  // namespace

TEST_CASE("model piped into exit sums to one", "[cli]") {
  auto res = run(cli_path() + " model triangle --N 12 | " + cli_path() + " exit --from 3,3");
  REQUIRE(res.code == 0);
  std::istringstream lines(res.out);
  std::string header;
  std::getline(lines, header);
  CHECK(header == "y_id,y_coords,P,p_density");
  double total = 0.0;
  std::string line;
  int rows = 0;
  while (std::getline(lines, line)) {
    auto q2 = line.rfind('"');
    auto rest = line.substr(q2 + 2);
    total += std::stod(rest.substr(0, rest.find(',')));
    ++rows;
  }
  CHECK(rows == 33);  // |dU| of the triangle at N=12
  CHECK(std::abs(total - 1.0) <= 1e-10);
}

TEST_CASE("verify all on the box reports tight route agreement", "[cli]") {
  auto res = run(cli_path() + " verify all --model box2 --N 8");
  REQUIRE(res.code == 0);
  auto j = nlohmann::json::parse(res.out);
  CHECK(j.at("schema") == "ruinkit/1");
  CHECK(j.at("doob").at("route_agreement_err").get<double>() <= 1e-8);
  CHECK(j.at("doob").at("row_sum_err").get<double>() <= 1e-12);
  CHECK(j.at("graph").at("p_e").get<double>() == 8.0);
}

TEST_CASE("eigen subcommand matches the closed form", "[cli]") {
  auto res = run(cli_path() + " eigen --model triangle --N 6");
  REQUIRE(res.code == 0);
  auto j = nlohmann::json::parse(res.out);
  CHECK(j.at("beta")[0].get<double>() == Approx(2.0 / 3.0).margin(1e-10));
}

TEST_CASE("simulate is reproducible, also across thread caps", "[cli]") {
  std::string cmd = cli_path() +
                    " simulate --model triangle --N 12 --from 4,4 --samples 20000 --seed 7";
  auto a = run(cmd);
  auto b = run(cmd);
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  auto c = run("RUINKIT_THREADS=3 " + cmd);
  CHECK(c.out == a.out);
}

TEST_CASE("first-elimination record", "[cli]") {
  auto res = run(cli_path() +
                 " simulate --model triangle --N 24 --record first-elimination --samples 20000 "
                 "--seed 11");
  REQUIRE(res.code == 0);
  std::istringstream lines(res.out);
  std::string header;
  std::getline(lines, header);
  CHECK(header == "label,count,frequency,wilson_lo,wilson_hi");
  double freq_sum = 0.0;
  std::string line;
  while (std::getline(lines, line)) {
    std::stringstream ss(line);
    std::string label, count, freq;
    std::getline(ss, label, ',');
    std::getline(ss, count, ',');
    std::getline(ss, freq, ',');
    freq_sum += std::stod(freq);
  }
  CHECK(freq_sum == Approx(1.0).margin(1e-9));
}

TEST_CASE("file round trip reproduces the piped computation", "[cli]") {
  auto direct = run(cli_path() + " model box2 --N 4 | " + cli_path() + " exit --from 0,0");
  REQUIRE(direct.code == 0);
  auto save = run(cli_path() + " model box2 --N 4 --output cli_test_model.json");
  REQUIRE(save.code == 0);
  auto from_file =
      run(cli_path() + " exit --input cli_test_model.json --from 0,0");
  REQUIRE(from_file.code == 0);
  CHECK(direct.out == from_file.out);
}

TEST_CASE("validation failures exit with code 1", "[cli]") {
  auto res = run(cli_path() + " exit --model triangle --N 12 --from 99,99");
  CHECK(res.code == 1);
  auto res2 = run("echo '{}' | " + cli_path() + " exit --from 1");
  CHECK(res2.code == 1);
}

TEST_CASE("inner-uniform verification report", "[cli]") {
  auto strict = run(cli_path() + " verify inner-uniform --model box2 --N 6 --alpha 1 --A 1");
  REQUIRE(strict.code == 0);
  auto js = nlohmann::json::parse(strict.out);
  CHECK(js.at("inner_uniform").at("holds") == false);
  CHECK(js.at("inner_uniform").contains("failure"));
  auto loose = run(cli_path() + " verify inner-uniform --model box2 --N 6");
  auto jl = nlohmann::json::parse(loose.out);
  CHECK(jl.at("inner_uniform").at("holds") == true);
}

TEST_CASE("exit-time record emits the tau histogram", "[cli]") {
  auto res = run(cli_path() +
                 " simulate --model line --N 6 --from 3 --record exit-time --samples 4000 "
                 "--seed 3");
  REQUIRE(res.code == 0);
  std::istringstream lines(res.out);
  std::string header, first;
  std::getline(lines, header);
  CHECK(header == "t,count,cdf");
  std::getline(lines, first);
  CHECK(first.substr(0, 2) == "3,");  // non-lazy walk needs d(x, dU) steps
}

TEST_CASE("report emits ratio rows", "[cli]") {
  auto res = run(cli_path() + " report --model triangle --N 8 --kind grp");
  REQUIRE(res.code == 0);
  std::istringstream lines(res.out);
  std::string header;
  std::getline(lines, header);
  CHECK(header == "x1,x2,y1,exact,estimate,ratio");
  int rows = 0;
  std::string line;
  while (std::getline(lines, line)) ++rows;
  CHECK(rows == 84);  // sector points times bottom side at N=8
}
