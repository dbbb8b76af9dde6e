#include <doctest.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

namespace {

struct Run {
  int status;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(LOOPBOUND_CLI) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), n);
  const int raw = pclose(pipe);
  return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, out};
}

nlohmann::json json_of(const Run& r) { return nlohmann::json::parse(r.out); }

}  // namespace

TEST_CASE("table 2 row") {
  const auto r = run("table 2 --compare");
  REQUIRE(r.status == 0);
  const auto j = json_of(r);
  const double expected[] = {0.381, 0.250, 0.171, 0.123};
  for (int i = 0; i < 4; ++i) {
    CHECK(std::floor(j["cells"][i]["value"].get<double>() * 1000.0) / 1000.0 == doctest::Approx(expected[i]));
  }
  CHECK(j["paper_deltas"]["within_tolerance"] == true);
}

TEST_CASE("integral subcommand") {
  auto j = json_of(run("integral Itilde c=1,-1 d=3"));
  CHECK(j["cells"][0]["value"].get<double>() == doctest::Approx(1.0 / 6.0).epsilon(1e-9));
  j = json_of(run("integral I c=1,-1 u=0.5 --alpha sup d=4"));
  CHECK(j["cells"][0]["value"].get<double>() == doctest::Approx(0.707107).epsilon(1e-6));
  CHECK(j["cells"][0]["details"]["alpha"] == 1.0);
  j = json_of(run("integral J c=0 d=2"));
  CHECK(j["cells"][0]["value"] == 0.0);
  j = json_of(run("integral I --c 1,-1 --u 0 --alpha 0 --d 1"));
  CHECK(j["cells"][0]["value"].get<double>() == doctest::Approx(0.636620).epsilon(1e-6));
  j = json_of(run("integral Jlimit c='1,-1;0' d=3"));
  CHECK(j["cells"][0]["value"].get<double>() == doctest::Approx(0.902842).epsilon(1e-5));
}

TEST_CASE("bound subcommand") {
  auto j = json_of(run("bound nn --theta 2 --u 0 --d 3 --beta inf"));
  CHECK(std::abs(j["cells"][0]["value"].get<double>() - 0.300) <= 0.002);
  CHECK(j["params"]["beta"] == "inf");
  j = json_of(run("bound finite-range --theta 2 --u 0.5 --d 1 --m 3"));
  CHECK(j["cells"][0]["value"] == 0.0);
}

TEST_CASE("exit codes") {
  CHECK(run("bound nn --theta 2 --d 3 --beta 0.1").status == 3);
  CHECK(run("integral Itilde c=1 d=2").status == 4);
  CHECK(run("integral Jlimit c=1,0 d=3").status == 2);
  CHECK(run("table 7").status == 2);
  CHECK(run("simulate --L 2").status == 2);
  CHECK(run("bound nn --theta 2 --u 0.9").status == 3);
  CHECK(run("simulate --d 2 --L 6 --theta 3 --beta 2 --oracle-samples 64").status == 5);
  CHECK(run("--help").status == 0);
}

TEST_CASE("simulate is deterministic and exact at the origin") {
  const auto a = run("simulate --d 3 --L 6 --theta 1 --u 0.5 --beta 1 --steps 80000");
  REQUIRE(a.status == 0);
  const auto j = json_of(a);
  CHECK(j["cells"][0]["coords"]["x"] == nlohmann::json::array({0, 0, 0}));
  CHECK(j["cells"][0]["value"] == 1.0);
  CHECK(j["cells"][0]["error"] == 0.0);
  const auto b = run("simulate --d 3 --L 6 --theta 1 --u 0.5 --beta 1 --steps 80000");
  CHECK(a.out == b.out);
  const auto c = run("simulate --d 3 --L 6 --theta 1 --u 0.5 --beta 1 --steps 80000 --seed 9");
  CHECK(a.out != c.out);
}

TEST_CASE("fourier check reports the minimum with its error") {
  const auto j = json_of(run("simulate --theta 2 --fourier-check --steps 60000"));
  bool found = false;
  for (const auto& cell : j["cells"]) {
    if (cell["coords"]["observable"] == "kappa_hat_min") {
      found = true;
      CHECK(cell["error"].get<double>() > 0.0);
      CHECK(cell["details"]["positive_at_3sigma"] == true);
    }
  }
  CHECK(found);
}
