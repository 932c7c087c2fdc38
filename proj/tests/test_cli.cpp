#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(FINSLER_CLI_PATH) + " " + args + " 2>/dev/null";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf;
  std::size_t got;
  while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), got);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string temp_file(const std::string& name, const std::string& content) {
  const auto path = std::filesystem::temp_directory_path() / ("finsler_cli_test_" + name);
  std::ofstream(path) << content;
  return path.string();
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("classify json report") {
    const Run r = run("classify --gallery funk_ball_randers --points 20 --seed 42 --format json --threads 4");
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    for (const char* key : {"metric", "config", "points", "classes", "identities", "timing"}) {
      CAPTURE(key);
      CHECK(j.contains(key));
    }
    CHECK(j["timing"].is_null());
    CHECK(j["points"].size() == 20);
    CHECK(j["classes"]["gdw"]["verdict"] == "pass");
    CHECK(j["classes"]["douglas"]["verdict"] == "fail");
    CHECK(j["classes"]["gdw"]["fits"].size() == 20);

    const Run again = run("classify --gallery funk_ball_randers --points 20 --seed 42 --format json --threads 1");
    CHECK(again.out == r.out);
  }

  TEST_CASE("classify euclidean is trivially clean") {
    const Run r = run("classify --gallery euclidean --points 5 --format json");
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    for (const auto& [name, c] : j["classes"].items()) {
      CAPTURE(name);
      CHECK(c["worst_residual"].get<double>() < 1e-9);
    }
  }

  TEST_CASE("classify csv and text") {
    const Run csv = run("classify --gallery sphere2 --points 2 --format csv");
    CHECK(csv.code == 0);
    CHECK(csv.out.rfind("point_index,class,residual,verdict,params\n", 0) == 0);
    const Run text = run("classify --gallery sphere2 --points 2");
    CHECK(text.code == 0);
    CHECK(text.out.find("scalar_flag_curvature") != std::string::npos);
  }

  TEST_CASE("exit codes") {
    CHECK(run("classify --metric /nonexistent/metric.toml").code == 2);
    const std::string bad = temp_file("bad.toml", "[metric]\nname = \"bad\"\nkind = \"general\"\ndim = 2\n"
                                                  "region_center = [0, 0]\nregion_radius = 1\n[general]\n"
                                                  "f2 = \"y1^2 + * y2^2\"\n");
    CHECK(run("classify --metric " + bad).code == 2);
    CHECK(run("classify --gallery no_such_metric").code == 2);
    CHECK(run("classify --gallery sphere2 --points 0").code == 2);
    CHECK(run("classify --gallery sphere2 --format xml").code == 2);
    CHECK(run("classify --gallery sphere2 --metric x.toml").code == 2);
    CHECK(run("classify --gallery sphere2 --points 2 --order 4").code == 3);
    CHECK(run("classify --gallery sphere2 --points 2 --order seven").code == 2);
  }

  TEST_CASE("tensor") {
    Run r = run("tensor --name douglas --gallery euclidean --at \"x=0,0,0;y=1,0,0\" --format json");
    REQUIRE(r.code == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j["norm"].get<double>() == 0.0);
    CHECK(j["values"].size() == 81);

    r = run("tensor --name riemann --gallery funk_ball_randers --at \"x=0.1,0.2,0;y=1,0.5,0.3\" --format json");
    REQUIRE(r.code == 0);
    j = nlohmann::json::parse(r.out);
    const double F = j["F"].get<double>();
    CHECK(j["norm"].get<double>() < 1e-7 * F * F);

    r = run("tensor --name weyl --gallery shen_avec_randers --at \"x=0.1,-0.2,0.1;y=1,0.5,0.3\" --format json");
    REQUIRE(r.code == 0);
    j = nlohmann::json::parse(r.out);
    CHECK(j["norm"].get<double>() < 1e-6 * j["F"].get<double>() * j["F"].get<double>());

    CHECK(run("tensor --name nonsense --gallery euclidean --at \"x=0,0,0;y=1,0,0\"").code == 2);
    CHECK(run("tensor --name R --gallery euclidean --at \"x=0,0;y=1,0\"").code == 2);
    CHECK(run("tensor --name R --gallery funk_ball_randers --at \"x=0.9,0,0;y=1,0,0\"").code == 2);
    CHECK(run("tensor --name B --gallery sphere2 --at \"x=0,0;y=1,0\" --order 4").code == 3);
  }

  TEST_CASE("identities") {
    CHECK(run("identities --gallery killing_s3_alphabeta --suite killing --points 4").code == 0);
    CHECK(run("identities --gallery sphere2 --suite riemann_berwald --points 4").code == 0);
    CHECK(run("identities --gallery euclidean --suite all --points 3").code == 0);
    CHECK(run("identities --gallery shen_avec_randers --suite killing --points 2").code == 2);
    CHECK(run("identities --gallery sphere2 --suite nonsense").code == 2);
    const Run r = run("identities --gallery sphere2 --suite structure --points 2 --format json");
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["identities"].size() == 8);
    for (const auto& row : j["identities"]) CHECK(row["verdict"] == "pass");
  }

  TEST_CASE("projective") {
    const Run r = run("projective --gallery funk_ball_randers --factor beta --points 3 --format json");
    REQUIRE(r.code == 0);
    for (const auto& row : nlohmann::json::parse(r.out)["identities"]) {
      CAPTURE(row["name"].get<std::string>());
      CHECK(row["verdict"] == "pass");
    }
    CHECK(run("projective --gallery funk_ball_randers --factor \"y1^2\"").code == 2);
    CHECK(run("projective --gallery sphere2 --factor beta").code == 2);
    CHECK(run("projective --gallery funk_ball_randers --factor 0 --points 2").code == 0);
  }

  TEST_CASE("gallery commands") {
    Run r = run("gallery list");
    CHECK(r.code == 0);
    CHECK(r.out.find("killing_s3_alphabeta") != std::string::npos);
    r = run("gallery export sphere2");
    CHECK(r.code == 0);
    const std::string path = temp_file("sphere2.toml", r.out);
    CHECK(run("classify --metric " + path + " --points 2").code == 0);
    CHECK(run("gallery export nothing").code == 2);
    CHECK(run("gallery check sphere2 --points 3").code == 0);
  }
}
