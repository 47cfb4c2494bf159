#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "eqdisc/csv.hpp"

using namespace eqdisc;

namespace {

struct TempFile {
  std::filesystem::path path;
  explicit TempFile(const std::string& name) {
    path = std::filesystem::temp_directory_path() / ("eqdisc_test_" + name);
  }
  ~TempFile() { std::filesystem::remove(path); }
  void write(const std::string& content) const {
    std::ofstream out(path);
    out << content;
  }
};

}  // namespace

TEST_CASE("load_csv parses a small two-variable file", "[csv]") {
  const TempFile file("basic.csv");
  file.write(
      "path_id,t,x1,x2\n"
      "a,0,1.5,2.5\n"
      "a,1,1.6,2.4\n"
      "a,2,1.7,2.3\n"
      "a,3,1.8,2.2\n"
      "a,4,1.9,2.1\n");
  const Dataset data = load_csv(file.path.string());
  CHECK(data.path_count() == 1);
  CHECK(data.state_dim() == 2);
  CHECK(data.length() == 5);
  CHECK(data.paths[0].values(0, 0) == 1.5);
  CHECK(data.paths[0].values(1, 4) == 2.1);
}

TEST_CASE("load_csv rejects mismatched grids with line context", "[csv]") {
  const TempFile file("grids.csv");
  file.write(
      "path_id,t,x1\n"
      "a,0,1\n"
      "a,1,2\n"
      "b,0,3\n"
      "b,2,4\n");
  CHECK_THROWS_WITH(load_csv(file.path.string()),
                    Catch::Matchers::ContainsSubstring("time grid"));
}

TEST_CASE("load_csv rejects non-numeric cells with line numbers", "[csv]") {
  const TempFile file("cells.csv");
  file.write(
      "path_id,t,x1\n"
      "a,0,1\n"
      "a,1,oops\n");
  CHECK_THROWS_WITH(load_csv(file.path.string()), Catch::Matchers::ContainsSubstring("line 3"));
}

TEST_CASE("load_csv rejects malformed headers and missing files", "[csv]") {
  const TempFile file("header.csv");
  file.write("time,x1\n0,1\n");
  CHECK_THROWS_AS(load_csv(file.path.string()), IoError);

  const TempFile wrong_state("header2.csv");
  wrong_state.write("path_id,t,u\n0,0,1\n");
  CHECK_THROWS_AS(load_csv(wrong_state.path.string()), IoError);

  CHECK_THROWS_AS(load_csv("/nonexistent/eqdisc.csv"), IoError);
}

TEST_CASE("load_csv requires strictly increasing times per path", "[csv]") {
  const TempFile file("times.csv");
  file.write(
      "path_id,t,x1\n"
      "a,0,1\n"
      "a,0,2\n");
  CHECK_THROWS_WITH(load_csv(file.path.string()),
                    Catch::Matchers::ContainsSubstring("strictly increasing"));
}

TEST_CASE("save/load round trip reproduces values bit for bit", "[csv]") {
  RandomEngine rng = make_engine(5);
  std::normal_distribution<double> gauss(0.0, 100.0);
  Vector t(17);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < 17; ++i) {
    acc += 0.001 + std::abs(gauss(rng)) * 1e-4;
    t[i] = acc;
  }
  std::vector<SamplePath> paths;
  for (int k = 0; k < 3; ++k) {
    Matrix v(2, 17);
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = gauss(rng);
    paths.emplace_back(t, std::move(v));
  }
  const Dataset data(std::move(paths));

  const TempFile file("roundtrip.csv");
  save_csv(data, file.path.string());
  const Dataset loaded = load_csv(file.path.string());
  REQUIRE(loaded.path_count() == data.path_count());
  CHECK((loaded.times().array() == data.times().array()).all());
  for (Eigen::Index i = 0; i < data.path_count(); ++i)
    CHECK((loaded.paths[static_cast<std::size_t>(i)].values.array() ==
           data.paths[static_cast<std::size_t>(i)].values.array())
              .all());
}
