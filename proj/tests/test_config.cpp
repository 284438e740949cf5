#include "facilitrans/config.hpp"
#include "facilitrans/output.hpp"

#include <doctest.h>

using namespace facilitrans;
using nlohmann::json;

namespace {

json minimal() {
  return json::parse(R"({
    "model": {"v1": 20, "v2": 10, "d_delta1": -0.133, "d_delta2": -0.033},
    "chain": {"n_sites": 7},
    "schedule": [1, 2, 1, 2, 1],
    "initial": {"type": "excitation", "site": 1},
    "measure": {"in_site": 1, "out_site": 6}
  })");
}

ErrorCode code_of(const json& doc) {
  try {
    parse_config(doc);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::Config;
}

}  // namespace

TEST_CASE("minimal config parses") {
  const auto cfg = parse_config(minimal());
  CHECK(cfg.geometry.n_sites() == 7);
  CHECK(cfg.geometry.r2() == doctest::Approx(std::pow(2.0, 1.0 / 6)));
  CHECK(cfg.resolved_schedule().indices() == std::vector<int>{1, 2, 1, 2, 1});
  CHECK(cfg.params.include_nnn);
}

TEST_CASE("unknown keys are rejected with their path") {
  auto doc = minimal();
  doc["model"]["v3"] = 1.0;
  try {
    parse_config(doc);
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Config);
    CHECK(std::string(e.what()).find("model.v3") != std::string::npos);
  }
  auto top = minimal();
  top["extra"] = true;
  CHECK(code_of(top) == ErrorCode::Config);
}

TEST_CASE("physical invariants map to config errors") {
  auto doc = minimal();
  doc["model"]["v2"] = 30;
  CHECK(code_of(doc) == ErrorCode::Config);
  auto both = minimal();
  both["route"] = {{"start", 1}, {"waypoints", {6}}};
  CHECK(code_of(both) == ErrorCode::Config);
  auto bad_type = minimal();
  bad_type["chain"]["n_sites"] = "seven";
  CHECK(code_of(bad_type) == ErrorCode::Config);
  auto nm = minimal();
  nm["disorder"] = {{"sigma_nm", {50, 50, 450}}};
  CHECK(code_of(nm) == ErrorCode::Config);
}

TEST_CASE("route resolves to a schedule") {
  auto doc = minimal();
  doc.erase("schedule");
  doc["route"] = {{"start", 1}, {"waypoints", {6}}};
  CHECK(parse_config(doc).resolved_schedule().indices() == std::vector<int>{1, 2, 1, 2, 1});
}

TEST_CASE("lab-unit disorder converts to chain units") {
  auto doc = minimal();
  doc["physical_units"] = {{"omega_2pi_mhz", 3.0}, {"r1_um", 11.4}};
  doc["disorder"] = {{"sigma_nm", {114, 114, 1140}}, {"n_realizations", 4}};
  doc["seed"] = 9;
  const auto cfg = parse_config(doc);
  REQUIRE(cfg.disorder);
  CHECK(cfg.disorder->sigma.x() == doctest::Approx(0.01));
  CHECK(cfg.disorder->sigma.z() == doctest::Approx(0.1));
  CHECK(cfg.disorder->base_seed == 9);
}

TEST_CASE("dissipative runs start from a density matrix") {
  auto doc = minimal();
  doc["model"]["gamma_decay"] = 0.002;
  CHECK(std::holds_alternative<DensityMatrix>(parse_config(doc).initial_state()));
  CHECK(std::holds_alternative<PureState>(parse_config(minimal()).initial_state()));
}

TEST_CASE("config hash is stable and content sensitive") {
  CHECK(config_hash(minimal()) == config_hash(minimal()));
  auto other = minimal();
  other["seed"] = 1;
  CHECK(config_hash(other) != config_hash(minimal()));
}

TEST_CASE("CSV quoting and number format") {
  CsvWriter w({"a", "b,c"});
  w.row(std::vector<std::string>{"x\"y", "1"});
  CHECK(w.str() == "a,\"b,c\"\r\n\"x\"\"y\",1\r\n");
  CHECK(format_real(0.1) == "0.10000000000000001");
  CHECK_THROWS(w.row(std::vector<std::string>{"only one"}));
}

TEST_CASE("heatmap carries the config hash") {
  const std::string svg = population_heatmap_svg({0.0, 1.0}, {RVector::Zero(2), RVector::Ones(2)}, {0.0, 1.0},
                                                 0xabcdefULL, "t");
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("fnv1a64:") != std::string::npos);
}
