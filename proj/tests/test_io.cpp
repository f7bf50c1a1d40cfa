#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "wrinkle/errors.hpp"
#include "wrinkle/io.hpp"

using namespace wrinkle;

namespace {

const ConfigSchema kSchema = {
    {"A", {ParamType::real, false, std::string("2.0")}},
    {"steps", {ParamType::integer, false, std::string("10")}},
    {"label", {ParamType::text, false, std::nullopt}},
    {"filter", {ParamType::boolean, false, std::string("true")}},
    {"target", {ParamType::real, true, std::nullopt}},
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::string temp_path(const char* name) {
  return std::string("/tmp/wrinkle_io_test_") + name;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(WRINKLE_CLI_PATH) + " " + args +
                          " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WEXITSTATUS(status);
}

Immersion tiny_surface(int nx, int ny) {
  const Grid2D g = Grid2D::covering(nx, ny, 1.0, 1.0);
  return Immersion::tabulate(g, [](double a, double b) {
    return Eigen::Vector3d(a, b, a * b);
  });
}

}  // namespace

TEST_CASE("config parsing") {
  SUBCASE("empty text yields the defaults, minus required keys") {
    ConfigSchema optional_only = kSchema;
    optional_only.erase("target");
    const RunConfig cfg = parse_config("", optional_only);
    CHECK(cfg.get_real("A") == 2.0);
    CHECK(cfg.get_int("steps") == 10);
    CHECK(cfg.get_bool("filter") == true);
    CHECK_FALSE(cfg.has("label"));
  }

  SUBCASE("typed values, comments and blank lines") {
    const RunConfig cfg = parse_config(
        "# header comment\n"
        "A = 3.5\n"
        "\n"
        "steps = 7   # trailing comment\n"
        "label = run-a\n"
        "filter = false\n"
        "target = 1e-3\n",
        kSchema);
    CHECK(cfg.get_real("A") == 3.5);
    CHECK(cfg.get_int("steps") == 7);
    CHECK(cfg.get_string("label") == "run-a");
    CHECK(cfg.get_bool("filter") == false);
    CHECK(cfg.get_real("target") == 1e-3);
  }

  SUBCASE("unknown keys are rejected with a line number") {
    try {
      parse_config("target = 1.0\nbogus = 3\n", kSchema);
      FAIL("expected UnknownKey");
    } catch (const UnknownKey& e) {
      CHECK(std::string(e.what()).find("line 2") != std::string::npos);
      CHECK(std::string(e.what()).find("bogus") != std::string::npos);
    }
  }

  SUBCASE("type mismatches carry the offending line") {
    try {
      parse_config("A = abc\n", kSchema);
      FAIL("expected TypeMismatch");
    } catch (const TypeMismatch& e) {
      CHECK(std::string(e.what()).find("line 1") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_config("steps = 2.5\ntarget = 1\n", kSchema),
                    TypeMismatch);
    CHECK_THROWS_AS(parse_config("filter = maybe\ntarget = 1\n", kSchema),
                    TypeMismatch);
    CHECK_THROWS_AS(parse_config("just a line\n", kSchema), TypeMismatch);
  }

  SUBCASE("missing required keys are reported after the scan") {
    CHECK_THROWS_AS(parse_config("A = 1.0\n", kSchema), MissingRequired);
  }

  SUBCASE("unreadable config files raise IoError") {
    CHECK_THROWS_AS(parse_config_file("/nonexistent/config.txt", kSchema),
                    IoError);
  }
}

TEST_CASE("mesh writing") {
  SUBCASE("5x5 grid gives 25 vertices and 16 quads in storage order") {
    const std::string path = temp_path("mesh5.obj");
    write_mesh(tiny_surface(5, 5), path);
    const std::string text = read_file(path);
    // First row of vertices and the first two faces, in storage order.
    CHECK(text.rfind("v 0 0 0\n"
                     "v 0.25 0 0\n"
                     "v 0.5 0 0\n"
                     "v 0.75 0 0\n"
                     "v 1 0 0\n",
                     0) == 0);
    CHECK(text.find("f 1 2 7 6\nf 2 3 8 7\n") != std::string::npos);
    CHECK(std::count(text.begin(), text.end(), '\n') == 25 + 16);
    CHECK(std::count(text.begin(), text.end(), 'f') == 16);
  }

  SUBCASE("vertex lines use 17 significant digits") {
    const Grid2D g = Grid2D::covering(5, 5, 1.0, 1.0);
    Immersion y = Immersion::tabulate(g, [](double, double) {
      return Eigen::Vector3d(1.0 / 3.0, 0.0, 0.0);
    });
    const std::string path = temp_path("mesh_digits.obj");
    write_mesh(y, path);
    CHECK(read_file(path).find("0.33333333333333331") != std::string::npos);
  }

  SUBCASE("reruns are byte-identical") {
    const Immersion y = tiny_surface(6, 5);
    const std::string p1 = temp_path("mesh_a.obj");
    const std::string p2 = temp_path("mesh_b.obj");
    write_mesh(y, p1);
    write_mesh(y, p2);
    CHECK(read_file(p1) == read_file(p2));
    // 6*5 vertices, 5*4 faces, trailing newline.
    const std::string text = read_file(p1);
    CHECK(std::count(text.begin(), text.end(), '\n') == 50);
    CHECK(text.back() == '\n');
  }

  SUBCASE("bad paths are refused") {
    CHECK_THROWS_AS(write_mesh(tiny_surface(5, 5), "/nonexistent/dir/x.obj"),
                    IoError);
  }
}

TEST_CASE("diagnostics CSV") {
  SUBCASE("empty rows emit the header only") {
    const std::string path = temp_path("diag_empty.csv");
    write_diagnostics({}, path);
    CHECK(read_file(path) ==
          "q,deficit_sup,c0_step,c1_step,c2_norm,lambda_max\n");
  }

  SUBCASE("rows are %.17g formatted and byte-stable") {
    StageDiagnostics d;
    d.q = 1;
    d.deficit_sup = 1.0 / 3.0;
    d.c0_step = 0.25;
    d.c1_step = 2e-3;
    d.c2_norm = 10.0;
    d.lambda_max = 800.0;
    const std::string p1 = temp_path("diag_a.csv");
    const std::string p2 = temp_path("diag_b.csv");
    write_diagnostics({d}, p1);
    write_diagnostics({d}, p2);
    CHECK(read_file(p1) ==
          "q,deficit_sup,c0_step,c1_step,c2_norm,lambda_max\n"
          "1,0.33333333333333331,0.25,0.002,10,800\n");
    CHECK(read_file(p1) == read_file(p2));
  }
}

TEST_CASE("run manifest") {
  SUBCASE("atomic write leaves valid JSON and no temp file") {
    RunManifest m;
    m.subcommand = "embed";
    m.version = "1.0.0";
    m.seed = 42;
    m.grid_nx = 9;
    m.grid_ny = 9;
    m.config.reals["scale"] = 0.9;
    m.config.ints["max_stages"] = 3;
    m.diagnostics = {{"final_deficit", 5.5e-3}};
    m.outputs = {"embed.obj"};
    m.wall_seconds = 0.1;
    const std::string path = temp_path("manifest.json");
    write_manifest(m, path);
    const auto j = nlohmann::json::parse(read_file(path));
    CHECK(j["subcommand"] == "embed");
    CHECK(j["seed"] == 42);
    CHECK(j["config"]["scale"] == 0.9);
    CHECK(j["config"]["max_stages"] == 3);
    CHECK(j["diagnostics"]["final_deficit"] == 5.5e-3);
    CHECK(j["error"] == "");
    std::ifstream tmp(path + ".tmp");
    CHECK_FALSE(tmp.good());
  }

  SUBCASE("failures are recorded in the manifest") {
    RunManifest m;
    m.subcommand = "embed";
    m.error = "BudgetExceeded: stage 1";
    const std::string path = temp_path("manifest_err.json");
    write_manifest(m, path);
    const auto j = nlohmann::json::parse(read_file(path));
    CHECK(j["error"] == "BudgetExceeded: stage 1");
  }
}

TEST_CASE("command-line surface") {
  const std::string out = temp_path("cli_out");
  std::system(("mkdir -p " + out).c_str());

  SUBCASE("symbol-check reports a degenerate symbol") {
    CHECK(run_cli("symbol-check --out " + out) == 0);
    const std::string report = read_file(out + "/symbol_check.csv");
    CHECK(report.find("shear_symbol_det_max") != std::string::npos);
    const auto j =
        nlohmann::json::parse(read_file(out + "/symbol-check.manifest.json"));
    CHECK(double(j["diagnostics"]["shear_symbol_det_max"]) < 1e-12);
    CHECK(double(j["diagnostics"]["coefficient_det_identity_gap"]) < 1e-12);
  }

  SUBCASE("elasto-wave reproduces the sign-pair classification") {
    CHECK(run_cli("elasto-wave --out " + out) == 0);
    const auto j =
        nlohmann::json::parse(read_file(out + "/elasto-wave.manifest.json"));
    CHECK(j["diagnostics"]["pp_steady"] == 1.0);
    CHECK(j["diagnostics"]["mp_steady"] == 0.0);
    CHECK(j["diagnostics"]["mm_steady"] == 1.0);
    CHECK(double(j["diagnostics"]["mp_caveat_max"]) > 0.1);
  }

  SUBCASE("an infeasible embed frequency budget exits 2, manifest intact") {
    // target = 0 can never be reached before the frequency ladder hits the
    // Nyquist cap of a coarse grid.
    const std::string cfg = temp_path("embed_cfg.txt");
    std::ofstream(cfg) << "target = 0\n";
    CHECK(run_cli("embed --grid 65x65 --config " + cfg + " --out " + out) ==
          2);
    const auto j =
        nlohmann::json::parse(read_file(out + "/embed.manifest.json"));
    const std::string err = j["error"];
    CHECK(err.find("BudgetExceeded") != std::string::npos);
  }

  SUBCASE("config errors exit 2") {
    const std::string cfg = temp_path("bad_cfg.txt");
    std::ofstream(cfg) << "no_such_key = 1\n";
    CHECK(run_cli("duality-check --config " + cfg + " --out " + out) == 2);
  }

  SUBCASE("bad grid flags exit 2") {
    CHECK(run_cli("duality-check --grid nonsense --out " + out) == 2);
  }

  SUBCASE("duality-check writes a near-zero residual table") {
    CHECK(run_cli("duality-check --out " + out) == 0);
    const auto j =
        nlohmann::json::parse(read_file(out + "/duality-check.manifest.json"));
    CHECK(double(j["diagnostics"]["roundtrip_max"]) < 1e-12);
    CHECK(double(j["diagnostics"]["gauss_residual_max"]) < 1e-12);
  }
}
