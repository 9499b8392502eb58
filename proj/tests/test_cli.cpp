#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "obscert/commands.hpp"
#include "obscert/config.hpp"
#include "obscert/csv.hpp"
#include "obscert/masks.hpp"

using namespace obscert;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("obscert_test_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

RunConfig parse(const std::string& text, const fs::path& out) {
  std::istringstream in(text);
  RunConfig cfg = parse_config(in);
  cfg.output_dir = out.string();
  return cfg;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

nlohmann::json report(const fs::path& dir, const std::string& name) {
  return nlohmann::json::parse(slurp(dir / (name + ".report.json")));
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(slurp(p));
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> row;
    std::string field;
    std::istringstream ls(line);
    while (std::getline(ls, field, ',')) row.push_back(field);
    rows.push_back(row);
  }
  return rows;
}

int code_of(const std::string& text) {
  try {
    std::istringstream in(text);
    (void)parse_config(in);
    return 0;
  } catch (const Error& e) {
    return exit_code(e.stage());
  }
}

const char* kSinTenth = R"(
[run]
name = sin_tenth
seed = 7
[domain]
kind = torus
dimension = 1
cells = 1024
[function]
kind = trig_sum
frequencies = 1
amplitudes = 1
phases = -1.5707963267948966
[set]
kind = random
fraction = 0.1
)";

}  // namespace

TEST_CASE("malformed configurations are config errors") {
  CHECK(code_of("[domain]\nkind = torus\n") == exit_config);                       // no [function]
  CHECK(code_of("[run]\nbogus = 1\n[domain]\nkind = torus\n[function]\nkind = constant\nvalue = 1\n"
                "[set]\nkind = full\n") == exit_config);
  CHECK(code_of("[weird]\n[domain]\nkind = torus\n[function]\nkind = constant\nvalue = 1\n"
                "[set]\nkind = full\n") == exit_config);
  CHECK(code_of("[domain]\nkind = torus\n[function]\nkind = trig_sum\nfrequencies = 1 | 2\n"
                "amplitudes = 1\n[set]\nkind = full\n") == exit_config);
  CHECK(code_of("[domain]\nkind = disk\ndimension = 1\n[function]\nkind = constant\nvalue = 1\n"
                "[set]\nkind = full\n") == exit_config);
  CHECK(code_of("[domain]\nkind = torus\ncells = abc\n[function]\nkind = constant\nvalue = 1\n"
                "[set]\nkind = full\n") == exit_config);
  CHECK(code_of("[domain]\nkind = torus\n[function]\nkind = constant\nvalue = 1\n"
                "[set]\nkind = random\nfraction = 1.5\n") == exit_config);
  CHECK(code_of("[domain]\nkind = torus\n[function]\nkind = constant\nvalue = 1\n"
                "[set]\nkind = full\n") == 0);
}

TEST_CASE("exit codes per stage") {
  CHECK(exit_code(Stage::config) == 2);
  CHECK(exit_code(Stage::hypothesis) == 3);
  CHECK(exit_code(Stage::infeasible) == 4);
  CHECK(exit_code(Stage::resolution) == 4);
  CHECK(exit_code(Stage::internal) == 1);
}

TEST_CASE("certify: a constant function is sound with C >= 1") {
  const fs::path dir = scratch("constant");
  const RunConfig cfg = parse(R"(
[run]
name = const
[domain]
kind = box
dimension = 2
cells = 64
[function]
kind = constant
value = 3
[set]
kind = region
shape = ball
center = 0.3, 0.6
radius = 0.1
)", dir);
  const CommandResult r = cmd_certify(cfg);
  CHECK(r.exit_code == exit_ok);
  const auto j = report(dir, "const");
  CHECK(j["exit_code"] == 0);
  CHECK(j["certificate"]["C"]["log10"].get<double>() >= 0.0);
  CHECK(j["empirical"]["ratio"].get<double>() == 1.0);
  CHECK(j["soundness"]["passed"] == true);
}

TEST_CASE("certify: sin(2 pi x) with a random tenth reports C, ratio and slack") {
  const fs::path dir = scratch("sin");
  const CommandResult r = cmd_certify(parse(kSinTenth, dir));
  CHECK(r.exit_code == exit_ok);
  const auto j = report(dir, "sin_tenth");
  CHECK(j["certificate"]["branch"] == "sigma1");
  const double log10C = j["certificate"]["C"]["log10"];
  const double ratio = j["empirical"]["ratio"];
  const double slack = j["soundness"]["slack"];
  CHECK(ratio >= 1.0);
  CHECK(slack == doctest::Approx(log10C * std::log(10.0) - std::log(ratio)).epsilon(1e-12));
  CHECK(j["audit"]["passed"] == true);
  CHECK(j["set"]["relative"].get<double>() == doctest::Approx(0.1).epsilon(1e-2));
  CHECK(j["mask_generator"] == kMaskGenerator);
}

TEST_CASE("certify: sigma = 2 with b = 1 on the unique-continuation branch exits with a hypothesis failure") {
  const fs::path dir = scratch("ucp");
  const CommandResult r = cmd_certify(parse(R"(
[run]
name = ucp
branch = ucp
[domain]
kind = box
dimension = 1
[function]
kind = polynomial
powers = 0 | 1
coefficients = 1 | 0.5
[set]
kind = region
shape = interval
lower = 0.2
upper = 0.3
[gevrey]
mode = closed_form
sigma = 2
[ucp]
mode = explicit
a = 1
b = 1
)", dir));
  CHECK(r.exit_code == exit_hypothesis);
  CHECK(report(dir, "ucp")["exit_code"] == exit_hypothesis);
}

TEST_CASE("sweep without axes is a config error") {
  const fs::path dir = scratch("empty_sweep");
  CHECK(cmd_sweep(parse(kSinTenth, dir)).exit_code == exit_config);
}

TEST_CASE("fraction sweep: ratios do not decrease as E shrinks, every row sound") {
  const fs::path dir = scratch("fractions");
  const RunConfig cfg = parse(std::string(kSinTenth) + "[sweep]\nfractions = 0.5 | 0.25 | 0.125 | 0.0625 | 0.03125\n", dir);
  const CommandResult r = cmd_sweep(cfg);
  CHECK(r.exit_code == exit_ok);
  const auto rows = read_csv(dir / "sin_tenth.sweep.csv");
  REQUIRE(rows.size() == 6);
  CHECK(rows[0] == std::vector<std::string>{"axis", "value", "log10_C", "C", "ratio", "slack", "n", "r", "sound", "status"});
  double prev = 0.0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i][0] == "fraction");
    const double ratio = std::stod(rows[i][4]);
    CHECK(ratio >= prev);
    prev = ratio;
    CHECK(rows[i][8] == "true");
  }
}

TEST_CASE("degree sweep records one row per n") {
  const fs::path dir = scratch("degrees");
  const RunConfig cfg = parse(std::string(kSinTenth) + "[sweep]\nn = 2 | 14\n", dir);
  CHECK(cmd_sweep(cfg).exit_code == exit_ok);
  const auto rows = read_csv(dir / "sin_tenth.sweep.csv");
  REQUIRE(rows.size() == 14);
  int certified = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i][0] == "n");
    CHECK(std::stoi(rows[i][1]) == static_cast<int>(i) + 1);
    if (rows[i][9] == "sound") ++certified;
  }
  CHECK(certified >= 1);
}

TEST_CASE("verify: valid sin certificate, oversized delta, constant") {
  const fs::path dir = scratch("verify");
  const std::string base = R"(
[run]
name = v
[domain]
kind = torus
dimension = 1
[function]
kind = trig_sum
frequencies = 1
amplitudes = 1
phases = -1.5707963267948966
[set]
kind = full
[gevrey]
mode = explicit
M = 1
sigma = 1
)";
  CHECK(cmd_verify(parse(base + "delta = 0.15915494309189535\n", dir)).exit_code == exit_ok);
  CHECK(cmd_verify(parse(base + "delta = 1\n", dir)).exit_code == exit_hypothesis);
  const auto j = report(dir, "v");
  CHECK(j["exit_code"] == exit_hypothesis);
  CHECK(j.dump().find("worst_k") != std::string::npos);

  const std::string constant = R"(
[run]
name = c
[domain]
kind = torus
dimension = 1
[function]
kind = constant
value = 5
[set]
kind = full
[gevrey]
mode = explicit
M = 1
delta = 100
sigma = 1
)";
  CHECK(cmd_verify(parse(constant, dir)).exit_code == exit_ok);
  CHECK(cmd_verify(parse(std::string(kSinTenth), dir)).exit_code == exit_config);
}

TEST_CASE("identical configs give byte-identical reports and CSVs") {
  const fs::path a = scratch("det_a");
  const fs::path b = scratch("det_b");
  const std::string text = std::string(kSinTenth) + "[sweep]\nfractions = 0.3 | 0.1\n";
  CHECK(cmd_sweep(parse(text, a)).exit_code == exit_ok);
  CHECK(cmd_sweep(parse(text, b)).exit_code == exit_ok);
  CHECK(slurp(a / "sin_tenth.report.json") == slurp(b / "sin_tenth.report.json"));
  CHECK(slurp(a / "sin_tenth.sweep.csv") == slurp(b / "sin_tenth.sweep.csv"));
  CHECK_FALSE(slurp(a / "sin_tenth.report.json").empty());
}

TEST_CASE("CSV quoting") {
  CHECK(csv_field("plain") == "plain");
  CHECK(csv_field("a,b") == "\"a,b\"");
  CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(csv_field("two\nlines") == "\"two\nlines\"");
  CHECK(csv_row({"x", "1,5"}) == "x,\"1,5\"\r\n");
  CHECK(format_number(0.5) == "0.5");
}

TEST_CASE("random masks are deterministic, nested and hit the target measure") {
  const Grid g(Domain::torus(1.0, 1.0), 64);
  for (MaskStyle style : {MaskStyle::blobs, MaskStyle::scatter}) {
    const auto pri = priority_field(g, 42, style);
    CHECK(pri == priority_field(g, 42, style));
    CHECK(pri != priority_field(g, 43, style));
    MeasurableSet prev = mask_from_priority(g, pri, 0.05);
    for (double frac : {0.1, 0.2, 0.4, 0.8}) {
      const MeasurableSet cur = mask_from_priority(g, pri, frac);
      CHECK(cur.count() == static_cast<std::size_t>(std::floor(frac * g.interior_count())));
      for (std::size_t i = 0; i < g.size(); ++i)
        if (prev.contains_cell(i)) CHECK(cur.contains_cell(i));
      prev = cur;
    }
    CHECK(random_mask(g, 0.3, 9, style).count() == random_mask(g, 0.3, 9, style).count());
  }
}
