#include <cstdio>
#include <string>

#include "CLI11.hpp"

#include "obscert/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Explicit observability constants: sup_Omega |f| <= C sup_E |f|"};
  app.require_subcommand(1);

  std::string config;
  std::string output_dir;
  long long seed = -1;
  auto add = [&](const char* name, const char* help) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("config", config, "run configuration (INI)")->required();
    sub->add_option("--output-dir", output_dir, "overrides [output] dir");
    sub->add_option("--seed", seed, "overrides [run] seed")->check(CLI::NonNegativeNumber);
    return sub;
  };
  CLI::App* certify = add("certify", "verify hypotheses, certify C, check soundness");
  CLI::App* sweep = add("sweep", "certify across |E| fractions, degrees n or an eigenfunction family");
  CLI::App* verify = add("verify", "check the explicitly configured hypothesis certificates");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : obscert::exit_config;
  }

  obscert::CommandResult res;
  try {
    obscert::RunConfig cfg = obscert::load_config(config);
    if (!output_dir.empty()) cfg.output_dir = output_dir;
    if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
    if (certify->parsed()) res = obscert::cmd_certify(cfg);
    else if (sweep->parsed()) res = obscert::cmd_sweep(cfg);
    else if (verify->parsed()) res = obscert::cmd_verify(cfg);
  } catch (const obscert::Error& e) {
    std::fprintf(stderr, "%s error: %s\n", obscert::to_string(e.stage()), e.what());
    return obscert::exit_code(e.stage());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return obscert::exit_internal;
  }
  for (const std::string& f : res.files) std::printf("wrote %s\n", f.c_str());
  std::fprintf(res.exit_code == 0 ? stdout : stderr, "%s\n", res.summary.c_str());
  return res.exit_code;
}
