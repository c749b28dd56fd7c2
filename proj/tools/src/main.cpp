#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "commands.hpp"
#include "config.hpp"
#include "ndecode/error.hpp"

namespace {

using namespace ndecode::cli;

using Command = int (*)(const Context&, std::ostream&);

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cross-subject fMRI-to-image retrieval on synthetic or packed data"};
  app.require_subcommand(1);

  std::string config_path, out_dir = ".", in_dir, format = "text";
  std::optional<std::uint64_t> seed;
  std::size_t threads = 1;
  bool dump = false;
  app.add_option("--config", config_path, "INI experiment config")->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "Output directory")->capture_default_str();
  app.add_option("--in", in_dir, "Input directory (defaults to --out)");
  app.add_option("--seed", seed, "Replace every seed in the config");
  app.add_option("--threads", threads, "Worker threads for sweep")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--format", format, "Report format")->check(CLI::IsMember({"text", "csv"}))->capture_default_str();
  app.add_flag("--dump-config", dump, "Print the effective config and exit");

  const std::map<std::string, std::pair<Command, const char*>> commands{
      {"gen-cohort", {cmd_gen_cohort, "Write a synthetic cohort as NDVOL series plus stimuli.ndpk"}},
      {"build-pairs", {cmd_build_pairs, "Average, resample and split volumes into train/test packs"}},
      {"train", {cmd_train, "Train an encoder on train.ndpk"}},
      {"eval", {cmd_eval, "Score encoder.ndwt on test.ndpk per subject"}},
      {"similarity", {cmd_similarity, "Rank-credit similarity of the target subject to the others"}},
      {"shape-check", {cmd_shape_check, "Validate the built-in architecture tables"}},
      {"sweep", {cmd_sweep, "Unseen-subject retrieval over a training-subject-count grid"}},
  };
  for (const auto& [name, entry] : commands) app.add_subcommand(name, entry.second);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    Context ctx;
    if (!config_path.empty()) ctx.config = load_config(config_path);
    if (seed) override_seeds(ctx.config, *seed);
    ctx.out_dir = out_dir;
    ctx.in_dir = in_dir.empty() ? out_dir : in_dir;
    ctx.threads = threads;
    ctx.format = format == "csv" ? Format::csv : Format::text;
    if (dump) {
      std::cout << dump_config(ctx.config);
      return 0;
    }
    const auto* sub = app.get_subcommands().front();
    return commands.at(sub->get_name()).first(ctx, std::cout);
  } catch (const ndecode::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
