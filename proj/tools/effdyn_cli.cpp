// effdyn command-line entry point.
//
//   effdyn <subcommand> [--config PATH] [--out DIR] [--threads K] [--quiet]
//
// Exit status: 0 success, 1 unexpected failure, 2 usage, and one code per
// error category (see effdyn::exit_code). Failures print one line on stderr:
//   effdyn: error category=<name> message=<text>

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "effdyn/config.hpp"
#include "effdyn/run.hpp"

namespace {

int report(effdyn::ErrorCategory c, const std::string& what) {
  std::cerr << "effdyn: error category=" << effdyn::to_string(c) << " message=" << what << "\n";
  return effdyn::exit_code(c);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) effdyn::fail(effdyn::ErrorCategory::io, "cannot read config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mean-field and Gross-Pitaevskii dynamics experiments"};
  app.set_version_flag("--version", effdyn::kVersion);
  app.require_subcommand(1);

  std::string config_path, out_dir = ".";
  int threads = 0;
  bool quiet = false, print_config = false;
  for (auto command : effdyn::all_commands()) {
    const std::string name(effdyn::to_string(command));
    auto* sub = app.add_subcommand(name, "run the " + name + " experiment");
    sub->add_option("--config", config_path, "key = value configuration file");
    sub->add_option("--out", out_dir, "output directory")->capture_default_str();
    sub->add_option("--threads", threads, "FFT threads, 0 = all cores")->capture_default_str()->check(CLI::NonNegativeNumber);
    sub->add_flag("--quiet", quiet, "suppress progress and warnings");
    sub->add_flag("--print-config", print_config, "print the resolved configuration and exit");
    sub->footer("Configuration keys and defaults:\n" + effdyn::describe_keys(command));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const auto* chosen = app.get_subcommands().front();
  const auto command = *effdyn::parse_command(chosen->get_name());
  try {
    const std::string raw = config_path.empty() ? std::string{} : read_file(config_path);
    const auto cfg = effdyn::parse_config(raw, command);
    if (print_config) {
      std::cout << effdyn::serialize(cfg);
      return 0;
    }
    effdyn::RunOptions opts;
    opts.out_dir = out_dir;
    opts.threads = threads;
    opts.raw_config = raw;
    if (!quiet) opts.log = [](const std::string& msg) { std::cerr << msg << "\n"; };
    const auto summary = effdyn::run(cfg, opts);
    if (!quiet)
      for (const auto& file : summary.files) std::cerr << "wrote " << (opts.out_dir / file).string() << "\n";
    return 0;
  } catch (const effdyn::Error& e) {
    return report(e.category(), e.what());
  } catch (const std::exception& e) {
    std::cerr << "effdyn: error category=internal message=" << e.what() << "\n";
    return 1;
  }
}
