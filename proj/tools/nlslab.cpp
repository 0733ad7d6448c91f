// nlslab <subcommand> --manifest <path> [--out <dir>] [--threads N]

#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>

#include "nls/parallel.hpp"
#include "nls/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Manifest driven experiments for the nonlinear Schroedinger inverse problem"};
  app.require_subcommand(1);
  app.set_version_flag("--version", nls::kVersion);

  std::string manifest, out;
  int threads = 0;
  for (const auto& name : nls::operations()) {
    auto* sub = app.add_subcommand(name, "run the " + name + " experiment of a manifest");
    sub->add_option("--manifest", manifest, "manifest path")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "output directory, overrides experiment.output");
    sub->add_option("--threads", threads, "worker threads, overrides NLS_THREADS")->check(CLI::PositiveNumber);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  std::string sub = app.get_subcommands().front()->get_name();
  nls::RunOptions opt;
  opt.out = out;
  opt.threads = threads;
  nls::RunResult res = nls::run_manifest(manifest, sub, opt);
  if (res.exit_code == 2) {
    std::cerr << res.message << "\n";
    return 2;
  }
  std::cout << nls::summary_text(res.report);
  if (res.exit_code != 0) {
    std::cerr << "run failed: " << res.message << "\n";
    return res.exit_code;
  }
  std::cout << "outputs in " << res.out.string() << "\n";
  return 0;
}
