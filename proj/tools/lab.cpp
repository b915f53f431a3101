// lab: config-driven experiment runner.
//   lab <command> --config FILE [--jobs N] [--out DIR]
//   lab schema <command>      print the config key table (markdown)
// Exit codes: 0 pass, 2 check failure, 3 config/input error, 1 anything else.

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "kinlab/lab/commands.hpp"

namespace lab = kinlab::lab;

namespace {

int run_command(const lab::Command& cmd, const std::string& config, unsigned jobs, std::string out) {
  if (out.empty()) {
    const char* env = std::getenv("KINLAB_OUT");
    out = std::string(env && *env ? env : "lab_out") + "/" + cmd.name;
  }
  const auto report = cmd.run(lab::read_config_file(config), jobs);
  lab::write_report(report, out);
  for (const auto& w : report.result.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  for (const auto& c : report.result.checks) {
    std::printf("[%s] %s", c.pass ? "PASS" : "FAIL", c.name.c_str());
    for (const auto& m : c.metrics) std::printf(" %s=%s", m.key.c_str(), lab::format_double(m.value).c_str());
    std::printf("\n");
  }
  std::printf("%s: %s (config %s, %.2fs) -> %s\n", cmd.name.c_str(), report.pass() ? "pass" : "FAIL", report.hash.c_str(),
              report.wall_clock, out.c_str());
  return report.pass() ? 0 : 2;
}

void print_schema(const lab::Command& cmd) {
  std::printf("| key | type | default | range | meaning |\n|---|---|---|---|---|\n");
  for (const auto& f : cmd.fields())
    std::printf("| `%s` | %s | %s | %s | %s |\n", f.key.c_str(), f.type.c_str(), f.required ? "(required)" : f.get().dump().c_str(),
                f.range.c_str(), f.doc.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kinetic regularity lab"};
  app.require_subcommand(1);
  std::string config, out, schema_of;
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  const lab::Command* chosen = nullptr;
  for (const auto& c : lab::commands()) {
    auto* sub = app.add_subcommand(c.name, c.summary);
    sub->add_option("--config", config, "JSON config file")->required();
    sub->add_option("--jobs", jobs, "worker cap")->check(CLI::Range(1u, 1024u));
    sub->add_option("--out", out, "output directory (default $KINLAB_OUT/<command> or lab_out/<command>)");
    sub->callback([&chosen, &c] { chosen = &c; });
  }
  auto* schema = app.add_subcommand("schema", "print the config schema of a command");
  schema->add_option("command", schema_of)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 3;
  }

  try {
    if (schema->parsed()) {
      print_schema(lab::find_command(schema_of));
      return 0;
    }
    return run_command(*chosen, config, jobs, out);
  } catch (const kinlab::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 3;
  } catch (const kinlab::DomainError& e) {
    std::fprintf(stderr, "input error: %s\n", e.what());
    return 3;
  } catch (const kinlab::DimensionError& e) {
    std::fprintf(stderr, "input error: %s\n", e.what());
    return 3;
  } catch (const kinlab::ConvergenceError& e) {
    std::fprintf(stderr, "check failure: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
