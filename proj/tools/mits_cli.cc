#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "mits/scenario.hpp"
#include "mits/simharness.hpp"

namespace fs = std::filesystem;

namespace {

constexpr auto kValidationError = 1;
constexpr auto kRuntimeError = 2;

void write_lines(fs::path const& p, std::vector<std::string> const& lines) {
  auto out = std::ofstream{p, std::ios::binary};
  for (auto const& l : lines) {
    out << l << '\n';
  }
  if (!out) {
    throw std::runtime_error{"cannot write " + p.string()};
  }
}

void write_report(fs::path const& dir, mits::run_report const& r) {
  fs::create_directories(dir);
  write_lines(dir / "metrics.json", {mits::encode_metrics(r.metrics)});
  write_lines(dir / "events.log", r.event_log);
  write_lines(dir / "warnings.log", r.warning_log);
  write_lines(dir / "actions.log", r.action_log);
  write_lines(dir / "dissemination.log", r.dissemination_log);
}

}  // namespace

int main(int argc, char** argv) {
  auto app = CLI::App{"Multimodal transport disturbance simulator"};
  app.require_subcommand(1);

  auto scenario_path = std::string{};
  auto out_dir = std::string{};
  auto seed = std::optional<std::uint64_t>{};
  auto no_adapt = false;
  auto broadcast = false;

  auto* validate = app.add_subcommand("validate", "Check a scenario file");
  validate->add_option("scenario", scenario_path)->required();

  auto* run = app.add_subcommand("run", "Simulate a scenario once");
  run->add_option("scenario", scenario_path)->required();
  run->add_option("--out", out_dir, "Output directory")->required();
  run->add_option("--seed", seed, "Override the scenario seed");
  run->add_flag("--no-adapt", no_adapt, "Disable detection, warnings and adaptation");
  run->add_flag("--broadcast", broadcast, "Flood warnings to every reachable device");

  auto* cmp = app.add_subcommand("compare", "Run without adaptation, broadcast and targeted");
  cmp->add_option("scenario", scenario_path)->required();
  cmp->add_option("--out", out_dir, "Output directory")->required();
  cmp->add_option("--seed", seed, "Override the scenario seed");

  try {
    app.parse(argc, argv);
  } catch (CLI::ParseError const& e) {
    return app.exit(e) == 0 ? 0 : kRuntimeError;
  }

  auto sc = mits::scenario{};
  try {
    sc = mits::load_scenario(scenario_path);
  } catch (std::exception const& e) {
    std::cerr << "invalid scenario: " << e.what() << '\n';
    return kValidationError;
  }

  try {
    if (validate->parsed()) {
      std::cout << "ok: " << sc.net.nodes().size() << " nodes, "
                << sc.net.segments().size() << " segments, " << sc.disturbances.size()
                << " disturbances, " << sc.devices.size() << " devices\n";
    } else if (run->parsed()) {
      auto opt = mits::run_options{};
      opt.adapt = !no_adapt;
      opt.broadcast = broadcast;
      opt.score_relevance = true;
      opt.seed = seed;
      auto const r = mits::run(sc, opt);
      write_report(out_dir, r);
      std::cout << "trips " << r.metrics.trips_completed << "/" << r.metrics.trips_total
                << " completed, messages " << r.metrics.messages_sent << " of baseline "
                << r.metrics.broadcast_baseline << '\n';
    } else if (cmp->parsed()) {
      auto const c = mits::compare(sc, seed);
      auto const dir = fs::path{out_dir};
      write_report(dir / "no_adapt", c.no_adapt);
      write_report(dir / "broadcast", c.broadcast);
      write_report(dir / "targeted", c.targeted);
      write_lines(dir / "compare.json", {mits::encode_comparison(c)});
      std::cout << mits::encode_comparison(c) << '\n';
    }
  } catch (mits::validation_error const& e) {
    std::cerr << "invalid scenario: " << e.what() << '\n';
    return kValidationError;
  } catch (std::exception const& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return 0;
}
