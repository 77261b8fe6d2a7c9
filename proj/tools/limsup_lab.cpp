// limsup-lab: run one experiment from an INI config and write CSV reports.
#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <limsup/limsup.hpp>

namespace {

int fail(const std::string& kind, const std::vector<std::string>& lines) {
  std::cerr << "error: " << kind << "\n";
  for (const auto& l : lines) std::cerr << "  " << l << "\n";
  return 2;
}

int run(limsup::Task task, const std::string& config_path, const std::string& out_dir,
        std::optional<std::uint64_t> seed) {
  using namespace limsup;
  std::ifstream in(config_path);
  if (!in) return fail("io", {"cannot read config " + config_path});
  try {
    ExperimentConfig c = parse_config(in);
    if (c.task && *c.task != task)
      return fail("validation", {"task.name: config is for '" + std::string(task_name(*c.task)) +
                                 "' but subcommand is '" + task_name(task) + "'"});
    c.task = task;
    if (seed) c.seed = seed;
    c.echo.push_back("cli.subcommand = " + std::string(task_name(task)));
    if (seed) c.echo.push_back("cli.seed = " + std::to_string(*seed));
    auto bundle = run_experiment(c);
    auto files = emit_reports(bundle, out_dir);
    for (const auto& f : files) std::cout << f.string() << "\n";
    return 0;
  } catch (const ValidationError& e) {
    return fail("validation", e.fields());
  } catch (const SizeError& e) {
    return fail("size", {e.what()});
  } catch (const RateError& e) {
    return fail("rate", {e.what(), "level: " + std::to_string(e.level())});
  } catch (const UseStatisticalError& e) {
    return fail("use-statistical", {e.what()});
  } catch (const InternalError& e) {
    return fail("internal", {e.what()});
  } catch (const std::exception& e) {
    return fail("runtime", {e.what()});
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"limsup-lab: measures, ubiquity, series and hit statistics for limsup sets of rectangles"};
  app.require_subcommand(1);

  std::string config, out;
  std::optional<std::uint64_t> seed;
  std::optional<limsup::Task> chosen;
  for (limsup::Task t : {limsup::Task::Measure, limsup::Task::Ubiquity, limsup::Task::Series,
                         limsup::Task::ChungErdos, limsup::Task::Hits, limsup::Task::ScalingProbe}) {
    auto* sub = app.add_subcommand(limsup::task_name(t), std::string("run the ") + limsup::task_name(t) + " task");
    sub->add_option("--config", config, "INI config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "output directory")->required();
    sub->add_option("--seed", seed, "override task.seed");
    sub->callback([&chosen, t] { chosen = t; });
  }
  CLI11_PARSE(app, argc, argv);
  return run(*chosen, config, out, seed);
}
