#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "aislab/cli.hpp"
#include "aislab/error.hpp"

namespace aislab::cli {

namespace {

Json load_config(const std::string& path, const std::string& command) {
  if (path.empty()) return Json::object();
  std::ifstream f(path);
  if (!f) throw InputError("cannot read config " + path);
  Json j = Json::parse(f);
  if (!j.is_object()) throw InputError("config must be a JSON object");
  if (j.contains("command") && j.at("command").get<std::string>() != command) {
    throw InputError("config is for command '" + j.at("command").get<std::string>() + "', not '" + command + "'");
  }
  return j;
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

void print_final(std::ostream& out, const std::string& label, const SeedRuns& runs) {
  std::vector<double> finals;
  for (const auto& r : runs.results) finals.push_back(r.final_return);
  const Quartiles q = quartiles(finals);
  out << label << ": final return median " << q.median << " (IQR " << q.q25 << " .. " << q.q75 << ") over "
      << finals.size() << " seeds\n";
}

}  // namespace

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Approximate information state lab: bound campaigns, training runs and comparisons"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;

  auto* bounds = app.add_subcommand("bounds", "check the performance bounds on tabular instances");
  std::optional<int> random;
  std::string ipms;
  std::string preset;
  bounds->add_option("--config", config_path, "JSON config");
  bounds->add_option("--out", out_dir, "output directory");
  bounds->add_option("--seed", seed, "base seed");
  bounds->add_option("--random", random, "number of random instances");
  bounds->add_option("--ipms", ipms, "comma-separated list of tv, w, mmd");
  bounds->add_option("--preset", preset, "toy or identity");

  auto* train = app.add_subcommand("train", "train agents over several seeds");
  auto* compare = app.add_subcommand("compare", "train several variants on shared seeds");
  std::string env_name;
  std::string agent;
  std::optional<int> seeds;
  std::optional<int> iterations;
  for (auto* sub : {train, compare}) {
    sub->add_option("--config", config_path, "JSON config");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed, "first seed");
    sub->add_option("--seeds", seeds, "number of seeds");
    sub->add_option("--env", env_name, "toy, pointmass or bandit");
    sub->add_option("--agent", agent, "ais-ac, ais-pg, ais-ppo or memoryless");
    sub->add_option("--iterations", iterations, "training iterations");
  }
  auto* demo = app.add_subcommand("toy-demo", "walk through the four-state example");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*bounds) {
      Json j = load_config(config_path, "bounds");
      if (random) j["random"] = *random;
      if (seed) j["seed"] = *seed;
      if (!ipms.empty()) j["ipms"] = split(ipms);
      if (!preset.empty()) j["preset"] = preset;
      if (!out_dir.empty()) j["out"] = out_dir;
      const BoundsResult r = cmd_bounds(parse_bounds(j));
      int violated = 0;
      for (const auto& rep : r.reports) violated += rep.violated;
      out << r.reports.size() << " bound checks, " << violated << " violated\n";
      for (const auto& f : r.counterexamples) out << "counterexample written: " << f << "\n";
      return r.violated ? kExitViolation : kExitOk;
    }
    if (*train || *compare) {
      const std::string command = *train ? "train" : "compare";
      Json j = load_config(config_path, command);
      if (seed) j["seed"] = *seed;
      if (seeds) j["seeds"] = *seeds;
      if (!env_name.empty()) j["env"] = env_name;
      if (!agent.empty()) j["agent"] = agent;
      if (iterations) j["train"]["iterations"] = *iterations;
      if (!out_dir.empty()) j["out"] = out_dir;
      if (*train) {
        const TrainRun run = parse_train(j);
        print_final(out, to_string(run.train.agent), cmd_train(run));
      } else {
        const CompareConfig c = parse_compare(j);
        const auto all = cmd_compare(c);
        for (std::size_t i = 0; i < all.size(); ++i) print_final(out, c.variants[i].label, all[i]);
      }
      return kExitOk;
    }
    if (*demo) return print_toy_report(analyze_toy(), out);
  } catch (const BoundViolation& e) {
    err << "bound violated: " << e.what() << "\n";
    return kExitViolation;
  } catch (const InputError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const Json::exception& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}

}  // namespace aislab::cli
