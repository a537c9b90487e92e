#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "aislab/cli.hpp"
#include "aislab/error.hpp"

namespace aislab::cli {

namespace fs = std::filesystem;

namespace {

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot write " + path.string());
  f << text;
}

fs::path prepare_dir(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw InputError("cannot create output directory " + dir + ": " + ec.message());
  return p;
}

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

BoundsResult cmd_bounds(const BoundsConfig& config) {
  struct Instance {
    std::uint64_t seed;
    TabularMdp mdp;
    TabularAisGenerator gen;
  };
  std::vector<Instance> instances;
  if (config.preset == "toy") {
    const TabularMdp mdp = toy_mdp();
    instances.push_back({config.seed, mdp, quantizer_ais(mdp, config.partition)});
  } else if (config.preset == "identity") {
    const TabularMdp mdp = toy_mdp();
    instances.push_back({config.seed, mdp, identity_ais(mdp)});
  }
  if (!config.mdp.is_null()) {
    instances.push_back({config.seed, mdp_from_json(config.mdp.dump()), tabular_ais_from_json(config.generator.dump())});
  }
  for (int i = 0; i < config.random; ++i) {
    const std::uint64_t s = config.seed + static_cast<std::uint64_t>(i);
    BoundInstance b = random_bound_instance(s, config.max_states, config.max_actions);
    instances.push_back({s, std::move(b.mdp), std::move(b.gen)});
  }
  if (instances.empty()) throw InputError("bounds: nothing to check (set preset, random or mdp + generator)");

  const fs::path dir = prepare_dir(config.out);
  BoundsResult result;
  std::ostringstream csv;
  csv << bound_csv_header() << '\n';
  for (const Instance& inst : instances) {
    for (BoundIpm ipm : config.ipms) {
      BoundConfig bc;
      bc.setup = IpmSetup::defaults(ipm);
      bc.start_states = config.start_states;
      bc.slack = config.slack;
      bc.throw_on_violation = false;
      bc.seed = inst.seed;
      BoundReport report = bound_report(inst.mdp, inst.gen, bc);
      csv << bound_csv_row(report) << '\n';
      if (report.violated) {
        result.violated = true;
        const std::string name = "counterexample_" + std::to_string(inst.seed) + "_" + to_string(ipm) + ".json";
        write_file(dir / name, bound_counterexample_json(inst.mdp, inst.gen, report));
        result.counterexamples.push_back(name);
      }
      result.reports.push_back(std::move(report));
    }
  }
  write_file(dir / "bounds.csv", csv.str());
  return result;
}

Quartiles quartiles(std::vector<double> v) {
  if (v.empty()) throw InputError("quartiles of an empty sample");
  std::sort(v.begin(), v.end());
  auto at = [&](double q) {
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
  };
  return Quartiles{at(0.25), at(0.5), at(0.75)};
}

SeedRuns run_seeds(const Environment& env, const TrainConfig& config, std::uint64_t first_seed, int n_seeds) {
  SeedRuns runs;
  runs.results.resize(static_cast<std::size_t>(n_seeds));
  for (int i = 0; i < n_seeds; ++i) runs.seeds.push_back(first_seed + static_cast<std::uint64_t>(i));
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (int i = next++; i < n_seeds; i = next++) {
      try {
        TrainConfig c = config;
        c.seed = runs.seeds[static_cast<std::size_t>(i)];
        runs.results[static_cast<std::size_t>(i)] = train_loop(env, c);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int n_workers = std::min(thread_budget(), n_seeds);
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return runs;
}

std::string aggregate_csv_header() {
  return "label,iteration,seeds,median_return,q25_return,q75_return,median_ais_loss,median_eps_hat,median_delta_hat";
}

std::vector<std::string> aggregate_csv_rows(const SeedRuns& runs, const std::string& label) {
  std::vector<std::string> rows;
  if (runs.results.empty()) return rows;
  const std::size_t n_iter = runs.results.front().rows.size();
  for (std::size_t i = 0; i < n_iter; ++i) {
    std::vector<double> ret, loss, eps, delta;
    for (const TrainResult& r : runs.results) {
      const MetricsRow& m = r.rows[i];
      ret.push_back(m.mean_return);
      loss.push_back(m.ais_loss);
      if (m.eps_hat) eps.push_back(*m.eps_hat);
      if (m.delta_hat) delta.push_back(*m.delta_hat);
    }
    const Quartiles q = quartiles(ret);
    std::ostringstream row;
    row << label << ',' << i + 1 << ',' << runs.results.size() << ',' << num(q.median) << ',' << num(q.q25) << ','
        << num(q.q75) << ',' << num(quartiles(loss).median) << ',' << (eps.empty() ? "NA" : num(quartiles(eps).median))
        << ',' << (delta.empty() ? "NA" : num(quartiles(delta).median));
    rows.push_back(row.str());
  }
  return rows;
}

std::vector<Curve> curves_of(const SeedRuns& runs, const std::string& label) {
  Curve c;
  c.label = label;
  if (!runs.results.empty()) {
    for (std::size_t i = 0; i < runs.results.front().rows.size(); ++i) {
      std::vector<double> ret;
      for (const TrainResult& r : runs.results) ret.push_back(r.rows[i].mean_return);
      const Quartiles q = quartiles(ret);
      c.x.push_back(static_cast<double>(i + 1));
      c.median.push_back(q.median);
      c.q25.push_back(q.q25);
      c.q75.push_back(q.q75);
    }
  }
  return {c};
}

namespace {

void write_run(const fs::path& dir, const SeedRuns& runs, const std::string& label) {
  for (std::size_t i = 0; i < runs.results.size(); ++i) {
    std::ostringstream m;
    write_metrics_csv(m, runs.results[i].rows);
    write_file(dir / ("metrics_seed" + std::to_string(runs.seeds[i]) + ".csv"), m.str());
  }
  std::ostringstream agg;
  agg << aggregate_csv_header() << '\n';
  for (const auto& row : aggregate_csv_rows(runs, label)) agg << row << '\n';
  write_file(dir / "aggregate.csv", agg.str());
  std::ostringstream fin;
  fin << "seed,final_return\n";
  for (std::size_t i = 0; i < runs.results.size(); ++i) fin << runs.seeds[i] << ',' << num(runs.results[i].final_return) << '\n';
  write_file(dir / "final.csv", fin.str());
  write_file(dir / "curve.svg", svg_chart(curves_of(runs, label), label, "median discounted return"));
}

}  // namespace

SeedRuns cmd_train(const TrainRun& run) {
  const auto env = make_env(run.env);
  SeedRuns runs = run_seeds(*env, run.train, run.seed, run.seeds);
  write_run(prepare_dir(run.out), runs, run.env.name + " " + to_string(run.train.agent));
  return runs;
}

std::vector<SeedRuns> cmd_compare(const CompareConfig& config) {
  if (config.variants.size() < 2) throw InputError("compare: need at least two variants");
  const auto env = make_env(config.env);
  const fs::path dir = prepare_dir(config.out);
  std::vector<SeedRuns> all;
  std::vector<Curve> curves;
  std::ostringstream csv;
  csv << aggregate_csv_header() << '\n';
  for (const Variant& v : config.variants) {
    all.push_back(run_seeds(*env, v.train, config.seed, config.seeds));
    write_run(prepare_dir((dir / v.label).string()), all.back(), v.label);
    for (const auto& row : aggregate_csv_rows(all.back(), v.label)) csv << row << '\n';
    const auto c = curves_of(all.back(), v.label);
    curves.insert(curves.end(), c.begin(), c.end());
  }
  write_file(dir / "compare.csv", csv.str());
  write_file(dir / "compare.svg", svg_chart(curves, config.env.name + " comparison", "median discounted return"));
  return all;
}

}  // namespace aislab::cli
