#include "icea/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "icea/dataset.hpp"
#include "icea/gauss.hpp"
#include "icea/orchestrator.hpp"
#include "icea/textio.hpp"
#include "json.hpp"

namespace icea {

namespace {

namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitBudget = 2;

double fit_slope(const std::vector<std::pair<double, double>>& pts) {
  const double n = static_cast<double>(pts.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (auto [x, y] : pts) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

FeatureAssignment parse_agent_sets(const std::string& text) {
  FeatureAssignment assign;
  std::stringstream groups(text);
  std::string group;
  while (std::getline(groups, group, ';')) {
    std::vector<size_t> features;
    std::stringstream fs_(group);
    std::string cell;
    while (std::getline(fs_, cell, ','))
      features.push_back(static_cast<size_t>(std::stoul(cell)));
    assign.agent_features.push_back(std::move(features));
  }
  return assign;
}

// ---- gen-data ----

struct GenDataArgs {
  std::string rule = "friedman1";
  size_t n = 6000;
  double noise = 0.0;
  uint64_t seed = 1;
  bool normalize = false;
  std::string out;
};

int cmd_gen_data(const GenDataArgs& args) {
  GeneratorSpec spec{rule_from_name(args.rule), args.n, args.noise, args.seed,
                     args.normalize};
  Dataset ds = generate(spec);
  write_csv(ds, args.out);
  std::cout << "wrote " << args.out << " (" << ds.rows() << " rows, " << ds.features()
            << " features)\n";
  return kExitOk;
}

// ---- train ----

struct TrainArgs {
  std::string data;
  std::string rule = "friedman1";
  size_t n = 6000;
  double noise = 0.0;
  uint64_t seed = 1;
  bool normalize = false;

  size_t train_rows = 0;
  size_t test_rows = 0;
  uint64_t split_seed = 1;

  std::string algo = "icea";
  int system = 0;
  std::string agents;
  std::string schedule = "roundrobin";
  double lambda = 0.0;

  double eps = 1e-6;
  bool eps_absolute = false;
  int max_updates = 500;

  int depth = 4;
  int min_leaf = 5;
  double min_gain = 0.0;
  double shrinkage = 1.0;

  std::string carrier = "inproc";
  uint16_t port_base = 0;

  std::string out;
  bool audit_test_isolation = false;
};

Schedule schedule_from_args(const TrainArgs& args) {
  if (args.schedule == "roundrobin") return Schedule::round_robin();
  if (args.schedule == "greedy") return Schedule::greedy();
  if (args.schedule == "greedy-penalized") return Schedule::greedy_penalized(args.lambda);
  throw std::invalid_argument("unknown schedule '" + args.schedule + "'");
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << text;
}

// The training trajectory must not depend on test targets: rerun blind and
// compare every training-side field.
bool same_training_trajectory(const RunMetrics& with_test, const RunMetrics& blind) {
  if (with_test.updates.size() != blind.updates.size()) return false;
  if (with_test.converged != blind.converged) return false;
  for (size_t i = 0; i < blind.updates.size(); ++i) {
    const auto& a = with_test.updates[i];
    const auto& b = blind.updates[i];
    if (a.update != b.update || a.round != b.round || a.agent != b.agent ||
        a.train_mse != b.train_mse || a.leaves != b.leaves)
      return false;
  }
  return true;
}

int cmd_train(const TrainArgs& args) {
  Dataset source = args.data.empty()
                       ? generate(GeneratorSpec{rule_from_name(args.rule), args.n,
                                                args.noise, args.seed, args.normalize})
                       : read_csv(args.data);

  Dataset train;
  Dataset test;
  bool have_test = false;
  if (args.train_rows > 0) {
    auto parts = split(source, args.train_rows, args.test_rows, args.split_seed);
    train = std::move(parts.first);
    test = std::move(parts.second);
    have_test = args.test_rows > 0;
  } else {
    train = std::move(source);
    apply_pending_normalization(train);
  }

  FeatureAssignment assign;
  if (!args.agents.empty()) assign = parse_agent_sets(args.agents);
  else if (args.system > 0) assign = assignment_system(args.system);
  else if (args.algo != "boost")
    throw std::invalid_argument("train: pass --system or --agents for " + args.algo);

  StopRule stop{args.eps, !args.eps_absolute, args.max_updates};
  TreeParams params{args.depth, args.min_leaf, args.min_gain};
  TransportConfig config{args.carrier == "socket" ? TransportConfig::Carrier::LocalSocket
                                                  : TransportConfig::Carrier::InProcess,
                         args.port_base};
  if (args.carrier != "socket" && args.carrier != "inproc")
    throw std::invalid_argument("unknown carrier '" + args.carrier + "'");
  Schedule schedule = schedule_from_args(args);

  fs::create_directories(fs::path(args.out) / "models");

  nlohmann::json info;
  info["algo"] = args.algo;
  if (args.data.empty()) {
    info["dataset"] = {{"rule", args.rule}, {"n", args.n},     {"noise_sd", args.noise},
                       {"seed", args.seed}, {"normalize", args.normalize}};
  } else {
    info["dataset"] = {{"file", args.data}};
  }
  if (args.train_rows > 0)
    info["split"] = {{"train_rows", args.train_rows},
                     {"test_rows", args.test_rows},
                     {"seed", args.split_seed}};
  if (!args.agents.empty()) info["agents"] = args.agents;
  else if (args.system > 0) info["system"] = args.system;
  info["schedule"] = args.schedule;
  if (args.schedule == "greedy-penalized") info["lambda"] = args.lambda;
  info["stop"] = {{"eps", args.eps},
                  {"eps_relative", !args.eps_absolute},
                  {"max_updates", args.max_updates}};
  info["tree"] = {{"max_depth", args.depth},
                  {"min_samples_leaf", args.min_leaf},
                  {"min_gain", args.min_gain}};
  info["shrinkage"] = args.shrinkage;
  info["carrier"] = args.carrier;

  RunMetrics metrics;
  if (args.algo == "icea" || args.algo == "boost") {
    FeatureAssignment effective = assign;
    if (args.algo == "boost") {
      effective.agent_features.assign(1, {});
      for (size_t f = 0; f < train.features(); ++f)
        effective.agent_features[0].push_back(f);
    }
    RunResult run = run_icea(train, have_test ? &test : nullptr, effective, schedule,
                             stop, params, config, args.shrinkage);
    metrics = run.metrics;

    for (const auto& model : run.models)
      write_text_file(fs::path(args.out) / "models" /
                          ("agent_" + std::to_string(model.agent_id) + ".json"),
                      model.to_json() + "\n");

    info["memory_audit"] = {{"pass", run.audit.pass},
                            {"fusion_protocol_peak", run.audit.fusion_protocol_peak},
                            {"lines", run.audit.lines}};

    if (args.audit_test_isolation) {
      if (!have_test) {
        info["test_isolation"] = "no-test-set";
      } else {
        RunResult blind = run_icea(train, nullptr, effective, schedule, stop, params,
                                   config, args.shrinkage);
        if (!same_training_trajectory(run.metrics, blind.metrics))
          throw std::runtime_error(
              "test-isolation audit failed: training trajectory depends on the test set");
        info["test_isolation"] = "verified";
      }
    }
  } else if (args.algo == "hier") {
    HierarchicalResult run = run_hierarchical(train, have_test ? &test : nullptr, assign,
                                              params, stop, args.shrinkage);
    metrics = run.metrics;
    for (const auto& model : run.stage1)
      write_text_file(fs::path(args.out) / "models" /
                          ("stage1_agent_" + std::to_string(model.agent_id) + ".json"),
                      model.to_json() + "\n");
    write_text_file(fs::path(args.out) / "models" / "stage2.json",
                    run.stage2.to_json() + "\n");
    for (size_t j = 0; j < run.stage1_metrics.size(); ++j) {
      std::ofstream out(fs::path(args.out) / ("stage1_metrics_" + std::to_string(j) + ".csv"),
                        std::ios::binary);
      run.stage1_metrics[j].write_csv(out);
    }
  } else {
    throw std::invalid_argument("unknown algo '" + args.algo + "'");
  }

  {
    std::ofstream out(fs::path(args.out) / "metrics.csv", std::ios::binary);
    metrics.write_csv(out);
  }

  const auto& last = metrics.updates.back();
  long leaves_total = 0;
  for (const auto& r : metrics.updates) leaves_total += r.leaves;
  info["converged"] = metrics.converged;
  info["updates"] = metrics.updates.size();
  info["leaves_total"] = leaves_total;
  info["final_train_mse"] = last.train_mse;
  if (last.test_mse) info["final_test_mse"] = *last.test_mse;
  info["warnings"] = metrics.warnings;
  write_text_file(fs::path(args.out) / "run.json", info.dump(2) + "\n");

  for (const auto& w : metrics.warnings) std::cerr << "warning: " << w << "\n";
  std::cout << (metrics.converged ? "converged" : "update budget exhausted") << " after "
            << metrics.updates.size() << " updates; train MSE "
            << format_double(last.train_mse);
  if (last.test_mse) std::cout << ", test MSE " << format_double(*last.test_mse);
  std::cout << "\n";
  return metrics.converged ? kExitOk : kExitBudget;
}

// ---- exact-demo ----

struct ExactDemoArgs {
  std::string phi = "x1*x2^2 + x1^2 + 2";
  std::string rho = "1/2";
  std::string eps = "1e-12";
  int rounds = 60;
  int slope_begin = 2;
  int slope_end = 8;
  std::string out;
};

int cmd_exact_demo(const ExactDemoArgs& args) {
  BivarPoly phi = BivarPoly::parse(args.phi);
  GaussPair gp{Rational::parse(args.rho)};
  Rational eps = Rational::parse(args.eps);

  ExactRun run = run_exact_to_limit(phi, gp, eps, args.rounds);
  const Rational limit = run.errors.back();

  // replay the rounds to snapshot the per-round functions
  std::ostringstream csv;
  csv << "round,g1_coeffs,g2_coeffs,error_exact,error_decimal,g1_coeffs_4dp,"
         "g2_coeffs_4dp,surplus_error\n";
  UniPoly g1(Axis::X1), g2(Axis::X2);
  std::vector<std::pair<double, double>> slope_pts;
  for (size_t r = 1; r <= run.errors.size(); ++r) {
    RoundResult step = icea_exact_round(phi, g1, g2, gp);
    g1 = std::move(step.g1);
    g2 = std::move(step.g2);
    const Rational surplus = step.err - limit;
    csv << r << ',' << g1.str() << ',' << g2.str() << ',' << step.err.str() << ','
        << decimal_string(step.err, 10) << ',' << g1.str_decimal(4) << ','
        << g2.str_decimal(4) << ',' << surplus.str() << '\n';
    if (r >= static_cast<size_t>(args.slope_begin) &&
        r <= static_cast<size_t>(args.slope_end) && surplus > Rational(0))
      slope_pts.emplace_back(static_cast<double>(r), std::log(surplus.to_double()));
  }

  std::string slope_text = "nan";
  if (slope_pts.size() >= 2) slope_text = format_double(fit_slope(slope_pts));
  csv << "# log_surplus_slope rounds " << args.slope_begin << "-" << args.slope_end
      << ": " << slope_text << "\n";

  if (args.out.empty()) {
    std::cout << csv.str();
  } else {
    write_text_file(args.out, csv.str());
  }
  std::cout << (run.converged ? "converged" : "round budget exhausted") << " after "
            << run.errors.size() << " rounds; error "
            << decimal_string(run.errors.back(), 10) << "; log-surplus slope (rounds "
            << args.slope_begin << "-" << args.slope_end << ") " << slope_text << "\n";
  return run.converged ? kExitOk : kExitBudget;
}

// ---- report ----

struct ReportArgs {
  std::vector<std::string> metrics_files;
  std::string out;
};

int cmd_report(const ReportArgs& args) {
  fs::create_directories(args.out);
  std::ostringstream summary;
  summary << "dataset,system,algo,train_mse,test_mse,updates,leaves_total\n";
  std::vector<std::string> violations;

  for (const auto& file : args.metrics_files) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw std::runtime_error("report: cannot open " + file);
    RunMetrics metrics = RunMetrics::read_csv(in);
    if (metrics.updates.empty()) throw std::runtime_error("report: no rows in " + file);

    std::string dataset = "?", algo = "?", system = "-";
    fs::path sidecar = fs::path(file).parent_path() / "run.json";
    if (fs::exists(sidecar)) {
      std::ifstream meta(sidecar, std::ios::binary);
      nlohmann::json j = nlohmann::json::parse(meta);
      algo = j.value("algo", "?");
      if (j.contains("dataset")) {
        if (j["dataset"].contains("rule")) dataset = j["dataset"]["rule"].get<std::string>();
        else if (j["dataset"].contains("file"))
          dataset = fs::path(j["dataset"]["file"].get<std::string>()).stem().string();
      }
      if (j.contains("system")) system = std::to_string(j["system"].get<int>());
      else if (j.contains("agents")) system = "custom";
    }

    for (size_t i = 1; i < metrics.updates.size(); ++i) {
      if (metrics.updates[i].train_mse > metrics.updates[i - 1].train_mse) {
        violations.push_back(file + ": training MSE increased at update " +
                             std::to_string(metrics.updates[i].update));
      }
    }

    const auto& last = metrics.updates.back();
    long leaves_total = 0;
    for (const auto& r : metrics.updates) leaves_total += r.leaves;
    summary << dataset << ',' << system << ',' << algo << ','
            << format_double(last.train_mse) << ','
            << (last.test_mse ? format_double(*last.test_mse) : std::string()) << ','
            << metrics.updates.size() << ',' << leaves_total << '\n';

    fs::path parent = fs::path(file).parent_path();
    std::string label = parent.empty() ? fs::path(file).stem().string()
                                       : parent.filename().string();
    std::ofstream curve(fs::path(args.out) / (label + "_curve.csv"), std::ios::binary);
    curve << "update,round,train_mse,test_mse\n";
    for (const auto& r : metrics.updates)
      curve << r.update << ',' << r.round << ',' << format_double(r.train_mse) << ','
            << (r.test_mse ? format_double(*r.test_mse) : std::string()) << '\n';
  }

  write_text_file(fs::path(args.out) / "summary.csv", summary.str());
  if (!violations.empty()) {
    std::string all;
    for (const auto& v : violations) {
      std::cerr << "INVARIANT FAILURE: " << v << "\n";
      all += v + "\n";
    }
    write_text_file(fs::path(args.out) / "violations.txt", all);
  }
  std::cout << "summary over " << args.metrics_files.size() << " run(s) -> "
            << (fs::path(args.out) / "summary.csv").string() << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"ICEA distributed-regression laboratory"};
  app.require_subcommand(1);
  app.set_config("--config", "", "read options from an INI file (flags win)");

  GenDataArgs gen;
  CLI::App* gen_cmd = app.add_subcommand("gen-data", "generate a synthetic dataset CSV");
  gen_cmd->add_option("--rule", gen.rule, "friedman1|friedman2|friedman3|productxy");
  gen_cmd->add_option("--n", gen.n, "number of rows");
  gen_cmd->add_option("--noise", gen.noise, "noise standard deviation");
  gen_cmd->add_option("--seed", gen.seed, "generator seed");
  gen_cmd->add_flag("--normalize", gen.normalize, "normalize targets to [0,1] at split time");
  gen_cmd->add_option("--out", gen.out, "output CSV path")->required();

  TrainArgs train;
  CLI::App* train_cmd = app.add_subcommand("train", "run ICEA or a baseline");
  train_cmd->add_option("--data", train.data, "dataset CSV (else generate via --rule)");
  train_cmd->add_option("--rule", train.rule, "generator rule");
  train_cmd->add_option("--n", train.n, "rows to generate");
  train_cmd->add_option("--noise", train.noise, "noise sd");
  train_cmd->add_option("--seed", train.seed, "generator seed");
  train_cmd->add_flag("--normalize", train.normalize, "normalize targets to [0,1]");
  train_cmd->add_option("--train-rows", train.train_rows, "train split size (0 = use all)");
  train_cmd->add_option("--test-rows", train.test_rows, "test split size");
  train_cmd->add_option("--split-seed", train.split_seed, "split shuffle seed");
  train_cmd->add_option("--algo", train.algo, "icea|boost|hier");
  train_cmd->add_option("--system", train.system, "agent layout 1|2|3");
  train_cmd->add_option("--agents", train.agents, "explicit sets, e.g. \"0,1;1,2;3,4\"");
  train_cmd->add_option("--schedule", train.schedule, "roundrobin|greedy|greedy-penalized");
  train_cmd->add_option("--lambda", train.lambda, "leaf penalty for greedy-penalized");
  train_cmd->add_option("--eps", train.eps, "stopping threshold on |d train MSE|");
  train_cmd->add_flag("--eps-absolute", train.eps_absolute,
                      "treat --eps as absolute (default: fraction of initial MSE)");
  train_cmd->add_option("--max-updates", train.max_updates, "update budget");
  train_cmd->add_option("--depth", train.depth, "tree max depth");
  train_cmd->add_option("--min-leaf", train.min_leaf, "min samples per leaf");
  train_cmd->add_option("--min-gain", train.min_gain, "min SSE reduction per split");
  train_cmd->add_option("--shrinkage", train.shrinkage, "scale applied to each fitted tree");
  train_cmd->add_option("--carrier", train.carrier, "inproc|socket");
  train_cmd->add_option("--port-base", train.port_base, "socket port base (0 = ephemeral)");
  train_cmd->add_option("--out", train.out, "output directory")->required();
  train_cmd->add_flag("--audit-test-isolation", train.audit_test_isolation,
                      "verify the trajectory is identical with the test set withheld");

  ExactDemoArgs demo;
  CLI::App* demo_cmd = app.add_subcommand("exact-demo", "exact Gaussian engine trajectory");
  demo_cmd->add_option("--phi", demo.phi, "bivariate polynomial, e.g. \"x1*x2^2 + x1^2 + 2\"");
  demo_cmd->add_option("--rho", demo.rho, "correlation, |rho| < 1 (rational or decimal)");
  demo_cmd->add_option("--eps", demo.eps, "error-decrease stopping threshold");
  demo_cmd->add_option("--rounds", demo.rounds, "maximum rounds");
  demo_cmd->add_option("--slope-begin", demo.slope_begin, "first round of the slope fit");
  demo_cmd->add_option("--slope-end", demo.slope_end, "last round of the slope fit");
  demo_cmd->add_option("--out", demo.out, "CSV path (default: stdout)");

  ReportArgs report;
  CLI::App* report_cmd = app.add_subcommand("report", "summarize metrics CSVs");
  report_cmd->add_option("metrics", report.metrics_files, "metrics.csv files")->required();
  report_cmd->add_option("--out", report.out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    if (gen_cmd->parsed()) return cmd_gen_data(gen);
    if (train_cmd->parsed()) return cmd_train(train);
    if (demo_cmd->parsed()) return cmd_exact_demo(demo);
    if (report_cmd->parsed()) return cmd_report(report);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}

}  // namespace icea
