#include "defuse/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "defuse/error.hpp"
#include "defuse/fdsolver.hpp"
#include "defuse/gradcheck.hpp"
#include "defuse/metrics.hpp"

namespace defuse {

TrainConfig RunConfig::train_config(int dim) const {
  TrainConfig c = TrainConfig::defaults_for(dim);
  c.seed = seed;
  if (epochs) c.epochs = *epochs;
  if (learning_rate) c.learning_rate = *learning_rate;
  if (optimizer) c.optimizer = *optimizer;
  if (m1) c.m1 = *m1;
  if (m2) c.m2 = *m2;
  if (layers) c.hidden_layers = *layers;
  if (width) c.width = *width;
  if (regen) c.batch_regen_every = *regen;
  if (weights) {
    c.auto_weights = false;
    c.weights = *weights;
  }
  return c;
}

namespace {

const std::vector<std::string> kCommands = {"list-problems", "inspect", "train",
                                            "solve",         "study",   "check-gradients"};

[[noreturn]] void usage(const std::string& msg) { throw Error(ErrorKind::usage_error, msg); }

double parse_double(const std::string& flag, const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  usage(flag + ": '" + s + "' is not a number");
}


}  // namespace

RunConfig parse_args(const std::vector<std::string>& args) {
  RunConfig rc;
  CLI::App app{"Degenerate interface problems: band network plus decoupled finite differences",
               "defuse"};
  app.set_config("--config", "", "key=value file; command-line flags take precedence");
  app.allow_config_extras(CLI::config_extras_mode::error);

  std::string command, optimizer, format = "csv";
  // Comma lists arrive split when they come from the config file.
  std::vector<std::string> grid_list, weight_list, param_list;
  std::optional<double> tau_minus, tau_plus;
  app.add_option("command", command, "Command to run")
      ->required()
      ->check(CLI::IsMember(kCommands));
  app.add_option("--problem", rc.problem, "Problem name (see list-problems)");
  app.add_option("--n", rc.n, "Intervals per axis");
  app.add_option("--grids", grid_list, "Comma-separated doubling grid sizes, e.g. 10,20,40")
      ->delimiter(',');
  app.add_option("--tau-minus", tau_minus, "Coefficient scale on the minus side");
  app.add_option("--tau-plus", tau_plus, "Coefficient scale on the plus side");
  app.add_option("--params", param_list, "Extra problem parameters as key=value,key=value")
      ->delimiter(',');
  app.add_option("--seed", rc.seed, "Random seed");
  app.add_option("--epochs", rc.epochs, "Training steps");
  app.add_option("--lr", rc.learning_rate, "Learning rate");
  app.add_option("--optimizer", optimizer, "sgd or adam")->check(CLI::IsMember({"sgd", "adam"}));
  app.add_option("--band-width", rc.band_width, "Band half-width in cells");
  app.add_option("--weights", weight_list, "auto or w1,w2,w3,w4")->delimiter(',');
  app.add_option("--m1", rc.m1, "Minus-side samples per batch");
  app.add_option("--m2", rc.m2, "Plus-side samples per batch");
  app.add_option("--layers", rc.layers, "Hidden layers");
  app.add_option("--width", rc.width, "Neurons per hidden layer");
  app.add_option("--regen", rc.regen, "Steps between batch regenerations");
  app.add_flag("--oracle", rc.oracle, "Use exact band values instead of training");
  app.add_option("--out", rc.out_dir, "Output directory");
  app.add_option("--load", rc.load_dir, "Directory holding net_minus.bin / net_plus.bin");
  app.add_option("--format", format, "csv or md")->check(CLI::IsMember({"csv", "md"}));
  app.add_option("--instances", rc.instances, "Random instances for check-gradients");
  app.add_option("--progress", rc.progress_every, "Print the loss every N steps (0: never)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    rc.help = app.help();
    return rc;
  } catch (const CLI::ParseError& e) {
    usage(e.what());
  }

  rc.command = command;
  if (tau_minus) rc.params["tau_minus"] = *tau_minus;
  if (tau_plus) rc.params["tau_plus"] = *tau_plus;
  if (!param_list.empty()) {
    for (const std::string& kv : param_list) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos || eq == 0) usage("--params: expected key=value, got '" + kv + "'");
      rc.params[kv.substr(0, eq)] = parse_double("--params", kv.substr(eq + 1));
    }
  }
  if (!grid_list.empty()) {
    for (const std::string& g : grid_list) {
      const double v = parse_double("--grids", g);
      if (v != static_cast<int>(v) || v < 2) usage("--grids: '" + g + "' is not a grid size");
      rc.grids.push_back(static_cast<int>(v));
    }
  }
  if (!optimizer.empty())
    rc.optimizer = optimizer == "adam" ? OptimizerKind::adam : OptimizerKind::sgd;
  if (!weight_list.empty() && !(weight_list.size() == 1 && weight_list[0] == "auto")) {
    const auto& parts = weight_list;
    if (parts.size() != 4) usage("--weights: expected auto or four comma-separated numbers");
    LossWeights w;
    w.w1 = parse_double("--weights", parts[0]);
    w.w2 = parse_double("--weights", parts[1]);
    w.w3 = parse_double("--weights", parts[2]);
    w.w4 = parse_double("--weights", parts[3]);
    rc.weights = w;
  }
  rc.format = format == "md" ? TableFormat::markdown : TableFormat::csv;

  const bool needs_problem = command == "inspect" || command == "train" ||
                             command == "solve" || command == "study";
  if (needs_problem && rc.problem.empty()) usage(command + " requires --problem");
  if (command == "study") {
    if (rc.grids.size() < 2) usage("study needs at least 2 sizes in --grids");
    for (std::size_t i = 1; i < rc.grids.size(); ++i)
      if (rc.grids[i] != 2 * rc.grids[i - 1]) usage("--grids must double from one size to the next");
    if (rc.n) usage("study takes --grids, not --n");
  } else if (needs_problem) {
    if (!rc.n) usage(command + " requires --n");
    if (!rc.grids.empty()) usage(command + " takes --n, not --grids");
  }
  if (rc.n && *rc.n < 2) usage("--n must be at least 2");
  if (rc.band_width < 1) usage("--band-width must be at least 1");
  if (rc.instances < 1) usage("--instances must be at least 1");
  if (rc.oracle && command != "solve" && command != "study")
    usage("--oracle applies to solve and study only");
  if (!rc.load_dir.empty() && command != "solve") usage("--load applies to solve only");
  if (rc.oracle && !rc.load_dir.empty()) usage("--oracle and --load exclude each other");
  return rc;
}

namespace {

std::string path_in(const RunConfig& rc, const std::string& name) {
  return (std::filesystem::path(rc.out_dir) / name).string();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

TrainProgress progress_printer(const RunConfig& rc, std::ostream& out) {
  if (rc.progress_every <= 0) return {};
  const int every = rc.progress_every;
  return [every, &out](int it, const LossBreakdown& b) {
    if (it % every == 0)
      out << "step " << it << " l1=" << fmt("%.4e", b.l1) << " l2=" << fmt("%.4e", b.l2)
          << " l3=" << fmt("%.4e", b.l3) << " l4=" << fmt("%.4e", b.l4)
          << " total=" << fmt("%.6e", b.total) << '\n';
  };
}

void save_training(const RunConfig& rc, const TrainedNet& t) {
  if (rc.out_dir.empty()) return;
  std::filesystem::create_directories(rc.out_dir);
  t.net.minus.save_file(path_in(rc, "net_minus.bin"));
  if (!t.net.shared) t.net.plus.save_file(path_in(rc, "net_plus.bin"));
  emit(t.loss_history, path_in(rc, "loss.csv"));
  std::ostringstream cfg;
  cfg << "problem=" << rc.problem << '\n' << "n=" << rc.n.value_or(0) << '\n';
  for (const auto& [k, v] : rc.params) cfg << "param." << k << '=' << fmt("%.17g", v) << '\n';
  cfg << "band-width=" << rc.band_width << '\n' << "shared=" << (t.net.shared ? 1 : 0) << '\n';
  t.config.write(cfg);
  cfg << "final_weights=" << fmt("%.17g", t.weights.w1) << ',' << fmt("%.17g", t.weights.w2) << ','
      << fmt("%.17g", t.weights.w3) << ',' << fmt("%.17g", t.weights.w4) << '\n';
  write_file_atomic(path_in(rc, "config.txt"), cfg.str());
}

int cmd_list(std::ostream& out) {
  for (const ProblemInfo& p : list_problems()) {
    std::string tun;
    for (const std::string& t : p.tunables) tun += (tun.empty() ? "" : ",") + t;
    out << p.name << '\t' << p.dim << "D\t" << (p.degenerate ? "degenerate" : "non-degenerate")
        << '\t' << p.jump_type << '\t' << (tun.empty() ? "-" : tun) << '\t' << p.description
        << '\n';
  }
  return 0;
}

RegionMap classify_for(const ProblemSpec& problem, const RunConfig& rc, int n) {
  return classify(problem.phi, problem.grid(n), problem.classify_options(rc.band_width));
}

int cmd_inspect(const RunConfig& rc, std::ostream& out) {
  const ProblemSpec problem = get_problem(rc.problem, rc.params);
  const RegionMap map = classify_for(problem, rc, *rc.n);
  out << "problem " << problem.name << " n=" << *rc.n << " nodes=" << map.grid.node_count()
      << '\n';
  for (NodeLabel l : {NodeLabel::omega1, NodeLabel::omega2, NodeLabel::band_minus,
                      NodeLabel::band_plus, NodeLabel::gamma_minus, NodeLabel::gamma_plus,
                      NodeLabel::outer_boundary})
    out << to_string(l) << ' ' << map.count(l) << '\n';
  out << "node_pairs " << map.node_pairs.size() << '\n';
  out << "band_cells " << map.band_cells.size() << '\n';
  if (!rc.out_dir.empty()) {
    std::ostringstream s;
    map.write_csv(s);
    write_file_atomic(path_in(rc, "regions.csv"), s.str());
  }
  return 0;
}

int cmd_train(const RunConfig& rc, std::ostream& out) {
  const ProblemSpec problem = get_problem(rc.problem, rc.params);
  const RegionMap map = classify_for(problem, rc, *rc.n);
  const TrainedNet t = train(problem, map, rc.train_config(problem.dim), progress_printer(rc, out));
  save_training(rc, t);
  const LossBreakdown& b = t.loss_history.back();
  out << "trained " << problem.name << " n=" << *rc.n << " steps=" << t.loss_history.size()
      << " final_total=" << fmt("%.6e", b.total) << '\n';
  return 0;
}

void print_errors(const ProblemSpec& problem, const RegionMap& map, const GridFunction& u,
                  std::ostream& out) {
  for (Region r : {Region::omega1, Region::omega2, Region::omega}) {
    const ErrorNorms e = problem.has_exact() ? exact_error(u, problem, map, r)
                                             : residual_metric(u, problem, map, r);
    out << (problem.has_exact() ? "error " : "residual ") << to_string(r)
        << " l2=" << fmt("%.5e", e.l2) << " linf=" << fmt("%.5e", e.linf)
        << " nodes=" << e.nodes << '\n';
  }
}

int cmd_solve(const RunConfig& rc, std::ostream& out) {
  const ProblemSpec problem = get_problem(rc.problem, rc.params);
  const int n = *rc.n;
  try {
    const RegionMap map = classify_for(problem, rc, n);
    BandValues band;
    PairedNet net;
    if (rc.oracle) {
      band = exact_band_values(problem);
    } else if (!rc.load_dir.empty()) {
      const auto dir = std::filesystem::path(rc.load_dir);
      net.shared = problem.jump_w_zero;
      net.minus = NetworkParams::load_file((dir / "net_minus.bin").string());
      if (!net.shared) net.plus = NetworkParams::load_file((dir / "net_plus.bin").string());
      if (net.minus.input_dim() != problem.dim ||
          (!net.shared && net.plus.input_dim() != problem.dim))
        throw Error(ErrorKind::shape_mismatch, "stored network input size differs from the problem");
      band = network_band_values(problem, net);
    } else {
      const TrainedNet t =
          train(problem, map, rc.train_config(problem.dim), progress_printer(rc, out));
      save_training(rc, t);
      net = t.net;
      out << "final_total=" << fmt("%.6e", t.final_total) << '\n';
      band = network_band_values(problem, net);
    }
    const DecoupledSolution sol = solve_decoupled(problem, map, band, worker_threads() > 1);
    const GridFunction u = sol.combined(map);
    out << "solved " << problem.name << " n=" << n << " picard_minus=" << sol.iterations_minus
        << " picard_plus=" << sol.iterations_plus << '\n';
    print_errors(problem, map, u, out);
    if (!rc.out_dir.empty()) {
      emit(u, path_in(rc, "solution.csv"));
      emit(sol.minus, path_in(rc, "solution_minus.csv"));
      emit(sol.plus, path_in(rc, "solution_plus.csv"));
    }
  } catch (const Error& e) {
    throw Error(e.kind(), "grid " + std::to_string(n) + ": " + e.detail());
  }
  return 0;
}

int cmd_study(const RunConfig& rc, std::ostream& out) {
  const ProblemSpec problem = get_problem(rc.problem, rc.params);
  StudyConfig sc;
  sc.mode = rc.oracle ? StudyMode::oracle : StudyMode::trained;
  sc.train = rc.train_config(problem.dim);
  sc.band_width_cells = rc.band_width;
  sc.seed = rc.seed;
  sc.concurrent_solves = worker_threads() > 1;
  sc.on_train_step = progress_printer(rc, out);
  sc.on_row = [&out](const StudyRow& r) {
    out << "n=" << r.n << " err_all=" << fmt("%.5e", r.err_omega)
        << " ord_all=" << (r.order_omega ? fmt("%.4f", *r.order_omega) : std::string("-"))
        << " seconds=" << fmt("%.2f", r.seconds) << std::endl;
  };
  if (!rc.out_dir.empty()) {
    sc.on_solution = [&rc](int n, const RegionMap&, const DecoupledSolution& sol,
                           const TrainedNet* t) {
      const std::string dir = "n" + std::to_string(n);
      emit(sol.minus, path_in(rc, dir + "/solution_minus.csv"));
      emit(sol.plus, path_in(rc, dir + "/solution_plus.csv"));
      if (t) emit(t->loss_history, path_in(rc, dir + "/loss.csv"));
    };
  }
  const StudyTable table = convergence_study(problem, rc.grids, sc);
  if (rc.out_dir.empty()) {
    rc.format == TableFormat::csv ? write_csv(out, table) : write_markdown(out, table);
  } else {
    emit(table, rc.format, path_in(rc, rc.format == TableFormat::csv ? "study.csv" : "study.md"));
  }
  return 0;
}

int cmd_check_gradients(const RunConfig& rc, std::ostream& out) {
  constexpr double kTol = 1e-5;
  const GradCheckReport r = check_gradients(rc.seed, rc.instances);
  out << "instances=" << r.instances << " rejected=" << r.rejected << '\n'
      << "jet_grad_max=" << fmt("%.3e", r.jet_grad_max) << '\n'
      << "jet_hess_max=" << fmt("%.3e", r.jet_hess_max) << '\n'
      << "anchored_max=" << fmt("%.3e", r.anchored_max) << '\n'
      << "loss_grad_max=" << fmt("%.3e", r.loss_max) << '\n'
      << (r.passed(kTol) ? "PASS" : "FAIL") << '\n';
  return r.passed(kTol) ? 0 : 1;
}

}  // namespace

int run(const RunConfig& rc, std::ostream& out, std::ostream& err) {
  if (!rc.help.empty()) {
    out << rc.help;
    return 0;
  }
  try {
    if (rc.command == "list-problems") return cmd_list(out);
    if (rc.command == "inspect") return cmd_inspect(rc, out);
    if (rc.command == "train") return cmd_train(rc, out);
    if (rc.command == "solve") return cmd_solve(rc, out);
    if (rc.command == "study") return cmd_study(rc, out);
    if (rc.command == "check-gradients") return cmd_check_gradients(rc, out);
    throw Error(ErrorKind::usage_error, "unknown command '" + rc.command + "'");
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.kind() == ErrorKind::usage_error ? 2 : 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig rc;
  try {
    rc = parse_args(args);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return run(rc, out, err);
}

}  // namespace defuse
