#include "defuse/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "defuse/error.hpp"

namespace defuse {

double order(double e_coarse, double e_fine) {
  if (!(e_coarse > 0.0) || !(e_fine > 0.0))
    throw Error(ErrorKind::non_positive_error, "orders need two positive errors");
  return std::log2(e_coarse / e_fine);
}

void compute_orders(StudyTable& table) {
  auto ord = [](double a, double b) -> std::optional<double> {
    if (a > 0.0 && b > 0.0) return order(a, b);
    return std::nullopt;
  };
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    StudyRow& r = table.rows[i];
    if (i == 0) {
      r.order_omega1 = r.order_omega2 = r.order_omega = r.order_inf = std::nullopt;
      continue;
    }
    const StudyRow& p = table.rows[i - 1];
    r.order_omega1 = ord(p.err_omega1, r.err_omega1);
    r.order_omega2 = ord(p.err_omega2, r.err_omega2);
    r.order_omega = ord(p.err_omega, r.err_omega);
    r.order_inf = (p.err_inf && r.err_inf) ? ord(*p.err_inf, *r.err_inf) : std::nullopt;
  }
}

StudyRow run_row(const ProblemSpec& problem, int n, const StudyConfig& config) {
  const auto t0 = std::chrono::steady_clock::now();
  StudyRow row;
  row.n = n;
  row.seed = config.seed + static_cast<std::uint64_t>(n);
  try {
    const GridSpec grid = problem.grid(n);
    const RegionMap map = classify(problem.phi, grid, problem.classify_options(config.band_width_cells));

    std::optional<TrainedNet> trained;
    BandValues band;
    if (config.mode == StudyMode::oracle) {
      band = exact_band_values(problem);
    } else {
      TrainConfig tc = config.train;
      tc.seed = row.seed;
      trained = train(problem, map, tc, config.on_train_step);
      band = network_band_values(problem, trained->net);
    }
    const DecoupledSolution sol = solve_decoupled(problem, map, band, config.concurrent_solves,
                                                  config.picard_tol, config.picard_max_iter);
    const GridFunction u = sol.combined(map);
    auto measure = [&](Region r) {
      return problem.has_exact() ? exact_error(u, problem, map, r)
                                 : residual_metric(u, problem, map, r);
    };
    const ErrorNorms e1 = measure(Region::omega1);
    const ErrorNorms e2 = measure(Region::omega2);
    const ErrorNorms ea = measure(Region::omega);
    row.err_omega1 = e1.l2;
    row.err_omega2 = e2.l2;
    row.err_omega = ea.l2;
    row.err_inf = ea.linf;
    if (config.on_solution) config.on_solution(n, map, sol, trained ? &*trained : nullptr);
  } catch (const Error& e) {
    throw Error(e.kind(), "grid " + std::to_string(n) + ": " + e.detail());
  }
  row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return row;
}

StudyTable convergence_study(const ProblemSpec& problem, const std::vector<int>& grids,
                             const StudyConfig& config) {
  if (grids.empty()) throw Error(ErrorKind::invalid_argument, "no grid sizes given");
  for (std::size_t i = 1; i < grids.size(); ++i)
    if (grids[i] != 2 * grids[i - 1])
      throw Error(ErrorKind::invalid_argument, "grid sizes must double from row to row");
  StudyTable table;
  table.problem = problem.name;
  table.params = problem.params;
  table.metric = problem.has_exact() ? "exact" : "residual";
  for (int n : grids) {
    table.rows.push_back(run_row(problem, n, config));
    compute_orders(table);
    if (config.on_row) config.on_row(table.rows.back());
  }
  return table;
}

namespace {

std::string fmt_err(double e) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.5e", e);
  return buf;
}

std::string fmt_ord(const std::optional<double>& o) {
  if (!o) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", *o);
  return buf;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_number(const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorKind::io_error, "bad number '" + s + "' in table");
  }
}

}  // namespace

void write_csv(std::ostream& out, const StudyTable& table) {
  out << "n,err_o1,ord_o1,err_o2,ord_o2,err_all,ord_all\n";
  for (const StudyRow& r : table.rows) {
    out << r.n << ',' << fmt_err(r.err_omega1) << ',' << fmt_ord(r.order_omega1) << ','
        << fmt_err(r.err_omega2) << ',' << fmt_ord(r.order_omega2) << ','
        << fmt_err(r.err_omega) << ',' << fmt_ord(r.order_omega) << '\n';
  }
}

void write_markdown(std::ostream& out, const StudyTable& table) {
  const bool residual = table.metric == "residual";
  out << "| N | " << (residual ? "f_h - f" : "u_h - u") << " on Ω₁ | Order | on Ω₂ | Order | on Ω | Order | L∞ on Ω | Order |\n";
  out << "|---|---|---|---|---|---|---|---|---|\n";
  for (const StudyRow& r : table.rows) {
    auto o = [](const std::optional<double>& v) { return v ? fmt_ord(v) : std::string("–"); };
    out << "| " << r.n << " | " << fmt_err(r.err_omega1) << " | " << o(r.order_omega1) << " | "
        << fmt_err(r.err_omega2) << " | " << o(r.order_omega2) << " | " << fmt_err(r.err_omega)
        << " | " << o(r.order_omega) << " | " << (r.err_inf ? fmt_err(*r.err_inf) : "–")
        << " | " << o(r.order_inf) << " |\n";
  }
}

StudyTable parse_csv(std::istream& in) {
  StudyTable t;
  std::string line;
  if (!std::getline(in, line) || split(line, ',').size() != 7)
    throw Error(ErrorKind::io_error, "missing study table header");
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto c = split(line, ',');
    if (c.size() != 7) throw Error(ErrorKind::io_error, "study row needs 7 cells");
    StudyRow r;
    r.n = static_cast<int>(parse_number(c[0]));
    r.err_omega1 = parse_number(c[1]);
    r.err_omega2 = parse_number(c[3]);
    r.err_omega = parse_number(c[5]);
    if (!c[2].empty()) r.order_omega1 = parse_number(c[2]);
    if (!c[4].empty()) r.order_omega2 = parse_number(c[4]);
    if (!c[6].empty()) r.order_omega = parse_number(c[6]);
    t.rows.push_back(r);
  }
  return t;
}

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(target.parent_path(), ec);
    if (ec) throw Error(ErrorKind::io_error, "cannot create " + target.parent_path().string());
  }
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::io_error, "cannot open " + tmp);
    out << content;
    out.flush();
    if (!out) throw Error(ErrorKind::io_error, "failed writing " + tmp);
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) throw Error(ErrorKind::io_error, "cannot move " + tmp + " to " + path);
}

void emit(const StudyTable& table, TableFormat format, const std::string& path) {
  std::ostringstream s;
  if (format == TableFormat::csv)
    write_csv(s, table);
  else
    write_markdown(s, table);
  write_file_atomic(path, s.str());
}

void emit(const GridFunction& u, const std::string& path) {
  std::ostringstream s;
  u.write_csv(s);
  write_file_atomic(path, s.str());
}

void emit(const std::vector<LossBreakdown>& history, const std::string& path) {
  std::ostringstream s;
  write_loss_csv(s, history);
  write_file_atomic(path, s.str());
}

}  // namespace defuse
