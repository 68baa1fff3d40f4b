#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "offload/config.hpp"
#include "offload/mumto.hpp"
#include "offload/mumtoc.hpp"
#include "offload/oracle.hpp"

namespace {

using namespace offload;

struct Row {
  std::string sweep_param = "none";
  double value = 0;
  std::uint64_t seed = 0;
  std::string method;
  double total_cost = 0;
  double energy_cost = 0;
  double delay_cost = 0;
  double lower_bound = 0;
  double runtime_ms = 0;
  std::string decision;
};

struct MethodOutcome {
  Row row;
  Allocation alloc;
  bool has_alloc = false;
};

const char* kCsvHeader =
    "sweep_param,value,seed,method,total_cost,energy_cost,delay_cost,"
    "lower_bound,runtime_ms,decision_string";

std::string csv_line(const Row& r) {
  std::ostringstream os;
  os.precision(12);
  os << r.sweep_param << ',' << r.value << ',' << r.seed << ',' << r.method << ','
     << r.total_cost << ',' << r.energy_cost << ',' << r.delay_cost << ','
     << r.lower_bound << ',' << r.runtime_ms << ',' << r.decision;
  return os.str();
}

struct StageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

MethodOutcome run_method(const Instance& inst, const std::string& method,
                         std::uint64_t seed, bool with_bound) {
  MethodOutcome out;
  out.row.method = method;
  out.row.seed = seed;
  auto t0 = std::chrono::steady_clock::now();
  try {
    if (method == "mumto") {
      MumtoResult r = mumto::run(inst);
      out.row.total_cost = r.cost.total;
      out.row.energy_cost = r.cost.energy_and_usage;
      out.row.delay_cost = r.cost.delay_cost;
      out.row.decision = decision_string(r.decision);
      out.alloc = r.allocation;
      out.has_alloc = true;
      if (with_bound) out.row.lower_bound = mumto::lower_bound(inst);
    } else if (method == "mumtoc") {
      MumtocResult r = mumtoc::run(inst, seed);
      out.row.total_cost = r.cost.total;
      out.row.energy_cost = r.cost.energy_and_usage;
      out.row.delay_cost = r.cost.delay_cost;
      out.row.decision = decision_string(r.decision);
      out.alloc = r.allocation;
      out.has_alloc = true;
      if (with_bound) out.row.lower_bound = mumtoc::lower_bound_cap(inst);
    } else if (method == "oracle") {
      OracleResult r = oracle::exhaustive(inst, BoundKind::Upper);
      CostBreakdown cb = total_cost(inst, r.decision, r.allocation, BoundKind::Upper);
      out.row.total_cost = cb.total;
      out.row.energy_cost = cb.energy_and_usage;
      out.row.delay_cost = cb.delay_cost;
      out.row.decision = decision_string(r.decision);
      out.alloc = r.allocation;
      out.has_alloc = true;
    } else if (method == "local" || method == "cloud" || method == "random") {
      BaselineKind kind = method == "local"   ? BaselineKind::LocalOnly
                          : method == "cloud" ? BaselineKind::CloudOnly
                                              : BaselineKind::RandomMapping;
      OracleResult r = oracle::baseline(inst, kind, seed);
      CostBreakdown cb = total_cost(inst, r.decision, r.allocation, BoundKind::Upper);
      out.row.total_cost = cb.total;
      out.row.energy_cost = cb.energy_and_usage;
      out.row.delay_cost = cb.delay_cost;
      out.row.lower_bound = method == "cloud" ? r.cost_lower : 0.0;
      out.row.decision = decision_string(r.decision);
      out.alloc = r.allocation;
      out.has_alloc = true;
    } else if (method == "lb") {
      double lb = inst.mode == Mode::NoCap ? mumto::lower_bound(inst)
                                           : mumtoc::lower_bound_cap(inst);
      out.row.total_cost = lb;
      out.row.lower_bound = lb;
    } else {
      throw StageError("unknown method '" + method + "'");
    }
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError("method " + method + " failed: " + e.what());
  }
  auto t1 = std::chrono::steady_clock::now();
  out.row.runtime_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
  return out;
}

void check_methods(const std::vector<std::string>& methods, Mode mode) {
  for (const std::string& m : methods) {
    if (m == "mumto" && mode != Mode::NoCap)
      throw StageError("method mumto requires --mode nocap");
    if (m == "mumtoc" && mode != Mode::WithCap)
      throw StageError("method mumtoc requires --mode cap");
    static const std::vector<std::string> known = {"mumto", "mumtoc", "oracle",
                                                   "local",  "cloud",  "random",
                                                   "lb"};
    bool ok = false;
    for (const auto& k : known) ok = ok || k == m;
    if (!ok) throw StageError("unknown method '" + m + "'");
  }
}

int worker_count() {
  if (const char* env = std::getenv("OFFLOAD_THREADS")) {
    int n = std::atoi(env);
    if (n >= 1) return n;
  }
  unsigned n = std::thread::hardware_concurrency();
  return n >= 1 ? static_cast<int>(n) : 1;
}

void apply_mode(InstanceConfig& cfg, const std::string& mode_flag) {
  if (mode_flag == "nocap")
    cfg.mode = Mode::NoCap;
  else if (mode_flag == "cap")
    cfg.mode = Mode::WithCap;
  else if (!mode_flag.empty())
    throw ConfigError("--mode must be nocap or cap");
}

void apply_sweep_value(InstanceConfig& cfg, const std::string& key, double v) {
  if (key == "alpha")
    cfg.params.alpha = v;
  else if (key == "beta")
    cfg.params.beta = v;
  else if (key == "rho") {
    cfg.rho = v;
    for (UserProfile& u : cfg.users) u.rho = v;
  } else if (key == "f_c")
    cfg.params.f_c = v;
  else if (key == "f_a_total")
    cfg.params.f_a_total = v;
  else if (key == "m_tasks") {
    if (cfg.fixed) throw ConfigError("cannot sweep m_tasks with explicit users");
    cfg.m_tasks = static_cast<int>(v);
  } else if (key == "n_users") {
    if (cfg.fixed) throw ConfigError("cannot sweep n_users with explicit users");
    cfg.n_users = static_cast<int>(v);
  } else {
    throw ConfigError("unknown sweep parameter '" + key + "'");
  }
}

std::pair<std::string, std::vector<double>> parse_sweep_spec(const std::string& spec) {
  size_t eq = spec.find('=');
  if (eq == std::string::npos)
    throw ConfigError("--sweep expects key=v1,v2,...");
  std::string key = spec.substr(0, eq);
  std::vector<double> values;
  std::stringstream ss(spec.substr(eq + 1));
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    values.push_back(std::stod(item));
  }
  if (values.empty()) throw ConfigError("--sweep has no values");
  return {key, values};
}

int cmd_solve(const std::string& config_path, std::vector<std::string> methods,
              const std::string& mode_flag, const std::string& out_path,
              int n_users, int m_tasks, std::uint64_t seed) {
  InstanceConfig cfg;
  try {
    if (!config_path.empty()) cfg = load_config(config_path);
    apply_mode(cfg, mode_flag);
    if (n_users > 0) cfg.n_users = n_users;
    if (m_tasks > 0) cfg.m_tasks = m_tasks;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  if (methods.empty()) methods = {cfg.mode == Mode::NoCap ? "mumto" : "mumtoc"};
  std::vector<Row> rows;
  try {
    check_methods(methods, cfg.mode);
    Instance inst = cfg.instantiate(seed);
    std::cout << "instance: mode=" << to_string(inst.mode)
              << " users=" << inst.n_users() << " tasks=" << inst.total_tasks()
              << " seed=" << seed << "\n";
    for (const std::string& m : methods) {
      MethodOutcome o = run_method(inst, m, seed, true);
      o.row.seed = seed;
      rows.push_back(o.row);
      std::cout << "method " << m << ":\n";
      std::cout.precision(10);
      std::cout << "  total_cost = " << o.row.total_cost
                << " J (energy " << o.row.energy_cost << ", delay "
                << o.row.delay_cost << ")\n";
      if (o.row.lower_bound > 0)
        std::cout << "  lower_bound = " << o.row.lower_bound << " J\n";
      if (!o.row.decision.empty())
        std::cout << "  decision = " << o.row.decision << "\n";
      if (o.has_alloc) {
        std::cout << "  allocation (c_u Hz, c_d Hz";
        if (!o.alloc.f_a.empty()) std::cout << ", f_a cycles/s";
        std::cout << "):\n";
        for (int i = 0; i < inst.n_users(); ++i) {
          std::cout << "    user " << i << ": " << o.alloc.c_u[i] << ", "
                    << o.alloc.c_d[i];
          if (!o.alloc.f_a.empty()) std::cout << ", " << o.alloc.f_a[i];
          std::cout << "\n";
        }
      }
      std::cout << "  runtime_ms = " << o.row.runtime_ms << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    out << kCsvHeader << "\n";
    for (const Row& r : rows) out << csv_line(r) << "\n";
  }
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& sweep_spec,
              std::vector<std::string> methods, const std::string& mode_flag,
              const std::string& out_path, int seeds, int n_users, int m_tasks) {
  InstanceConfig base;
  std::string key;
  std::vector<double> values;
  try {
    if (!config_path.empty()) base = load_config(config_path);
    apply_mode(base, mode_flag);
    if (n_users > 0) base.n_users = n_users;
    if (m_tasks > 0) base.m_tasks = m_tasks;
    std::tie(key, values) = parse_sweep_spec(sweep_spec);
    {
      InstanceConfig probe = base;  // reject unknown parameters up front
      apply_sweep_value(probe, key, values.front());
    }
    if (methods.empty()) methods = {base.mode == Mode::NoCap ? "mumto" : "mumtoc"};
    check_methods(methods, base.mode);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  struct Job {
    size_t vi;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (size_t vi = 0; vi < values.size(); ++vi)
    for (int s = 1; s <= seeds; ++s)
      jobs.push_back({vi, static_cast<std::uint64_t>(s)});
  std::vector<std::vector<Row>> results(jobs.size());
  std::atomic<size_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex err_mu;
  std::string err_msg;

  auto work = [&] {
    while (!failed.load()) {
      size_t k = next.fetch_add(1);
      if (k >= jobs.size()) break;
      try {
        InstanceConfig cfg = base;
        apply_sweep_value(cfg, key, values[jobs[k].vi]);
        Instance inst = cfg.instantiate(jobs[k].seed);
        for (const std::string& m : methods) {
          MethodOutcome o = run_method(inst, m, jobs[k].seed, false);
          o.row.sweep_param = key;
          o.row.value = values[jobs[k].vi];
          o.row.seed = jobs[k].seed;
          results[k].push_back(o.row);
        }
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(err_mu);
        err_msg = e.what();
        failed = true;
      }
    }
  };
  int n_threads = std::min<int>(worker_count(), static_cast<int>(jobs.size()));
  std::vector<std::thread> pool;
  for (int t = 0; t < n_threads; ++t) pool.emplace_back(work);
  for (auto& th : pool) th.join();
  if (failed) {
    std::cerr << "error: " << err_msg << "\n";
    return 2;
  }

  std::ostream* out = &std::cout;
  std::ofstream file;
  if (!out_path.empty()) {
    file.open(out_path);
    if (!file) {
      std::cerr << "error: cannot open output file '" << out_path << "'\n";
      return 1;
    }
    out = &file;
  }
  *out << kCsvHeader << "\n";
  for (const auto& rows : results)
    for (const Row& r : rows) *out << csv_line(r) << "\n";
  return 0;
}

std::string fmt4(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

// Enumerate all single-task moves from the tuned decision; returns how many
// improve the cost by more than 1e-6 relative.
int local_opt_failures(const Instance& inst, const Decision& dec, double cost) {
  int failures = 0;
  std::vector<Placement> opts = inst.mode == Mode::WithCap
                                    ? std::vector<Placement>{Placement::Local,
                                                             Placement::Cap,
                                                             Placement::Cloud}
                                    : std::vector<Placement>{Placement::Local,
                                                             Placement::Cloud};
  for (int i = 0; i < inst.n_users(); ++i)
    for (int j = 0; j < inst.m_tasks(i); ++j)
      for (Placement p : opts) {
        if (p == dec.placement[i][j]) continue;
        Decision cand = dec;
        cand.placement[i][j] = p;
        auto [a, cb] = alloc::allocate(inst, cand);
        if (cb.total < cost * (1.0 - 1e-6)) ++failures;
      }
  return failures;
}

int cmd_validate(int n_users, int m_tasks, int seeds, const std::string& mode_flag) {
  InstanceConfig cfg;
  try {
    apply_mode(cfg, mode_flag);
    cfg.n_users = n_users;
    cfg.m_tasks = m_tasks;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  double gap_sum = 0, gap_max = 0;
  int sandwich_violations = 0, audit_failures = 0;
  try {
    for (int s = 1; s <= seeds; ++s) {
      Instance inst = cfg.instantiate(static_cast<std::uint64_t>(s));
      OracleResult best_upper = oracle::exhaustive(inst, BoundKind::Upper);
      OracleResult best_lower = oracle::exhaustive(inst, BoundKind::Lower);
      double lb, heuristic;
      if (inst.mode == Mode::NoCap) {
        lb = mumto::lower_bound(inst);
        MumtoResult r = mumto::run(inst);
        heuristic = r.cost.total;
      } else {
        lb = mumtoc::lower_bound_cap(inst);
        MumtocResult r = mumtoc::run(inst, static_cast<std::uint64_t>(s));
        heuristic = r.cost.total;
        audit_failures += local_opt_failures(inst, r.decision, r.cost.total) > 0;
      }
      const double slack = 1e-7;
      bool ok = lb <= best_lower.cost * (1 + slack) + slack &&
                best_lower.cost <= best_upper.cost * (1 + slack) + slack &&
                best_upper.cost <= heuristic * (1 + slack) + slack;
      if (!ok) ++sandwich_violations;
      double gap = (heuristic - best_upper.cost) / best_upper.cost;
      gap_sum += gap;
      gap_max = std::max(gap_max, gap);
    }
  } catch (const SpaceTooLarge& e) {
    std::cerr << "error: " << e.what()
              << " (try smaller --n-users / --m-tasks, e.g. 2 and 2)\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  std::cout << "validate: mode=" << (cfg.mode == Mode::NoCap ? "nocap" : "cap")
            << " n_users=" << n_users << " m_tasks=" << m_tasks
            << " seeds=" << seeds << "\n";
  std::cout << "  mean optimality gap = " << fmt4(100.0 * gap_sum / seeds) << "%\n";
  std::cout << "  max optimality gap  = " << fmt4(100.0 * gap_max) << "%\n";
  std::cout << "  sandwich violations = " << sandwich_violations << "\n";
  std::cout << "  local-optimality audit failures = " << audit_failures << "\n";
  return sandwich_violations == 0 && audit_failures == 0 ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-user multi-task offloading solver and experiment harness"};
  app.require_subcommand(1);

  std::string config_path, mode_flag, out_path, sweep_spec;
  std::vector<std::string> methods;
  int seeds = 1, n_users = 0, m_tasks = 0;
  std::uint64_t seed = 1;

  CLI::App* solve = app.add_subcommand("solve", "solve one instance");
  solve->add_option("--config", config_path, "instance config file");
  solve->add_option("--method", methods, "mumto|mumtoc|oracle|local|cloud|random|lb");
  solve->add_option("--mode", mode_flag, "nocap|cap");
  solve->add_option("--out", out_path, "CSV output file");
  solve->add_option("--n-users", n_users, "override user count");
  solve->add_option("--m-tasks", m_tasks, "override task count");
  solve->add_option("--seed", seed, "instance seed");

  CLI::App* sweep = app.add_subcommand("sweep", "parameter sweep over seeds");
  sweep->add_option("--config", config_path, "instance config file");
  sweep->add_option("--sweep", sweep_spec, "key=v1,v2,...")->required();
  sweep->add_option("--method", methods, "methods to run");
  sweep->add_option("--mode", mode_flag, "nocap|cap");
  sweep->add_option("--out", out_path, "CSV output file");
  sweep->add_option("--seeds", seeds, "realizations per value");
  sweep->add_option("--n-users", n_users, "override user count");
  sweep->add_option("--m-tasks", m_tasks, "override task count");

  CLI::App* validate = app.add_subcommand("validate", "compare against the oracle");
  validate->add_option("--n-users", n_users, "user count")->default_val(2);
  validate->add_option("--m-tasks", m_tasks, "task count")->default_val(2);
  validate->add_option("--seeds", seeds, "realization count");
  validate->add_option("--mode", mode_flag, "nocap|cap");

  CLI11_PARSE(app, argc, argv);

  if (solve->parsed())
    return cmd_solve(config_path, methods, mode_flag, out_path, n_users, m_tasks, seed);
  if (sweep->parsed())
    return cmd_sweep(config_path, sweep_spec, methods, mode_flag, out_path, seeds,
                     n_users, m_tasks);
  return cmd_validate(n_users > 0 ? n_users : 2, m_tasks > 0 ? m_tasks : 2, seeds,
                      mode_flag);
}
