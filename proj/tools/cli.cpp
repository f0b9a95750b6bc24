#include "cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "gsa/gsa.hpp"

#ifndef GSA_VERSION
#define GSA_VERSION "0.0.0"
#endif

namespace gsa::cli {
namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Common {
  std::uint64_t seed = 0;
  double zero_tol = 0.0;
  std::string out;
  int jobs = 1;
};

void add_common(CLI::App* sub, Common& c, double default_tol) {
  c.zero_tol = default_tol;
  sub->add_option("--seed", c.seed, "Master seed")->capture_default_str();
  sub->add_option("--zero-tol", c.zero_tol,
                  "Values <= this count as zero when locating null coalitions "
                  "(1e-3 recommended for estimated tables)")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  sub->add_option("--out", c.out, "Output CSV path (stdout when omitted or '-')");
  sub->add_option("--jobs", c.jobs, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
}

std::string hex64(std::uint64_t x) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
  return buf;
}

/// First line of every output CSV.
std::string header_comment(std::string_view command, std::uint64_t seed, const std::string& canonical) {
  return std::string("gsa ") + GSA_VERSION + " command=" + std::string(command) + " seed=" + std::to_string(seed) +
         " config=" + hex64(fnv1a64(canonical));
}

void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    out.flush();
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw UsageError("cannot open '" + path + "' for writing");
  f << text;
  if (!f) throw UsageError("failed writing '" + path + "'");
}

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw UsageError("cannot read '" + path + "'");
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

void report_warnings(const Allocation& a, std::ostream& err) {
  for (const auto& w : a.warnings) err << "warning: " << w << '\n';
}

std::string labels(const std::vector<int>& players) {
  if (players.empty()) return "none";
  std::string s;
  for (int p : players) s += (s.empty() ? "" : "+") + std::to_string(p + 1);
  return s;
}

// ---------------------------------------------------------------------------
// alloc

struct AllocArgs {
  Common common;
  std::string table;
  std::string method = "pme";
};

void setup_alloc(CLI::App& app, AllocArgs& a) {
  auto* sub = app.add_subcommand("alloc", "Allocate the grand value of a coalition value table");
  sub->add_option("table", a.table, "Value table CSV (coalition,value)")->required();
  sub->add_option("--method", a.method, "Allocation rule")
      ->check(CLI::IsMember({"shapley", "pme", "pv0"}))
      ->capture_default_str();
  add_common(sub, a.common, 0.0);
}

int run_alloc(const AllocArgs& a, std::ostream& out, std::ostream& err) {
  const std::string text = slurp(a.table);
  const GameTable g = parse_value_table(text);
  const ValidationReport report = validate(g);
  if (!report.monotone()) {
    err << "warning: table is not monotone (" << report.monotonicity.size() << " violating pairs)\n";
  }
  if (!report.nonnegative()) err << "warning: table has " << report.negative.size() << " negative values\n";
  if (g.grand_value() <= a.common.zero_tol) {
    throw DegenerateGameError("grand coalition value " + format_double(g.grand_value()) +
                              " is not above the zero threshold");
  }
  Allocation alloc;
  if (a.method == "shapley") {
    alloc = shapley_effects_from_indices(g);
  } else if (a.method == "pv0") {
    alloc = proportional_values_extended(g, a.common.zero_tol);
  } else {
    alloc = pme_from_total_indices(g, a.common.zero_tol);
  }
  report_warnings(alloc, err);
  const std::string canonical = "alloc;method=" + a.method + ";zero_tol=" + format_double(a.common.zero_tol) +
                                ";table=" + hex64(fnv1a64(text));
  std::ostringstream csv;
  write_allocation(csv, alloc, header_comment("alloc", a.common.seed, canonical));
  emit(a.common.out, csv.str(), out);
  return kOk;
}

// ---------------------------------------------------------------------------
// toycase

struct ToyArgs {
  Common common;
  std::string name;
  std::string param = "rho";
  std::optional<double> from;
  std::optional<double> to;
  std::optional<double> step;
  double rho = 0.0;
  double beta = 1.0;
  double alpha = 0.0;
  std::string table_out;
};

const std::map<std::string, ToyCase>& toy_names() {
  static const std::map<std::string, ToyCase> names = {{"exogenous", ToyCase::ExogenousLinear},
                                                       {"unbalanced", ToyCase::UnbalancedLinear},
                                                       {"interaction", ToyCase::InteractionLinear},
                                                       {"joke", ToyCase::ShapleyJoke}};
  return names;
}

void setup_toycase(CLI::App& app, ToyArgs& a) {
  auto* sub = app.add_subcommand("toycase", "Analytic Shapley effects and PME of a toy case over a parameter grid");
  sub->add_option("case", a.name, "exogenous | unbalanced | interaction | joke")
      ->required()
      ->check(CLI::IsMember({"exogenous", "unbalanced", "interaction", "joke"}));
  sub->add_option("--param", a.param, "Swept parameter")
      ->check(CLI::IsMember({"rho", "beta", "alpha"}))
      ->capture_default_str();
  sub->add_option("--from", a.from, "Grid start");
  sub->add_option("--to", a.to, "Grid end (inclusive)");
  sub->add_option("--step", a.step, "Grid step")->check(CLI::PositiveNumber);
  sub->add_option("--rho", a.rho, "Correlation when not swept")->capture_default_str();
  sub->add_option("--beta", a.beta, "Coefficient of X2 (unbalanced case) when not swept")->capture_default_str();
  sub->add_option("--alpha", a.alpha, "Trade-off parameter (interaction case) when not swept")->capture_default_str();
  sub->add_option("--table-out", a.table_out, "Write the total-index table (single grid point only)");
  add_common(sub, a.common, 0.0);
}

std::vector<double> make_grid(double from, double to, double step) {
  if (!(to >= from)) throw UsageError("grid end lies before grid start");
  const auto count = static_cast<long long>(std::floor((to - from) / step + 1e-9)) + 1;
  if (count > 1000000) throw UsageError("grid has too many points");
  std::vector<double> grid;
  for (long long k = 0; k < count; ++k) grid.push_back(std::round((from + k * step) * 1e12) / 1e12);
  return grid;
}

int run_toycase(const ToyArgs& a, std::ostream& out, std::ostream& err) {
  const ToyCase kind = toy_names().at(a.name);
  if (a.param == "beta" && kind != ToyCase::UnbalancedLinear) throw UsageError("beta applies to the unbalanced case only");
  if (a.param == "alpha" && kind != ToyCase::InteractionLinear) {
    throw UsageError("alpha applies to the interaction case only");
  }
  double from = -0.99, to = 0.99, step = 0.01;
  if (a.param == "alpha") from = 0.0, to = 1.0, step = 0.05;
  if (a.param == "beta") from = 0.0, to = 10.0, step = 0.5;
  const std::vector<double> grid = make_grid(a.from.value_or(from), a.to.value_or(to), a.step.value_or(step));
  if (!a.table_out.empty() && grid.size() != 1) throw UsageError("--table-out needs a single grid point (--from == --to)");

  auto id_at = [&](double value) {
    ToyCaseId id{kind, a.rho, a.beta, a.alpha};
    if (a.param == "rho") id.rho = value;
    if (a.param == "beta") id.beta = value;
    if (a.param == "alpha") id.alpha = value;
    return id;
  };
  for (double v : grid) {
    try {
      check_toycase(id_at(v));
    } catch (const ContractError& e) {
      throw UsageError(std::string("grid point ") + a.param + "=" + format_double(v) + " out of domain: " + e.what());
    }
  }

  struct Point {
    Allocation sh;
    Allocation pme;
  };
  std::vector<Point> points(grid.size());
  parallel_for(grid.size(), a.common.jobs, [&](std::size_t k) {
    const GameTable g = toycase_game(id_at(grid[k]));
    points[k] = {shapley_effects_from_indices(g), pme_from_total_indices(g, a.common.zero_tol)};
  });

  std::ostringstream canonical;
  canonical << "toycase;case=" << a.name << ";param=" << a.param << ";grid=" << format_double(grid.front()) << ":"
            << format_double(grid.back()) << ":" << grid.size() << ";rho=" << format_double(a.rho)
            << ";beta=" << format_double(a.beta) << ";alpha=" << format_double(a.alpha)
            << ";zero_tol=" << format_double(a.common.zero_tol);
  const std::string comment = header_comment("toycase", a.common.seed, canonical.str());
  std::ostringstream csv;
  csv << "# " << comment << '\n' << "param_name,param_value,player,shapley,pme\n";
  for (std::size_t k = 0; k < grid.size(); ++k) {
    for (int i = 0; i < points[k].sh.players(); ++i) {
      csv << a.param << ',' << format_double(grid[k]) << ',' << (i + 1) << ',' << format_double(points[k].sh[i]) << ','
          << format_double(points[k].pme[i]) << '\n';
    }
  }
  emit(a.common.out, csv.str(), out);
  if (!a.table_out.empty()) {
    std::ostringstream table;
    write_value_table(table, toycase_game(id_at(grid.front())), comment);
    emit(a.table_out, table.str(), out);
  }
  (void)err;
  return kOk;
}

// ---------------------------------------------------------------------------
// estimate

struct EstimateArgs {
  Common common;
  std::string model;
  std::string data;
  std::string method;
  std::size_t nv = 20000;
  std::size_t no = 500;
  std::size_t ni = 100;
  int k = 6;
  std::size_t n = 2000;
  int reps = 1;
  std::string scheme;
  double level = 0.9;
  double rho = 0.0;
  std::string linear_case = "exogenous";
  double beta = 1.0;
  std::string table_out;
  std::string export_data;
};

void setup_estimate(CLI::App& app, EstimateArgs& a) {
  auto* sub = app.add_subcommand("estimate", "Estimate total indices, then Shapley effects and PME with intervals");
  auto* model = sub->add_option("--model", a.model, "ishigami | robot | gaussian-linear")
                    ->check(CLI::IsMember({"ishigami", "robot", "gaussian-linear"}));
  auto* data = sub->add_option("--data", a.data, "Given-data CSV (x1,...,xd,y); implies --method knn");
  model->excludes(data);
  sub->add_option("--method", a.method, "mc (double Monte Carlo) | knn (given data); default by source")
      ->check(CLI::IsMember({"mc", "knn"}));
  sub->add_option("--nv", a.nv, "MC: sample size for the output variance")->capture_default_str();
  sub->add_option("--no", a.no, "MC: outer conditioning draws")->capture_default_str();
  sub->add_option("--ni", a.ni, "MC: inner conditional draws")->capture_default_str();
  sub->add_option("--k", a.k, "kNN: neighbours, the point itself included")->capture_default_str();
  sub->add_option("--n", a.n, "kNN: rows sampled from the model")->capture_default_str();
  sub->add_option("--reps", a.reps, "Replications (1 = single run)")->capture_default_str()->check(CLI::PositiveNumber);
  sub->add_option("--scheme", a.scheme, "independent | subsample80; default independent for mc, subsample80 for knn")
      ->check(CLI::IsMember({"independent", "subsample80"}));
  sub->add_option("--level", a.level, "Interval level")->capture_default_str()->check(CLI::Range(0.0, 1.0));
  sub->add_option("--rho", a.rho, "Input correlation (ishigami: cov(X1,X4); gaussian-linear: case rho)")
      ->capture_default_str();
  sub->add_option("--case", a.linear_case, "gaussian-linear family: exogenous | unbalanced | joke")
      ->check(CLI::IsMember({"exogenous", "unbalanced", "joke"}))
      ->capture_default_str();
  sub->add_option("--beta", a.beta, "gaussian-linear unbalanced case: coefficient of X2")->capture_default_str();
  sub->add_option("--table-out", a.table_out, "Write the (replication-mean) total-index table");
  sub->add_option("--export-data", a.export_data, "Write the data set used by the kNN estimator");
  add_common(sub, a.common, 1e-3);
}

DataSet sample_data(const std::function<double(std::span<const double>)>& f, const GaussianLaw& law, std::size_t n,
                    std::uint64_t seed) {
  Rng rng(seed);
  SampleMatrix x = law.sample(n, rng);
  Eigen::VectorXd y(x.rows());
  for (Eigen::Index r = 0; r < x.rows(); ++r) y(r) = f({x.row(r).data(), static_cast<std::size_t>(x.cols())});
  return DataSet(std::move(x), std::move(y));
}

ReplicationResult single_run(const EstimatedTable& t, double level, double tau) {
  ReplicationResult r;
  r.replications = 1;
  r.level = level;
  if (!t.table.monotone()) r.non_monotone_tables = 1;
  auto one = [&](const Allocation& a) {
    ShareSummary s;
    s.method = a.method;
    s.mean = a.shares;
    for (double v : a.shares) s.ci.push_back({v, v, level});
    s.replicates = {a.shares};
    return s;
  };
  r.shapley = one(shapley_effects_from_indices(t.table));
  r.pme = one(pme_from_total_indices(t.table, tau));
  for (IndexEstimate e : t.estimates) {
    e.replications = {e.value};
    e.ci = ConfidenceInterval{e.value, e.value, level};
    r.indices.push_back(std::move(e));
  }
  return r;
}

int run_estimate(const EstimateArgs& a, std::ostream& out, std::ostream& err) {
  const auto start = std::chrono::steady_clock::now();
  if (a.model.empty() && a.data.empty()) throw UsageError("estimate needs --model or --data");
  std::string method = a.method;
  if (method.empty()) method = (!a.data.empty() || a.model == "robot") ? "knn" : "mc";
  if (method == "mc" && !a.data.empty()) throw UsageError("--data supports --method knn only");
  if (method == "mc" && a.model == "robot") throw UsageError("the robot input law has no conditional sampler; use knn");
  std::string scheme = a.scheme.empty() ? (method == "mc" ? "independent" : "subsample80") : a.scheme;
  if (method == "mc" && scheme == "subsample80") throw UsageError("subsample80 applies to the knn method only");
  if (a.reps < 1) throw UsageError("--reps must be at least 1");
  const double tau = a.common.zero_tol;
  const std::uint64_t seed = a.common.seed;

  // Model, law and analytic reference where one exists.
  std::function<double(std::span<const double>)> f;
  std::optional<GaussianLaw> law;
  std::optional<GameTable> reference;
  std::vector<std::string> names;
  if (a.model == "ishigami") {
    const IshigamiConfig cfg{a.rho};
    law = cfg.law();
    f = ishigami;
    reference = ishigami_total_index_table(a.rho);
  } else if (a.model == "gaussian-linear") {
    const ToyCase kind = toy_names().at(a.linear_case);
    const GaussianLinearModel m = toycase_model({kind, a.rho, a.beta});
    law.emplace(m);
    f = [m](std::span<const double> x) { return m(x); };
    reference = total_index_table(m);
  }
  if (a.model == "robot") {
    names = {"A1", "A2", "A3", "A4", "L1", "L2", "L3", "L4"};
  }

  std::optional<DataSet> data;
  if (method == "knn") {
    if (!a.data.empty()) {
      std::ifstream in(a.data);
      if (!in) throw UsageError("cannot read '" + a.data + "'");
      data = read_dataset(in);
    } else if (a.model == "robot") {
      data = robot_dataset(a.n, seed);
    } else {
      data = sample_data(f, *law, a.n, seed);
    }
    if (!a.export_data.empty()) {
      std::ostringstream s;
      write_dataset(s, *data, "data seed=" + std::to_string(seed));
      emit(a.export_data, s.str(), out);
    }
  }
  const int d = data ? data->dimension() : law->dimension();
  for (int i = static_cast<int>(names.size()); i < d; ++i) names.push_back("X" + std::to_string(i + 1));

  const McBudget budget{a.nv, a.no, a.ni, seed};
  const KnnParams knn{a.k};
  auto table_for = [&](int r, bool replicated) -> EstimatedTable {
    if (method == "mc") {
      McBudget b = budget;
      if (replicated) b.seed = derive_stream(seed ^ 0x5245504C49434154ULL, static_cast<std::uint64_t>(r));
      return estimate_all_total_indices(f, *law, b, replicated ? 1 : a.common.jobs);
    }
    if (!replicated) return estimate_all_total_indices(*data, knn, a.common.jobs);
    if (scheme == "subsample80") return estimate_all_total_indices(data->subset(subsample_rows(data->rows(), seed, r)), knn, 1);
    if (a.data.empty()) {
      const std::uint64_t s = derive_stream(seed, static_cast<std::uint64_t>(r));
      return estimate_all_total_indices(a.model == "robot" ? robot_dataset(a.n, s) : sample_data(f, *law, a.n, s), knn, 1);
    }
    return estimate_all_total_indices(*data, knn, 1);
  };
  if (method == "mc") budget.check();
  if (!a.data.empty() && scheme == "independent" && a.reps > 1) {
    err << "warning: independent replications of a fixed data set are identical\n";
  }

  ReplicationResult result;
  if (a.reps == 1) {
    const EstimatedTable t = table_for(0, false);
    if (t.degenerate) throw DegenerateGameError("output sample is constant");
    result = single_run(t, a.level, tau);
  } else {
    result = replicate_tables([&](int r) { return table_for(r, true); }, a.reps, a.level, tau, a.common.jobs);
  }
  if (result.non_monotone_tables > 0) {
    err << "warning: " << result.non_monotone_tables << " estimated table(s) not monotone; shares may be distorted\n";
  }

  std::vector<double> mean_values;
  for (const auto& e : result.indices) mean_values.push_back(e.value);
  const GameTable mean_table(d, mean_values);

  std::optional<Allocation> ref_sh, ref_pme;
  if (reference) {
    ref_sh = shapley_effects_from_indices(*reference);
    ref_pme = pme_from_total_indices(*reference);
  }

  std::ostringstream canonical;
  canonical << "estimate;model=" << (a.data.empty() ? a.model : "data:" + hex64(fnv1a64(slurp(a.data))))
            << ";method=" << method << ";scheme=" << scheme << ";reps=" << a.reps << ";level=" << format_double(a.level)
            << ";zero_tol=" << format_double(tau);
  if (method == "mc") {
    canonical << ";nv=" << a.nv << ";no=" << a.no << ";ni=" << a.ni;
  } else {
    canonical << ";k=" << a.k << ";n=" << (a.data.empty() ? a.n : static_cast<std::size_t>(data->rows()));
  }
  if (a.model == "ishigami" || a.model == "gaussian-linear") canonical << ";rho=" << format_double(a.rho);
  if (a.model == "gaussian-linear") canonical << ";case=" << a.linear_case << ";beta=" << format_double(a.beta);
  const std::string comment = header_comment("estimate", seed, canonical.str());

  const std::string estimator = method == "mc" ? "double-mc" : "knn";
  const std::string budget_text = method == "mc" ? "nv=" + std::to_string(a.nv) + ";no=" + std::to_string(a.no) +
                                                       ";ni=" + std::to_string(a.ni)
                                                 : "n=" + std::to_string(data->rows()) + ";k=" + std::to_string(a.k);
  double gap = 0.0;
  std::ostringstream csv;
  csv << "# " << comment << '\n';
  std::ostringstream rows;
  rows << "index,player,name,mean,ci_low,ci_high,reference,estimator,budget,replications,scheme,level\n";
  auto write_rows = [&](const ShareSummary& s, const std::string& index, const std::optional<Allocation>& ref) {
    for (int i = 0; i < d; ++i) {
      const auto u = static_cast<std::size_t>(i);
      rows << index << ',' << (i + 1) << ',' << names[u] << ',' << format_double(s.mean[u]) << ','
           << format_double(s.ci[u].low) << ',' << format_double(s.ci[u].high) << ',';
      if (ref) {
        rows << format_double((*ref)[i]);
        gap = std::max(gap, std::abs(s.mean[u] - (*ref)[i]));
      }
      rows << ',' << estimator << ',' << budget_text << ',' << result.replications << ','
           << (a.reps == 1 ? "single" : scheme) << ',' << format_double(a.level) << '\n';
    }
  };
  write_rows(result.shapley, "shapley", ref_sh);
  write_rows(result.pme, "pme", ref_pme);
  csv << "# exogenous=" << labels(detect_exogenous(mean_table, tau)) << " zero_tol=" << format_double(tau) << '\n';
  if (reference) {
    double table_gap = 0.0;
    for (Mask m = 0; m < mean_table.size(); ++m) table_gap = std::max(table_gap, std::abs(mean_table[m] - (*reference)[m]));
    csv << "# max_abs_gap_to_reference shares=" << format_double(gap) << " indices=" << format_double(table_gap) << '\n';
  }
  csv << rows.str();
  emit(a.common.out, csv.str(), out);
  if (!a.table_out.empty()) {
    std::ostringstream t;
    write_value_table(t, mean_table, comment);
    emit(a.table_out, t.str(), out);
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  err << "estimate: " << estimator << " " << budget_text << " reps=" << a.reps << " seed=" << seed << " wall-time "
      << std::fixed << std::setprecision(3) << seconds << " s\n";
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Variance-based sensitivity allocations: Shapley effects and proportional marginal effects", "gsa"};
  app.set_version_flag("--version", GSA_VERSION);
  app.set_config("--config", "", "TOML/INI configuration file; command-line flags take precedence");
  app.require_subcommand(1);
  AllocArgs alloc;
  ToyArgs toy;
  EstimateArgs est;
  setup_alloc(app, alloc);
  setup_toycase(app, toy);
  setup_estimate(app, est);

  std::vector<const char*> argv;
  for (const auto& s : args) argv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (app.got_subcommand("alloc")) return run_alloc(alloc, out, err);
    if (app.got_subcommand("toycase")) return run_toycase(toy, out, err);
    return run_estimate(est, out, err);
  } catch (const DegenerateGameError& e) {
    err << "error: degenerate game: " << e.what() << '\n';
    return kDegenerate;
  } catch (const LinearAlgebraError& e) {
    err << "error: numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
}

}  // namespace gsa::cli
