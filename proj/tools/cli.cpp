#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <system_error>
#include <unistd.h>

#include "qprop/core.hpp"
#include "qprop/design.hpp"
#include "qprop/equilibrium.hpp"
#include "qprop/error.hpp"
#include "qprop/olos.hpp"
#include "qprop/response.hpp"

namespace qprop::cli {
namespace {

using Json = nlohmann::ordered_json;

/// Bad flag values that CLI11 itself cannot see (lists, cross-flag rules).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<double> parse_list(const std::string& text, const std::string& flag) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find(',', start);
    if (end == std::string::npos) end = text.size();
    std::string item = text.substr(start, end - start);
    const auto first = item.find_first_not_of(" \t");
    const auto last = item.find_last_not_of(" \t");
    item = first == std::string::npos ? "" : item.substr(first, last - first + 1);

    double value = 0.0;
    const char* b = item.data();
    const char* e = item.data() + item.size();
    auto [ptr, ec] = std::from_chars(b, e, value);
    if (item.empty() || ec != std::errc() || ptr != e) {
      throw UsageError(flag + ": invalid number '" + item + "'");
    }
    out.push_back(value);
    start = end + 1;
  }
  return out;
}

Json number_array(std::span<const double> xs, double scale = 1.0) {
  Json a = Json::array();
  for (double x : xs) a.push_back(x * scale);
  return a;
}

void require_finite(const Json& j, const std::string& path) {
  if (j.is_number_float()) {
    if (!std::isfinite(j.get<double>())) {
      throw std::logic_error("non-finite output field " + path);
    }
  } else if (j.is_object()) {
    for (const auto& [k, v] : j.items()) require_finite(v, path + "." + k);
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) {
      require_finite(j[i], path + "[" + std::to_string(i) + "]");
    }
  }
}

Json record(const std::string& command, Json parameters, Json results,
            Json residuals, double elapsed_ms) {
  Json r;
  r["schema_version"] = kSchemaVersion;
  r["command"] = command;
  r["parameters"] = std::move(parameters);
  r["results"] = std::move(results);
  r["residuals"] = std::move(residuals);
  r["timing_ms"] = elapsed_ms;
  require_finite(r, "$");
  return r;
}

class Stopwatch {
 public:
  double elapsed_ms() const {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// Writes to --out atomically (temp file + rename) or to stdout.
void emit(const std::string& text, const std::string& out_path, std::ostream& out) {
  if (out_path.empty()) {
    out << text;
    return;
  }
  namespace fs = std::filesystem;
  const fs::path target(out_path);
  fs::path tmp = target;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw UsageError("cannot open output file " + tmp.string());
    f << text;
    if (!f.flush()) throw UsageError("cannot write output file " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw UsageError("cannot move output into place: " + ec.message());
  }
}

std::string json_text(const Json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------- allocate

struct AllocateArgs {
  std::string bids;
  double p = 0.0;
  std::string format = "json";
};

int cmd_allocate(const AllocateArgs& a, std::ostream& out) {
  Stopwatch clock;
  const BidProfile bids(parse_list(a.bids, "--bids"));
  const WeightExponent p(a.p);
  const auto alloc = allocate(bids, p);
  const double r = revenue(bids, p);
  double total = 0.0;
  for (double s : alloc.shares) total += s;

  if (a.format == "csv") {
    std::ostringstream os;
    os << "bidder,bid,allocation,payment\n";
    for (std::size_t i = 0; i < bids.size(); ++i) {
      os << i << ',' << format_number(bids[i]) << ','
         << format_number(alloc.shares[i]) << ','
         << format_number(alloc.shares[i] * bids[i]) << '\n';
    }
    os << "total,," << format_number(total) << ',' << format_number(r) << '\n';
    out << os.str();
    return kOk;
  }

  Json params{{"bids", number_array(bids.values())}, {"p", p.value()}};
  Json results{{"allocations", number_array(alloc.shares)}, {"revenue", r}};
  Json residuals{{"allocation_sum_error", std::abs(total - 1.0)}};
  out << json_text(record("allocate", params, results, residuals, clock.elapsed_ms()));
  return kOk;
}

// ---------------------------------------------------------------- solve

struct SolveArgs {
  std::string values;
  double p = 0.0;
  FixedPointOptions fp;
  bool verify = false;
  std::size_t grid_points = 100000;
  double epsilon = 1e-6;
};

Json equilibrium_json(const EquilibriumResult& r) {
  return Json{{"bids", number_array(r.bids.values())},
              {"revenue", r.revenue},
              {"iterations", r.iterations},
              {"bounds_used",
               {{"provenance", to_string(r.bounds_used.provenance)},
                {"w", number_array(r.bounds_used.w)}}}};
}

int cmd_solve(const SolveArgs& a, std::ostream& out) {
  Stopwatch clock;
  const ValuationProfile values(parse_list(a.values, "--values"));
  const WeightExponent p(a.p);

  std::optional<EquilibriumResult> result;
  bool converged = true;
  try {
    result = solve_fixed_point(values, p, a.fp);
  } catch (const FixedPointFailure& failure) {
    result = failure.best;
    converged = false;
  }

  Json params{{"values", number_array(values.values())},
              {"p", p.value()},
              {"tol", a.fp.tol},
              {"max_iter", a.fp.max_iter},
              {"damping", a.fp.damping}};
  Json results = equilibrium_json(*result);
  results["status"] = converged ? "ok" : "convergence_failure";
  if (a.verify) {
    const auto report = verify_nash(result->bids, values, p, a.grid_points, a.epsilon);
    results["nash"] = {{"is_epsilon_nash", report.is_epsilon_nash},
                       {"epsilon", report.epsilon},
                       {"grid_points", a.grid_points},
                       {"worst_deviator", report.worst_deviator},
                       {"worst_gain", report.worst_gain}};
  }
  Json residuals{{"fixed_point", result->residual}};
  out << json_text(record("solve", params, results, residuals, clock.elapsed_ms()));
  return converged ? kOk : kConvergence;
}

// ---------------------------------------------------------------- olos

struct OlosArgs {
  std::optional<int> n;
  std::optional<double> alpha;
  std::optional<double> p;
  double scale = 1.0;
  std::string out_path;
  // sweep
  std::string vary;
  double min = 0.0;
  double max = 0.0;
  std::size_t points = 0;
  bool log = false;
  // optimize / stars
  LineSearchOptions search;
  std::string axis;
  std::string grid;
};

int need_n(const OlosArgs& a) {
  if (!a.n) throw UsageError("--n is required");
  return *a.n;
}
double need_alpha(const OlosArgs& a) {
  if (!a.alpha) throw UsageError("--alpha is required");
  return *a.alpha;
}
double need_p(const OlosArgs& a) {
  if (!a.p) throw UsageError("--p is required");
  return *a.p;
}

void check_scale(double scale) {
  if (!(std::isfinite(scale) && scale > 0.0)) throw UsageError("--scale must be > 0");
}

Json instance_json(const OlosInstance& inst, double scale) {
  return Json{{"n", inst.n()},
              {"alpha", inst.alpha()},
              {"p", inst.p().value()},
              {"scale", scale}};
}

int cmd_olos_solve(const OlosArgs& a, std::ostream& out) {
  Stopwatch clock;
  check_scale(a.scale);
  const OlosInstance inst(need_n(a), need_alpha(a), WeightExponent(need_p(a)));
  const auto eq = olos_equilibrium(inst);
  const double s = a.scale;
  Json results{{"z", eq.z},
               {"b1", eq.b1 * s},
               {"b2", eq.b2 * s},
               {"w_aux", eq.w_aux},
               {"revenue", eq.revenue * s}};
  Json residuals{{"foc_large", eq.foc_residual_large},
                 {"foc_small", eq.foc_residual_small},
                 {"h_scaled", h_eval(eq.z, inst) / std::exp((2.0 * inst.p().value() + 1.0) *
                                                            std::log(eq.z))},
                 {"revenue_forms", std::abs(eq.revenue - eq.revenue_direct)}};
  emit(json_text(record("olos solve", instance_json(inst, s), results, residuals,
                        clock.elapsed_ms())),
       a.out_path, out);
  return kOk;
}

int cmd_olos_bounds(const OlosArgs& a, std::ostream& out) {
  Stopwatch clock;
  check_scale(a.scale);
  const OlosInstance inst(need_n(a), need_alpha(a), WeightExponent(need_p(a)));
  const auto b = revenue_bounds(inst);
  const auto zb = z_bracket(inst);
  Json results{{"lower", b.lower * a.scale},
               {"upper", b.upper * a.scale},
               {"z_interval", {zb.lo, zb.hi}}};
  emit(json_text(record("olos bounds", instance_json(inst, a.scale), results,
                        Json::object(), clock.elapsed_ms())),
       a.out_path, out);
  return kOk;
}

int cmd_olos_sweep(const OlosArgs& a, std::ostream& out) {
  check_scale(a.scale);
  SweepSpec spec;
  if (a.vary == "p") {
    spec.axis = SweepAxis::p;
  } else if (a.vary == "alpha") {
    spec.axis = SweepAxis::alpha;
  } else if (a.vary == "n") {
    spec.axis = SweepAxis::n;
  } else {
    throw UsageError("--vary must be one of p, alpha, n");
  }
  if (spec.axis != SweepAxis::n) spec.n = need_n(a);
  if (spec.axis != SweepAxis::alpha) spec.alpha = need_alpha(a);
  if (spec.axis != SweepAxis::p) spec.p = need_p(a);
  spec.min = a.min;
  spec.max = a.max;
  spec.points = a.points;
  spec.spacing = a.log ? Spacing::log : Spacing::linear;

  const auto rows = sweep(spec);
  const double s = a.scale;
  std::ostringstream os;
  os << kSweepHeader << '\n';
  for (const auto& r : rows) {
    os << to_string(r.axis) << ',' << format_number(r.value) << ','
       << format_number(r.revenue * s) << ',' << format_number(r.z) << ','
       << format_number(r.b1 * s) << ',' << format_number(r.b2 * s) << ','
       << format_number(r.lower_bound * s) << ',' << format_number(r.upper_bound * s)
       << ',' << r.status << '\n';
  }
  emit(os.str(), a.out_path, out);
  return kOk;
}

int cmd_olos_optimize(const OlosArgs& a, std::ostream& out) {
  Stopwatch clock;
  check_scale(a.scale);
  const int n = need_n(a);
  const double alpha = need_alpha(a);
  const auto result = optimize_p(n, alpha, a.search);
  const OlosInstance at_star(n, alpha, result.p_star);
  Json params{{"n", n},
              {"alpha", alpha},
              {"p_min", a.search.p_min},
              {"p_max", a.search.p_max},
              {"tol", a.search.tol},
              {"coarse_points", a.search.coarse_points},
              {"scale", a.scale}};
  Json results{{"p_star", result.p_star.value()},
               {"r_star", result.r_star * a.scale},
               {"upper_bound_at_p_star", revenue_bounds(at_star).upper * a.scale},
               {"at_boundary", result.at_boundary},
               {"evaluations", result.search_trace.size()}};
  emit(json_text(record("olos optimize", params, results, Json::object(),
                        clock.elapsed_ms())),
       a.out_path, out);
  return kOk;
}

int cmd_olos_stars(const OlosArgs& a, std::ostream& out) {
  check_scale(a.scale);
  StarSpec spec;
  if (a.axis == "alpha") {
    spec.axis = StarAxis::alpha;
    spec.n = need_n(a);
  } else if (a.axis == "n") {
    spec.axis = StarAxis::n;
    spec.alpha = need_alpha(a);
  } else {
    throw UsageError("--axis must be alpha or n");
  }
  spec.values = parse_list(a.grid, "--grid");
  spec.search = a.search;

  std::ostringstream os;
  os << kStarHeader << '\n';
  for (const auto& r : star_curves(spec)) {
    os << to_string(spec.axis) << ',' << format_number(r.value) << ','
       << format_number(r.p_star) << ',' << format_number(r.r_star * a.scale) << ','
       << (r.at_boundary ? "true" : "false") << ',' << r.status << '\n';
  }
  emit(os.str(), a.out_path, out);
  return kOk;
}

// ---------------------------------------------------------------- robust

struct RobustArgs {
  std::string domain_path;
  std::optional<double> p_min;
  std::optional<double> p_max;
  std::optional<std::size_t> points;
  double tol = 1e-6;
};

RobustDomain load_domain(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw UsageError("cannot open domain file " + path);
  Json j;
  try {
    j = Json::parse(f);
  } catch (const Json::parse_error& e) {
    throw UsageError("domain file is not valid JSON: " + std::string(e.what()));
  }
  if (!j.is_object()) throw UsageError("domain: expected a JSON object");

  RobustDomain d;
  if (!j.contains("alphas") || !j["alphas"].is_array()) {
    throw UsageError("alphas: expected an array of numbers");
  }
  for (std::size_t i = 0; i < j["alphas"].size(); ++i) {
    const auto& x = j["alphas"][i];
    if (!x.is_number()) throw UsageError("alphas[" + std::to_string(i) + "]: expected a number");
    d.alphas.push_back(x.get<double>());
  }
  if (!j.contains("ns") || !j["ns"].is_array()) {
    throw UsageError("ns: expected an array of integers");
  }
  for (std::size_t i = 0; i < j["ns"].size(); ++i) {
    const auto& x = j["ns"][i];
    if (!x.is_number_integer()) {
      throw UsageError("ns[" + std::to_string(i) + "]: expected an integer");
    }
    d.ns.push_back(x.get<int>());
  }
  if (j.contains("p_grid")) {
    const auto& g = j["p_grid"];
    if (!g.is_object()) throw UsageError("p_grid: expected an object");
    if (g.contains("min")) {
      if (!g["min"].is_number()) throw UsageError("p_grid.min: expected a number");
      d.p_grid.min = g["min"].get<double>();
    }
    if (g.contains("max")) {
      if (!g["max"].is_number()) throw UsageError("p_grid.max: expected a number");
      d.p_grid.max = g["max"].get<double>();
    }
    if (g.contains("points")) {
      if (!g["points"].is_number_unsigned()) {
        throw UsageError("p_grid.points: expected a positive integer");
      }
      d.p_grid.points = g["points"].get<std::size_t>();
    }
  }
  return d;
}

int cmd_robust(const RobustArgs& a, std::ostream& out) {
  Stopwatch clock;
  RobustDomain d = load_domain(a.domain_path);
  if (a.p_min) d.p_grid.min = *a.p_min;
  if (a.p_max) d.p_grid.max = *a.p_max;
  if (a.points) d.p_grid.points = *a.points;
  try {
    d.validate();
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
  const auto r = robust_p(d, a.tol);

  Json params{{"alphas", d.alphas},
              {"ns", d.ns},
              {"p_grid", {{"min", d.p_grid.min}, {"max", d.p_grid.max}, {"points", d.p_grid.points}}},
              {"tol", a.tol}};
  Json results{{"p_tilde", r.p_tilde.value()},
               {"worst_case_R", r.worst_case_revenue},
               {"argmin", {{"alpha", r.argmin_alpha}, {"n", r.argmin_n}}},
               {"at_boundary", r.at_boundary},
               {"evaluations", r.search_trace.size()}};
  out << json_text(record("robust", params, results, Json::object(), clock.elapsed_ms()));
  return kOk;
}

void add_search_flags(CLI::App* cmd, LineSearchOptions& s) {
  cmd->add_option("--p-min", s.p_min, "Lower end of the p search range")->capture_default_str();
  cmd->add_option("--p-max", s.p_max, "Upper end of the p search range")->capture_default_str();
  cmd->add_option("--tol", s.tol, "Relative width of the refined p bracket")->capture_default_str();
  cmd->add_option("--coarse-points", s.coarse_points, "Log-spaced scan points")
      ->capture_default_str();
}

}  // namespace

std::string format_number(double x) {
  if (std::isnan(x)) return "";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Equilibria, revenue bounds and exponent design for quasi-proportional auctions"};
  app.name("qprop");
  app.require_subcommand(1);

  std::function<int()> action;

  AllocateArgs alloc;
  auto* c_alloc = app.add_subcommand("allocate", "Allocations and revenue for a bid vector");
  c_alloc->add_option("--bids", alloc.bids, "Comma-separated bids")->required();
  c_alloc->add_option("--p", alloc.p, "Weight exponent")->required();
  c_alloc->add_option("--format", alloc.format, "json or csv")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
  c_alloc->callback([&] { action = [&] { return cmd_allocate(alloc, out); }; });

  SolveArgs solve;
  auto* c_solve = app.add_subcommand("solve", "Equilibrium for arbitrary valuations");
  c_solve->add_option("--values", solve.values, "Comma-separated valuations")->required();
  c_solve->add_option("--p", solve.p, "Weight exponent")->required();
  c_solve->add_option("--tol", solve.fp.tol, "Sup-norm fixed-point tolerance")->capture_default_str();
  c_solve->add_option("--max-iter", solve.fp.max_iter, "Iteration budget")->capture_default_str();
  c_solve->add_option("--damping", solve.fp.damping, "Step toward the best response")
      ->capture_default_str();
  c_solve->add_flag("--verify", solve.verify, "Run the brute-force Nash check");
  c_solve->add_option("--grid-points", solve.grid_points, "Deviation grid size for --verify")
      ->capture_default_str();
  c_solve->add_option("--epsilon", solve.epsilon, "Utility gain tolerance for --verify")
      ->capture_default_str();
  c_solve->callback([&] { action = [&] { return cmd_solve(solve, out); }; });

  OlosArgs olos;
  auto* c_olos = app.add_subcommand("olos", "One large bidder against n-1 symmetric bidders");
  c_olos->require_subcommand(1);
  auto add_instance = [&](CLI::App* c, bool with_p) {
    c->add_option("--n", olos.n, "Number of bidders");
    c->add_option("--alpha", olos.alpha, "Large bidder's value (others have 1)");
    if (with_p) c->add_option("--p", olos.p, "Weight exponent");
    c->add_option("--scale", olos.scale, "Multiplier for currency outputs")->capture_default_str();
    c->add_option("--out", olos.out_path, "Write output to this file");
  };

  auto* o_solve = c_olos->add_subcommand("solve", "Unique equilibrium (z, b1, b2, R)");
  add_instance(o_solve, true);
  o_solve->callback([&] { action = [&] { return cmd_olos_solve(olos, out); }; });

  auto* o_bounds = c_olos->add_subcommand("bounds", "Lower and upper bounds on revenue");
  add_instance(o_bounds, true);
  o_bounds->callback([&] { action = [&] { return cmd_olos_bounds(olos, out); }; });

  auto* o_sweep = c_olos->add_subcommand("sweep", "CSV table over p, alpha or n");
  add_instance(o_sweep, true);
  o_sweep->add_option("--vary", olos.vary, "p, alpha or n")->required();
  o_sweep->add_option("--min", olos.min, "First grid value")->required();
  o_sweep->add_option("--max", olos.max, "Last grid value")->required();
  o_sweep->add_option("--points", olos.points, "Grid size")->required();
  o_sweep->add_flag("--log", olos.log, "Log spacing");
  o_sweep->callback([&] { action = [&] { return cmd_olos_sweep(olos, out); }; });

  auto* o_opt = c_olos->add_subcommand("optimize", "Revenue-maximizing exponent p*");
  add_instance(o_opt, false);
  add_search_flags(o_opt, olos.search);
  o_opt->callback([&] { action = [&] { return cmd_olos_optimize(olos, out); }; });

  auto* o_stars = c_olos->add_subcommand("stars", "p* and R* along alpha or n (CSV)");
  add_instance(o_stars, false);
  o_stars->add_option("--axis", olos.axis, "alpha or n")->required();
  o_stars->add_option("--grid", olos.grid, "Comma-separated axis values")->required();
  add_search_flags(o_stars, olos.search);
  o_stars->callback([&] { action = [&] { return cmd_olos_stars(olos, out); }; });

  RobustArgs robust;
  auto* c_robust = app.add_subcommand("robust", "Maximin exponent over a set of (alpha, n)");
  c_robust->add_option("--domain", robust.domain_path, "JSON domain file")->required();
  c_robust->add_option("--p-min", robust.p_min, "Override p_grid.min");
  c_robust->add_option("--p-max", robust.p_max, "Override p_grid.max");
  c_robust->add_option("--points", robust.points, "Override p_grid.points");
  c_robust->add_option("--tol", robust.tol, "Relative width of the refined p bracket")
      ->capture_default_str();
  c_robust->callback([&] { action = [&] { return cmd_robust(robust, out); }; });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    return action ? action() : kUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const AllZeroBids& e) {
    err << "error: " << e.what() << '\n';
    return kDegenerate;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const BracketFailure& e) {
    err << "error: " << e.what() << '\n';
    return kBracket;
  } catch (const ConvergenceFailure& e) {
    err << "error: " << e.what() << '\n';
    return kConvergence;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternal;
  }
}

}  // namespace qprop::cli
