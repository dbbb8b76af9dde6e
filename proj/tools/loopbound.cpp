#include <chrono>
#include <cmath>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "loopbound/bounds.hpp"
#include "loopbound/errors.hpp"
#include "loopbound/loop_mc.hpp"
#include "loopbound/reference.hpp"
#include "loopbound/rp_integrals.hpp"
#include "loopbound/tables.hpp"

using namespace loopbound;

namespace {

enum ExitCode { kOk = 0, kOther = 1, kUsage = 2, kDomain = 3, kDivergence = 4, kUnreliable = 5 };

struct Common {
  std::string format = "json";
  double precision = 1.0;
  std::uint64_t seed = 0x5EEDu;
  bool timing = false;
  std::string method;  // empty: per-dimension default
  std::size_t nodes = 0;
  std::size_t samples = 0;
};

double parse_real(const std::string& text, const std::string& what) {
  if (text == "inf" || text == "infinity") return ModelParams::kInfiniteBeta;
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw PreconditionError("cannot parse " + what + " from '" + text + "'");
  }
}

int parse_int(const std::string& text, const std::string& what) {
  const double v = parse_real(text, what);
  if (!std::isfinite(v) || v != std::floor(v)) throw PreconditionError(what + " must be an integer");
  return static_cast<int>(v);
}

QuadratureSpec make_spec(int d, const Common& common) {
  auto spec = default_spec(d, common.precision);
  spec.seed = common.seed;
  if (!common.method.empty()) spec.method = parse_method(common.method);
  if (common.nodes) spec.nodes_per_axis = common.nodes;
  if (common.samples) spec.sample_count = common.samples;
  spec.validate();
  return spec;
}

Json spec_json(const QuadratureSpec& spec) {
  Json j = Json::object();
  j["method"] = to_string(spec.method);
  if (spec.method == QuadratureMethod::TensorChebyshev) {
    j["nodes_per_axis"] = spec.nodes_per_axis;
  } else {
    j["sample_count"] = spec.sample_count;
    j["replicates"] = spec.replicates;
  }
  return j;
}

Json beta_json(double beta) {
  if (std::isinf(beta)) return "inf";
  return beta;
}

void emit(RunRecord& record, const Common& common, std::chrono::steady_clock::time_point start) {
  if (common.timing) {
    record.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  if (common.format == "csv") {
    std::cout << record.to_csv();
  } else {
    std::cout << record.to_json().dump(2) << '\n';
  }
}

// integral ------------------------------------------------------------------

struct IntegralArgs {
  std::string kind;
  std::vector<std::string> positional;
  std::string c;
  std::string tail;
  std::string u = "0";
  std::string d = "3";
  std::string alpha;
};

RunRecord run_integral(IntegralArgs args, const Common& common) {
  for (const auto& kv : args.positional) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw PreconditionError("expected key=value, got '" + kv + "'");
    const auto key = kv.substr(0, eq);
    const auto value = kv.substr(eq + 1);
    if (key == "c") args.c = value;
    else if (key == "tail") args.tail = value;
    else if (key == "u") args.u = value;
    else if (key == "d") args.d = value;
    else if (key == "alpha") args.alpha = value;
    else throw PreconditionError("unknown integral argument '" + key + "'");
  }
  if (args.c.empty()) throw PreconditionError("integral needs coefficients c");
  auto c = CoefficientVector::parse(args.c);
  if (!args.tail.empty()) c = CoefficientVector(c.head(), parse_real(args.tail, "tail"));
  const int d = parse_int(args.d, "d");
  if (d < 1) throw PreconditionError("d must be positive");
  const double u = parse_real(args.u, "u");
  const auto spec = make_spec(d, common);

  RunRecord record;
  record.command = "integral " + args.kind;
  record.seed = common.seed;
  record.params = {{"kind", args.kind}, {"c", c.to_string()}, {"d", d}, {"quadrature", spec_json(spec)}};
  Cell cell;
  cell.coords = {{"kind", args.kind}, {"d", d}};
  auto set = [&](const QuadratureResult& r) {
    cell.value = r.value;
    cell.error = r.abs_error_estimate;
    cell.details["evaluations"] = r.evaluations;
  };
  const bool needs_tail = args.kind == "Jlimit" || args.kind == "Itildelimit";
  if (needs_tail != c.has_tail()) {
    throw PreconditionError(needs_tail ? "limit integrals need a tail coefficient (c=a,b;tail or --tail)"
                                       : "a tail coefficient is only valid for the limit integrals");
  }
  if (args.kind == "I") {
    if (u < 0.0 || u > 1.0) throw DomainError("u must lie in [0, 1]");
    record.params["u"] = u;
    cell.coords["u"] = u;
    if (args.alpha.empty() || args.alpha == "sup") {
      const auto sup = sup_alpha_I(c, u, d, spec);
      cell.value = sup.value;
      cell.error = sup.error;
      cell.details = {{"alpha", sup.argmax}, {"route", to_string(sup.route)}};
      record.params["alpha"] = "sup";
    } else {
      const double alpha = parse_real(args.alpha, "alpha");
      if (!(alpha >= 0.0 && alpha <= 1.0)) throw DomainError("alpha must lie in [0, 1]");
      record.params["alpha"] = alpha;
      cell.coords["alpha"] = alpha;
      set(ical(c, u, d, alpha, spec));
    }
  } else if (args.kind == "Itilde") {
    set(tilde_I(c, d, spec));
  } else if (args.kind == "J") {
    set(J(c, d, spec));
  } else if (args.kind == "Jlimit") {
    set(J_limit(c, d, spec));
  } else if (args.kind == "Itildelimit") {
    set(tilde_I_limit(c, d, spec));
  } else {
    throw PreconditionError("unknown integral kind '" + args.kind + "'");
  }
  record.cells.push_back(std::move(cell));
  return record;
}

// bound ---------------------------------------------------------------------

struct BoundArgs {
  std::string kind;
  int theta = 2;
  int d = 3;
  double u = 0.0;
  std::string beta = "inf";
  int m = 2;
  std::string method = "new";
  std::optional<double> gamma;
};

Cell bound_cell(const BoundResult& r, Json coords) {
  Cell cell;
  cell.coords = std::move(coords);
  cell.value = r.value;
  cell.error = r.error_estimate;
  if (r.argmax_eta) cell.details["eta"] = *r.argmax_eta;
  for (const auto& [k, v] : r.components) cell.details[k] = v;
  return cell;
}

RunRecord run_bound(const BoundArgs& args, const Common& common) {
  ModelParams p;
  p.d = args.d;
  p.theta = args.theta;
  p.u = args.u;
  p.beta = parse_real(args.beta, "beta");
  if (p.d < 1) throw PreconditionError("d must be positive");
  const auto spec = make_spec(p.d, common);
  RunRecord record;
  record.command = "bound " + args.kind;
  record.seed = common.seed;
  record.params = {{"kind", args.kind}, {"theta", p.theta}, {"d", p.d}, {"u", p.u},
                   {"beta", beta_json(p.beta)}, {"quadrature", spec_json(spec)}};
  const Json coords = {{"theta", p.theta}, {"d", p.d}, {"u", p.u}};
  if (args.kind == "nn") {
    record.cells.push_back(bound_cell(nn_lower_bound(p, spec), coords));
  } else if (args.kind == "finite-range") {
    record.params["m"] = args.m;
    auto c = coords;
    c["m"] = args.m;
    record.cells.push_back(bound_cell(finite_range_bound(args.m, p, spec), c));
  } else if (args.kind == "long-range") {
    auto c = coords;
    c["m"] = "inf";
    record.cells.push_back(bound_cell(long_range_bound(p, spec), c));
  } else if (args.kind == "beta-crit") {
    auto cell = bound_cell(beta_crit_upper(p, spec), coords);
    if (auto external = reference_value("external_beta_crit", coords)) {
      cell.details["external_beta_c"] = *external;
      cell.details["ratio_to_external"] = cell.value / *external;
    }
    record.cells.push_back(std::move(cell));
  } else if (args.kind == "gamma") {
    const auto method = args.method == "ueltschi" ? GammaMethod::Ueltschi : GammaMethod::New;
    if (args.method != "ueltschi" && args.method != "new") {
      throw PreconditionError("--method must be 'ueltschi' or 'new'");
    }
    record.params.erase("theta");
    record.params.erase("u");
    record.params.erase("beta");
    record.params["method"] = args.method;
    const GammaAnalysis analysis(p.d, spec);
    Cell cell;
    cell.coords = {{"d", p.d}, {"method", args.method}};
    constexpr double kTol = 5e-3;
    cell.value = analysis.threshold(method, kTol);
    cell.error = kTol / 2.0;
    if (method == GammaMethod::Ueltschi) cell.details["closed_form"] = analysis.ueltschi_closed_form();
    record.cells.push_back(std::move(cell));
    if (args.gamma) {
      record.params["gamma"] = *args.gamma;
      Cell b;
      b.coords = {{"d", p.d}, {"method", args.method}, {"gamma", *args.gamma}};
      b.value = method == GammaMethod::Ueltschi ? analysis.b_ueltschi(*args.gamma) : analysis.b_new(*args.gamma);
      record.cells.push_back(std::move(b));
    }
  } else {
    throw PreconditionError("unknown bound kind '" + args.kind + "'");
  }
  return record;
}

// simulate ------------------------------------------------------------------

struct SimulateArgs {
  int d = 2;
  int L = 6;
  int theta = 2;
  double u = 0.0;
  double beta = 1.0;
  std::uint64_t steps = 200000;
  bool fourier = false;
  std::size_t oracle_samples = 0;
};

RunRecord run_simulate(const SimulateArgs& args, const Common& common, bool& unreliable) {
  const TorusLattice lattice(args.d, args.L);
  ModelParams p;
  p.d = args.d;
  p.theta = args.theta;
  p.u = args.u;
  p.beta = args.beta;
  p.validate_for_simulation();
  RunRecord record;
  record.command = "simulate";
  record.seed = common.seed;
  record.params = {{"d", args.d}, {"L", args.L}, {"theta", args.theta}, {"u", args.u}, {"beta", args.beta}};

  KappaEstimates est;
  if (args.oracle_samples > 0) {
    record.params["estimator"] = "importance_oracle";
    record.params["samples"] = args.oracle_samples;
    est = importance_oracle(lattice, p, args.oracle_samples, common.seed);
  } else {
    McmcOptions options;
    options.steps = args.steps;
    options.seed = common.seed;
    record.params["estimator"] = "mcmc";
    record.params["steps"] = args.steps;
    record.params["batches"] = options.batches;
    est = mcmc_run(lattice, p, options);
  }
  unreliable = est.unreliable;
  record.params["measurements"] = est.measurements;
  record.params["effective_sample_size"] = est.effective_sample_size;
  record.params["unreliable"] = est.unreliable;
  if (args.oracle_samples == 0) record.params["acceptance_rate"] = est.acceptance_rate;

  for (std::size_t v = 0; v < lattice.vertex_count(); ++v) {
    Cell cell;
    cell.coords = {{"observable", "kappa"}, {"x", lattice.coordinates(v)}};
    cell.value = est.mean[v];
    cell.error = est.error[v];
    record.cells.push_back(std::move(cell));
  }
  Cell density;
  density.coords = {{"observable", "loop_density"}};
  density.value = est.loop_density;
  density.error = est.loop_density_error;
  record.cells.push_back(std::move(density));
  Cell links;
  links.coords = {{"observable", "mean_links"}};
  links.value = est.mean_links;
  links.error = est.mean_links_error;
  record.cells.push_back(std::move(links));

  if (args.fourier) {
    const auto f = estimate_fourier(est, lattice);
    for (std::size_t i = 0; i < f.value.size(); ++i) {
      Cell cell;
      cell.coords = {{"observable", "kappa_hat"}, {"k", f.momenta[i]}};
      cell.value = f.value[i];
      cell.error = f.error[i];
      record.cells.push_back(std::move(cell));
    }
    Cell min;
    min.coords = {{"observable", "kappa_hat_min"}, {"k", f.momenta[f.min_index]}};
    min.value = f.value[f.min_index];
    min.error = f.error[f.min_index];
    min.details = {{"worst_margin_3sigma", f.worst_margin}, {"positive_at_3sigma", f.worst_margin >= 0.0}};
    record.cells.push_back(std::move(min));
  }
  return record;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bounds and Monte Carlo checks for theta-weighted random loop models"};
  app.set_version_flag("--version", std::string(LOOPBOUND_VERSION));
  app.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--format", common.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--precision", common.precision, "Refinement factor for every quadrature rule")
        ->check(CLI::PositiveNumber);
    sub->add_option("--seed", common.seed, "Seed for QMC scrambling and Monte Carlo");
    sub->add_flag("--timing", common.timing, "Include wall time in the record");
  };
  auto add_quadrature = [&](CLI::App* sub) {
    sub->add_option("--quadrature", common.method, "Quadrature method")->check(CLI::IsMember({"tensor", "qmc"}));
    sub->add_option("--nodes", common.nodes, "Nodes per axis for the tensor rule");
    sub->add_option("--samples", common.samples, "QMC sample count");
  };

  int table_id = 0;
  bool compare = false;
  auto* table = app.add_subcommand("table", "Reproduce one of the published tables");
  table->add_option("id", table_id, "Table number")->required()->check(CLI::Range(1, 4));
  table->add_flag("--compare", compare, "Diff against the embedded published values");
  add_common(table);

  IntegralArgs iargs;
  auto* integral = app.add_subcommand("integral", "Evaluate one reflection-positivity integral");
  integral->add_option("kind", iargs.kind, "I, Itilde, J, Jlimit or Itildelimit")
      ->required()
      ->check(CLI::IsMember({"I", "Itilde", "J", "Jlimit", "Itildelimit"}));
  integral->add_option("args", iargs.positional, "key=value arguments (c, tail, u, d, alpha)");
  integral->add_option("--c", iargs.c, "Coefficients, e.g. 1,-1 or 1,0;-1 with a tail");
  integral->add_option("--tail", iargs.tail, "Tail coefficient for the limit integrals");
  integral->add_option("--u", iargs.u, "Cross intensity u");
  integral->add_option("--d", iargs.d, "Dimension");
  integral->add_option("--alpha", iargs.alpha, "alpha in [0, 1] or 'sup'");
  add_common(integral);
  add_quadrature(integral);

  BoundArgs bargs;
  auto* bound = app.add_subcommand("bound", "Evaluate one of the lower/upper bounds");
  bound->add_option("kind", bargs.kind, "nn, finite-range, long-range, beta-crit or gamma")
      ->required()
      ->check(CLI::IsMember({"nn", "finite-range", "long-range", "beta-crit", "gamma"}));
  bound->add_option("--theta", bargs.theta, "Loop weight theta");
  bound->add_option("--d", bargs.d, "Dimension");
  bound->add_option("--u", bargs.u, "Cross intensity u");
  bound->add_option("--beta", bargs.beta, "Inverse temperature (number or inf)");
  bound->add_option("--m", bargs.m, "Range for finite-range");
  bound->add_option("--method", bargs.method, "gamma: ueltschi or new");
  bound->add_option("--gamma", bargs.gamma, "gamma: also evaluate b(gamma)");
  add_common(bound);
  add_quadrature(bound);

  SimulateArgs sargs;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo estimate of connection probabilities");
  simulate->add_option("--d", sargs.d, "Dimension");
  simulate->add_option("--L", sargs.L, "Side length (>= 3)");
  simulate->add_option("--theta", sargs.theta, "Loop weight theta (integer >= 1)");
  simulate->add_option("--u", sargs.u, "Cross intensity u");
  simulate->add_option("--beta", sargs.beta, "Inverse temperature");
  simulate->add_option("--steps", sargs.steps, "MCMC proposals after equilibration");
  simulate->add_flag("--fourier-check", sargs.fourier, "Report the Fourier transform of kappa");
  simulate->add_option("--oracle-samples", sargs.oracle_samples, "Use the importance oracle with N samples");
  add_common(simulate);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  const auto start = std::chrono::steady_clock::now();
  try {
    RunRecord record;
    bool unreliable = false;
    if (table->parsed()) {
      TableOptions options;
      options.precision = common.precision;
      options.seed = common.seed;
      record = make_table(table_id, options);
      if (compare) record.compare_with_reference("tables/" + std::to_string(table_id));
    } else if (integral->parsed()) {
      record = run_integral(iargs, common);
    } else if (bound->parsed()) {
      record = run_bound(bargs, common);
    } else {
      record = run_simulate(sargs, common, unreliable);
    }
    emit(record, common, start);
    if (unreliable) {
      std::cerr << "warning: effective sample size below 100, estimate unreliable\n";
      return kUnreliable;
    }
    return kOk;
  } catch (const DomainError& e) {
    std::cerr << "domain error: " << e.what() << '\n';
    return kDomain;
  } catch (const DivergenceError& e) {
    std::cerr << "divergence: " << e.what() << '\n';
    return kDivergence;
  } catch (const PreconditionError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kOther;
  }
}
