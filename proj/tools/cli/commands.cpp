#include "cli/commands.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "qbound/classical_bounds.hpp"
#include "qbound/errors.hpp"
#include "qbound/invariants.hpp"
#include "qbound/measurement.hpp"
#include "qbound/montecarlo.hpp"
#include "qbound/quantum_bounds.hpp"
#include "qbound/version.hpp"

namespace qbound::cli {

using nlohmann::json;

namespace {

Domain model_domain(const ModelConfig& model) {
  return model.domain ? Domain::closed(model.domain->first, model.domain->second) : Domain::circle();
}

json number(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

json numbers(const RealVector& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(number(v(i)));
  return out;
}

json header(const RunConfig& cfg, const std::string& command) {
  return json{{"command", command},
              {"version", std::string(kVersion)},
              {"config_hash", config_hash(cfg)},
              {"seed", cfg.seed},
              {"rng", std::string(kRngAlgorithm)},
              {"config", canonical_json(cfg)}};
}

void csv_metadata(std::ostream& os, const RunConfig& cfg) {
  os << "# version: " << kVersion << "\n"
     << "# config_hash: " << config_hash(cfg) << "\n"
     << "# seed: " << cfg.seed << "\n"
     << "# rng: " << kRngAlgorithm << "\n";
}

constexpr const char* kCsvHeader = "m,bound_kind,value,ratio_to_qcrb,argmax_lambda,attained_at_limit";

void csv_row(std::ostream& os, const BoundRecord& rec) {
  std::string offsets;
  for (Index i = 0; i < rec.result.optimal_offsets.size(); ++i) {
    if (i > 0) offsets += ";";
    offsets += format_double(rec.result.optimal_offsets(i));
  }
  os << rec.m << "," << rec.spec.name() << "," << format_double(rec.result.value) << ","
     << format_double(rec.result.value / rec.qcrb) << "," << offsets << ","
     << (rec.result.diagnostics.attained_at_limit ? "true" : "false") << "\n";
}

json record_json(const BoundRecord& rec) {
  const auto& d = rec.result.diagnostics;
  return json{{"bound_kind", rec.spec.name()},
              {"m", rec.m},
              {"theta", rec.theta},
              {"bound_value", number(rec.result.value)},
              {"qcrb", number(rec.qcrb)},
              {"ratio_to_qcrb", number(rec.result.value / rec.qcrb)},
              {"optimal_offsets", numbers(rec.result.optimal_offsets)},
              {"optimal_a", numbers(rec.result.optimal_a)},
              {"diagnostics",
               {{"grid_points", d.grid_points},
                {"evaluations", d.evaluations},
                {"refine_iterations", d.refine_iterations},
                {"edge_value", number(d.edge_value)},
                {"limit_value", number(d.limit_value)},
                {"attained_at_limit", d.attained_at_limit},
                {"alpha", number(d.alpha)},
                {"in_range", d.in_range},
                {"range_residual", number(d.range_residual)},
                {"support_violation", number(d.support_violation)},
                {"regularization_epsilon", number(d.regularization_epsilon)},
                {"backend", d.backend}}}};
}

// Product measurement of the same POVM on each copy.
Povm product_povm(const Povm& single, int copies) {
  std::vector<ComplexMatrix> elems;
  for (const auto& e : single.elements()) elems.push_back(e.matrix());
  std::vector<ComplexMatrix> current = elems;
  for (int c = 1; c < copies; ++c) {
    std::vector<ComplexMatrix> next;
    for (const auto& a : current) {
      for (const auto& b : elems) next.push_back(kron(a, b));
    }
    current = std::move(next);
  }
  std::vector<HermitianOperator> out;
  for (const auto& m : current) out.push_back(HermitianOperator::from_trusted(m));
  return Povm(std::move(out));
}

Povm classical_povm(const StateFamily& family, const BoundSpec& spec, int m, double theta,
                    const OptimizerConfig& opt) {
  if (spec.povm == "optimal") {
    BoundSpec quantum = spec;
    quantum.quantum = true;
    const auto q = compute_bound(family, quantum, m, theta, opt);
    return measurement_for_bound(family, theta, q.result, spec.s, m, opt).povm;
  }
  if (family.dim() != 2) throw ConfigError("povm '" + spec.povm + "' needs a qubit model");
  const Vec3 axis = spec.povm == "x" ? Vec3::UnitX() : spec.povm == "y" ? Vec3::UnitY() : Vec3::UnitZ();
  return product_povm(Povm::qubit_axis(axis), m);
}

bool is_config_kind(ErrorKind k) {
  return k == ErrorKind::InvalidArgument || k == ErrorKind::OutOfDomain || k == ErrorKind::DimensionCap ||
         k == ErrorKind::OrderUnavailable || k == ErrorKind::NonUnitAxis;
}

// Runs a command body and maps failures to exit codes.
template <typename Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "qbound: config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const Error& e) {
    err << "qbound: " << (is_config_kind(e.kind()) ? "config error" : "numerical failure") << " ["
        << to_string(e.kind()) << "] " << e.what() << "\n";
    return is_config_kind(e.kind()) ? kConfigError : kNumericalFailure;
  } catch (const std::exception& e) {
    err << "qbound: numerical failure: " << e.what() << "\n";
    return kNumericalFailure;
  }
}

// Writes to the configured path, or to out when none is set.
void emit(const RunConfig& cfg, std::ostream& out, const std::string& text) {
  if (cfg.output.path.empty()) {
    out << text;
    return;
  }
  std::ofstream file(cfg.output.path, std::ios::binary);
  if (!file) throw ConfigError("output.path: cannot open '" + cfg.output.path + "' for writing");
  file << text;
}

}  // namespace

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

std::unique_ptr<StateFamily> build_family(const ModelConfig& model) {
  const Domain domain = model_domain(model);
  if (model.kind == "depolarized") {
    if (model.dim == 2) return std::make_unique<DepolarizedPureModel>(DepolarizedPureModel::equatorial_qubit(model.epsilon, domain));
    return std::make_unique<DepolarizedPureModel>(DepolarizedPureModel::phase_ladder(model.dim, model.epsilon, domain));
  }
  Vec3 r0 = Vec3::Zero();
  if (model.entropy) {
    r0 = Vec3(0.0, entropy_to_bloch_length(*model.entropy), 0.0);
  } else if (model.r0->size() == 1) {
    r0 = Vec3(0.0, model.r0->front(), 0.0);
  } else {
    r0 = Vec3((*model.r0)[0], (*model.r0)[1], (*model.r0)[2]);
  }
  const Vec3 axis(model.axis[0], model.axis[1], model.axis[2]);
  return std::make_unique<QubitPhaseModel>(BlochVector(r0), axis, domain);
}

BoundRecord compute_bound(const StateFamily& family, const BoundSpec& spec, int m, double theta,
                          const OptimizerConfig& opt) {
  BoundRecord rec{spec, m, theta, {}, qcrb(family, theta, m).value};
  if (spec.quantum) {
    rec.result = (spec.r == 0 && spec.s == 1) ? qcrb(family, theta, m)
                                              : sup_over_testpoints(family, theta, spec.r, spec.s, opt, m);
  } else {
    const Povm povm = classical_povm(family, spec, m, theta, opt);
    rec.result = classical_abel_sup(povm, *copies_of(family, m), theta, spec.r, spec.s, opt);
  }
  return rec;
}

int cmd_bound(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto family = build_family(cfg.model);
    const auto rec = compute_bound(*family, cfg.bound.spec, cfg.bound.m, cfg.bound.theta, cfg.optimizer);
    std::ostringstream os;
    if (cfg.output.format == "csv") {
      csv_metadata(os, cfg);
      os << kCsvHeader << "\n";
      csv_row(os, rec);
    } else {
      json doc = header(cfg, "bound");
      doc["result"] = record_json(rec);
      os << doc.dump(2) << "\n";
    }
    emit(cfg, out, os.str());
    return static_cast<int>(kOk);
  });
}

int cmd_sweep_fig1(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto family = build_family(cfg.model);
    struct Cell {
      int m;
      BoundSpec spec;
    };
    std::vector<Cell> cells;
    for (int m : cfg.sweep.m) {
      for (const auto& k : cfg.sweep.kinds) cells.push_back({m, k});
    }
    // Cells run in parallel with one optimizer thread each; rows keep the
    // (m, kind list) order.
    std::vector<std::optional<BoundRecord>> records(cells.size());
    std::vector<std::exception_ptr> failures(cells.size());
    OptimizerConfig single = cfg.optimizer;
    single.threads = 1;
    const unsigned workers = std::min<unsigned>(worker_count(cfg.optimizer), static_cast<unsigned>(cells.size()));
    std::atomic<std::size_t> next{0};
    auto work = [&] {
      for (std::size_t i = next++; i < cells.size(); i = next++) {
        try {
          records[i] = compute_bound(*family, cells[i].spec, cells[i].m, cfg.bound.theta, single);
        } catch (...) {
          failures[i] = std::current_exception();
        }
      }
    };
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    for (const auto& f : failures) {
      if (f) std::rethrow_exception(f);
    }

    std::ostringstream os;
    if (cfg.output.format == "json") {
      json doc = header(cfg, "sweep-fig1");
      doc["rows"] = json::array();
      for (const auto& r : records) doc["rows"].push_back(record_json(*r));
      os << doc.dump(2) << "\n";
    } else {
      csv_metadata(os, cfg);
      os << kCsvHeader << "\n";
      for (const auto& r : records) csv_row(os, *r);
    }
    emit(cfg, out, os.str());
    return static_cast<int>(kOk);
  });
}

int cmd_montecarlo(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (!cfg.bound.spec.quantum) throw ConfigError("montecarlo: bound.kind must be a quantum kind");
    if (cfg.output.format == "csv") throw ConfigError("montecarlo: only json output is available");
    const auto family = build_family(cfg.model);
    const int m = cfg.bound.m;
    const double theta = cfg.bound.theta;
    const auto rec = compute_bound(*family, cfg.bound.spec, m, theta, cfg.optimizer);
    const auto om = measurement_for_bound(*family, theta, rec.result, cfg.bound.spec.s, m, cfg.optimizer);
    const auto multi = copies_of(*family, m);
    const HermitianOperator rho = multi->evaluate(theta);

    const auto run = sample(om.povm, rho, cfg.montecarlo.n_samples, cfg.seed, theta);
    const auto stats = evaluate_estimator(run, om.estimator);
    const auto exact = evaluate_exact(probabilities(om.povm, rho), om.estimator);
    const RealVector set_offsets = om.set.offsets();
    const std::vector<double> offsets(set_offsets.data(), set_offsets.data() + set_offsets.size());
    const double drift = estimator_theta_drift(om.povm, *multi, theta, offsets,
                                               static_cast<int>(om.set.derivative_count()));

    json counts = json::array();
    for (auto c : run.counts) counts.push_back(c);
    json doc = header(cfg, "montecarlo");
    doc["result"] = {{"bound_kind", cfg.bound.spec.name()},
                     {"m", m},
                     {"theta", theta},
                     {"n_samples", run.n_samples},
                     {"analytic_bound", number(om.bound)},
                     {"exact_variance", number(exact.variance)},
                     {"empirical_mean", number(theta + stats.mean)},
                     {"empirical_variance", number(stats.variance)},
                     {"variance_std_error", number(stats.variance_std_error)},
                     {"variance_ratio", number(stats.variance / om.bound)},
                     {"z_score", number((stats.variance - om.bound) / stats.variance_std_error)},
                     {"test_offsets", numbers(set_offsets)},
                     {"estimator_deviations", numbers(om.estimator)},
                     {"estimator_theta_drift", number(drift)},
                     {"counts", counts}};
    std::ostringstream os;
    os << doc.dump(2) << "\n";
    emit(cfg, out, os.str());
    return static_cast<int>(kOk);
  });
}

int cmd_check(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    InvariantOptions options;
    options.seed = cfg.seed;
    options.filter = cfg.check.filter;
    if (cfg.check.mutate_omega) {
      options.omega = [](const HermitianOperator& rho, const HermitianOperator& x) {
        return (1.0 + 1e-6) * omega_apply(rho, x);
      };
    }
    const auto results = run_invariants(options);
    if (results.empty()) throw ConfigError("check: filter '" + cfg.check.filter + "' matches no invariant");
    std::size_t passed = 0;
    std::ostringstream os;
    for (const auto& r : results) {
      passed += r.passed ? 1 : 0;
      const std::string name = r.group + "." + r.name;
      os << (r.passed ? "PASS  " : "FAIL  ") << std::left << std::setw(48) << name << " measured "
         << format_double(r.measured) << "  tolerance " << format_double(r.tolerance) << "\n";
    }
    os << passed << "/" << results.size() << " invariants passed\n";
    emit(cfg, out, os.str());
    return static_cast<int>(passed == results.size() ? kOk : kCheckFailed);
  });
}

namespace {

std::vector<double> parse_list(const std::string& text, std::size_t expected, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  ss.imbue(std::locale::classic());
  std::string item;
  while (std::getline(ss, item, ',')) {
    double v = 0.0;
    const char* b = item.data();
    while (*b == ' ') ++b;
    const auto res = std::from_chars(b, item.data() + item.size(), v);
    if (res.ec != std::errc() || res.ptr != item.data() + item.size()) {
      throw ConfigError(what + ": cannot parse '" + text + "'");
    }
    out.push_back(v);
  }
  if (expected != 0 && out.size() != expected) {
    throw ConfigError(what + ": expected " + std::to_string(expected) + " comma-separated numbers, got '" + text + "'");
  }
  return out;
}

struct Flags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> format, output_path;
  std::optional<int> threads;
  // model
  std::optional<std::string> model, axis, domain;
  std::optional<double> entropy, r0, epsilon;
  std::optional<int> dim;
  // bound
  std::optional<std::string> kind, order, povm;
  std::optional<int> m;
  std::optional<double> theta;
  // optimizer
  std::optional<int> grid_points, coarse_grid_points, refine_iterations, refine_candidates;
  std::optional<std::string> backend;
  std::optional<double> derivative_step;
  bool regularize = false;
  // commands
  std::optional<std::string> ms, kinds;
  std::optional<std::int64_t> n_samples;
  std::optional<std::string> filter;
  bool mutate_omega = false;
};

void add_common(CLI::App* app, Flags& f) {
  app->add_option("--config", f.config_path, "JSON config file; flags override its values");
  app->add_option("--seed", f.seed, "RNG seed recorded in the output");
  app->add_option("--format", f.format, "csv or json");
  app->add_option("--output", f.output_path, "Output file (stdout when absent)");
  app->add_option("--threads", f.threads, "Worker threads (0: QBOUND_THREADS or hardware)");
}

void add_model(CLI::App* app, Flags& f) {
  app->add_option("--model", f.model, "qubit or depolarized");
  app->add_option("--entropy", f.entropy, "von Neumann entropy of the qubit state in nats");
  app->add_option("--r0,--r", f.r0, "Bloch length of the equatorial qubit state");
  app->add_option("--axis", f.axis, "Rotation axis as x,y,z");
  app->add_option("--epsilon", f.epsilon, "Depolarizing weight");
  app->add_option("--dim", f.dim, "Hilbert space dimension of the depolarized model");
  app->add_option("--domain", f.domain, "Parameter interval lo,hi (default (-pi, pi])");
}

void add_bound(CLI::App* app, Flags& f) {
  app->add_option("--kind", f.kind, "qcrb, qhcrb, qbab, qbhb, qab, ccrb, chcrb, cbab, cbhb, cab or qab(r,s)");
  app->add_option("--order", f.order, "Order r,s (or a single index for qbab/qbhb)");
  app->add_option("--m", f.m, "Number of copies");
  app->add_option("--theta", f.theta, "True parameter value");
  app->add_option("--povm", f.povm, "Measurement for classical kinds: x, y, z or optimal");
}

void add_optimizer(CLI::App* app, Flags& f) {
  app->add_option("--grid-points", f.grid_points, "Grid size along the first offset");
  app->add_option("--coarse-grid-points", f.coarse_grid_points, "Grid size along further offsets");
  app->add_option("--refine-iterations", f.refine_iterations, "Golden-section steps");
  app->add_option("--refine-candidates", f.refine_candidates, "Grid maxima that get refined");
  app->add_option("--backend", f.backend, "auto, generic or closed_form");
  app->add_option("--derivative-step", f.derivative_step, "Finite-difference step (0: family default)");
  app->add_flag("--regularize", f.regularize, "Mix singular states with the identity instead of failing");
}

json overlay(const Flags& f, json base) {
  auto set = [&](const char* block, const char* key, const json& v) { base[block][key] = v; };
  if (f.seed) base["seed"] = *f.seed;
  if (f.format) set("output", "format", *f.format);
  if (f.output_path) set("output", "path", *f.output_path);
  if (f.threads) set("optimizer", "threads", *f.threads);
  if (f.model) set("model", "kind", *f.model);
  if (f.entropy) {
    set("model", "entropy", *f.entropy);
    if (base["model"].contains("r0")) base["model"].erase("r0");
  }
  if (f.r0) {
    set("model", "r0", *f.r0);
    if (base["model"].contains("entropy")) base["model"].erase("entropy");
  }
  if (f.axis) set("model", "axis", parse_list(*f.axis, 3, "--axis"));
  if (f.domain) {
    if (*f.domain == "circle") {
      if (base.contains("model") && base["model"].contains("domain")) base["model"].erase("domain");
    } else {
      set("model", "domain", parse_list(*f.domain, 2, "--domain"));
    }
  }
  if (f.epsilon) set("model", "epsilon", *f.epsilon);
  if (f.dim) set("model", "dim", *f.dim);
  if (f.kind) {
    set("bound", "kind", *f.kind);
    if (!f.order && base["bound"].contains("order")) base["bound"].erase("order");
  }
  if (f.order) set("bound", "order", *f.order);
  if (f.povm) set("bound", "povm", *f.povm);
  if (f.m) set("bound", "m", *f.m);
  if (f.theta) set("bound", "theta", *f.theta);
  if (f.grid_points) set("optimizer", "grid_points", *f.grid_points);
  if (f.coarse_grid_points) set("optimizer", "coarse_grid_points", *f.coarse_grid_points);
  if (f.refine_iterations) set("optimizer", "refine_iterations", *f.refine_iterations);
  if (f.refine_candidates) set("optimizer", "refine_candidates", *f.refine_candidates);
  if (f.backend) set("optimizer", "backend", *f.backend);
  if (f.derivative_step) set("optimizer", "derivative_step", *f.derivative_step);
  if (f.regularize) set("optimizer", "regularize", true);
  if (f.ms) {
    json ms = json::array();
    for (double v : parse_list(*f.ms, 0, "--ms")) {
      if (v != std::floor(v)) throw ConfigError("--ms: expected integers");
      ms.push_back(static_cast<int>(v));
    }
    set("sweep", "m", ms);
  }
  if (f.kinds) {
    json kinds = json::array();
    std::stringstream ss(*f.kinds);
    std::string item;
    // qab(1,1) contains a comma, so kinds are separated by ';' or spaces.
    while (std::getline(ss, item, ';')) {
      std::stringstream words(item);
      std::string w;
      while (words >> w) kinds.push_back(w);
    }
    set("sweep", "kinds", kinds);
  }
  if (f.n_samples) set("montecarlo", "n_samples", *f.n_samples);
  if (f.filter) set("check", "filter", *f.filter);
  if (f.mutate_omega) set("check", "mutate_omega", true);
  return base;
}

json load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config: cannot read '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("--config: '" + path + "' is not valid JSON: " + e.what());
  }
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Frequentist precision bounds for quantum phase estimation", "qbound"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  Flags f;

  auto* bound = app.add_subcommand("bound", "Compute one bound");
  add_common(bound, f);
  add_model(bound, f);
  add_bound(bound, f);
  add_optimizer(bound, f);

  auto* sweep = app.add_subcommand("sweep-fig1", "Bound ratios to the QCRB over copy numbers");
  add_common(sweep, f);
  add_model(sweep, f);
  add_optimizer(sweep, f);
  sweep->add_option("--theta", f.theta, "True parameter value");
  sweep->add_option("--ms", f.ms, "Copy numbers, comma separated");
  sweep->add_option("--kinds", f.kinds, "Bound kinds separated by ';' or spaces");

  auto* mc = app.add_subcommand("montecarlo", "Sample the optimal measurement and compare with the bound");
  add_common(mc, f);
  add_model(mc, f);
  add_bound(mc, f);
  add_optimizer(mc, f);
  mc->add_option("--n", f.n_samples, "Number of samples");

  auto* check = app.add_subcommand("check", "Run the invariant suite");
  add_common(check, f);
  check->add_option("--filter", f.filter, "Group name or substring of invariant names");
  check->add_flag("--mutate-omega", f.mutate_omega, "Perturb the Omega implementation (suite self-test)")
      ->group("Developer");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return kOk;
  } catch (const CLI::Success&) {
    const auto subs = app.get_subcommands();
    out << (subs.empty() ? app.help() : subs.front()->help());
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "qbound: config error: " << e.what() << "\n";
    return kConfigError;
  }

  RunConfig cfg;
  const int parsed = guarded(err, [&] {
    json base = f.config_path.empty() ? json::object() : load_file(f.config_path);
    cfg = parse_config(overlay(f, std::move(base)));
    return static_cast<int>(kOk);
  });
  if (parsed != kOk) return parsed;

  if (bound->parsed()) return cmd_bound(cfg, out, err);
  if (sweep->parsed()) return cmd_sweep_fig1(cfg, out, err);
  if (mc->parsed()) return cmd_montecarlo(cfg, out, err);
  return cmd_check(cfg, out, err);
}

}  // namespace qbound::cli
