// Command-line front end: scan | spectrum | coefficients | trace-check.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "stargraph/io.hpp"
#include "stargraph/stargraph.hpp"

namespace fs = std::filesystem;
using namespace stargraph;

namespace {

enum Exit { ok = 0, verification_failed = 1, config_error = 2, numeric_failure = 3 };

struct Context {
  RunConfig config;
  fs::path out;
  unsigned threads = 1;
  bool verbose = false;

  void log(const std::string& msg) const {
    if (verbose) std::cerr << "[stargraph] " << msg << '\n';
  }
};

void write_json(const fs::path& path, const ordered_json& j) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot write '" + path.string() + "'");
  os << j.dump(2) << '\n';
}

SpectrumResult compute_spectrum(const StarPotential& sp, const Context& ctx) {
  SpectrumOptions so;
  so.jost = ctx.config.jost();
  so.threads = ctx.threads;
  const double kmax = ctx.config.kappa_max.value_or(default_kappa_max(sp));
  ctx.log("locating eigenvalues for kappa in (0, " + std::to_string(kmax) + "]");
  auto spec = find_eigenvalues(sp, kmax, so);
  spec.resonance_multiplicity = resonance_multiplicity(sp);
  return spec;
}

int cmd_scan(const Context& ctx) {
  const auto& c = ctx.config;
  const auto sp = c.star();
  PdetOptions po;
  po.jost = c.jost();
  po.threads = ctx.threads;
  ctx.log("scanning " + std::to_string(c.scan_npoints) + " points");
  const auto s = scan(sp, c.scan_k_min, c.scan_k_max, c.scan_npoints, po, c.scan_mirrored);
  const auto path = ctx.out / "scan.csv";
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot write '" + path.string() + "'");
  write_scan_csv(os, s);
  return ok;
}

int cmd_spectrum(const Context& ctx) {
  const auto sp = ctx.config.star();
  const auto spec = compute_spectrum(sp, ctx);
  ordered_json j;
  j["config"] = to_json(ctx.config);
  j["spectrum"] = to_json(spec);
  if (ctx.config.oracle_h > 0.0) {
    ctx.log("finite-difference oracle with h = " + std::to_string(ctx.config.oracle_h));
    const auto run = oracle_eigenvalues_converged(sp, ctx.config.oracle_h, sp.max_truncation());
    j["oracle"]["x_max"] = run.X;
    j["oracle"]["converged"] = run.converged;
    j["oracle"]["eigenvalues"] = to_json(run.eigenvalues);
  }
  write_json(ctx.out / "spectrum.json", j);
  return ok;
}

int cmd_coefficients(const Context& ctx) {
  const auto sp = ctx.config.star();
  ctx.log("recursive coefficients up to order " + std::to_string(ctx.config.order));
  const auto t = L_recursive(sp, ctx.config.order);
  ordered_json j;
  j["config"] = to_json(ctx.config);
  j["coefficients"] = to_json(t, L_closed_form(sp));
  write_json(ctx.out / "coefficients.json", j);
  return ok;
}

int cmd_trace_check(const Context& ctx) {
  const auto& c = ctx.config;
  const auto sp = c.star();
  const auto spec = compute_spectrum(sp, ctx);
  ctx.log("coefficients");
  const auto L = L_recursive(sp, c.order);
  const auto topt = c.trace_options(ctx.threads);
  ctx.log("sampling D on the trace grid");
  const auto grid = make_trace_grid(sp, spec.resonance_multiplicity, topt);

  bool all = true;
  ordered_json j;
  j["config"] = to_json(c);
  j["spectrum"] = to_json(spec);
  ordered_json traces = ordered_json::array();
  for (double s : c.trace_orders) {
    const auto r = verify_order(grid, spec, L, s, topt);
    all = all && r.pass;
    traces.push_back(to_json(r));
  }
  j["traces"] = traces;
  ordered_json fg = ordered_json::array();
  for (double s : c.fg_s) {
    const auto r = fg_identity(grid, spec, L, s, topt);
    all = all && r.pass;
    fg.push_back(to_json(r));
  }
  j["fg_identity"] = fg;
  if (sp.size() == 2) {
    ctx.log("Levinson check");
    PdetOptions po;
    po.jost = c.jost();
    po.threads = ctx.threads;
    const auto s = scan(sp, c.scan_k_min, c.scan_k_max, c.scan_npoints, po);
    const auto r = levinson_check(sp, s, spec, c.levinson_tol);
    all = all && r.pass;
    j["levinson"] = to_json(r, c.levinson_tol);
  } else {
    j["levinson"] = nullptr;
  }
  ordered_json decay = ordered_json::array();
  DecayOptions dopt;
  dopt.threads = ctx.threads;
  for (int M : c.decay_orders) {
    ctx.log("remainder decay, M = " + std::to_string(M));
    const auto r = remainder_decay(sp, L, M, dopt);
    all = all && r.pass(c.decay_tol);
    decay.push_back(to_json(r, c.decay_tol));
  }
  j["remainder_decay"] = decay;
  j["pass"] = all;
  write_json(ctx.out / "trace_check.json", j);
  return all ? ok : verification_failed;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scattering and trace-formula toolkit for Schrodinger operators on star graphs"};
  app.require_subcommand(1);
  std::string config_path, out_dir;
  unsigned threads = 0;
  bool verbose = false;
  app.add_option("--config", config_path, "JSON run configuration")->required();
  app.add_option("--out", out_dir, "output directory (overrides output_dir in the config)");
  app.add_option("--threads", threads, "worker threads (0 = hardware concurrency)");
  app.add_flag("--verbose", verbose, "progress messages on stderr");
  app.fallthrough();
  auto* scan_cmd = app.add_subcommand("scan", "tabulate D, a and eta on a k grid (CSV)");
  auto* spectrum_cmd = app.add_subcommand("spectrum", "eigenvalues, multiplicities and resonance (JSON)");
  auto* coeff_cmd = app.add_subcommand("coefficients", "asymptotic coefficients L_m by both routes (JSON)");
  auto* trace_cmd = app.add_subcommand("trace-check", "verify the trace identities (JSON)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? ok : config_error;
  }

  Context ctx;
  ctx.verbose = verbose;
  ctx.threads = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
  try {
    ctx.config = load_config(config_path);
    if (!out_dir.empty()) ctx.config.output_dir = out_dir;
    ctx.out = ctx.config.output_dir;
    std::error_code ec;
    fs::create_directories(ctx.out, ec);
    if (ec) throw ConfigError("cannot create output directory '" + ctx.out.string() + "'");
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return config_error;
  }

  try {
    if (*scan_cmd) return cmd_scan(ctx);
    if (*spectrum_cmd) return cmd_spectrum(ctx);
    if (*coeff_cmd) return cmd_coefficients(ctx);
    if (*trace_cmd) return cmd_trace_check(ctx);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return config_error;
  } catch (const std::exception& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return numeric_failure;
  }
  return ok;
}
