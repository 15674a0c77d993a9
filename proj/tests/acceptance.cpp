// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <iterator>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "stargraph/stargraph.hpp"

using namespace stargraph;
namespace fs = std::filesystem;

namespace {

const unsigned threads = std::max(1u, std::min(8u, std::thread::hardware_concurrency()));

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
};

bool report(int id, const std::string& title, Outcome& o) {
  std::cout << "criterion " << id << ": " << (o.pass ? "PASS" : "FAIL") << "  " << title;
  const auto d = o.detail.str();
  if (!d.empty()) std::cout << "  [" << d << "]";
  std::cout << std::endl;
  return o.pass;
}

template <typename F>
bool run(int id, const std::string& title, F&& body) {
  Outcome o;
  try {
    body(o);
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail << "exception: " << e.what();
  }
  return report(id, title, o);
}

EdgePotential random_edge(std::mt19937& rng, bool allow_zero) {
  std::uniform_int_distribution<int> fam(allow_zero ? 0 : 1, 5);
  std::uniform_real_distribution<double> amp(-3.0, 1.5), rate(0.5, 2.5), shift(0.0, 1.5),
      power(4.0, 8.0);
  switch (fam(rng)) {
  case 0: return EdgePotential::zero();
  case 1: return EdgePotential::exponential(amp(rng), rate(rng));
  case 2: return EdgePotential::sech2(amp(rng), rate(rng), shift(rng));
  case 3: return EdgePotential::gaussian(amp(rng), rate(rng), shift(rng));
  case 4: return EdgePotential::bump(amp(rng), rate(rng), shift(rng));
  default: return EdgePotential::powerlaw(amp(rng), rate(rng), power(rng));
  }
}

StarPotential random_star(std::mt19937& rng, std::size_t n, bool allow_zero = true) {
  std::vector<EdgePotential> e;
  for (std::size_t j = 0; j < n; ++j) e.push_back(random_edge(rng, allow_zero));
  return StarPotential(std::move(e));
}

SpectrumResult full_spectrum(const StarPotential& sp) {
  SpectrumOptions so;
  so.threads = threads;
  auto spec = find_eigenvalues(sp, default_kappa_max(sp), so);
  spec.resonance_multiplicity = resonance_multiplicity(sp);
  return spec;
}

struct FleetMember {
  std::string name;
  StarPotential sp;
};

std::vector<FleetMember> canonical_fleet() {
  return {
      {"free", StarPotential::free(3)},
      {"reflectionless", StarPotential::identical(2, EdgePotential::sech2(-2.0, 1.0))},
      {"sech2_n3", StarPotential::identical(3, EdgePotential::sech2(-2.0, 1.0))},
      {"exponential_n3", StarPotential({EdgePotential::exponential(-3.0, 1.0), EdgePotential::exponential(-1.0, 2.0),
                                        EdgePotential::exponential(-2.0, 0.7)})},
      {"smooth_vertex_n4", StarPotential::identical(4, EdgePotential::gaussian(-2.0, 1.0))},
  };
}

struct Prepared {
  SpectrumResult spec;
  CoefficientTable L;
  TraceGrid grid;
};

Prepared prepare(const StarPotential& sp, const TraceOptions& opt) {
  auto spec = full_spectrum(sp);
  auto L = L_recursive(sp, max_asymptotic_order);
  auto grid = make_trace_grid(sp, spec.resonance_multiplicity, opt);
  return {std::move(spec), std::move(L), std::move(grid)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace

int main() {
  std::cout.precision(3);
  std::cout << std::scientific;
  int failed = 0;

  failed += !run(1, "free graph: D = 1, L = 0, empty spectrum, m = 1", [](Outcome& o) {
    const auto sp = StarPotential::free(3);
    std::mt19937 rng(1);
    std::uniform_real_distribution<double> logr(std::log(0.1), std::log(100.0)), arg(0.0, std::numbers::pi);
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
      const cplx z = std::polar(std::exp(logr(rng)), arg(rng));
      worst = std::max(worst, std::abs(perturbation_determinant(sp, z) - 1.0));
    }
    const auto L = L_recursive(sp, max_asymptotic_order);
    double Lmax = 0.0;
    for (int m = 1; m <= L.order; ++m) Lmax = std::max(Lmax, std::abs(L[m]));
    const auto spec = full_spectrum(sp);
    o.pass = worst <= 1e-8 && Lmax == 0.0 && spec.eigenvalues.empty() && spec.resonance_multiplicity == 1;
    o.detail << "max|D-1| " << worst << ", max|L| " << Lmax << ", eigenvalues " << spec.distinct()
             << ", m " << spec.resonance_multiplicity;
  });

  failed += !run(2, "symmetry D(-k) = conj D(k), a even, eta odd (5 random potentials)", [](Outcome& o) {
    std::mt19937 rng(2);
    double worst = 0.0;
    for (int t = 0; t < 5; ++t) {
      const auto sp = random_star(rng, 2 + t % 4);
      PdetOptions po;
      po.threads = threads;
      const auto s = scan(sp, 1e-2, 50.0, 300, po, true);
      for (std::size_t i = 0; i < s.size(); ++i) {
        worst = std::max(worst, std::abs(s.D_mirror[i] - std::conj(s.D[i])));
        worst = std::max(worst, std::abs(s.a_mirror[i] - s.a[i]));
        worst = std::max(worst, std::abs(s.eta_mirror[i] + s.eta[i]));
      }
      for (std::size_t j = 0; j < sp.size(); ++j)
        for (double k : {0.3, 2.0, 17.0}) {
          const auto p = jost_at_origin(sp, j, k), m = jost_at_origin(sp, j, -k);
          worst = std::max(worst, std::abs(m.theta0 - std::conj(p.theta0)));
        }
    }
    o.pass = worst <= 1e-10;
    o.detail << "max deviation " << worst;
  });

  failed += !run(3, "L_1..L_5 recursion vs closed forms (20 random stars)", [](Outcome& o) {
    std::mt19937 rng(3);
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
      const auto sp = random_star(rng, 2 + t % 4);
      const auto rec = L_recursive(sp, 5);
      const auto cf = L_closed_form(sp);
      for (int m = 1; m <= 5; ++m) {
        const double ref = std::abs(cf[m - 1]);
        const double d = std::abs(rec[m] - cf[m - 1]);
        worst = std::max(worst, ref > 0.0 ? d / ref : d);
      }
    }
    o.pass = worst <= 1e-7;
    o.detail << "max relative deviation " << worst;
  });

  failed += !run(4, "spectrum vs finite-difference oracle (10 configurations)", [](Outcome& o) {
    const double h = 0.005;
    const double tol = std::max(1e-4, 10 * h * h);
    std::vector<StarPotential> configs{
        StarPotential::identical(3, EdgePotential::sech2(-6.0, 1.0)),
        StarPotential::identical(4, EdgePotential::sech2(-6.0, 1.0)),
        StarPotential::identical(3, EdgePotential::sech2(-2.0, 1.0)),
        StarPotential::identical(2, EdgePotential::exponential(-4.0, 1.0)),
        StarPotential({EdgePotential::exponential(-3.0, 1.0), EdgePotential::exponential(-1.0, 2.0),
                       EdgePotential::exponential(-2.0, 0.7)}),
        StarPotential({EdgePotential::exponential(-3.0, 1.0), EdgePotential::sech2(-1.0, 2.0, 0.5),
                       EdgePotential::gaussian(-2.0, 0.5, 1.0)}),
        StarPotential::identical(4, EdgePotential::gaussian(-2.0, 1.0)),
        StarPotential({EdgePotential::gaussian(-5.0, 1.0, 1.0), EdgePotential::bump(-3.0, 1.5, 0.5)}),
        StarPotential({EdgePotential::sech2(-8.0, 1.5), EdgePotential::powerlaw(-2.0, 1.0, 6.0),
                       EdgePotential::zero(), EdgePotential::exponential(1.0, 1.0), EdgePotential::gaussian(-1.0, 2.0)}),
        StarPotential({EdgePotential::bump(-10.0, 2.0), EdgePotential::bump(-10.0, 2.0), EdgePotential::sech2(-3.0, 1.0)}),
    };
    double worst = 0.0;
    int total = 0;
    for (std::size_t c = 0; c < configs.size(); ++c) {
      const auto& sp = configs[c];
      const auto spec = full_spectrum(sp);
      const auto run = oracle_eigenvalues_converged(sp, h, std::max(sp.max_truncation(), 20.0));
      const auto& fd = run.eigenvalues;
      if (!run.converged) {
        o.pass = false;
        o.detail << "config " << c << ": oracle box did not settle; ";
      }
      int count_d = spec.total_multiplicity(), count_fd = 0;
      for (const auto& e : fd) count_fd += e.multiplicity;
      total += count_d;
      bool same = count_d == count_fd && fd.size() == spec.distinct();
      for (std::size_t i = 0; same && i < fd.size(); ++i) {
        same = fd[i].multiplicity == spec.eigenvalues[i].multiplicity;
        worst = std::max(worst, std::abs(fd[i].lambda - spec.eigenvalues[i].lambda));
      }
      if (!same) {
        o.pass = false;
        o.detail << "config " << c << ": D count " << count_d << " vs oracle " << count_fd << "; ";
      }
    }
    o.pass = o.pass && worst <= tol;
    o.detail << total << " eigenvalues with multiplicity, max deviation " << worst << " (tol " << tol << ")";
  });

  TraceOptions topt;
  topt.threads = threads;
  std::vector<std::pair<FleetMember, Prepared>> fleet;
  for (auto& m : canonical_fleet()) {
    auto p = prepare(m.sp, topt);
    fleet.emplace_back(std::move(m), std::move(p));
  }

  failed += !run(5, "trace identities s = 1/2..5/2 on the canonical fleet", [&](Outcome& o) {
    double worst = 0.0;
    for (const auto& [m, p] : fleet)
      for (double s : {0.5, 1.0, 1.5, 2.0, 2.5}) {
        const auto r = verify_order(p.grid, p.spec, p.L, s, topt);
        worst = std::max(worst, r.residual / r.budget);
        if (!r.pass) {
          o.pass = false;
          o.detail << m.name << " s=" << s << " residual " << r.residual << " > " << r.budget << "; ";
        }
      }
    // Smooth vertex with identical even edges: closed forms for L_2 and L_4.
    const auto& gauss = fleet.back();
    const auto j = gauss.first.sp.edge(0).jet(0.0, 2);
    const double n = static_cast<double>(gauss.first.sp.size());
    const double L2 = j[0] * (2 - n), L4 = j[2] * (2 - n) - j[0] * j[0] * (4 - 2 * n);
    const double dL = std::max(std::abs(gauss.second.L[2] - L2), std::abs(gauss.second.L[4] - L4));
    o.pass = o.pass && dL <= 1e-7;
    o.detail << "max residual/budget " << worst << ", smooth-vertex |dL| " << dL;
  });

  failed += !run(6, "F/G identity s = 0.1, 0.25, 0.4 on the canonical fleet", [&](Outcome& o) {
    double worst = 0.0;
    for (const auto& [m, p] : fleet)
      for (double s : {0.1, 0.25, 0.4}) {
        const auto r = fg_identity(p.grid, p.spec, p.L, s, topt);
        worst = std::max(worst, r.residual / r.budget);
        if (!r.pass) {
          o.pass = false;
          o.detail << m.name << " s=" << s << " residual " << r.residual << " > " << r.budget << "; ";
        }
      }
    o.detail << "max residual/budget " << worst;
  });

  failed += !run(7, "Levinson jump on two-edge graphs", [](Outcome& o) {
    const std::vector<FleetMember> cases{
        {"free", StarPotential::free(2)},
        {"one bound state", StarPotential::identical(2, EdgePotential::exponential(-1.0, 1.0))},
        {"reflectionless", StarPotential::identical(2, EdgePotential::sech2(-2.0, 1.0))},
    };
    for (const auto& c : cases) {
      const auto spec = full_spectrum(c.sp);
      PdetOptions po;
      po.jost.tol = 1e-12;
      po.threads = threads;
      const auto s = scan(c.sp, 1e-3, 100.0, 400, po);
      const auto r = levinson_check(c.sp, s, spec, 0.05);
      o.pass = o.pass && r.pass;
      o.detail << c.name << " N=" << r.bound_states << " m=" << r.resonance << " |jump-expected| " << r.residual
               << "; ";
    }
  });

  failed += !run(8, "remainder slopes -(M+1), M = 1..3, three rays", [](Outcome& o) {
    const auto sp = StarPotential({EdgePotential::exponential(-3.0, 1.0), EdgePotential::exponential(-1.0, 2.0),
                                   EdgePotential::exponential(-2.0, 0.7)});
    const auto L = L_recursive(sp, max_asymptotic_order);
    DecayOptions opt;
    opt.threads = threads;
    for (int M = 1; M <= 3; ++M) {
      const auto r = remainder_decay(sp, L, M, opt);
      o.detail << "M=" << M << ":";
      for (const auto& f : r.rays) {
        const bool ok = !f.inconclusive && std::abs(f.slope + (M + 1)) <= 0.2;
        o.pass = o.pass && ok;
        o.detail << ' ' << std::fixed << std::setprecision(3) << f.slope << std::scientific;
      }
      o.detail << "; ";
    }
  });

  failed += !run(9, "trace-check output is byte-identical across runs", [](Outcome& o) {
    const fs::path out = fs::temp_directory_path() / "stargraph_acceptance_determinism";
    fs::remove_all(out);
    const std::string base = std::string("\"") + STARGRAPH_CLI + "\" --config \"" + STARGRAPH_SAMPLE_CONFIG +
                             "\" --out \"" + out.string() + "\"";
    const int rc1 = std::system((base + " --threads 1 trace-check").c_str());
    const auto first = slurp(out / "trace_check.json");
    fs::copy_file(out / "trace_check.json", out / "first.json", fs::copy_options::overwrite_existing);
    const int rc2 = std::system((base + " --threads " + std::to_string(threads) + " trace-check").c_str());
    const auto second = slurp(out / "trace_check.json");
    o.pass = rc1 == 0 && rc2 == 0 && !first.empty() && first == second && slurp(out / "first.json") == first;
    o.detail << "exit codes " << rc1 << "/" << rc2 << ", " << first.size() << " bytes";
  });

  std::cout << (failed ? "acceptance: FAIL (" + std::to_string(failed) + " criteria)" : "acceptance: PASS (9/9)")
            << std::endl;
  return failed ? 1 : 0;
}
