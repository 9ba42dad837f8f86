// Experiment runner.  Each subcommand reads a JSON config, computes in
// memory, then writes CSV tables, SVG plots and a manifest in one go.
//
// Exit status: 0 success, 2 config or input error, 3 capacity guard, 1 other.

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "cli_support.hpp"
#include "qtherm/bath.hpp"
#include "qtherm/davies.hpp"
#include "qtherm/expander.hpp"
#include "qtherm/metropolis.hpp"
#include "qtherm/randomwalk.hpp"
#include "qtherm/rmt.hpp"
#include "qtherm/spectrum.hpp"

using namespace qtherm;
using namespace qtherm::cli;

namespace {

struct Context {
  std::uint64_t seed = 0;
  int jobs = 1;
};

struct Outcome {
  std::vector<Artifact> artifacts;
  json results = json::object();
};

// A subcommand parses its config fully (throwing SchemaError) before any
// computation, and returns a closure doing the work.
using Job = std::function<Outcome(const Context&)>;
using Parser = std::function<Job(Fields&, json& normalized)>;

struct ChainSpec {
  spectrum::SpinChainParams params;
  double truncate_fraction = 0;
};

ChainSpec read_chain(Fields f, json& norm) {
  ChainSpec c;
  c.params.L = static_cast<int>(f.at_least("L", 2, 6));
  c.params.g = f.number("g", 0.9045);
  c.params.h = f.number("h", 0.8090);
  c.params.J = f.number("J", 1.0);
  c.params.periodic = f.boolean("periodic", true);
  c.truncate_fraction = f.non_negative("truncate_fraction", 0.0);
  if (c.truncate_fraction >= 0.5) throw SchemaError(f.path() + ".truncate_fraction", "must be below 0.5");
  if (c.params.L > spectrum::kMaxQubits) throw CapacityError("chain length exceeds the dense guard");
  f.finish();
  norm = {{"L", c.params.L}, {"g", c.params.g}, {"h", c.params.h}, {"J", c.params.J},
          {"periodic", c.params.periodic}, {"truncate_fraction", c.truncate_fraction}};
  return c;
}

spectrum::SpectralModel build_model(const ChainSpec& c) {
  const RMat H = spectrum::build_chain(c.params);
  if (c.truncate_fraction <= 0) return spectrum::diagonalize(H);
  const auto full = spectrum::diagonalize(H);
  return spectrum::diagonalize(H, spectrum::default_window(full.eigenvalues, c.truncate_fraction));
}

const std::vector<std::string> kFamilies{"sigma_x_sites", "xxx", "zzz", "xyz"};

Artifact csv(const std::string& name, const Table& t) { return {name, t.to_csv()}; }
Artifact svg(const std::string& name, const Table& t, const PlotSpec& p) { return {name, render_plot(t, p)}; }

Mat initial_state(const std::string& kind, int d, std::uint64_t seed) {
  Mat rho = Mat::Zero(d, d);
  if (kind == "top") {
    rho(d - 1, d - 1) = 1;
  } else if (kind == "bottom") {
    rho(0, 0) = 1;
  } else if (kind == "maximally-mixed") {
    rho = Mat::Identity(d, d) / static_cast<double>(d);
  } else {
    Rng rng = stream(seed, 0);
    rho = random_density(d, rng);
  }
  return rho;
}

const std::vector<std::string> kInitial{"top", "bottom", "maximally-mixed", "random"};

// ---------------------------------------------------------------------------

Job parse_diagonalize(Fields& f, json& norm) {
  json cn;
  const ChainSpec chain = read_chain(f.object("chain"), cn);
  const double nu0 = f.positive("nu0", 0.2);
  const double beta = f.non_negative("beta", 0.0);
  f.finish();
  norm = {{"chain", cn}, {"nu0", nu0}, {"beta", beta}};
  return [=](const Context&) {
    const auto model = build_model(chain);
    const auto r = spectrum::round_spectrum(model, nu0);
    const auto g = spectrum::gibbs_weights(r, beta);
    Table spec{{"index", "eigenvalue", "bin_label"}, {}};
    for (int i = 0; i < model.size(); ++i)
      spec.add({num(i), num(model.eigenvalues(i)), num(r.bins[r.bin_of[i]].label)});
    Table bins{{"bin_label", "rank", "gibbs_weight"}, {}};
    for (int b = 0; b < r.num_bins(); ++b)
      bins.add({num(r.bins[b].label), num(r.bins[b].rank()), num(g.per_bin(b))});
    Outcome o;
    o.artifacts = {csv("spectrum.csv", spec), csv("bins.csv", bins),
                   svg("spectrum.svg", spec, {"Spectrum", "index", {"eigenvalue", "bin_label"}, "eigenindex", "energy"}),
                   svg("bins.svg", bins, {"Bin ranks", "bin_label", {"rank"}, "bin energy", "rank", false, false, true})};
    o.results = {{"dimension", model.dim}, {"retained", model.size()}, {"bins", r.num_bins()},
                 {"max_residual", model.max_residual}, {"single_bin_warning", r.single_bin_warning}};
    return o;
  };
}

Job parse_bath_table(Fields& f, json& norm) {
  const double beta = f.non_negative("beta", 1.0);
  const double delta = f.positive("delta", 1.0);
  const double lo = f.number("omega_min", -6.0);
  const double hi = f.number("omega_max", 6.0);
  const long points = f.at_least("points", 2, 241);
  const double tol = f.positive("tolerance", 1e-10);
  if (!(hi > lo)) throw SchemaError("$.omega_max", "must exceed omega_min");
  f.finish();
  norm = {{"beta", beta}, {"delta", delta}, {"omega_min", lo}, {"omega_max", hi}, {"points", points},
          {"tolerance", tol}};
  return [=](const Context&) {
    const bath::BathProfile b{beta, delta};
    b.validate();
    Table t{{"omega", "gamma", "re_Gamma", "im_Gamma"}, {}};
    for (long k = 0; k < points; ++k) {
      const double w = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(points - 1);
      const cplx G = bath::gamma_big(b, w, tol);
      t.add({num(w), num(bath::gamma(b, w)), num(G.real()), num(G.imag())});
    }
    Outcome o;
    o.artifacts = {csv("bath.csv", t),
                   svg("bath.svg", t, {"Bath spectral function", "omega", {"gamma", "re_Gamma", "im_Gamma"}, "omega", "value"})};
    o.results = {{"peak", b.shift()}, {"correlator_l1", bath::correlator_l1(b, bath::kInfinity)}};
    return o;
  };
}

Job parse_davies_evolve(Fields& f, json& norm) {
  json cn;
  const ChainSpec chain = read_chain(f.object("chain"), cn);
  const double nu0 = f.positive("nu0", 0.25);
  const double beta = f.non_negative("beta", 1.0);
  const double delta = f.positive("delta", 1.0);
  const std::string family = f.choice("family", kFamilies, "sigma_x_sites");
  const long count = f.integer("count", -1);
  const bool lamb = f.boolean("lamb_shift", false);
  const std::string init = f.choice("initial", kInitial, "top");
  const double tau_gaps = f.positive("tau_gaps", 20.0);
  const double tau_max = f.non_negative("tau_max", 0.0);
  const long points = f.at_least("points", 2, 101);
  f.finish();
  norm = {{"chain", cn}, {"nu0", nu0}, {"beta", beta}, {"delta", delta}, {"family", family},
          {"count", count}, {"lamb_shift", lamb}, {"initial", init}, {"tau_gaps", tau_gaps},
          {"tau_max", tau_max}, {"points", points}};
  return [=](const Context& ctx) {
    const auto model = build_model(chain);
    if (model.size() > superop::kMaxDenseDim)
      throw CapacityError("dense evolution is limited to dimension " + std::to_string(superop::kMaxDenseDim));
    const auto r = spectrum::round_spectrum(model, nu0);
    const auto ints = davies::make_interactions(model, family, chain.params.L, static_cast<int>(count));
    davies::Rates rates;
    rates.bath = bath::BathProfile{beta, delta};
    davies::DaviesOptions opts;
    opts.lamb_shift = lamb;
    const auto L = davies::rounded_davies(r, ints, rates, opts);
    const RVec sigma = spectrum::gibbs_weights(r, beta).rounded_diag;
    const auto gap = davies::generator_gap(L, sigma);
    const double tau = tau_max > 0 ? tau_max : tau_gaps / std::max(std::abs(gap.lambda2), 1e-300);
    std::vector<double> ts;
    for (long k = 0; k < points; ++k) ts.push_back(tau * static_cast<double>(k) / static_cast<double>(points - 1));
    const Mat rho0 = initial_state(init, r.dim(), ctx.seed);
    const Mat sig = sigma.cast<cplx>().asDiagonal();
    const auto curve = davies::converge_to_gibbs(L, rho0, sig, ts);
    Table t{{"t", "trace_distance"}, {}};
    for (size_t k = 0; k < ts.size(); ++k) t.add({num(ts[k]), num(0.5 * curve.distance[k])});
    Outcome o;
    o.artifacts = {csv("trajectory.csv", t),
                   svg("trajectory.svg", t, {"Distance to the rounded Gibbs state", "t", {"trace_distance"}, "time", "trace distance", false, true})};
    const auto s = davies::check_structure(L, sigma);
    o.results = {{"lambda1", gap.lambda1}, {"lambda2", gap.lambda2}, {"fitted_rate", curve.fitted_rate},
                 {"mlsi_lower_bound", davies::mlsi_lower_bound(gap.gap(), sigma)},
                 {"trace_residual", s.trace_residual}, {"detailed_balance", s.detailed_balance},
                 {"fixed_point", s.fixed_point}, {"tau", tau}};
    return o;
  };
}

Job parse_expander_scan(Fields& f, json& norm) {
  const auto Ls = f.integers("L", std::vector<long>{8});
  const std::string family = f.choice("family", kFamilies, "sigma_x_sites");
  const auto counts = f.integers("counts", std::vector<long>{1, 2, 3, 4, 5, 6, 7, 8});
  const double nu0 = f.positive("nu0", 0.1);
  const long omega_k = f.at_least("omega_k", 0, 2);
  const auto kprimes = f.integers("kprime", std::vector<long>{0});
  const double offset = f.number("nu1_offset", 0.0);
  const bool gaussian = f.boolean("gaussian", false);
  const long seeds = f.at_least("seeds", 1, 1);
  const double V = f.positive("V", 1.0);
  const double beta = f.non_negative("beta", 0.0);
  const bool constant = f.boolean("constant_rates", true);
  const double gconst = f.positive("gamma_constant", 1.0);
  const double bdelta = f.positive("bath_delta", 1.0);
  for (size_t i = 0; i < Ls.size(); ++i)
    if (Ls[i] < 2 || Ls[i] > spectrum::kMaxQubits)
      throw SchemaError("$.L[" + std::to_string(i) + "]", "must lie in 2.." + std::to_string(spectrum::kMaxQubits));
  for (size_t i = 0; i < counts.size(); ++i)
    if (counts[i] < 1) throw SchemaError("$.counts[" + std::to_string(i) + "]", "must be at least 1");
  f.finish();
  norm = {{"L", Ls}, {"family", family}, {"counts", counts}, {"nu0", nu0}, {"omega_k", omega_k},
          {"kprime", kprimes}, {"nu1_offset", offset}, {"gaussian", gaussian}, {"seeds", seeds},
          {"V", V}, {"beta", beta}, {"constant_rates", constant}, {"gamma_constant", gconst},
          {"bath_delta", bdelta}};
  return [=](const Context& ctx) {
    expander::ScanConfig cfg;
    cfg.beta = beta;
    cfg.constant_rates = constant;
    cfg.gamma_constant = gconst;
    cfg.bath_delta = bdelta;
    cfg.V = V;
    for (long L : Ls)
      for (long kp : kprimes)
        for (long a : counts)
          for (long s = 0; s < seeds; ++s) {
            expander::ScanPoint p;
            p.L = static_cast<int>(L);
            p.family = family;
            p.count = static_cast<int>(a);
            p.nu0 = nu0;
            p.omega_k = omega_k;
            p.kprime = kp;
            p.nu1_offset = offset;
            p.gaussian = gaussian;
            p.seed = ctx.seed * 1000003ull + static_cast<std::uint64_t>(s);
            cfg.points.push_back(p);
          }
    const auto rows = expander::scan_gaps(cfg, ctx.jobs);
    Table t{{"L", "family", "count", "nu0", "omega_k", "kprime", "seed", "rank1", "rank2", "gap", "lambda_top",
             "expected_gap", "deviation", "ratio", "error"},
            {}};
    int failed = 0;
    for (const auto& r : rows) {
      const auto& p = r.point;
      const auto& e = r.report;
      if (!r.error.empty()) ++failed;
      std::string err = r.error;
      for (char& c : err)
        if (c == ',' || c == '\n') c = ';';
      t.add({num(p.L), p.family, num(p.count), num(p.nu0), num(p.omega_k), num(p.kprime),
             std::to_string(p.seed), num(r.rank1), num(r.rank2), num(e.gap), num(e.lambda_top),
             num(e.expected_gap), num(e.deviation), num(e.ratio), err});
    }
    Outcome o;
    o.artifacts = {csv("scan.csv", t),
                   svg("gap_vs_count.svg", t, {"Sector gap against number of interactions", "count", {"gap", "expected_gap"}, "|a|", "gap", false, false, true})};
    o.results = {{"points", rows.size()}, {"failed_points", failed}};
    return o;
  };
}

Job parse_rmt(Fields& f, json& norm) {
  const std::string kind = f.choice("kind", {"tensor", "product"}, "tensor");
  const auto counts = f.integers("counts", std::vector<long>{1, 4, 16});
  const long dim = f.at_least("dim", 1, 16);
  const double V = f.positive("V", 1.0);
  const long trials = f.at_least("trials", 1, 20);
  const double scale = f.number("scale", 1.0);
  const long norm_dim = f.at_least("norm_dim", 0, 0);
  for (size_t i = 0; i < counts.size(); ++i)
    if (counts[i] < 1) throw SchemaError("$.counts[" + std::to_string(i) + "]", "must be at least 1");
  f.finish();
  norm = {{"kind", kind}, {"counts", counts}, {"dim", dim}, {"V", V}, {"trials", trials},
          {"scale", scale}, {"norm_dim", norm_dim}};
  return [=](const Context& ctx) {
    std::vector<int> cs(counts.begin(), counts.end());
    const auto rows = rmt::sum_concentration_mc(rmt::parse_sum_kind(kind), cs, static_cast<int>(dim), V,
                                                static_cast<int>(trials), ctx.seed, scale);
    Table per{{"count", "coefficient", "trial", "norm"}, {}};
    Table sum{{"count", "mean", "std_error", "q10", "q50", "q90"}, {}};
    std::vector<double> x, y;
    json summary = json::array();
    for (const auto& r : rows) {
      for (size_t t = 0; t < r.stats.samples.size(); ++t)
        per.add({num(r.count), num(r.coefficient), num(static_cast<long>(t)), num(r.stats.samples[t])});
      sum.add({num(r.count), num(r.stats.mean), num(r.stats.std_error), num(r.stats.q10), num(r.stats.q50),
               num(r.stats.q90)});
      x.push_back(r.count);
      y.push_back(r.stats.mean);
      summary.push_back({{"count", r.count}, {"mean", r.stats.mean}, {"std_error", r.stats.std_error}});
    }
    Outcome o;
    o.results["rows"] = summary;
    if (x.size() >= 2) o.results["exponent"] = rmt::loglog_slope(x, y);
    if (norm_dim > 0) {
      const auto st = rmt::spectral_norm_mc(static_cast<int>(norm_dim), static_cast<int>(norm_dim), V,
                                            static_cast<int>(trials), ctx.seed + 1);
      o.results["spectral_norm"] = {{"dim", norm_dim}, {"mean", st.mean}, {"std_error", st.std_error},
                                    {"edge", 2.0 * std::sqrt(norm_dim * V)}};
    }
    o.artifacts = {csv("trials.csv", per), csv("summary.csv", sum),
                   {"summary.json", o.results.dump(2) + "\n"},
                   svg("concentration.svg", sum, {"Norm of the interaction sum", "count", {"mean", "q10", "q90"}, "|a|", "norm", true, true})};
    return o;
  };
}

randomwalk::DensitySpec read_density(Fields f, json& norm, std::optional<ChainSpec>& chain) {
  randomwalk::DensitySpec d;
  d.kind = f.choice("kind", {"truncated-gaussian", "bimodal", "table", "from-spectrum"}, "truncated-gaussian");
  d.variance = f.positive("variance", 4.0);
  d.half_width = f.positive("half_width", 8.0);
  d.nu0 = f.positive("nu0", 0.02);
  d.separation = f.non_negative("separation", 0.0);
  d.energies = f.numbers("energies", std::vector<double>{});
  d.density = f.numbers("density", std::vector<double>{});
  norm = {{"kind", d.kind}, {"variance", d.variance}, {"half_width", d.half_width}, {"nu0", d.nu0},
          {"separation", d.separation}, {"energies", d.energies}, {"density", d.density}};
  if (d.kind == "from-spectrum") {
    json cn;
    chain = read_chain(f.object("chain"), cn);
    norm["chain"] = cn;
  } else if (f.has("chain")) {
    throw SchemaError(f.path() + ".chain", "only used with kind from-spectrum");
  }
  f.finish();
  if (d.kind == "table" && (d.energies.size() < 2 || d.energies.size() != d.density.size()))
    throw SchemaError(f.path() + ".density", "table needs matching energies and density of length >= 2");
  return d;
}

Job parse_rw_gap(Fields& f, json& norm) {
  json dn;
  std::optional<ChainSpec> chain;
  const auto density = read_density(f.object("density"), dn, chain);
  const double beta = f.non_negative("beta", 0.5);
  const auto grid = f.numbers("grid", std::vector<double>{0.1, 0.2, 0.4, 0.8});
  if (grid.size() < 4) throw SchemaError("$.grid", "needs at least 4 points");
  for (size_t i = 0; i < grid.size(); ++i)
    if (!(grid[i] > 0)) throw SchemaError("$.grid[" + std::to_string(i) + "]", "must be positive");
  f.finish();
  norm = {{"density", dn}, {"beta", beta}, {"grid", grid}};
  return [=](const Context&) {
    randomwalk::BinnedGibbs g;
    if (chain) {
      g = randomwalk::binned_gibbs(spectrum::round_spectrum(build_model(*chain), density.nu0), beta);
    } else {
      density.validate();
      g = randomwalk::binned_gibbs(density, beta);
    }
    const auto res = randomwalk::lambda_rw_scaling(g, grid);
    Table t{{"delta_rmt", "phi", "lambda2", "gap"}, {}};
    for (const auto& r : res.rows) t.add({num(r.delta_rmt), num(r.phi), num(r.lambda2), num(r.gap)});
    Outcome o;
    o.artifacts = {csv("rw_gap.csv", t),
                   svg("rw_gap.svg", t, {"Random-walk gap against step scale", "delta_rmt", {"gap", "phi"}, "Delta_RMT", "value", true, true})};
    o.results = {{"exponent", res.exponent}, {"states", g.labels.size()}};
    return o;
  };
}

Job parse_metropolis(Fields& f, json& norm) {
  json cn;
  const ChainSpec chain = read_chain(f.object("chain"), cn);
  const double beta = f.non_negative("beta", 0.5);
  const double nu0 = f.positive("nu0", 0.2);
  const std::string mode = f.choice("qpe", {"perfect", "two-bin", "two-bin-with-tail"}, "two-bin");
  const long r_rej = f.at_least("r_rej", 0, 1);
  const double r_amp = f.non_negative("r_amp", 0.0);
  const double p_amp = f.non_negative("p_amp", 0.0);
  const double c = f.positive("c", 1.0);
  const long ell_max = f.at_least("ell_max", 1, 5000);
  const double tol = f.positive("tolerance", 1e-10);
  const std::string family = f.choice("family", kFamilies, "sigma_x_sites");
  const long count = f.integer("count", -1);
  const long restarts = f.at_least("restarts", 0, 4);
  const std::string init = f.choice("initial", kInitial, "maximally-mixed");
  if (r_rej > metropolis::kMaxRejectionRounds)
    throw CapacityError("r_rej above " + std::to_string(metropolis::kMaxRejectionRounds));
  f.finish();
  norm = {{"chain", cn}, {"beta", beta}, {"nu0", nu0}, {"qpe", mode}, {"r_rej", r_rej}, {"r_amp", r_amp},
          {"p_amp", p_amp}, {"c", c}, {"ell_max", ell_max}, {"tolerance", tol}, {"family", family},
          {"count", count}, {"restarts", restarts}, {"initial", init}};
  return [=](const Context& ctx) {
    const auto model = build_model(chain);
    if (model.size() > metropolis::kMaxMaterializeDim)
      throw CapacityError("Metropolis maps are limited to dimension " +
                          std::to_string(metropolis::kMaxMaterializeDim));
    const auto r = spectrum::round_spectrum(model, nu0);
    const auto ints = davies::make_interactions(model, family, chain.params.L, static_cast<int>(count));
    metropolis::QPEModel q;
    q.nu0 = nu0;
    q.mode = metropolis::parse_qpe_mode(mode);
    q.r_amp = r_amp;
    q.p_amp = p_amp;
    q.c = c;
    metropolis::MetropolisConfig cfg;
    cfg.beta = beta;
    cfg.r_rej = static_cast<int>(r_rej);
    const metropolis::MetropolisMap N(r, ints, cfg, q);
    const RVec sigma = metropolis::reference_state(r, q, beta);
    const Mat target = sigma.cast<cplx>().asDiagonal();
    const auto fp = metropolis::iterate_to_fixed_point(N, initial_state(init, r.dim(), ctx.seed),
                                                       static_cast<int>(ell_max), target, tol);
    const auto bundle = N.materialize();
    const auto eps = metropolis::epsilon_db(bundle, sigma, static_cast<int>(restarts), ctx.seed);
    const auto lead = metropolis::leading_eigenvalues(bundle, sigma);
    Table t{{"step", "trace", "tv"}, {}};
    for (size_t k = 0; k < fp.trace.size(); ++k) t.add({num(static_cast<long>(k)), num(fp.trace[k]), num(fp.tv[k])});
    Outcome o;
    o.results = {{"eps_db", eps.value}, {"eps_db_converged", eps.converged}, {"lambda_lead", fp.lambda_lead},
                 {"lambda1_self_adjoint", lead.first}, {"lambda2_self_adjoint", lead.second},
                 {"fixed_point_distance", fp.distance}, {"steps", fp.steps}, {"residual", fp.residual},
                 {"mean_trace_deficit", bundle.trace_deficit(Mat::Identity(r.dim(), r.dim()) / r.dim())}};
    o.artifacts = {csv("trajectory.csv", t), {"diagnostics.json", o.results.dump(2) + "\n"},
                   svg("trajectory.svg", t, {"Metropolis iteration", "step", {"tv"}, "step", "TV to reference", false, true})};
    return o;
  };
}

int fail(int code, const std::string& msg) {
  std::cerr << "error: " << msg << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Thermalization numerics: spectra, Davies generators, expanders, random walks, Metropolis maps"};
  app.require_subcommand(1);
  const std::map<std::string, std::pair<std::string, Parser>> commands{
      {"diagonalize", {"Diagonalize a spin chain and bin its spectrum", parse_diagonalize}},
      {"bath-table", {"Tabulate bath spectral functions", parse_bath_table}},
      {"davies-evolve", {"Evolve under the rounded Davies generator", parse_davies_evolve}},
      {"expander-scan", {"Scan block-sector gaps and deviations", parse_expander_scan}},
      {"rmt-concentration", {"Monte Carlo norms of Gaussian interaction sums", parse_rmt}},
      {"rw-gap", {"Random-walk gap scaling on a binned Gibbs measure", parse_rw_gap}},
      {"metropolis-run", {"Iterate the Metropolis map with finite-resolution energy readout", parse_metropolis}},
  };
  std::string config_path, out_dir;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  for (const auto& [name, entry] : commands) {
    CLI::App* sub = app.add_subcommand(name, entry.first);
    sub->add_option("--config", config_path, "JSON config file")->required();
    sub->add_option("--out", out_dir, "Output directory")->required();
    sub->add_option("--seed", seed, "Root seed (overrides the config)");
    sub->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  const std::string name = app.get_subcommands().front()->get_name();
  const auto start = std::chrono::steady_clock::now();

  try {
    std::ifstream in(config_path);
    if (!in) return fail(2, "cannot read config " + config_path);
    json raw;
    try {
      raw = json::parse(in);
    } catch (const json::parse_error& e) {
      return fail(2, "$: malformed JSON (" + std::string(e.what()) + ")");
    }
    Fields f(raw, "$");
    std::uint64_t root = 0;
    if (f.has("seed")) {
      const long s = f.at_least("seed", 0);
      root = static_cast<std::uint64_t>(s);
    } else {
      f.integer("seed", 0);
    }
    if (seed) root = *seed;
    json norm;
    const Job job = commands.at(name).second(f, norm);
    norm["seed"] = root;

    const Outcome out = job(Context{root, jobs});
    RunRecord rec;
    rec.subcommand = name;
    rec.config = norm;
    rec.seed = root;
    rec.jobs = jobs;
    rec.results = out.results;
    rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_outputs(out_dir, rec, out.artifacts);
    std::cout << out.results.dump() << "\n";
    return 0;
  } catch (const SchemaError& e) {
    return fail(2, e.what());
  } catch (const ValidationError& e) {
    return fail(2, e.what());
  } catch (const CapacityError& e) {
    return fail(3, std::string("capacity: ") + e.what());
  } catch (const std::exception& e) {
    return fail(1, e.what());
  }
}
