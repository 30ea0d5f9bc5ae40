#include "lorentzfk/harness/run.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <functional>
#include <nlohmann/json.hpp>
#include <sstream>
#include <thread>

#include "lorentzfk/harness/oracle.hpp"
#include "lorentzfk/io.hpp"

namespace lfk::harness {
namespace {

using json = nlohmann::json;
constexpr const char* kToolVersion = "0.3.0";

json number_or_null(std::optional<double> x) {
  if (!x || !std::isfinite(*x)) return nullptr;
  return *x;
}

std::string csv_number(std::optional<double> x) {
  if (!x || !std::isfinite(*x)) return "";
  return format_number(*x);
}

// Runs task(i) for i < count on up to `workers` threads; results keep index
// order and the lowest-index failure is rethrown.
template <typename T>
std::vector<T> parallel_map(std::size_t count, std::size_t workers, const std::function<T(std::size_t)>& task) {
  std::vector<T> results(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto body = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        results[i] = task(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t n = std::max<std::size_t>(1, std::min(workers, count));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n; ++t) pool.emplace_back(body);
  body();
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return results;
}

Triangulation build_geometry(const ExperimentConfig& c, std::size_t index) {
  const auto& g = c.geometry;
  if (g.kind == "chain") {
    std::vector<std::uint32_t> counts(g.height + 1, 1);
    counts.back() = 0;
    return tree_to_triangulation(RootedPlanarTree(std::move(counts)));
  }
  Stream rng = Stream::derive(c.seed, "geometry", index);
  const auto dist = make_offspring(c.offspring);
  if (g.kind == "sb") return tree_to_triangulation(sample_sb_tree(dist, g.height, rng));
  return tree_to_triangulation(sample_gw_tree(dist, g.height, rng));
}

RootedPlanarTree build_tree(const ExperimentConfig& c, std::size_t index) {
  const auto& g = c.geometry;
  if (g.kind == "chain") {
    std::vector<std::uint32_t> counts(g.height + 1, 1);
    counts.back() = 0;
    return RootedPlanarTree(std::move(counts));
  }
  Stream rng = Stream::derive(c.seed, "geometry", index);
  const auto dist = make_offspring(c.offspring);
  if (g.kind == "sb") return sample_sb_tree(dist, g.height, rng);
  return sample_gw_tree(dist, g.height, rng);
}

std::string pad(std::size_t i) {
  std::string s = std::to_string(i);
  return std::string(s.size() < 4 ? 4 - s.size() : 0, '0') + s;
}

class Runner {
 public:
  Runner(const ExperimentConfig& config, const RunOptions& options, OutputDir& out)
      : c_(config), opt_(options), out_(out) {}

  void sample_cdlt() {
    const auto trees = parallel_map<RootedPlanarTree>(c_.geometry.samples, opt_.workers,
                                                      [&](std::size_t i) { return build_tree(c_, i); });
    std::vector<std::vector<std::uint64_t>> layers;
    json summary = json::array();
    for (std::size_t i = 0; i < trees.size(); ++i) {
      std::ostringstream t, g;
      write_tree(t, trees[i]);
      const auto tri = tree_to_triangulation(trees[i]);
      write_triangulation(g, tri);
      out_.write("tree_" + pad(i) + ".txt", t.str());
      out_.write("graph_" + pad(i) + ".txt", g.str());
      layers.push_back(layer_sizes(trees[i]));
      summary.push_back({{"sample_id", i}, {"height", trees[i].height()}, {"vertices", trees[i].vertex_count()}});
    }
    if (c_.wants("csv")) {
      std::ostringstream l;
      write_layer_csv(l, layers);
      out_.write("layers.csv", l.str());
    }
    if (c_.wants("json")) out_.write("samples.json", summary.dump(2) + "\n");
  }

  void geometry_stats() {
    const Decay j = c_.spec ? make_spec(*c_.spec, std::max<std::size_t>(1, c_.quantum ? c_.quantum->d : 1)).j()
                            : Decay::log_cubed(1.0);
    struct Row {
      std::vector<std::uint64_t> layers;
      double growth = 0.0;
      SeriesBound jsum, coupling;
      std::size_t sources = 0;
    };
    const auto rows = parallel_map<Row>(c_.geometry.samples, opt_.workers, [&](std::size_t i) {
      const auto tri = build_geometry(c_, i);
      Row r;
      r.layers = tri.layer_sizes();
      r.growth = growth_constant(r.layers, c_.geometry.epsilon);
      r.jsum = j_layer_sum(r.layers, j, growth_layer_bound(r.layers, c_.geometry.epsilon));
      const DistanceOracle oracle(tri);
      std::vector<std::uint32_t> sources;
      for (std::uint32_t v = 0; v < oracle.vertex_count(); ++v)
        if (oracle.vertex_count() <= 4096 || oracle.level_of(v) <= 8) sources.push_back(v);
      r.coupling = coupling_constant(oracle, j, sources);
      r.sources = sources.size();
      return r;
    });
    std::ostringstream csv;
    csv << "sample_id,height,vertices,growth_constant,j_layer_sum,j_tail_bound,coupling_constant,coupling_tail_bound,"
           "coupling_sources\n";
    json arr = json::array();
    std::vector<std::vector<std::uint64_t>> layers;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& r = rows[i];
      std::uint64_t vertices = 0;
      for (auto k : r.layers) vertices += k;
      csv << i << ',' << r.layers.size() - 1 << ',' << vertices << ',' << format_number(r.growth) << ','
          << format_number(r.jsum.value) << ',' << format_number(r.jsum.tail_bound) << ','
          << format_number(r.coupling.value) << ',' << format_number(r.coupling.tail_bound) << ',' << r.sources << '\n';
      arr.push_back({{"sample_id", i},
                     {"height", r.layers.size() - 1},
                     {"vertices", vertices},
                     {"growth_constant", r.growth},
                     {"j_layer_sum", r.jsum.value},
                     {"j_tail_bound", r.jsum.tail_bound},
                     {"coupling_constant", r.coupling.value},
                     {"coupling_tail_bound", r.coupling.tail_bound},
                     {"coupling_sources", r.sources}});
      layers.push_back(r.layers);
    }
    if (c_.wants("csv")) {
      out_.write("geometry_stats.csv", csv.str());
      std::ostringstream l;
      write_layer_csv(l, layers);
      out_.write("layers.csv", l.str());
    }
    if (c_.wants("json")) out_.write("geometry_stats.json", json{{"decay", j.name()}, {"samples", arr}}.dump(2) + "\n");
  }

  bool mc_run() {
    const auto& q = *c_.quantum;
    const auto& m = *c_.mc;
    const auto spec = make_spec(*c_.spec, q.d);
    const auto tri = build_geometry(c_, 0);
    const DistanceOracle geometry(tri);
    const auto volume = vertices_up_to(geometry, m.volume_level);
    const auto window = vertices_up_to(geometry, m.window_level);
    const auto coupling = coupling_constant(geometry, spec.j(), volume);
    std::vector<WindowPoint> pts;
    std::vector<std::size_t> grid_index;
    for (std::size_t k = 0; k < m.eval_points; ++k) {
      const std::size_t g = k * q.grid / m.eval_points;
      std::vector<std::size_t> idx(q.d, g);
      pts.push_back(WindowPoint(window.size(), grid_point(idx, q.grid)));
      grid_index.push_back(g);
    }
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t a = 0; a < pts.size(); ++a)
      for (std::size_t b = 0; b < pts.size(); ++b) pairs.emplace_back(a, b);
    McRdmkParams mp;
    mp.samples = m.sweeps;
    mp.inner_samples = m.inner_samples;
    mp.thin = m.thin;
    mp.burn_in = m.burn_in;
    mp.batches = m.batches;
    mp.coupling = coupling.value + coupling.tail_bound;
    mp.grid = q.grid;
    struct ChainResult {
      RdmKernelEstimate est;
      double acceptance = 0.0;
    };
    const auto chains = parallel_map<ChainResult>(m.chains, opt_.workers, [&](std::size_t k) {
      Stream init = Stream::derive(c_.seed, "mc-run-init", k);
      GibbsSampler chain(geometry, spec, LoopConfiguration::sample_free(volume, q.beta, q.slices, q.d, init),
                         Stream::derive(c_.seed, "mc-run", k));
      ChainResult r;
      r.est = estimate_rdmk_mc(chain, window, pts, pts, pairs, mp);
      r.acceptance = chain.stats().rate();
      return r;
    });
    RdmKernelEstimate combined = chains.front().est;
    combined.level = m.window_level;
    combined.seed = c_.seed;
    const double nc = static_cast<double>(chains.size());
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      double s = 0.0, e2 = 0.0;
      for (const auto& ch : chains) {
        s += ch.est.values[p];
        e2 += ch.est.std_errors[p] * ch.est.std_errors[p];
      }
      combined.values[p] = s / nc;
      combined.std_errors[p] = std::sqrt(e2) / nc;
    }
    apply_uniform_bound(combined, spec, mp.coupling);
    std::size_t violations = combined.bound_violations;
    for (const auto& ch : chains) violations += ch.est.bound_violations;

    if (c_.wants("csv")) {
      std::ostringstream r;
      write_rdmk_csv(r, rdmk_rows(combined));
      out_.write("rdmk.csv", r.str());
      std::ostringstream b;
      b << "chain,batch,x_index,y_index,value\n";
      for (std::size_t k = 0; k < chains.size(); ++k)
        for (std::size_t bi = 0; bi < m.batches; ++bi)
          for (std::size_t p = 0; p < pairs.size(); ++p)
            b << k << ',' << bi << ',' << pairs[p].first << ',' << pairs[p].second << ','
              << format_number(chains[k].est.batch_means[p][bi]) << '\n';
      out_.write("batches.csv", b.str());
    }
    if (c_.wants("json")) {
      json rows = json::array();
      for (const auto& r : rdmk_rows(combined))
        rows.push_back({{"n", r.n}, {"x_index", r.x_index}, {"y_index", r.y_index}, {"value", r.value},
                        {"std_error", r.std_error}, {"method", r.method}, {"seed", r.seed}, {"L", r.slices},
                        {"G", r.grid}, {"beta", r.beta}});
      json acc = json::array();
      for (const auto& ch : chains) acc.push_back(ch.acceptance);
      out_.write("rdmk.json", json{{"window_level", m.window_level},
                                   {"volume_level", m.volume_level},
                                   {"volume_vertices", volume.size()},
                                   {"window_vertices", window.size()},
                                   {"x_grid_index", grid_index},
                                   {"coupling_constant", mp.coupling},
                                   {"uniform_bound", combined.uniform_bound},
                                   {"bound_violations", violations},
                                   {"acceptance_rates", acc},
                                   {"estimates", rows}}
                                     .dump(2) +
                                     "\n");
    }
    if (violations != 0) {
      message_ = std::to_string(violations) + " estimates exceed the uniform bound";
      return false;
    }
    return true;
  }

  bool oracle_check() {
    const auto& q = *c_.quantum;
    const auto spec = make_spec(*c_.spec, q.d);
    OracleSuiteParams params;
    params.grid = {q.grid, q.slices, q.beta};
    params.seed = c_.seed;
    params.eval_points = std::min<std::size_t>(4, q.grid);
    if (c_.mc) {
      params.mc.samples = c_.mc->sweeps;
      params.mc.inner_samples = c_.mc->inner_samples;
      params.mc.thin = c_.mc->thin;
      params.mc.burn_in = c_.mc->burn_in;
      params.mc.batches = c_.mc->batches;
      params.eval_points = std::min(c_.mc->eval_points, q.grid);
    }
    // Feasibility guard for every instance before any work.
    const auto tri = tree_to_triangulation(RootedPlanarTree(std::vector<std::uint32_t>{1, 1, 1, 1, 0}));
    const DistanceOracle geometry(tri);
    for (const auto& vol : {std::vector<std::uint32_t>{0}, {0, 1}, {0, 1, 2}}) {
      const ExactProblem p{vol, {0}, {}};
      const double cost = exact_cost(p, geometry, spec, params.grid, ExactEngine::Auto);
      if (cost > kExactCostLimit)
        fail(ErrorCode::GuardExceeded, "brute-force cost " + format_number(cost) + " for an oracle instance exceeds the limit");
    }
    const auto results = run_oracle_suite(spec, params);
    bool ok = true;
    json arr = json::array();
    std::ostringstream csv;
    csv << "instance,volume,max_abs_dev,max_rel_dev,max_z,fkdlr,compat_exact,compat_mc_dev,compat_mc_sigma,trace,symmetry,"
           "min_eigenvalue,violations_exact,violations_mc,pass\n";
    for (const auto& r : results) {
      ok = ok && r.pass;
      arr.push_back({{"instance", r.instance},
                     {"volume", r.volume},
                     {"max_abs_dev", r.max_abs_dev},
                     {"max_rel_dev", r.max_rel_dev},
                     {"max_z", number_or_null(r.max_z)},
                     {"fkdlr_residual", r.fkdlr},
                     {"compat_exact", number_or_null(r.compat_exact)},
                     {"compat_mc_dev", r.compat_mc_dev},
                     {"compat_mc_sigma", r.compat_mc_sigma},
                     {"trace", r.trace},
                     {"symmetry", r.symmetry},
                     {"min_eigenvalue", r.min_eigenvalue},
                     {"uniform_bound", r.uniform_bound},
                     {"violations_exact", r.violations_exact},
                     {"violations_mc", r.violations_mc},
                     {"acceptance_rate", r.acceptance_rate},
                     {"pass", r.pass}});
      csv << r.instance << ',' << r.volume << ',' << format_number(r.max_abs_dev) << ',' << format_number(r.max_rel_dev)
          << ',' << csv_number(r.max_z) << ',' << format_number(r.fkdlr) << ',' << csv_number(r.compat_exact) << ','
          << format_number(r.compat_mc_dev) << ',' << format_number(r.compat_mc_sigma) << ',' << format_number(r.trace)
          << ',' << format_number(r.symmetry) << ',' << format_number(r.min_eigenvalue) << ',' << r.violations_exact
          << ',' << r.violations_mc << ',' << (r.pass ? "true" : "false") << '\n';
    }
    if (c_.wants("csv")) out_.write("oracle_check.csv", csv.str());
    if (c_.wants("json")) out_.write("oracle_check.json", json{{"pass", ok}, {"instances", arr}}.dump(2) + "\n");
    if (!ok) message_ = "oracle comparisons outside tolerance";
    return ok;
  }

  void mw_verify() {
    const auto& q = *c_.quantum;
    const auto& s = *c_.schedule;
    const McConfig m = c_.mc.value_or(McConfig{});
    const auto spec = make_spec(*c_.spec, q.d);
    const auto tri = build_geometry(c_, 0);
    const DistanceOracle geometry(tri);
    const GroupElement g = make_group(q);
    Stream fit_rng = Stream::derive(c_.seed, "mw-taylor");
    const auto fit = fit_taylor_constant(spec, g, q.beta, q.slices, 1000, fit_rng);
    const auto analytic = analytic_taylor_constant(spec);
    const double taylor = analytic ? *analytic : 1.1 * fit.constant;
    const double constant = convexity_constant(spec, q.beta, taylor);
    const auto window = vertices_up_to(geometry, s.n);

    struct Record {
      std::uint32_t n_prime = 0;
      double phi = 0.0, phi_tail = 0.0;
      std::optional<double> phi_cert, q_margin, fraction, gap_kernel, gap_ratio, gap_ratio_error;
    };
    std::vector<std::uint32_t> nps = s.n_primes;
    const auto records = parallel_map<Record>(nps.size(), opt_.workers, [&](std::size_t i) {
      Record r;
      r.n_prime = nps[i];
      const auto sched = make_schedule(s, q, nps[i]);
      const auto phi = phi_series(sched, geometry, spec.j());
      r.phi = phi.value;
      r.phi_tail = phi.tail_bound;
      try {
        const auto cert = phi_certificate(sched, geometry, spec.j());
        r.phi_cert = cert.value + cert.tail_bound;
        r.q_margin = certified_margin(s.a, constant, *r.phi_cert);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::TooLarge) throw;
      }
      const auto volume = vertices_up_to(geometry, nps[i] + static_cast<std::uint32_t>(m.exterior_levels));
      if (volume.size() <= m.max_volume) {
        Stream init = Stream::derive(c_.seed, "mw-init", i);
        Stream rng = Stream::derive(c_.seed, "mw-samples", i);
        GibbsSampler chain(geometry, spec, LoopConfiguration::sample_free(volume, q.beta, q.slices, q.d, init),
                           Stream::derive(c_.seed, "mw-chain", i));
        chain.sweeps(m.burn_in.value_or(10 * volume.size()));
        const auto samples = sample_window_configurations(chain, window, m.convexity_samples, m.thin, rng);
        r.fraction = convexity_check(samples, {}, sched, geometry, spec, s.a).fraction;
        // Ratio diagnostic: window bridges and the exterior frozen at the last sample.
        std::vector<std::uint32_t> frozen = window;
        for (auto v : volume)
          if (geometry.level_of(v) >= nps[i]) frozen.push_back(v);
        GibbsSampler cond(geometry, spec, samples.back(), Stream::derive(c_.seed, "mw-ratio", i), frozen);
        cond.sweeps(10 * volume.size());
        const auto ratio = ratio_gap(cond, sched, geometry, m.convexity_samples, m.thin);
        r.gap_ratio = ratio.gap();
        r.gap_ratio_error = ratio.std_error;
      }
      if (q.d == 1) {
        const GridParams gp{q.grid, q.slices, q.beta};
        ExactProblem p{vertices_up_to(geometry, nps[i]), window, {}};
        const double shift = std::round(g.shift().front() * static_cast<double>(q.grid));
        if (!window.empty() && exact_cost(p, geometry, spec, gp, ExactEngine::Auto) <= kExactCostLimit) {
          const auto est = brute_force_rdmk(p, geometry, spec, gp);
          const auto steps = static_cast<std::size_t>(std::fmod(std::fmod(shift, q.grid) + q.grid, q.grid));
          r.gap_kernel = kernel_transport_gap(est, steps).gap;
        }
      }
      return r;
    });

    json arr = json::array(), certs = json::array();
    std::ostringstream csv;
    csv << "n_prime,phi,phi_tail_bound,phi_certificate,q_margin,satisfaction_fraction,gap_kernel,gap_ratio,gap_ratio_error\n";
    std::vector<double> phis;
    for (const auto& r : records) {
      phis.push_back(r.phi);
      arr.push_back({{"n_prime", r.n_prime},
                     {"phi", r.phi},
                     {"q_margin", number_or_null(r.q_margin)},
                     {"satisfaction_fraction", number_or_null(r.fraction)},
                     {"gap_kernel", number_or_null(r.gap_kernel)},
                     {"gap_ratio", number_or_null(r.gap_ratio)}});
      certs.push_back({{"n_prime", r.n_prime},
                       {"phi_tail_bound", r.phi_tail},
                       {"phi_certificate", number_or_null(r.phi_cert)},
                       {"gap_ratio_error", number_or_null(r.gap_ratio_error)}});
      csv << r.n_prime << ',' << format_number(r.phi) << ',' << format_number(r.phi_tail) << ',' << csv_number(r.phi_cert)
          << ',' << csv_number(r.q_margin) << ',' << csv_number(r.fraction) << ',' << csv_number(r.gap_kernel) << ','
          << csv_number(r.gap_ratio) << ',' << csv_number(r.gap_ratio_error) << '\n';
    }
    json report{{"records", arr},
                {"phi_certificate", certs},
                {"c_fitted", fit.constant},
                {"taylor_constant", taylor},
                {"convexity_constant", constant},
                {"a", s.a},
                {"r_bar", s.r_bar},
                {"n", s.n}};
    if (nps.size() >= 5) {
      const auto f = phi_decay_fit(nps, phis, s.r_bar);
      report["phi_decay_fit"] = {{"slope", f.slope},       {"residual", f.residual}, {"ratio", f.ratio},
                                 {"trend", f.trend},       {"degenerate", f.degenerate},
                                 {"bounded", f.bounded},   {"nonincreasing", f.nonincreasing},
                                 {"scaled", f.scaled}};
    }
    if (c_.wants("json")) out_.write("mw_report.json", report.dump(2) + "\n");
    if (c_.wants("csv")) out_.write("mw_report.csv", csv.str());
  }

  const std::string& message() const { return message_; }

 private:
  const ExperimentConfig& c_;
  const RunOptions& opt_;
  OutputDir& out_;
  std::string message_;
};

}  // namespace

ExitStatus exit_status_for(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ConfigInvalid:
    case ErrorCode::ParseError: return ExitStatus::ConfigInvalid;
    case ErrorCode::GuardExceeded:
    case ErrorCode::TooLarge:
    case ErrorCode::WindowTooLarge: return ExitStatus::GuardExceeded;
    case ErrorCode::IoFailure: return ExitStatus::IoFailure;
    default: return ExitStatus::NumericalFailure;
  }
}

std::string content_hash(const std::string& content) {
  const std::string head = "blob " + std::to_string(content.size()) + std::string(1, '\0');
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (ctx == nullptr || EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx, head.data(), head.size()) != 1 ||
      EVP_DigestUpdate(ctx, content.data(), content.size()) != 1 || EVP_DigestFinal_ex(ctx, md, &len) != 1) {
    EVP_MD_CTX_free(ctx);
    fail(ErrorCode::IoFailure, "SHA-1 digest failed");
  }
  EVP_MD_CTX_free(ctx);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

OutputDir::OutputDir(std::filesystem::path root) : root_(std::move(root)) {
  std::error_code ec;
  std::filesystem::create_directories(root_, ec);
  if (ec) fail(ErrorCode::IoFailure, "cannot create " + root_.string() + ": " + ec.message());
}

void OutputDir::write(const std::string& name, const std::string& content) {
  const auto path = root_ / (name + ".partial");
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  f << content;
  f.close();
  if (!f) fail(ErrorCode::IoFailure, "cannot write " + path.string());
  pending_.push_back({name, content_hash(content), content.size()});
}

void OutputDir::commit() {
  for (auto& r : pending_) {
    std::error_code ec;
    std::filesystem::rename(root_ / (r.name + ".partial"), root_ / r.name, ec);
    if (ec) fail(ErrorCode::IoFailure, "cannot rename " + r.name + ".partial: " + ec.message());
    committed_.push_back(r);
  }
  pending_.clear();
}

std::size_t workers_from_env() {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const char* env = std::getenv("LORENTZFK_THREADS");
  if (env == nullptr) return hw;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (end == env || *end != '\0' || v < 1) return hw;
  return static_cast<std::size_t>(v);
}

RunResult run(Subcommand sub, const std::string& config_text, const RunOptions& options) {
  RunResult result;
  json manifest{{"tool", "lorentzfk"},
                {"version", kToolVersion},
                {"subcommand", to_string(sub)},
                {"workers", options.workers},
                {"config_hash", options.config_hash}};
  json stages = json::array();
  std::string stage = "validate";
  auto clock_start = std::chrono::steady_clock::now();
  auto close_stage = [&](const std::string& status) {
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - clock_start).count();
    stages.push_back({{"name", stage}, {"wall_seconds", secs}, {"status", status}});
    clock_start = std::chrono::steady_clock::now();
  };
  std::optional<OutputDir> out;
  try {
    out.emplace(options.output_dir);
    ExperimentConfig config = parse_config(config_text, sub);
    if (options.seed) config.seed = *options.seed;
    manifest["seed"] = config.seed;
    manifest["config"] = json::parse(config.echo);
    close_stage("ok");
    stage = to_string(sub);
    Runner runner(config, options, *out);
    bool ok = true;
    switch (sub) {
      case Subcommand::SampleCdlt: runner.sample_cdlt(); break;
      case Subcommand::GeometryStats: runner.geometry_stats(); break;
      case Subcommand::McRun: ok = runner.mc_run(); break;
      case Subcommand::OracleCheck: ok = runner.oracle_check(); break;
      case Subcommand::MwVerify: runner.mw_verify(); break;
    }
    out->commit();
    if (!ok) fail(ErrorCode::NumericalFailure, runner.message());
    close_stage("ok");
    manifest["status"] = "ok";
  } catch (const Error& e) {
    result.status = exit_status_for(e.code());
    result.message = e.what();
    // Outputs committed before the failing check (e.g. a failed comparison)
    // stay; partial ones keep their suffix.
    close_stage("failed");
    manifest["status"] = "failed";
    manifest["failure_stage"] = stage;
    manifest["error"] = e.what();
    manifest["error_code"] = std::string(to_string(e.code()));
  } catch (const std::exception& e) {
    result.status = ExitStatus::NumericalFailure;
    result.message = e.what();
    close_stage("failed");
    manifest["status"] = "failed";
    manifest["failure_stage"] = stage;
    manifest["error"] = e.what();
  }
  manifest["stages"] = stages;
  json outputs = json::array();
  if (out)
    for (const auto& r : out->committed()) outputs.push_back({{"path", r.name}, {"sha1", r.hash}, {"bytes", r.bytes}});
  manifest["outputs"] = outputs;
  manifest["exit_status"] = static_cast<int>(result.status);
  try {
    const auto root = out ? out->root() : options.output_dir;
    std::filesystem::create_directories(root);
    std::ofstream f(root / "manifest.json", std::ios::trunc);
    f << manifest.dump(2) << '\n';
    if (!f) throw std::runtime_error("write failed");
  } catch (const std::exception& e) {
    if (result.status == ExitStatus::Ok) {
      result.status = ExitStatus::IoFailure;
      result.message = std::string("cannot write manifest: ") + e.what();
    }
  }
  return result;
}

}  // namespace lfk::harness
