#include "lorentzfk/harness/config.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>

#include "lorentzfk/error.hpp"

namespace lfk::harness {
namespace {

using json = nlohmann::json;

[[noreturn]] void invalid(const std::string& field, const std::string& why) {
  fail(ErrorCode::ConfigInvalid, "field '" + field + "': " + why);
}

// Typed access with the dotted path in every message.
class Node {
 public:
  Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {}

  bool has(const char* key) const { return j_.is_object() && j_.contains(key) && !j_.at(key).is_null(); }
  Node at(const char* key) const {
    if (!has(key)) invalid(child(key), "missing");
    return Node(j_.at(key), child(key));
  }
  std::optional<Node> maybe(const char* key) const {
    if (!has(key)) return std::nullopt;
    return Node(j_.at(key), child(key));
  }
  const std::string& path() const { return path_; }
  const json& raw() const { return j_; }

  void object() const {
    if (!j_.is_object()) invalid(path_, "must be an object");
  }
  void only(std::initializer_list<const char*> keys) const {
    object();
    for (const auto& [k, v] : j_.items())
      if (std::none_of(keys.begin(), keys.end(), [&](const char* a) { return k == a; })) invalid(child(k.c_str()), "unknown field");
  }
  double number() const {
    if (!j_.is_number()) invalid(path_, "must be a number");
    const double x = j_.get<double>();
    if (!std::isfinite(x)) invalid(path_, "must be finite");
    return x;
  }
  double positive() const {
    const double x = number();
    if (!(x > 0.0)) invalid(path_, "must be positive");
    return x;
  }
  std::uint64_t unsigned_int() const {
    if (!j_.is_number_integer() || (j_.is_number_integer() && !j_.is_number_unsigned() && j_.get<std::int64_t>() < 0))
      invalid(path_, "must be a non-negative integer");
    return j_.get<std::uint64_t>();
  }
  std::uint64_t positive_int() const {
    const auto x = unsigned_int();
    if (x == 0) invalid(path_, "must be positive");
    return x;
  }
  std::int64_t integer() const {
    if (!j_.is_number_integer()) invalid(path_, "must be an integer");
    return j_.get<std::int64_t>();
  }
  std::string string() const {
    if (!j_.is_string()) invalid(path_, "must be a string");
    return j_.get<std::string>();
  }
  std::string choice(std::initializer_list<const char*> options) const {
    const auto s = string();
    if (std::none_of(options.begin(), options.end(), [&](const char* o) { return s == o; })) {
      std::string list;
      for (const char* o : options) list += std::string(list.empty() ? "" : ", ") + o;
      invalid(path_, "must be one of " + list);
    }
    return s;
  }
  std::vector<Node> array() const {
    if (!j_.is_array()) invalid(path_, "must be an array");
    std::vector<Node> out;
    for (std::size_t i = 0; i < j_.size(); ++i) out.emplace_back(j_.at(i), path_ + "[" + std::to_string(i) + "]");
    return out;
  }

 private:
  std::string child(const char* key) const { return path_.empty() ? key : path_ + "." + key; }
  const json& j_;
  std::string path_;
};

OffspringConfig read_offspring(const Node& n) {
  n.only({"kind", "pmf"});
  OffspringConfig c;
  c.kind = n.at("kind").choice({"geometric", "binary", "pmf"});
  if (c.kind == "pmf") {
    const Node p = n.at("pmf");
    p.object();
    for (const auto& [k, v] : p.raw().items()) {
      std::uint32_t key = 0;
      try {
        std::size_t used = 0;
        const long long parsed = std::stoll(k, &used);
        if (used != k.size() || parsed < 0 || parsed > 1000000) throw std::invalid_argument(k);
        key = static_cast<std::uint32_t>(parsed);
      } catch (const std::exception&) {
        invalid(p.path() + "." + k, "keys must be offspring counts");
      }
      c.pmf[key] = Node(v, p.path() + "." + k).number();
    }
  }
  try {
    (void)make_offspring(c);
  } catch (const Error& e) {
    invalid(n.path(), e.what());
  }
  return c;
}

GeometryConfig read_geometry(const Node& n) {
  n.only({"kind", "height", "epsilon", "samples"});
  GeometryConfig g;
  g.kind = n.at("kind").choice({"sb", "gw", "chain"});
  g.height = static_cast<std::uint32_t>(n.at("height").positive_int());
  if (g.height > 1u << 20) invalid(n.path() + ".height", "at most 2^20");
  if (auto e = n.maybe("epsilon")) {
    g.epsilon = e->number();
    if (!(g.epsilon > 0.0 && g.epsilon < 1.0)) invalid(e->path(), "must lie in (0, 1)");
  }
  if (auto s = n.maybe("samples")) g.samples = s->positive_int();
  return g;
}

PotentialConfig read_potential(const Node& n, bool pair) {
  n.only({"kind", "amplitude", "mode"});
  PotentialConfig p;
  p.kind = pair ? n.at("kind").choice({"zero", "cosine_difference"}) : n.at("kind").choice({"zero", "constant", "cosine"});
  if (p.kind != "zero") p.amplitude = n.at("amplitude").number();
  if (p.kind == "cosine" || p.kind == "cosine_difference")
    for (const auto& m : n.at("mode").array()) p.mode.push_back(static_cast<int>(m.integer()));
  return p;
}

SpecConfig read_spec(const Node& n) {
  n.only({"u", "v", "j", "u_bar", "v_bar"});
  SpecConfig s;
  s.u = read_potential(n.at("u"), false);
  s.v = read_potential(n.at("v"), true);
  const Node j = n.at("j");
  j.only({"kind", "scale"});
  s.j.kind = j.at("kind").choice({"zero", "nearest_neighbour", "log_cubed"});
  if (auto sc = j.maybe("scale")) s.j.scale = sc->number();
  if (auto b = n.maybe("u_bar")) s.u_bar = b->number();
  if (auto b = n.maybe("v_bar")) s.v_bar = b->number();
  return s;
}

QuantumConfig read_quantum(const Node& n) {
  n.only({"beta", "d", "d_prime", "matrix", "theta", "L", "G"});
  QuantumConfig q;
  q.beta = n.at("beta").positive();
  q.d = n.at("d").positive_int();
  if (q.d > 8) invalid(n.path() + ".d", "at most 8");
  q.d_prime = n.maybe("d_prime") ? n.at("d_prime").positive_int() : q.d;
  if (q.d_prime > q.d) invalid(n.path() + ".d_prime", "must not exceed d");
  q.matrix.clear();
  if (auto m = n.maybe("matrix")) {
    for (const auto& x : m->array()) q.matrix.push_back(x.number());
  } else {
    for (std::size_t r = 0; r < q.d_prime; ++r)
      for (std::size_t c = 0; c < q.d; ++c) q.matrix.push_back(r == c ? 1.0 : 0.0);
  }
  if (q.matrix.size() != q.d_prime * q.d) invalid(n.path() + ".matrix", "must hold d' x d entries");
  q.theta.clear();
  for (const auto& x : n.at("theta").array()) q.theta.push_back(x.number());
  if (q.theta.size() != q.d_prime) invalid(n.path() + ".theta", "must hold d' entries");
  q.slices = n.at("L").positive_int();
  if (q.slices > 4096) invalid(n.path() + ".L", "at most 4096");
  q.grid = n.maybe("G") ? n.at("G").positive_int() : 16;
  if (q.grid < 2 || q.grid > 4096) invalid(n.path() + ".G", "must lie in [2, 4096]");
  try {
    (void)make_group(q);
  } catch (const Error& e) {
    invalid(n.path() + ".matrix", e.what());
  }
  return q;
}

ScheduleConfig read_schedule(const Node& n) {
  n.only({"n", "r_bar", "n_prime", "a", "distance"});
  ScheduleConfig s;
  s.n = static_cast<std::uint32_t>(n.at("n").unsigned_int());
  s.r_bar = static_cast<std::uint32_t>(n.at("r_bar").positive_int());
  s.n_primes.clear();
  for (const auto& x : n.at("n_prime").array()) s.n_primes.push_back(static_cast<std::uint32_t>(x.positive_int()));
  if (s.n_primes.empty()) invalid(n.path() + ".n_prime", "must not be empty");
  s.a = n.at("a").number();
  if (!(s.a > 1.0)) invalid(n.path() + ".a", "must exceed 1");
  if (auto d = n.maybe("distance")) s.distance = d->choice({"graph", "height"});
  return s;
}

McConfig read_mc(const Node& n) {
  n.only({"sweeps", "burn_in", "chains", "inner_samples", "thin", "batches", "volume_level", "window_level", "eval_points",
          "max_volume", "convexity_samples", "exterior_levels"});
  McConfig m;
  m.sweeps = n.at("sweeps").positive_int();
  if (auto b = n.maybe("burn_in")) m.burn_in = b->unsigned_int();
  if (auto c = n.maybe("chains")) m.chains = c->positive_int();
  if (m.chains > 1024) invalid(n.path() + ".chains", "at most 1024");
  if (auto x = n.maybe("inner_samples")) m.inner_samples = x->positive_int();
  if (auto x = n.maybe("thin")) m.thin = x->positive_int();
  if (auto x = n.maybe("batches")) m.batches = x->positive_int();
  if (m.batches < 2) invalid(n.path() + ".batches", "at least 2");
  if (m.sweeps < 2 * m.batches) invalid(n.path() + ".sweeps", "need at least two samples per batch");
  if (auto x = n.maybe("volume_level")) m.volume_level = static_cast<std::uint32_t>(x->unsigned_int());
  if (auto x = n.maybe("window_level")) m.window_level = static_cast<std::uint32_t>(x->unsigned_int());
  if (auto x = n.maybe("eval_points")) m.eval_points = x->positive_int();
  if (auto x = n.maybe("max_volume")) m.max_volume = x->positive_int();
  if (auto x = n.maybe("convexity_samples")) m.convexity_samples = x->positive_int();
  if (auto x = n.maybe("exterior_levels")) m.exterior_levels = x->unsigned_int();
  return m;
}

}  // namespace

Subcommand parse_subcommand(const std::string& name) {
  if (name == "sample-cdlt") return Subcommand::SampleCdlt;
  if (name == "geometry-stats") return Subcommand::GeometryStats;
  if (name == "mc-run") return Subcommand::McRun;
  if (name == "oracle-check") return Subcommand::OracleCheck;
  if (name == "mw-verify") return Subcommand::MwVerify;
  fail(ErrorCode::ConfigInvalid, "unknown subcommand '" + name + "'");
}

std::string to_string(Subcommand s) {
  switch (s) {
    case Subcommand::SampleCdlt: return "sample-cdlt";
    case Subcommand::GeometryStats: return "geometry-stats";
    case Subcommand::McRun: return "mc-run";
    case Subcommand::OracleCheck: return "oracle-check";
    case Subcommand::MwVerify: return "mw-verify";
  }
  return "?";
}

bool ExperimentConfig::wants(const std::string& format) const {
  return std::find(output.formats.begin(), output.formats.end(), format) != output.formats.end();
}

OffspringDistribution make_offspring(const OffspringConfig& c) {
  if (c.kind == "geometric") return OffspringDistribution::geometric();
  if (c.kind == "binary") return OffspringDistribution::binary();
  std::map<int, double> pmf;
  for (const auto& [k, v] : c.pmf) pmf[static_cast<int>(k)] = v;
  return OffspringDistribution::validate_critical(pmf);
}

InteractionSpec make_spec(const SpecConfig& s, std::size_t dim) {
  PotentialU u = PotentialU::zero();
  if (s.u.kind == "constant") u = PotentialU::constant(s.u.amplitude);
  if (s.u.kind == "cosine") u = PotentialU::cosine(s.u.amplitude, s.u.mode);
  PotentialV v = PotentialV::zero();
  if (s.v.kind == "cosine_difference") v = PotentialV::cosine_difference(s.v.amplitude, s.v.mode);
  Decay j = Decay::zero();
  if (s.j.kind == "nearest_neighbour") j = Decay::nearest_neighbour(s.j.scale);
  if (s.j.kind == "log_cubed") j = Decay::log_cubed(s.j.scale);
  return InteractionSpec(dim, u, v, j, s.u_bar, s.v_bar);
}

GroupElement make_group(const QuantumConfig& q) { return GroupElement(q.theta, q.matrix, q.d); }

TunedSchedule make_schedule(const ScheduleConfig& s, const QuantumConfig& q, std::uint32_t n_prime) {
  TunedSchedule t;
  t.g = make_group(q);
  t.n = s.n;
  t.r_bar = s.r_bar;
  t.n_prime = n_prime;
  t.distance = s.distance == "height" ? ProfileDistance::Height : ProfileDistance::Graph;
  t.validate();
  return t;
}

ExperimentConfig parse_config(const std::string& json_text, Subcommand sub) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    fail(ErrorCode::ConfigInvalid, std::string("config is not valid JSON: ") + e.what());
  }
  const Node root(doc, "");
  if (!doc.is_object()) invalid("<root>", "must be an object");
  root.only({"seed", "offspring", "geometry", "spec", "quantum", "schedule", "mc", "output"});
  ExperimentConfig c;
  c.seed = root.at("seed").unsigned_int();
  c.geometry = read_geometry(root.at("geometry"));
  const bool needs_offspring = sub == Subcommand::SampleCdlt || sub == Subcommand::GeometryStats || c.geometry.kind != "chain";
  if (needs_offspring || root.has("offspring")) c.offspring = read_offspring(root.at("offspring"));
  const bool quantum_needed = sub == Subcommand::McRun || sub == Subcommand::OracleCheck || sub == Subcommand::MwVerify;
  if (quantum_needed || root.has("spec")) c.spec = read_spec(root.at("spec"));
  if (quantum_needed || root.has("quantum")) c.quantum = read_quantum(root.at("quantum"));
  if (sub == Subcommand::MwVerify || root.has("schedule")) c.schedule = read_schedule(root.at("schedule"));
  if (sub == Subcommand::McRun || sub == Subcommand::MwVerify || root.has("mc")) c.mc = read_mc(root.at("mc"));
  if (auto o = root.maybe("output")) {
    o->only({"formats"});
    c.output.formats.clear();
    for (const auto& f : o->at("formats").array()) c.output.formats.push_back(f.choice({"csv", "json"}));
    if (c.output.formats.empty()) invalid("output.formats", "must not be empty");
  }

  // Cross-field checks.
  if (c.spec && c.quantum) {
    try {
      (void)make_spec(*c.spec, c.quantum->d);
    } catch (const Error& e) {
      invalid("spec", e.what());
    }
  } else if (c.spec) {
    try {
      (void)make_spec(*c.spec, std::max<std::size_t>(1, c.spec->u.mode.size()));
    } catch (const Error& e) {
      invalid("spec", e.what());
    }
  }
  if (sub == Subcommand::OracleCheck && c.quantum->d != 1) invalid("quantum.d", "oracle checks need d = 1");
  if (c.schedule) {
    const auto& s = *c.schedule;
    if (!(s.n < s.r_bar)) invalid("schedule.r_bar", "must exceed schedule.n");
    const auto lo = *std::min_element(s.n_primes.begin(), s.n_primes.end());
    const auto hi = *std::max_element(s.n_primes.begin(), s.n_primes.end());
    if (!(s.r_bar < lo)) invalid("schedule.n_prime", "every n' must exceed r_bar");
    if (hi > c.geometry.height) invalid("schedule.n_prime", "every n' must be at most geometry.height");
    if (sub == Subcommand::MwVerify && c.geometry.kind == "gw")
      invalid("geometry.kind", "the verifier needs sb or chain geometries (gw trees may die out)");
  }
  if (c.mc && (sub == Subcommand::McRun)) {
    const auto& m = *c.mc;
    if (!(m.window_level < m.volume_level)) invalid("mc.window_level", "must be below mc.volume_level");
    if (m.volume_level > c.geometry.height) invalid("mc.volume_level", "must be at most geometry.height");
    if (m.eval_points > c.quantum->grid) invalid("mc.eval_points", "must be at most quantum.G");
    if (c.geometry.kind == "gw") invalid("geometry.kind", "mc-run needs sb or chain geometries");
  }
  c.echo = doc.dump(2);
  return c;
}

}  // namespace lfk::harness
