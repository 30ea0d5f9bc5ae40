#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lorentzfk/fk_gibbs.hpp"
#include "lorentzfk/gw_forest.hpp"
#include "lorentzfk/interaction.hpp"
#include "lorentzfk/mw_verifier.hpp"

namespace lfk::harness {

enum class Subcommand { SampleCdlt, GeometryStats, McRun, OracleCheck, MwVerify };

/// Throws ConfigInvalid for unknown names.
Subcommand parse_subcommand(const std::string& name);
std::string to_string(Subcommand s);

struct OffspringConfig {
  std::string kind = "geometric";  // geometric | binary | pmf
  std::map<std::uint32_t, double> pmf;
};

struct GeometryConfig {
  std::string kind = "sb";  // sb | gw | chain
  std::uint32_t height = 16;
  double epsilon = 0.25;
  std::size_t samples = 1;
};

struct PotentialConfig {
  std::string kind = "zero";
  double amplitude = 0.0;
  std::vector<int> mode;
};

struct DecayConfig {
  std::string kind = "log_cubed";  // zero | nearest_neighbour | log_cubed
  double scale = 1.0;
};

struct SpecConfig {
  PotentialConfig u;
  PotentialConfig v;
  DecayConfig j;
  std::optional<double> u_bar;
  std::optional<double> v_bar;
};

struct QuantumConfig {
  double beta = 1.0;
  std::size_t d = 1;
  std::size_t d_prime = 1;
  std::vector<double> matrix{1.0};
  std::vector<double> theta{0.1};
  std::size_t slices = 4;
  std::size_t grid = 16;
};

struct ScheduleConfig {
  std::uint32_t n = 0;
  std::uint32_t r_bar = 1;
  std::vector<std::uint32_t> n_primes{2};
  double a = 1.1;
  std::string distance = "graph";  // graph | height
};

struct McConfig {
  std::size_t sweeps = 2000;  // exterior samples per chain
  std::optional<std::size_t> burn_in;
  std::size_t chains = 1;
  std::size_t inner_samples = 64;
  std::size_t thin = 1;
  std::size_t batches = 32;
  std::uint32_t volume_level = 1;   // V_N
  std::uint32_t window_level = 0;   // V_n
  std::size_t eval_points = 4;      // grid points per window coordinate
  std::size_t max_volume = 256;     // vertex cap for sampled verifier volumes
  std::size_t convexity_samples = 1000;
  std::size_t exterior_levels = 2;
};

struct OutputConfig {
  std::vector<std::string> formats{"csv", "json"};
};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  OffspringConfig offspring;
  GeometryConfig geometry;
  std::optional<SpecConfig> spec;
  std::optional<QuantumConfig> quantum;
  std::optional<ScheduleConfig> schedule;
  std::optional<McConfig> mc;
  OutputConfig output;
  /// Normalized JSON echo of the parsed document.
  std::string echo;

  bool wants(const std::string& format) const;
};

/// Parses and validates a JSON document for `sub`. Every check runs before
/// any computation; the message names the first failing field. Throws
/// ConfigInvalid.
ExperimentConfig parse_config(const std::string& json_text, Subcommand sub);

/// Built objects, constructed during validation.
OffspringDistribution make_offspring(const OffspringConfig& c);
InteractionSpec make_spec(const SpecConfig& s, std::size_t dim);
GroupElement make_group(const QuantumConfig& q);
TunedSchedule make_schedule(const ScheduleConfig& s, const QuantumConfig& q, std::uint32_t n_prime);

}  // namespace lfk::harness
