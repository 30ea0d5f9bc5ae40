#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lorentzfk/exact.hpp"

namespace lfk::harness {

struct OracleSuiteParams {
  GridParams grid;
  std::size_t eval_points = 4;  // per axis, evenly spaced grid points
  McRdmkParams mc;
  std::size_t compat_points = 2;  // coarse points of the traced MC comparison
  std::size_t compat_inner_samples = 16;
  std::uint64_t seed = 0;
  double sigma_limit = 3.0;
  double relative_limit = 0.02;
  std::vector<std::string> instances{"single", "pair", "triple"};
};

struct OracleComparison {
  std::string instance;
  std::size_t volume = 0;
  double max_abs_dev = 0.0;
  double max_rel_dev = 0.0;
  double max_z = 0.0;
  double fkdlr = 0.0;
  double compat_exact = 0.0;      // NaN when the instance has no second window
  double compat_mc_dev = 0.0;
  double compat_mc_sigma = 0.0;
  double trace = 0.0;
  double symmetry = 0.0;
  double min_eigenvalue = 0.0;
  std::size_t violations_exact = 0;
  std::size_t violations_mc = 0;
  double uniform_bound = 0.0;
  double acceptance_rate = 0.0;
  bool pass = false;
};

/// The canned instances on a nearest-neighbour chain: one vertex, two
/// vertices at distance 1, three vertices with a one-vertex window.
std::vector<OracleComparison> run_oracle_suite(const InteractionSpec& spec, const OracleSuiteParams& params);

}  // namespace lfk::harness
