#pragma once

#include <cstddef>
#include <vector>

namespace lfk::testing {

/// Pearson chi-square goodness of fit, bins with expected count below 5 merged
/// into their neighbour. Returns the upper-tail p-value.
double chi_square_p(const std::vector<double>& observed, const std::vector<double>& expected);

/// Two-sample chi-square test of homogeneity on histograms of equal binning.
double homogeneity_p(const std::vector<double>& a, const std::vector<double>& b);

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};
MeanSe mean_se(const std::vector<double>& xs);

/// Least-squares slope of y on x.
double ls_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace lfk::testing
