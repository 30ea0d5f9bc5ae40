#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "lorentzfk/cdlt_graph.hpp"
#include "lorentzfk/fk_gibbs.hpp"
#include "lorentzfk/gw_forest.hpp"

namespace lfk {

/// %.17g: round-trips every double.
std::string format_number(double x);

/// "CDLT-TREE v1": one line `index height parent_index` per vertex in DFS
/// preorder (root parent -1), then an optional `spine` line of preorder
/// indices.
void write_tree(std::ostream& out, const RootedPlanarTree& tree);
/// Throws ParseError, MalformedTree.
RootedPlanarTree read_tree(std::istream& in);

/// "CDLT-GRAPH v1": `level l v...` lines in cyclic order, then
/// `edge a b tag` lines with tag in {circle, tree, fan}.
void write_triangulation(std::ostream& out, const Triangulation& tri);
/// Throws ParseError, NotATriangulation.
Triangulation read_triangulation(std::istream& in);

/// sample_id,level,k_level
void write_layer_csv(std::ostream& out, const std::vector<std::vector<std::uint64_t>>& samples);
/// slice_index,coord_0,...
void write_path_csv(std::ostream& out, const DiscretizedPath& path);

struct RdmkRow {
  std::uint32_t n = 0;
  std::size_t x_index = 0;
  std::size_t y_index = 0;
  double value = 0.0;
  double std_error = 0.0;
  std::string method;
  std::uint64_t seed = 0;
  std::size_t slices = 0;
  std::size_t grid = 0;
  double beta = 0.0;
  bool operator==(const RdmkRow&) const = default;
};

inline constexpr const char* kRdmkCsvHeader = "n,x_index,y_index,value,std_error,method,seed,L,G,beta";

std::vector<RdmkRow> rdmk_rows(const RdmKernelEstimate& est);
void write_rdmk_csv(std::ostream& out, const std::vector<RdmkRow>& rows, bool header = true);
/// Throws ParseError.
std::vector<RdmkRow> read_rdmk_csv(std::istream& in);

}  // namespace lfk
