#include "lorentzfk/io.hpp"

#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "lorentzfk/error.hpp"

namespace lfk {
namespace {

std::string next_line(std::istream& in, const char* what) {
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty() && line[0] != '#') return line;
  }
  fail(ErrorCode::ParseError, std::string("unexpected end of input, expected ") + what);
}

template <typename T>
T parse_int(const std::string& tok, const char* what) {
  T v{};
  const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || p != tok.data() + tok.size()) fail(ErrorCode::ParseError, std::string("bad ") + what + ": '" + tok + "'");
  return v;
}

double parse_double(const std::string& tok, const char* what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    fail(ErrorCode::ParseError, std::string("bad ") + what + ": '" + tok + "'");
  }
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::vector<std::string> words(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  for (std::string w; is >> w;) out.push_back(w);
  return out;
}

const char* tag_name(EdgeTag t) {
  switch (t) {
    case EdgeTag::Circle: return "circle";
    case EdgeTag::Tree: return "tree";
    case EdgeTag::Fan: return "fan";
  }
  return "?";
}

}  // namespace

std::string format_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_tree(std::ostream& out, const RootedPlanarTree& tree) {
  const auto order = tree.dfs_order();
  std::vector<std::int64_t> pos(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) pos[order[i]] = static_cast<std::int64_t>(i);
  out << "CDLT-TREE v1\n" << "vertices " << order.size() << '\n';
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto v = order[i];
    const auto p = tree.parent(v);
    out << i << ' ' << tree.level_of(v) << ' ' << (p < 0 ? -1 : pos[static_cast<std::size_t>(p)]) << '\n';
  }
  if (tree.spine()) {
    out << "spine";
    for (auto v : *tree.spine()) out << ' ' << pos[v];
    out << '\n';
  }
}

RootedPlanarTree read_tree(std::istream& in) {
  if (next_line(in, "header") != "CDLT-TREE v1") fail(ErrorCode::ParseError, "missing CDLT-TREE v1 header");
  const auto head = words(next_line(in, "vertex count"));
  if (head.size() != 2 || head[0] != "vertices") fail(ErrorCode::ParseError, "expected 'vertices <n>'");
  const auto n = parse_int<std::size_t>(head[1], "vertex count");
  std::vector<std::int64_t> parents(n), heights(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto w = words(next_line(in, "vertex line"));
    if (w.size() != 3) fail(ErrorCode::ParseError, "vertex line needs 'index height parent'");
    if (parse_int<std::size_t>(w[0], "index") != i) fail(ErrorCode::ParseError, "vertex lines out of order");
    heights[i] = parse_int<std::int64_t>(w[1], "height");
    parents[i] = parse_int<std::int64_t>(w[2], "parent");
  }
  auto tree = RootedPlanarTree::from_parents(parents, heights);
  std::string line;
  while (std::getline(in, line)) {
    const auto w = words(line);
    if (w.empty() || w[0][0] == '#') continue;
    if (w[0] != "spine") fail(ErrorCode::ParseError, "unexpected line '" + line + "'");
    // Preorder indices back to level-order ids.
    std::vector<std::uint32_t> to_id(n);
    const auto order = tree.dfs_order();
    for (std::size_t i = 0; i < n; ++i) to_id[i] = order[i];
    std::vector<std::uint32_t> spine;
    for (std::size_t k = 1; k < w.size(); ++k) {
      const auto p = parse_int<std::size_t>(w[k], "spine index");
      if (p >= n) fail(ErrorCode::ParseError, "spine index out of range");
      spine.push_back(to_id[p]);
    }
    return RootedPlanarTree(tree.child_counts(), std::move(spine));
  }
  return tree;
}

void write_triangulation(std::ostream& out, const Triangulation& tri) {
  out << "CDLT-GRAPH v1\n" << "vertices " << tri.vertex_count() << " levels " << tri.layers().size() << '\n';
  for (std::size_t l = 0; l < tri.layers().size(); ++l) {
    out << "level " << l;
    for (auto v : tri.layers()[l]) out << ' ' << v;
    out << '\n';
  }
  for (const auto& e : tri.edges()) out << "edge " << e.a << ' ' << e.b << ' ' << tag_name(e.tag) << '\n';
}

Triangulation read_triangulation(std::istream& in) {
  if (next_line(in, "header") != "CDLT-GRAPH v1") fail(ErrorCode::ParseError, "missing CDLT-GRAPH v1 header");
  const auto head = words(next_line(in, "sizes"));
  if (head.size() != 4 || head[0] != "vertices" || head[2] != "levels")
    fail(ErrorCode::ParseError, "expected 'vertices <n> levels <m>'");
  const auto n = parse_int<std::size_t>(head[1], "vertex count");
  const auto m = parse_int<std::size_t>(head[3], "level count");
  std::vector<std::vector<std::uint32_t>> layers(m);
  std::vector<Edge> edges;
  std::size_t seen = 0;
  for (std::size_t l = 0; l < m; ++l) {
    const auto w = words(next_line(in, "level line"));
    if (w.size() < 2 || w[0] != "level" || parse_int<std::size_t>(w[1], "level") != l)
      fail(ErrorCode::ParseError, "expected 'level " + std::to_string(l) + " ...'");
    for (std::size_t k = 2; k < w.size(); ++k) layers[l].push_back(parse_int<std::uint32_t>(w[k], "vertex"));
    seen += layers[l].size();
  }
  if (seen != n) fail(ErrorCode::ParseError, "level lines list " + std::to_string(seen) + " of " + std::to_string(n) + " vertices");
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto w = words(line);
    if (w.empty() || w[0][0] == '#') continue;
    if (w.size() != 4 || w[0] != "edge") fail(ErrorCode::ParseError, "expected 'edge a b tag', got '" + line + "'");
    EdgeTag tag;
    if (w[3] == "circle") tag = EdgeTag::Circle;
    else if (w[3] == "tree") tag = EdgeTag::Tree;
    else if (w[3] == "fan") tag = EdgeTag::Fan;
    else fail(ErrorCode::ParseError, "unknown edge tag '" + w[3] + "'");
    edges.push_back({parse_int<std::uint32_t>(w[1], "edge end"), parse_int<std::uint32_t>(w[2], "edge end"), tag});
  }
  return Triangulation::from_parts(std::move(layers), std::move(edges));
}

void write_layer_csv(std::ostream& out, const std::vector<std::vector<std::uint64_t>>& samples) {
  out << "sample_id,level,k_level\n";
  for (std::size_t s = 0; s < samples.size(); ++s)
    for (std::size_t l = 0; l < samples[s].size(); ++l) out << s << ',' << l << ',' << samples[s][l] << '\n';
}

void write_path_csv(std::ostream& out, const DiscretizedPath& path) {
  out << "slice_index";
  for (std::size_t c = 0; c < path.dim(); ++c) out << ",coord_" << c;
  out << '\n';
  for (std::size_t s = 0; s <= path.slices(); ++s) {
    out << s;
    for (std::size_t c = 0; c < path.dim(); ++c) out << ',' << format_number(word_to_unit(path.slice(s)[c]));
    out << '\n';
  }
}

std::vector<RdmkRow> rdmk_rows(const RdmKernelEstimate& est) {
  std::vector<RdmkRow> rows;
  for (std::size_t p = 0; p < est.pairs.size(); ++p) {
    RdmkRow r;
    r.n = est.level;
    r.x_index = est.pairs[p].first;
    r.y_index = est.pairs[p].second;
    r.value = est.values[p];
    r.std_error = est.std_errors.empty() ? 0.0 : est.std_errors[p];
    r.method = est.method;
    r.seed = est.seed;
    r.slices = est.slices;
    r.grid = est.grid;
    r.beta = est.beta;
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_rdmk_csv(std::ostream& out, const std::vector<RdmkRow>& rows, bool header) {
  if (header) out << kRdmkCsvHeader << '\n';
  for (const auto& r : rows)
    out << r.n << ',' << r.x_index << ',' << r.y_index << ',' << format_number(r.value) << ','
        << format_number(r.std_error) << ',' << r.method << ',' << r.seed << ',' << r.slices << ',' << r.grid << ','
        << format_number(r.beta) << '\n';
}

std::vector<RdmkRow> read_rdmk_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) fail(ErrorCode::ParseError, "empty CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kRdmkCsvHeader) fail(ErrorCode::ParseError, "unexpected CSV header '" + line + "'");
  std::vector<RdmkRow> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 10) fail(ErrorCode::ParseError, "CSV row needs 10 fields: '" + line + "'");
    RdmkRow r;
    r.n = parse_int<std::uint32_t>(f[0], "n");
    r.x_index = parse_int<std::size_t>(f[1], "x_index");
    r.y_index = parse_int<std::size_t>(f[2], "y_index");
    r.value = parse_double(f[3], "value");
    r.std_error = parse_double(f[4], "std_error");
    r.method = f[5];
    r.seed = parse_int<std::uint64_t>(f[6], "seed");
    r.slices = parse_int<std::size_t>(f[7], "L");
    r.grid = parse_int<std::size_t>(f[8], "G");
    r.beta = parse_double(f[9], "beta");
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace lfk
