#include <gtest/gtest.h>

#include <sstream>

#include "lorentzfk/error.hpp"
#include "lorentzfk/exact.hpp"
#include "lorentzfk/io.hpp"
#include "oracles.hpp"

using namespace lfk;

TEST(Format, SeventeenDigits) {
  EXPECT_EQ(format_number(0.1), "0.10000000000000001");
  EXPECT_EQ(std::stod(format_number(1.0 / 3.0)), 1.0 / 3.0);
}

TEST(TreeIo, Roundtrip) {
  Stream rng(1);
  for (int rep = 0; rep < 10; ++rep) {
    const auto t = sample_sb_tree(OffspringDistribution::geometric(), 8, rng);
    std::stringstream ss;
    write_tree(ss, t);
    const auto back = read_tree(ss);
    EXPECT_EQ(back, t);
    EXPECT_EQ(back.spine(), t.spine());
  }
}

TEST(TreeIo, RejectsGarbage) {
  std::stringstream ss("CDLT-TREE v1\nvertices 2\n0 0 -1\n1 3 0\n");
  EXPECT_THROW(read_tree(ss), Error);
  std::stringstream bad("not a tree\n");
  EXPECT_THROW(read_tree(bad), Error);
}

TEST(GraphIo, Roundtrip) {
  Stream rng(2);
  const auto tri = tree_to_triangulation(sample_sb_tree(OffspringDistribution::binary(), 6, rng));
  std::stringstream ss;
  write_triangulation(ss, tri);
  const auto back = read_triangulation(ss);
  EXPECT_EQ(back.layers(), tri.layers());
  EXPECT_EQ(triangulation_to_tree(back), triangulation_to_tree(tri));
}

TEST(Csv, LayerAndPathSchemas) {
  std::stringstream ss;
  write_layer_csv(ss, {{1, 2}, {1, 1}});
  EXPECT_EQ(ss.str(), "sample_id,level,k_level\n0,0,1\n0,1,2\n1,0,1\n1,1,1\n");
  std::stringstream ps;
  write_path_csv(ps, DiscretizedPath::constant(TorusPoint::from_coords(std::vector<double>{0.5}), 1.0, 2, true));
  EXPECT_EQ(ps.str(), "slice_index,coord_0\n0,0.5\n1,0.5\n2,0.5\n");
}

TEST(Csv, RdmkRoundtripKeepsValuesAndColumns) {
  const DistanceOracle geometry(lfk::testing::chain_triangulation(2));
  const InteractionSpec spec(1, PotentialU::zero(), PotentialV::cosine_difference(0.5, {1}), Decay::nearest_neighbour(1));
  const auto est = brute_force_rdmk({{0, 1}, {0}, {}}, geometry, spec, {6, 2, 1.0});
  const auto rows = rdmk_rows(est);
  std::stringstream ss;
  write_rdmk_csv(ss, rows);
  std::string header;
  std::getline(ss, header);
  EXPECT_EQ(header, kRdmkCsvHeader);
  std::string line;
  while (std::getline(ss, line)) EXPECT_EQ(std::count(line.begin(), line.end(), ','), 9);
  ss.clear();
  ss.seekg(0);
  const auto back = read_rdmk_csv(ss);
  ASSERT_EQ(back.size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(back[i].value, rows[i].value);
    EXPECT_EQ(back[i].x_index, rows[i].x_index);
    EXPECT_EQ(back[i].method, "oracle");
  }
}
