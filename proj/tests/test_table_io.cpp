#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "gsa/dataset.hpp"
#include "gsa/gaussian.hpp"
#include "gsa/table_io.hpp"
#include "oracles.hpp"

using namespace gsa;

TEST(Labels, RoundTrip) {
  EXPECT_EQ(coalition_label(Mask{0}), "0");
  EXPECT_EQ(coalition_label(Mask{0b101}), "1+3");
  EXPECT_EQ(parse_coalition_label("1+3").first, 0b101U);
  EXPECT_EQ(parse_coalition_label("0").first, 0U);
  EXPECT_EQ(parse_coalition_label("3+1").first, 0b101U);
  EXPECT_THROW(parse_coalition_label("1+1"), ParseError);
  EXPECT_THROW(parse_coalition_label("1+x"), ParseError);
  EXPECT_THROW(parse_coalition_label("21"), ParseError);
}

TEST(FormatDouble, SeventeenDigitsRoundTrip) {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 2000; ++k) {
    const double x = std::ldexp(oracle::uniform(rng, -1, 1), static_cast<int>(rng() % 200) - 100);
    EXPECT_EQ(parse_double(format_double(x)), x);
  }
  EXPECT_THROW(parse_double("1,5"), ParseError);
  EXPECT_THROW(parse_double(""), ParseError);
}

TEST(ValueTable, BitExactRoundTrip) {
  std::mt19937_64 rng(8);
  for (int d = 1; d <= 6; ++d) {
    GameTable g = oracle::random_monotone_game(d, rng);
    std::ostringstream out;
    write_value_table(out, g, "test table");
    GameTable back = parse_value_table(out.str());
    ASSERT_EQ(back.players(), d);
    for (Mask m = 0; m <= full_mask(d); ++m) EXPECT_EQ(back[m], g[m]);
  }
}

TEST(ValueTable, HeaderAndOrder) {
  std::ostringstream out;
  write_value_table(out, GameTable(2, {0, 1, 3, 8}));
  EXPECT_EQ(out.str(), "# players=2\ncoalition,value\n0,0\n1,1\n2,3\n1+2,8\n");
}

TEST(ValueTable, MissingCoalitionIsNamed) {
  const std::string text = "coalition,value\n0,0\n1,0.5\n2,0.5\n3,0\n1+2,1\n1+3,0.5\n2+3,1\n";
  try {
    parse_value_table(text);
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("missing coalitions: 1+2+3"), std::string::npos) << e.what();
  }
}

TEST(ValueTable, RejectsDuplicatesAndBadHeader) {
  EXPECT_THROW(parse_value_table("coalition,value\n0,0\n1,1\n1,1\n"), ParseError);
  EXPECT_THROW(parse_value_table("set,value\n0,0\n1,1\n"), ParseError);
  EXPECT_THROW(parse_value_table("coalition,value\n0,0.5\n1,1\n"), ParseError);
}

TEST(ValueTable, DeclaredPlayerCountWins) {
  // Player 2 never appears in a nonzero-labelled row except via the declaration.
  EXPECT_THROW(parse_value_table("# players=2\ncoalition,value\n0,0\n1,1\n"), ParseError);
}

TEST(Allocation, CsvLayout) {
  Allocation a;
  a.shares = {0.25, 0.75};
  a.total = 1;
  a.method = AllocationMethod::PME;
  std::ostringstream out;
  write_allocation(out, a);
  EXPECT_EQ(out.str(), "player,share,method\n1,0.25,pme\n2,0.75,pme\n");
}

TEST(Dataset, RoundTrip) {
  SampleMatrix x(3, 2);
  x << 1, 2, 3, 4, 5, 6.125;
  Eigen::VectorXd y(3);
  y << 0.1, 0.2, 1e-300;
  DataSet d(x, y);
  std::ostringstream out;
  write_dataset(out, d, "c");
  std::istringstream in(out.str());
  DataSet back = read_dataset(in);
  EXPECT_EQ(back.x, d.x);
  EXPECT_EQ(back.y, d.y);
}

TEST(Dataset, RejectsMalformed) {
  std::istringstream bad_header("a,b,y\n1,2,3\n4,5,6\n");
  EXPECT_THROW(read_dataset(bad_header), ParseError);
  std::istringstream short_row("x1,y\n1,2\n3\n");
  EXPECT_THROW(read_dataset(short_row), ParseError);
  std::istringstream one_row("x1,y\n1,2\n");
  EXPECT_THROW(read_dataset(one_row), ParseError);
}
