#include "decodecv/dataset.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

using namespace decodecv;

TEST_SUITE("dataset") {
  TEST_CASE("csv round trip keeps labels, blocks and values") {
    const std::string text =
        "f0,f1,label,block\n"
        "0.5,-1.25,face,s1\n"
        "1e-3,2,house,s1\n"
        "0.1,0.2,face,s2\n"
        "3,4,house,s2\n";
    std::istringstream in(text);
    const auto d = read_csv(in, "toy");
    CHECK(d.n_samples() == 4);
    CHECK(d.n_features() == 2);
    CHECK(d.n_blocks() == 2);
    CHECK(d.label_names[0] == "face");
    CHECK(d.label_names[1] == "house");
    CHECK(d.labels == std::vector<int>{-1, 1, -1, 1});
    CHECK(d.features(1, 0) == 1e-3);

    std::ostringstream out;
    write_csv(d, out);
    std::istringstream again(out.str());
    const auto e = read_csv(again, "toy");
    CHECK(e.features == d.features);
    CHECK(e.labels == d.labels);
    CHECK(e.blocks == d.blocks);
    CHECK(e.block_names == d.block_names);
    CHECK(e.label_names == d.label_names);
  }

  TEST_CASE("column order is free") {
    std::istringstream in("block,label,f1,f0\nA,0,2,1\nB,1,4,3\n");
    const auto d = read_csv(in);
    CHECK(d.features(0, 0) == 1.0);
    CHECK(d.features(0, 1) == 2.0);
    CHECK(d.features(1, 0) == 3.0);
  }

  TEST_CASE("malformed csv is rejected") {
    const char* bad[] = {
        "f0,label\n1,a\n2,b\n",                       // no block column
        "f0,label,block\n1,a,x\n2,a,x\n",             // one class
        "f0,label,block\n1,a,x\n2,b,x\n3,c,x\n",      // three classes
        "f0,label,block\n1,a,x\nzz,b,x\n",            // not a number
        "f0,label,block\n1,a,x\n2,b\n",               // short row
        "f0,label,block\nnan,a,x\n2,b,x\n",           // non-finite
        "f0,f2,label,block\n1,1,a,x\n2,2,b,x\n",      // gap in feature names
    };
    for (const char* text : bad) {
      std::istringstream in(text);
      CHECK_THROWS_AS(read_csv(in), DataError);
    }
  }

  TEST_CASE("errors name the line") {
    std::istringstream in("f0,label,block\n1,a,x\n2,b,x\nbad,a,x\n");
    try {
      read_csv(in);
      FAIL("expected an error");
    } catch (const DataError& e) {
      CHECK(std::string(e.what()).find("line 4") != std::string::npos);
    }
  }

  TEST_CASE("subset keeps block identity") {
    Eigen::MatrixXd x(4, 1);
    x << 1, 2, 3, 4;
    const auto d = make_dataset(x, {-1, 1, -1, 1}, {0, 0, 1, 1});
    const std::vector<std::size_t> idx{3, 0};
    const auto s = d.subset(idx);
    CHECK(s.features(0, 0) == 4.0);
    CHECK(s.blocks == std::vector<int>{1, 0});
    CHECK(s.block_names == d.block_names);
  }

  TEST_CASE("validate catches shape problems") {
    Eigen::MatrixXd x(3, 1);
    x << 1, 2, 3;
    CHECK_THROWS_AS(make_dataset(x, {-1, 1}, {0, 0}), DataError);
    CHECK_THROWS_AS(make_dataset(x, {-1, 1, 2}, {0, 0, 0}), DataError);
    CHECK_NOTHROW(make_dataset(x, {-1, 1, 1}, {0, 0, 1}));
  }

  TEST_CASE("format_double round-trips") {
    for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 0.0, 123456789.125}) {
      CHECK(std::stod(format_double(v)) == v);
    }
    CHECK(format_double(0.5) == "0.5");
    CHECK(format_double(1000.0) == "1000");
  }
}
