#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "cirdetect/path_io.hpp"
#include "cirdetect/sampler.hpp"

using namespace cirdetect;

namespace {

PathFormatError read_error(const std::string& text) {
    std::istringstream is(text);
    try {
        (void)read_path_csv(is);
    } catch (const PathFormatError& e) {
        return e;
    }
    ADD_FAILURE() << "expected PathFormatError";
    return PathFormatError(PathFormatError::Kind::io, 0, "");
}

}  // namespace

TEST(PathCsv, RoundTrip) {
    RandomSource rng(1);
    const auto path = simulate_path(CirParams(1.0, 1.0, 0.5), StationaryStart{}, 10.0, 0.01, rng);
    std::stringstream ss;
    write_path_csv(ss, path);
    const auto back = read_path_csv(ss);
    ASSERT_EQ(back.size(), 1001u);
    EXPECT_NEAR(back.dt(), path.dt(), 1e-15);
    for (std::size_t i = 0; i < path.size(); ++i) {
        EXPECT_EQ(back[i], path[i]);
        EXPECT_NEAR(back.time(i), path.time(i), 1e-12);
    }
}

TEST(PathCsv, NegativeValueNamesLine) {
    const auto e = read_error("t,x\n0,1\n0.1,-0.1\n0.2,1\n");
    EXPECT_EQ(e.kind(), PathFormatError::Kind::negative_value);
    EXPECT_EQ(e.line(), 3u);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
}

TEST(PathCsv, SkippedTimestamp) {
    const auto e = read_error("t,x\n0,1\n0.1,1.1\n0.3,1.2\n0.4,1\n");
    EXPECT_EQ(e.kind(), PathFormatError::Kind::non_uniform_grid);
}

TEST(PathCsv, MalformedRows) {
    EXPECT_EQ(read_error("t,x\n0,1\n0.1\n").kind(), PathFormatError::Kind::malformed_row);
    EXPECT_EQ(read_error("t,x\n0,1\n0.1,abc\n").kind(), PathFormatError::Kind::malformed_row);
    EXPECT_EQ(read_error("t,x\n0,1,2\n0.1,1\n").kind(), PathFormatError::Kind::malformed_row);
    EXPECT_EQ(read_error("time,value\n0,1\n0.1,1\n").kind(), PathFormatError::Kind::malformed_row);
    EXPECT_EQ(read_error("t,x\n0,1\n").kind(), PathFormatError::Kind::too_short);
    EXPECT_EQ(read_error("").kind(), PathFormatError::Kind::too_short);
}

TEST(PathCsv, AcceptsCrLfAndOffsetStart) {
    std::istringstream is("t,x\r\n5,1\r\n5.5,2\r\n6,3\r\n");
    const auto p = read_path_csv(is);
    EXPECT_EQ(p.t0(), 5.0);
    EXPECT_EQ(p.dt(), 0.5);
    EXPECT_EQ(p[2], 3.0);
}

TEST(TrajectoryCsv, Header) {
    TestTrajectory tr;
    tr.t_grid = {0.0, 1.0};
    tr.values = {{0.0, 0.0}, {0.5, -0.25}};
    std::ostringstream os;
    write_trajectory_csv(os, tr);
    EXPECT_EQ(os.str(), "t,score_a,score_b\n0,0,0\n1,0.5,-0.25\n");
}
