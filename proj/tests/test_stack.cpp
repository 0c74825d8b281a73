#include "doctest.h"

#include <limits>

#include "respgate/stack.hpp"
#include "test_helpers.hpp"

using namespace respgate;
using testutil::make_slice;

TEST_CASE("SliceSeries validation accepts a well-formed slice") {
    auto s = make_slice(4, 4, 3, [](int r, int, int n) { return r + n + 1.0; });
    CHECK_NOTHROW(s.validate());
}

TEST_CASE("SliceSeries validation rejects bad geometry and intensities") {
    auto s = make_slice(4, 4, 3, [](int, int, int) { return 1.0; });

    SUBCASE("too few frames") {
        s.frames = 2;
        s.pixels.resize(4 * 4 * 2);
        CHECK_THROWS_AS(s.validate(), StackError);
    }
    SUBCASE("negative intensity") {
        s.pixels[20] = -1.0f;
        CHECK_THROWS_WITH_AS(s.validate(),
                             doctest::Contains("frame 1"), StackError);
    }
    SUBCASE("NaN intensity names the frame") {
        s.at(0, 0, 2) = std::numeric_limits<float>::quiet_NaN();
        CHECK_THROWS_WITH_AS(s.validate(),
                             doctest::Contains("frame 2"), StackError);
    }
    SUBCASE("non-unit direction cosine") {
        s.row_dir = {0.0, 0.0, -2.0};
        CHECK_THROWS_AS(s.validate(), StackError);
    }
    SUBCASE("non-orthogonal axes") {
        s.col_dir = s.row_dir;
        CHECK_THROWS_AS(s.validate(), StackError);
    }
    SUBCASE("R-waves must be increasing and inside the series") {
        s.rwave_times_s = {0.0, 0.05, 0.04};
        CHECK_THROWS_AS(s.validate(), StackError);
        s.rwave_times_s = {5.0};
        CHECK_THROWS_AS(s.validate(), StackError);
    }
}

TEST_CASE("CineStack rejects mixed-dimension slices") {
    auto a = make_slice(4, 4, 3, [](int, int, int) { return 1.0; });
    auto b = make_slice(4, 6, 3, [](int, int, int) { return 1.0; });
    b.slice_index = 1;
    CHECK_THROWS_WITH_AS(CineStack::create({a, b}),
                         doctest::Contains("dimension mismatch"), StackError);
}

TEST_CASE("RespSignal sign states") {
    RespSignal s{{1.0, 0.0, 0.0}, SignState::Raw, 0};
    CHECK_NOTHROW(s.validate());
    s.values = {0.5, 0.5};
    CHECK_THROWS_AS(s.validate(), StackError);
    CHECK(std::string(to_string(SignState::GloballyCorrected)) ==
          "globally-corrected");
}
