#pragma once

#include <functional>
#include <vector>

#include "respgate/stack.hpp"

namespace testutil {

// SI-aligned slice (rows run superior-to-inferior) filled from fn(r, c, n).
inline respgate::SliceSeries make_slice(
    int rows, int cols, int frames,
    const std::function<double(int, int, int)>& fn, double dt = 0.04) {
    respgate::SliceSeries s;
    s.rows = rows;
    s.cols = cols;
    s.frames = frames;
    s.frame_period_s = dt;
    s.row_dir = {0.0, 0.0, -1.0};
    s.col_dir = {1.0, 0.0, 0.0};
    s.pixels.resize(static_cast<std::size_t>(rows) * cols * frames);
    for (int n = 0; n < frames; ++n)
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c)
                s.at(r, c, n) = static_cast<float>(fn(r, c, n));
    return s;
}

}  // namespace testutil
