#pragma once

#include <vector>

#include "radiosem/gridmap.hpp"
#include "radiosem/ldpl.hpp"

namespace radiosem {

/// Bresenham pixel path from a to b, endpoints inclusive. The trace always
/// runs from the lexicographically smaller endpoint so the pixel set is
/// symmetric in (a, b); the returned order still starts at a.
std::vector<PixelCoord> los_path(PixelCoord a, PixelCoord b);

/// Fraction of non-building pixels on the line-of-sight path between target
/// and transmitter. Buildings are 1 in the mask; endpoints count.
double los_ratio(const GridMap& buildings, PixelCoord target, PixelCoord tx);

/// Radio depth map: max-normalized sum over transmitters of PL_t * B_t.
/// Path loss is evaluated in raw dB with the d_min clamp at the BS pixel.
GridMap radio_depth_map(const GridMap& buildings,
                        const std::vector<PixelCoord>& bs_list,
                        const std::vector<LdplParams>& params_list,
                        double d_min = 1.0);

}  // namespace radiosem
