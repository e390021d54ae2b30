#include "radiosem/depthmap.hpp"

#include <algorithm>
#include <cmath>

#include "radiosem/metrics.hpp"

namespace radiosem {

namespace {

// Plain integer Bresenham, all octants, endpoints inclusive.
std::vector<PixelCoord> bresenham(PixelCoord a, PixelCoord b) {
    std::vector<PixelCoord> path;
    path.reserve(static_cast<std::size_t>(std::max(std::abs(b.x - a.x),
                                                   std::abs(b.y - a.y))) + 1);
    int x = a.x, y = a.y;
    const int dx = std::abs(b.x - a.x);
    const int dy = -std::abs(b.y - a.y);
    const int sx = a.x < b.x ? 1 : -1;
    const int sy = a.y < b.y ? 1 : -1;
    int err = dx + dy;
    while (true) {
        path.push_back({x, y});
        if (x == b.x && y == b.y) break;
        const int e2 = 2 * err;
        if (e2 >= dy) {
            err += dy;
            x += sx;
        }
        if (e2 <= dx) {
            err += dx;
            y += sy;
        }
    }
    return path;
}

bool lex_less(PixelCoord a, PixelCoord b) {
    return a.x != b.x ? a.x < b.x : a.y < b.y;
}

}  // namespace

std::vector<PixelCoord> los_path(PixelCoord a, PixelCoord b) {
    // Trace from the lexicographically smaller endpoint so C(a,b) == C(b,a).
    if (lex_less(b, a)) {
        auto path = bresenham(b, a);
        std::reverse(path.begin(), path.end());
        return path;
    }
    return bresenham(a, b);
}

double los_ratio(const GridMap& buildings, PixelCoord target, PixelCoord tx) {
    if (buildings.kind() != MapKind::Binary) {
        throw InvalidGrid("los_ratio expects a binary building map");
    }
    if (!buildings.in_bounds(target) || !buildings.in_bounds(tx)) {
        throw InvalidGrid("los_ratio endpoints must be in bounds");
    }
    const auto path = los_path(target, tx);
    double clear = 0.0;
    for (const auto& p : path) clear += 1.0 - buildings.at(p);
    return clear / static_cast<double>(path.size());
}

GridMap radio_depth_map(const GridMap& buildings,
                        const std::vector<PixelCoord>& bs_list,
                        const std::vector<LdplParams>& params_list, double d_min) {
    if (bs_list.empty() || bs_list.size() != params_list.size()) {
        throw DimensionMismatch("need one LDPL parameter set per base station");
    }
    const int w = buildings.width();
    const int h = buildings.height();
    std::vector<double> acc(static_cast<std::size_t>(w) * h, 0.0);
    for (std::size_t t = 0; t < bs_list.size(); ++t) {
        const GridMap pl = predict_freespace_map(params_list[t], bs_list[t], w, h, d_min);
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const double b = los_ratio(buildings, {x, y}, bs_list[t]);
                acc[static_cast<std::size_t>(y) * w + x] += pl.at(x, y) * b;
            }
        }
    }
    // Pathological fitted params can push the sum negative; the depth kind
    // is defined on [0, 1], so floor at zero before normalizing.
    for (double& v : acc) v = std::max(v, 0.0);
    return max_normalize(GridMap(w, h, MapKind::PowerDbm, std::move(acc)),
                         MapKind::Depth);
}

}  // namespace radiosem
