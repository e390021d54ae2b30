#include "radiosem/gridmap.hpp"

#include <cmath>
#include <set>
#include <string>
#include <utility>

namespace radiosem {

namespace {

void validate_values(int width, int height, MapKind kind,
                     const std::vector<double>& values) {
    if (width <= 0 || height <= 0) {
        throw InvalidGrid("grid dims must be positive, got " + std::to_string(width) +
                          "x" + std::to_string(height));
    }
    if (values.size() != static_cast<std::size_t>(width) * height) {
        throw InvalidGrid("value count " + std::to_string(values.size()) +
                          " does not match " + std::to_string(width) + "x" +
                          std::to_string(height));
    }
    switch (kind) {
        case MapKind::Binary:
            for (double v : values) {
                if (v != 0.0 && v != 1.0) {
                    throw InvalidGrid("binary map holds non-binary value " +
                                      std::to_string(v));
                }
            }
            break;
        case MapKind::NormalizedPower:
        case MapKind::Depth:
            for (double v : values) {
                if (!(v >= 0.0 && v <= 1.0)) {
                    throw InvalidGrid("normalized map holds out-of-range value " +
                                      std::to_string(v));
                }
            }
            break;
        case MapKind::PowerDbm:
            for (double v : values) {
                if (!std::isfinite(v)) {
                    throw InvalidGrid("power map holds non-finite value");
                }
            }
            break;
    }
}

}  // namespace

GridMap::GridMap(int width, int height, MapKind kind, std::vector<double> values,
                 std::optional<DynamicRange> range)
    : width_(width), height_(height), kind_(kind), values_(std::move(values)),
      range_(range) {
    validate_values(width_, height_, kind_, values_);
}

GridMap GridMap::filled(int width, int height, MapKind kind, double value,
                        std::optional<DynamicRange> range) {
    return GridMap(width, height, kind,
                   std::vector<double>(static_cast<std::size_t>(width) * height, value),
                   range);
}

GridMap GridMap::retagged(MapKind kind, std::optional<DynamicRange> range) const {
    return GridMap(width_, height_, kind, values_, range);
}

SparseObservationSet::SparseObservationSet(int width, int height,
                                           std::vector<Observation> observations)
    : width_(width), height_(height), observations_(std::move(observations)) {
    if (width_ < 0 || height_ < 0) {
        throw InvalidGrid("observation region dims must be non-negative");
    }
    std::set<std::pair<int, int>> seen;
    for (const auto& o : observations_) {
        if (o.x < 0 || o.x >= width_ || o.y < 0 || o.y >= height_) {
            throw InvalidGrid("observation at (" + std::to_string(o.x) + "," +
                              std::to_string(o.y) + ") is out of bounds");
        }
        if (!seen.insert({o.x, o.y}).second) {
            throw InvalidGrid("duplicate observation at (" + std::to_string(o.x) + "," +
                              std::to_string(o.y) + ")");
        }
    }
}

}  // namespace radiosem
