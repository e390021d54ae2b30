#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "radiosem/errors.hpp"

namespace radiosem {

/// Value semantics of a grid: raw dBm power, power normalized to [0,1],
/// a {0,1} mask, or a [0,1] radio depth field.
enum class MapKind { PowerDbm, NormalizedPower, Binary, Depth };

/// Declared dBm span of a normalized map. Conversions between dBm and
/// normalized values are always explicit min-max over this range.
struct DynamicRange {
    double p_min_dbm = 0.0;
    double p_max_dbm = 0.0;
};

struct PixelCoord {
    int x = 0;  // column
    int y = 0;  // row
    bool operator==(const PixelCoord&) const = default;
};

/// Dense row-major 2-D scalar field. Immutable after construction; the
/// constructor enforces the kind's range invariant.
class GridMap {
public:
    GridMap(int width, int height, MapKind kind, std::vector<double> values,
            std::optional<DynamicRange> range = std::nullopt);

    static GridMap filled(int width, int height, MapKind kind, double value,
                          std::optional<DynamicRange> range = std::nullopt);

    int width() const { return width_; }
    int height() const { return height_; }
    MapKind kind() const { return kind_; }
    std::size_t size() const { return values_.size(); }
    const std::vector<double>& values() const { return values_; }
    const std::optional<DynamicRange>& range() const { return range_; }

    bool in_bounds(int x, int y) const {
        return x >= 0 && x < width_ && y >= 0 && y < height_;
    }
    bool in_bounds(PixelCoord p) const { return in_bounds(p.x, p.y); }

    double at(int x, int y) const {
        return values_[static_cast<std::size_t>(y) * width_ + x];
    }
    double at(PixelCoord p) const { return at(p.x, p.y); }

    /// Same grid with different kind/range tags (values revalidated).
    GridMap retagged(MapKind kind, std::optional<DynamicRange> range = std::nullopt) const;

    /// Exact comparison of dims, kind and values (range metadata ignored).
    bool operator==(const GridMap& other) const {
        return width_ == other.width_ && height_ == other.height_ &&
               kind_ == other.kind_ && values_ == other.values_;
    }

private:
    int width_;
    int height_;
    MapKind kind_;
    std::vector<double> values_;
    std::optional<DynamicRange> range_;
};

/// One sparse PSD measurement at a pixel.
struct Observation {
    int x = 0;
    int y = 0;
    double psd_dbm = 0.0;
};

/// Sparse observations over a region. Coordinates are validated in-bounds
/// and duplicate pixels rejected at construction.
class SparseObservationSet {
public:
    SparseObservationSet(int width, int height, std::vector<Observation> observations);

    int width() const { return width_; }
    int height() const { return height_; }
    const std::vector<Observation>& observations() const { return observations_; }
    std::size_t size() const { return observations_.size(); }

private:
    int width_;
    int height_;
    std::vector<Observation> observations_;
};

struct MetricReport {
    double mse = 0.0;
    double nmse = 0.0;
    std::optional<double> outage_accuracy;
};

}  // namespace radiosem
