#include "radiosem/metrics.hpp"

#include <cmath>
#include <string>

namespace radiosem {

namespace {

void require_same_shape(const GridMap& a, const GridMap& b) {
    if (a.width() != b.width() || a.height() != b.height() || a.kind() != b.kind()) {
        throw DimensionMismatch("maps differ in dims or kind");
    }
}

}  // namespace

double mse(const GridMap& a, const GridMap& b) {
    require_same_shape(a, b);
    double acc = 0.0;
    const auto& va = a.values();
    const auto& vb = b.values();
    for (std::size_t i = 0; i < va.size(); ++i) {
        const double d = va[i] - vb[i];
        acc += d * d;
    }
    return acc / static_cast<double>(va.size());
}

double nmse(const GridMap& estimate, const GridMap& reference) {
    require_same_shape(estimate, reference);
    double ref_power = 0.0;
    for (double v : reference.values()) ref_power += v * v;
    ref_power /= static_cast<double>(reference.size());
    if (ref_power == 0.0) {
        throw ZeroReference("nmse reference map is all-zero");
    }
    return mse(estimate, reference) / ref_power;
}

GridMap max_normalize(const GridMap& g, std::optional<MapKind> out_kind) {
    double max_v = -std::numeric_limits<double>::infinity();
    for (double v : g.values()) {
        if (std::isfinite(v) && v > max_v) max_v = v;
    }
    if (!(max_v > 0.0) || !std::isfinite(max_v)) {
        throw DegenerateField("max_normalize needs a finite positive maximum");
    }
    std::vector<double> out(g.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = g.values()[i] / max_v;
    MapKind kind = out_kind.value_or(
        g.kind() == MapKind::PowerDbm ? MapKind::NormalizedPower : g.kind());
    return GridMap(g.width(), g.height(), kind, std::move(out));
}

GridMap outage_map(const GridMap& radiomap, double threshold) {
    std::vector<double> out(radiomap.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = radiomap.values()[i] < threshold ? 1.0 : 0.0;
    }
    return GridMap(radiomap.width(), radiomap.height(), MapKind::Binary, std::move(out));
}

double outage_agreement(const GridMap& predicted, const GridMap& truth) {
    require_same_shape(predicted, truth);
    if (predicted.kind() != MapKind::Binary) {
        throw InvalidGrid("outage_agreement expects binary maps");
    }
    std::size_t matches = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        if (predicted.values()[i] == truth.values()[i]) ++matches;
    }
    return static_cast<double>(matches) / static_cast<double>(predicted.size());
}

}  // namespace radiosem
