#pragma once

#include "radiosem/gridmap.hpp"

namespace radiosem {

/// Mean squared pixel difference. Inputs must share dims and kind.
double mse(const GridMap& a, const GridMap& b);

/// mse(estimate, reference) / mean(reference^2). Reference must not be all-zero.
double nmse(const GridMap& estimate, const GridMap& reference);

/// Scales the grid so its maximum becomes exactly 1. The grid needs at least
/// one finite positive value. PowerDbm inputs come out as NormalizedPower
/// unless out_kind overrides; other kinds are preserved.
GridMap max_normalize(const GridMap& g,
                      std::optional<MapKind> out_kind = std::nullopt);

/// Binary map marking pixels whose value falls below the threshold.
GridMap outage_map(const GridMap& radiomap, double threshold);

/// Fraction of pixels on which two binary maps agree.
double outage_agreement(const GridMap& predicted, const GridMap& truth);

}  // namespace radiosem
