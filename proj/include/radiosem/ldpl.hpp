#pragma once

#include <string>
#include <vector>

#include "radiosem/gridmap.hpp"

namespace radiosem {

/// Log-distance path-loss parameters: PL(d) = pl0 + theta_tilde * log10(d),
/// with d in pixels and the reference distance d0 fixed at 1 pixel.
struct LdplParams {
    double pl0 = 0.0;          // dB at d0 = 1
    double theta_tilde = 0.0;  // dB per decade (10 * path-loss exponent)
    bool operator==(const LdplParams&) const = default;
};

std::string to_json(const LdplParams& params);
LdplParams ldpl_params_from_json(const std::string& json_text);

struct FitConfig {
    double radius = 16.0;   // keep only samples within this distance of the BS
    double d_min = 1.0;     // distance clamp, equals d0
    int min_samples = 3;
};

/// radius = quarter of the grid diagonal (the paper never gives a value).
FitConfig default_fit_config(int width, int height);

/// PL(d) for d > 0. Callers clamp to d_min themselves.
double eval_path_loss(const LdplParams& params, double d);

/// Ordinary least squares of path loss (= tx_power - psd) on log10(d), using
/// only samples with d_min <= d <= radius around the BS.
LdplParams fit_ldpl(const SparseObservationSet& samples, PixelCoord bs,
                    double tx_power_dbm, const FitConfig& config);

/// Per-BS fits for a multi-transmitter scene. Each sample contributes only
/// to its nearest BS (ties to the lower BS index).
std::vector<LdplParams> fit_ldpl_multi(const SparseObservationSet& samples,
                                       const std::vector<PixelCoord>& bs_list,
                                       double tx_power_dbm, const FitConfig& config);

/// Dense PL field with d = max(||p - bs||, d_min). Kind is PowerDbm (dB values).
GridMap predict_freespace_map(const LdplParams& params, PixelCoord bs,
                              int width, int height, double d_min = 1.0);

}  // namespace radiosem
