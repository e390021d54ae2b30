#include "radiosem/ldpl.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "json.hpp"

namespace radiosem {

std::string to_json(const LdplParams& params) {
    nlohmann::json j{{"pl0", params.pl0}, {"theta_tilde", params.theta_tilde}};
    return j.dump();
}

LdplParams ldpl_params_from_json(const std::string& json_text) {
    const auto j = nlohmann::json::parse(json_text);
    return LdplParams{j.at("pl0").get<double>(), j.at("theta_tilde").get<double>()};
}

FitConfig default_fit_config(int width, int height) {
    FitConfig cfg;
    cfg.radius = 0.25 * std::hypot(static_cast<double>(width), static_cast<double>(height));
    return cfg;
}

double eval_path_loss(const LdplParams& params, double d) {
    if (!(d > 0.0)) {
        throw NonPositiveDistance("path loss undefined at d = " + std::to_string(d));
    }
    return params.pl0 + params.theta_tilde * std::log10(d);
}

LdplParams fit_ldpl(const SparseObservationSet& samples, PixelCoord bs,
                    double tx_power_dbm, const FitConfig& config) {
    // Centered OLS of PL on log10(d) over the radius-restricted samples.
    std::vector<double> xs;  // log10 distance
    std::vector<double> ys;  // path loss
    for (const auto& o : samples.observations()) {
        const double d = std::hypot(static_cast<double>(o.x - bs.x),
                                    static_cast<double>(o.y - bs.y));
        if (d < config.d_min || d > config.radius) continue;
        xs.push_back(std::log10(d));
        ys.push_back(tx_power_dbm - o.psd_dbm);
    }
    if (xs.size() < static_cast<std::size_t>(config.min_samples)) {
        throw TooFewSamples("only " + std::to_string(xs.size()) +
                            " samples inside the radius, need " +
                            std::to_string(config.min_samples));
    }
    const double n = static_cast<double>(xs.size());
    double mean_x = 0.0, mean_y = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mean_x += xs[i];
        mean_y += ys[i];
    }
    mean_x /= n;
    mean_y /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = xs[i] - mean_x;
        sxx += dx * dx;
        sxy += dx * (ys[i] - mean_y);
    }
    if (sxx <= 0.0) {
        throw DegenerateGeometry("all retained samples lie at one distance");
    }
    const double theta = sxy / sxx;
    return LdplParams{mean_y - theta * mean_x, theta};
}

std::vector<LdplParams> fit_ldpl_multi(const SparseObservationSet& samples,
                                       const std::vector<PixelCoord>& bs_list,
                                       double tx_power_dbm, const FitConfig& config) {
    if (bs_list.empty()) {
        throw TooFewSamples("no base stations to fit");
    }
    // Partition samples by nearest BS, then fit each BS on its own share.
    std::vector<std::vector<Observation>> shares(bs_list.size());
    for (const auto& o : samples.observations()) {
        std::size_t best = 0;
        double best_d2 = std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < bs_list.size(); ++t) {
            const double dx = o.x - bs_list[t].x;
            const double dy = o.y - bs_list[t].y;
            const double d2 = dx * dx + dy * dy;
            if (d2 < best_d2) {
                best_d2 = d2;
                best = t;
            }
        }
        shares[best].push_back(o);
    }
    std::vector<LdplParams> fits;
    fits.reserve(bs_list.size());
    for (std::size_t t = 0; t < bs_list.size(); ++t) {
        SparseObservationSet share(samples.width(), samples.height(), shares[t]);
        fits.push_back(fit_ldpl(share, bs_list[t], tx_power_dbm, config));
    }
    return fits;
}

GridMap predict_freespace_map(const LdplParams& params, PixelCoord bs,
                              int width, int height, double d_min) {
    std::vector<double> out(static_cast<std::size_t>(width) * height);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const double d = std::max(
                std::hypot(static_cast<double>(x - bs.x), static_cast<double>(y - bs.y)),
                d_min);
            out[static_cast<std::size_t>(y) * width + x] = eval_path_loss(params, d);
        }
    }
    return GridMap(width, height, MapKind::PowerDbm, std::move(out));
}

}  // namespace radiosem
