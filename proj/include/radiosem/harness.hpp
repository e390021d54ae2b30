#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "radiosem/genmodel.hpp"
#include "radiosem/gridmap.hpp"
#include "radiosem/ldpl.hpp"
#include "radiosem/payload.hpp"
#include "radiosem/semcomp.hpp"

namespace radiosem {

/// Synthetic scene generator settings (the stand-in for ray-traced data).
struct SceneConfig {
    int width = 64;
    int height = 64;
    int n_buildings = 6;
    int building_min = 4;    // side length range, pixels
    int building_max = 14;
    int n_bs = 1;
    double pl0_min = 30.0;   // dB
    double pl0_max = 50.0;
    double theta_min = 20.0;  // dB/decade
    double theta_max = 35.0;
    double shadow_penalty = 20.0;  // dB for a fully obstructed path
    double noise_sigma = 0.0;      // dB, the Gaussian term of the LDPL model
    double sample_ratio = 0.05;
    double tx_power_dbm = 0.0;
    bool combine_sum_linear = false;  // default: strongest transmitter wins
    std::uint64_t seed = 0;
};

/// Full-scale preset (256 x 256) used for bandwidth accounting.
SceneConfig full_scale_config();

struct Scene {
    GridMap buildings;
    std::vector<PixelCoord> bs_list;
    std::vector<LdplParams> true_params;
    GridMap truth;  // normalized, carries the dBm dynamic range
    SparseObservationSet observations;
};

Scene generate_scene(const SceneConfig& cfg);

/// Oracle physics: per pixel the strongest transmitter's
/// P_tx - PL_t(d) - shadow_penalty * (1 - B_t) + noise, building interiors
/// floored to the outdoor minimum, min-max normalized with the range recorded.
GridMap ground_truth_radiomap(const GridMap& buildings,
                              const std::vector<PixelCoord>& bs_list,
                              const std::vector<LdplParams>& params_list,
                              const SceneConfig& cfg);

/// floor(ratio * non-building pixels) distinct non-building samples of the
/// truth, converted to dBm through the map's dynamic range.
SparseObservationSet sample_observations(const GridMap& truth, const GridMap& buildings,
                                         double ratio, std::uint64_t seed);

// ---- resolution handling ---------------------------------------------------

/// Integer-factor downsampling: mean pooling; binary maps are re-binarized
/// at 0.5, except preserve_ones keeps any 1 in the window (BS maps).
GridMap downsample(const GridMap& g, int factor, bool preserve_ones = false);

/// M_T with 1 at each BS pixel.
GridMap bs_location_map(const std::vector<PixelCoord>& bs_list, int width, int height);

/// Receiver-side conditioning features from segmentation + BS + LDPL params,
/// computed at the maps' own resolution.
FeatureStack make_feature_stack(const GridMap& buildings,
                                const std::vector<PixelCoord>& bs_list,
                                const std::vector<LdplParams>& params_list);

/// Scene -> (features, target) at the work resolution, using the scene's
/// true parameters for the depth map.
TrainSample scene_to_sample(const Scene& scene, int work_resolution);
std::vector<TrainSample> build_dataset(const std::vector<Scene>& scenes,
                                       int work_resolution);

// ---- end-to-end pipeline ----------------------------------------------------

struct PipelineConfig {
    Scheme scheme = Scheme::Vq;
    int jpeg_quality = 50;
    FitConfig fit;  // radius <= 0 means default_fit_config(dims)
    double tx_power_dbm = 0.0;
    double outage_threshold = 0.3;  // normalized units
    int work_resolution = 64;

    PipelineConfig() { fit.radius = 0.0; }
};

struct PipelineResult {
    GridMap reconstruction;      // at work resolution
    GridMap truth;               // scene truth at work resolution
    GridMap decoded_buildings;   // receiver-side segmentation, scene resolution
    MetricReport report;
    double bandwidth_kbit = 0.0;
    SemanticPayload sent;
    SemanticPayload received;
    std::vector<std::uint8_t> wire;  // after the channel
};

/// Transmitter: fit LDPL per BS, compress segmentation, serialize. Channel:
/// seeded bit flips. Receiver: decode, rebuild M_T, depth map, generator.
/// Any stage failure surfaces as PipelineError naming the stage.
PipelineResult run_pipeline(const Scene& scene, const Codebook& codebook,
                            const ModelParams& generator, const ChannelConfig& channel,
                            const PipelineConfig& cfg);

// ---- file I/O ----------------------------------------------------------------

/// 8-bit binary PGM (P5); values scaled by 255, round half up.
void save_map(const std::filesystem::path& path, const GridMap& map);
/// Inverse: /255, re-binarized when kind is Binary. PowerDbm is not storable.
GridMap load_map(const std::filesystem::path& path, MapKind kind);

/// On-disk scene layout: <stem>.buildings.pgm, <stem>.truth.pgm,
/// <stem>.meta.json (BS list, dynamic range, optional true params),
/// <stem>.observations.csv.
void save_scene(const std::filesystem::path& dir, const std::string& stem,
                const Scene& scene);
Scene load_scene(const std::filesystem::path& dir, const std::string& stem);

struct DatasetRecord {
    std::string name;
    GridMap buildings;
    std::vector<PixelCoord> bs_list;
    GridMap truth;
};

/// Loads every scene trio in lexicographic stem order. Missing companions
/// raise MissingFile; disagreeing dims raise InconsistentDims.
std::vector<DatasetRecord> load_dataset_dir(const std::filesystem::path& dir);

struct SplitSizes {
    std::size_t train = 0;
    std::size_t val = 0;
    std::size_t test = 0;
};

/// 4:1:1 proportions (600 records -> 400/100/100).
SplitSizes default_split(std::size_t n);

}  // namespace radiosem
