#include "radiosem/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <string>

#include "json.hpp"
#include "radiosem/depthmap.hpp"
#include "radiosem/metrics.hpp"
#include "radiosem/rng.hpp"

namespace radiosem {

SceneConfig full_scale_config() {
    SceneConfig cfg;
    cfg.width = 256;
    cfg.height = 256;
    cfg.n_buildings = 12;
    cfg.building_min = 12;
    cfg.building_max = 40;
    return cfg;
}

namespace {

void validate_config(const SceneConfig& cfg) {
    if (cfg.width < 8 || cfg.height < 8) throw InvalidGrid("scene dims too small");
    if (cfg.n_buildings < 0 || cfg.building_min < 1 ||
        cfg.building_min > cfg.building_max ||
        cfg.building_max > std::min(cfg.width, cfg.height)) {
        throw InvalidGrid("building size range is inconsistent with the dims");
    }
    if (cfg.n_bs < 1) throw InvalidGrid("need at least one base station");
    if (cfg.pl0_min > cfg.pl0_max || cfg.theta_min > cfg.theta_max) {
        throw InvalidGrid("parameter ranges must be ordered");
    }
    if (!(cfg.sample_ratio >= 0.0 && cfg.sample_ratio <= 1.0)) {
        throw InvalidGrid("sample_ratio must lie in [0, 1]");
    }
    if (cfg.noise_sigma < 0.0) throw InvalidGrid("noise_sigma must be non-negative");
}

}  // namespace

GridMap ground_truth_radiomap(const GridMap& buildings,
                              const std::vector<PixelCoord>& bs_list,
                              const std::vector<LdplParams>& params_list,
                              const SceneConfig& cfg) {
    if (bs_list.empty() || bs_list.size() != params_list.size()) {
        throw DimensionMismatch("need one LDPL parameter set per base station");
    }
    const int w = buildings.width();
    const int h = buildings.height();
    std::vector<GridMap> pl_maps;
    pl_maps.reserve(bs_list.size());
    for (std::size_t t = 0; t < bs_list.size(); ++t) {
        pl_maps.push_back(predict_freespace_map(params_list[t], bs_list[t], w, h));
    }

    std::mt19937_64 noise_rng(mix_seed(cfg.seed, 0x6077));
    std::vector<double> power(static_cast<std::size_t>(w) * h, 0.0);
    double out_min = std::numeric_limits<double>::infinity();
    double out_max = -std::numeric_limits<double>::infinity();
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (buildings.at(x, y) == 1.0) continue;
            double combined = cfg.combine_sum_linear
                                  ? 0.0
                                  : -std::numeric_limits<double>::infinity();
            for (std::size_t t = 0; t < bs_list.size(); ++t) {
                const double b = los_ratio(buildings, {x, y}, bs_list[t]);
                double p = cfg.tx_power_dbm - pl_maps[t].at(x, y) -
                           cfg.shadow_penalty * (1.0 - b);
                if (cfg.noise_sigma > 0.0) p += cfg.noise_sigma * gaussian(noise_rng);
                if (cfg.combine_sum_linear) {
                    combined += std::pow(10.0, p / 10.0);
                } else {
                    combined = std::max(combined, p);
                }
            }
            if (cfg.combine_sum_linear) combined = 10.0 * std::log10(combined);
            power[static_cast<std::size_t>(y) * w + x] = combined;
            out_min = std::min(out_min, combined);
            out_max = std::max(out_max, combined);
        }
    }
    if (!std::isfinite(out_min)) {
        // No outdoor pixel at all; degenerate but defined.
        return GridMap::filled(w, h, MapKind::NormalizedPower, 1.0,
                               DynamicRange{0.0, 0.0});
    }
    const double span = out_max - out_min;
    std::vector<double> normalized(power.size());
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            const double p = buildings.at(x, y) == 1.0 ? out_min : power[i];
            normalized[i] = span > 0.0 ? (p - out_min) / span : 1.0;
        }
    }
    return GridMap(w, h, MapKind::NormalizedPower, std::move(normalized),
                   DynamicRange{out_min, out_max});
}

SparseObservationSet sample_observations(const GridMap& truth, const GridMap& buildings,
                                         double ratio, std::uint64_t seed) {
    if (!(ratio >= 0.0 && ratio <= 1.0)) throw InvalidGrid("ratio must lie in [0, 1]");
    if (truth.width() != buildings.width() || truth.height() != buildings.height()) {
        throw DimensionMismatch("truth and building maps differ in dims");
    }
    if (!truth.range()) {
        throw InvalidGrid("truth map lacks the dBm dynamic range metadata");
    }
    const DynamicRange range = *truth.range();
    std::vector<PixelCoord> candidates;
    for (int y = 0; y < truth.height(); ++y) {
        for (int x = 0; x < truth.width(); ++x) {
            if (buildings.at(x, y) == 0.0) candidates.push_back({x, y});
        }
    }
    const std::size_t count =
        static_cast<std::size_t>(std::floor(ratio * static_cast<double>(candidates.size())));
    std::mt19937_64 rng(seed);
    std::vector<Observation> obs;
    obs.reserve(count);
    const double span = range.p_max_dbm - range.p_min_dbm;
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(bounded(rng, candidates.size() - i));
        std::swap(candidates[i], candidates[j]);
        const PixelCoord p = candidates[i];
        obs.push_back({p.x, p.y, range.p_min_dbm + truth.at(p) * span});
    }
    return SparseObservationSet(truth.width(), truth.height(), std::move(obs));
}

Scene generate_scene(const SceneConfig& cfg) {
    validate_config(cfg);
    std::mt19937_64 rng(cfg.seed);
    const int w = cfg.width;
    const int h = cfg.height;
    std::vector<double> mask(static_cast<std::size_t>(w) * h, 0.0);
    for (int i = 0; i < cfg.n_buildings; ++i) {
        const int bw = cfg.building_min +
                       static_cast<int>(bounded(rng, cfg.building_max - cfg.building_min + 1));
        const int bh = cfg.building_min +
                       static_cast<int>(bounded(rng, cfg.building_max - cfg.building_min + 1));
        const int x0 = static_cast<int>(bounded(rng, w - bw + 1));
        const int y0 = static_cast<int>(bounded(rng, h - bh + 1));
        for (int y = y0; y < y0 + bh; ++y) {
            for (int x = x0; x < x0 + bw; ++x) {
                mask[static_cast<std::size_t>(y) * w + x] = 1.0;
            }
        }
    }
    GridMap buildings(w, h, MapKind::Binary, std::move(mask));

    std::vector<PixelCoord> bs_list;
    std::set<std::pair<int, int>> used;
    for (int t = 0; t < cfg.n_bs; ++t) {
        bool placed = false;
        for (int attempt = 0; attempt < 1000; ++attempt) {
            const PixelCoord p{static_cast<int>(bounded(rng, w)),
                               static_cast<int>(bounded(rng, h))};
            if (buildings.at(p) == 1.0 || used.count({p.x, p.y})) continue;
            bs_list.push_back(p);
            used.insert({p.x, p.y});
            placed = true;
            break;
        }
        if (!placed) {
            throw PlacementFailure("no free pixel for base station " + std::to_string(t));
        }
    }

    std::vector<LdplParams> params;
    for (int t = 0; t < cfg.n_bs; ++t) {
        params.push_back({uniform(rng, cfg.pl0_min, cfg.pl0_max),
                          uniform(rng, cfg.theta_min, cfg.theta_max)});
    }

    GridMap truth = ground_truth_radiomap(buildings, bs_list, params, cfg);
    SparseObservationSet obs = sample_observations(truth, buildings, cfg.sample_ratio,
                                                   mix_seed(cfg.seed, 0x0B5));
    return Scene{std::move(buildings), std::move(bs_list), std::move(params),
                 std::move(truth), std::move(obs)};
}

// ---- resolution handling ---------------------------------------------------------

GridMap downsample(const GridMap& g, int factor, bool preserve_ones) {
    if (factor < 1 || g.width() % factor != 0 || g.height() % factor != 0) {
        throw IndivisibleDims("dims not divisible by the downsampling factor");
    }
    if (factor == 1) return g;
    const int ow = g.width() / factor;
    const int oh = g.height() / factor;
    std::vector<double> out(static_cast<std::size_t>(ow) * oh, 0.0);
    for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
            double acc = 0.0;
            double any_one = 0.0;
            for (int dy = 0; dy < factor; ++dy) {
                for (int dx = 0; dx < factor; ++dx) {
                    const double v = g.at(ox * factor + dx, oy * factor + dy);
                    acc += v;
                    if (v == 1.0) any_one = 1.0;
                }
            }
            const double mean = acc / (static_cast<double>(factor) * factor);
            double v = mean;
            if (g.kind() == MapKind::Binary) {
                v = preserve_ones ? any_one : (mean >= 0.5 ? 1.0 : 0.0);
            }
            out[static_cast<std::size_t>(oy) * ow + ox] = v;
        }
    }
    return GridMap(ow, oh, g.kind(), std::move(out), g.range());
}

GridMap bs_location_map(const std::vector<PixelCoord>& bs_list, int width, int height) {
    std::vector<double> out(static_cast<std::size_t>(width) * height, 0.0);
    for (const auto& p : bs_list) {
        if (p.x < 0 || p.x >= width || p.y < 0 || p.y >= height) {
            throw InvalidGrid("BS coordinate out of bounds");
        }
        out[static_cast<std::size_t>(p.y) * width + p.x] = 1.0;
    }
    return GridMap(width, height, MapKind::Binary, std::move(out));
}

FeatureStack make_feature_stack(const GridMap& buildings,
                                const std::vector<PixelCoord>& bs_list,
                                const std::vector<LdplParams>& params_list) {
    GridMap bs_map = bs_location_map(bs_list, buildings.width(), buildings.height());
    GridMap depth = radio_depth_map(buildings, bs_list, params_list);
    return FeatureStack(buildings, std::move(bs_map), std::move(depth));
}

namespace {

std::vector<PixelCoord> scale_bs(const std::vector<PixelCoord>& bs_list, int factor,
                                 int width, int height) {
    std::vector<PixelCoord> out;
    out.reserve(bs_list.size());
    for (const auto& p : bs_list) {
        out.push_back({std::min(p.x / factor, width - 1), std::min(p.y / factor, height - 1)});
    }
    return out;
}

int resolution_factor(int scene_w, int scene_h, int work_resolution) {
    if (work_resolution < 4 || scene_w % work_resolution != 0 || scene_w != scene_h) {
        throw IndivisibleDims("scene dims must be a square integer multiple of the work resolution");
    }
    return scene_w / work_resolution;
}

}  // namespace

TrainSample scene_to_sample(const Scene& scene, int work_resolution) {
    const int factor =
        resolution_factor(scene.buildings.width(), scene.buildings.height(), work_resolution);
    GridMap buildings = downsample(scene.buildings, factor);
    const auto bs = scale_bs(scene.bs_list, factor, work_resolution, work_resolution);
    FeatureStack features = make_feature_stack(buildings, bs, scene.true_params);
    GridMap target = downsample(scene.truth, factor);
    return TrainSample{std::move(features), std::move(target)};
}

std::vector<TrainSample> build_dataset(const std::vector<Scene>& scenes,
                                       int work_resolution) {
    std::vector<TrainSample> out;
    out.reserve(scenes.size());
    for (const auto& s : scenes) out.push_back(scene_to_sample(s, work_resolution));
    return out;
}

// ---- end-to-end pipeline ------------------------------------------------------------

namespace {

template <typename F>
auto stage(const char* name, F&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const PipelineError&) {
        throw;
    } catch (const Error& e) {
        throw PipelineError(name, e.what());
    }
}

int patch_size_of(const Codebook& cb) {
    const int p = static_cast<int>(std::lround(std::sqrt(static_cast<double>(cb.L))));
    if (p * p != cb.L) {
        throw DimensionMismatch("codeword dimension is not a square patch");
    }
    return p;
}

}  // namespace

PipelineResult run_pipeline(const Scene& scene, const Codebook& codebook,
                            const ModelParams& generator, const ChannelConfig& channel,
                            const PipelineConfig& cfg) {
    const int w = scene.buildings.width();
    const int h = scene.buildings.height();

    // Transmitter: semantics extraction and compression.
    const std::vector<LdplParams> fits = stage("fit", [&] {
        FitConfig fit_cfg = cfg.fit;
        if (fit_cfg.radius <= 0.0) fit_cfg.radius = default_fit_config(w, h).radius;
        return fit_ldpl_multi(scene.observations, scene.bs_list, cfg.tx_power_dbm, fit_cfg);
    });
    SemanticPayload sent;
    sent.scheme = cfg.scheme;
    sent.width = static_cast<std::uint16_t>(w);
    sent.height = static_cast<std::uint16_t>(h);
    sent.bs_list = scene.bs_list;
    sent.ldpl_list = fits;
    sent.seg_blob = stage("compress", [&]() -> std::vector<std::uint8_t> {
        if (cfg.scheme == Scheme::Vq) {
            const PatchSet ps = patchify(scene.buildings, patch_size_of(codebook));
            return pack_vq_blob(vq_encode(ps, codebook), codebook.n);
        }
        return jpeg_encode_binary(scene.buildings, cfg.jpeg_quality);
    });
    const std::vector<std::uint8_t> wire_clean =
        stage("serialize", [&] { return serialize(sent); });

    // Channel.
    std::vector<std::uint8_t> wire =
        stage("channel", [&] { return apply_channel(wire_clean, channel); });

    // Receiver: decode, rebuild features, reconstruct.
    const SemanticPayload received =
        stage("deserialize", [&] { return deserialize(wire); });
    const GridMap buildings_rx = stage("decode", [&]() -> GridMap {
        if (received.scheme == Scheme::Vq) {
            const VqEncoding enc =
                unpack_vq_blob(received.seg_blob, codebook.n, patch_size_of(codebook),
                               received.width, received.height);
            return vq_decode(enc, codebook);
        }
        GridMap decoded = jpeg_decode_binary(received.seg_blob);
        if (decoded.width() != received.width || decoded.height() != received.height) {
            throw CorruptStream("segmentation dims disagree with the payload header");
        }
        return decoded;
    });

    const int factor = resolution_factor(received.width, received.height, cfg.work_resolution);
    const FeatureStack features = stage("depthmap", [&] {
        GridMap buildings_ds = downsample(buildings_rx, factor);
        const auto bs = scale_bs(received.bs_list, factor, cfg.work_resolution,
                                 cfg.work_resolution);
        return make_feature_stack(buildings_ds, bs, received.ldpl_list);
    });
    GridMap reconstruction =
        stage("generate", [&] { return generator_forward(generator, features); });

    return stage("evaluate", [&] {
        GridMap truth = downsample(scene.truth, factor).retagged(MapKind::NormalizedPower);
        MetricReport report;
        report.mse = mse(reconstruction, truth);
        report.nmse = nmse(reconstruction, truth);
        report.outage_accuracy =
            outage_agreement(outage_map(reconstruction, cfg.outage_threshold),
                             outage_map(truth, cfg.outage_threshold));
        PipelineResult result{std::move(reconstruction),
                              std::move(truth),
                              buildings_rx,
                              report,
                              measure_bandwidth(wire),
                              std::move(sent),
                              received,
                              std::move(wire)};
        return result;
    });
}

// ---- PGM I/O --------------------------------------------------------------------------

void save_map(const std::filesystem::path& path, const GridMap& map) {
    if (map.kind() == MapKind::PowerDbm) {
        throw InvalidGrid("PGM stores only [0,1]-valued maps; normalize first");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << "P5\n" << map.width() << ' ' << map.height() << "\n255\n";
    std::vector<std::uint8_t> row(static_cast<std::size_t>(map.width()));
    for (int y = 0; y < map.height(); ++y) {
        for (int x = 0; x < map.width(); ++x) {
            row[static_cast<std::size_t>(x)] =
                static_cast<std::uint8_t>(std::floor(map.at(x, y) * 255.0 + 0.5));
        }
        out.write(reinterpret_cast<const char*>(row.data()),
                  static_cast<std::streamsize>(row.size()));
    }
    if (!out) throw IoError("short write to " + path.string());
}

namespace {

int pgm_token(std::istream& in, const std::filesystem::path& path) {
    // Skips whitespace and '#' comments, then reads one unsigned number.
    int c = in.get();
    while (c != EOF && (std::isspace(c) || c == '#')) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = in.get();
        }
        c = in.get();
    }
    if (c == EOF || !std::isdigit(c)) {
        throw MalformedFile(path.string() + ": malformed PGM header");
    }
    int value = 0;
    while (c != EOF && std::isdigit(c)) {
        value = value * 10 + (c - '0');
        c = in.get();
    }
    return value;
}

}  // namespace

GridMap load_map(const std::filesystem::path& path, MapKind kind) {
    if (kind == MapKind::PowerDbm) {
        throw InvalidGrid("PGM stores only [0,1]-valued maps");
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    char magic[2] = {0, 0};
    in.read(magic, 2);
    if (!in || magic[0] != 'P' || magic[1] != '5') {
        throw MalformedFile(path.string() + ": not a binary PGM (P5) file");
    }
    const int w = pgm_token(in, path);
    const int h = pgm_token(in, path);
    const int maxval = pgm_token(in, path);
    if (w <= 0 || h <= 0 || maxval != 255) {
        throw MalformedFile(path.string() + ": unsupported PGM geometry");
    }
    std::vector<std::uint8_t> raw(static_cast<std::size_t>(w) * h);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (in.gcount() != static_cast<std::streamsize>(raw.size())) {
        throw MalformedFile(path.string() + ": pixel data cut short");
    }
    std::vector<double> values(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const double v = raw[i] / 255.0;
        values[i] = kind == MapKind::Binary ? (v >= 0.5 ? 1.0 : 0.0) : v;
    }
    return GridMap(w, h, kind, std::move(values));
}

// ---- scene I/O --------------------------------------------------------------------------

void save_scene(const std::filesystem::path& dir, const std::string& stem,
                const Scene& scene) {
    std::filesystem::create_directories(dir);
    save_map(dir / (stem + ".buildings.pgm"), scene.buildings);
    save_map(dir / (stem + ".truth.pgm"), scene.truth);

    nlohmann::json meta;
    for (const auto& p : scene.bs_list) meta["bs"].push_back({{"x", p.x}, {"y", p.y}});
    for (const auto& q : scene.true_params) {
        meta["true_params"].push_back({{"pl0", q.pl0}, {"theta_tilde", q.theta_tilde}});
    }
    if (scene.truth.range()) {
        meta["p_min_dbm"] = scene.truth.range()->p_min_dbm;
        meta["p_max_dbm"] = scene.truth.range()->p_max_dbm;
    }
    std::ofstream mio(dir / (stem + ".meta.json"));
    if (!mio) throw IoError("cannot write scene metadata for " + stem);
    mio << meta.dump(2) << '\n';

    std::ofstream oio(dir / (stem + ".observations.csv"));
    if (!oio) throw IoError("cannot write observations for " + stem);
    oio << "x,y,psd_dbm\n";
    oio.precision(12);
    for (const auto& o : scene.observations.observations()) {
        oio << o.x << ',' << o.y << ',' << o.psd_dbm << '\n';
    }
}

namespace {

nlohmann::json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw MissingFile("missing " + path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw MalformedFile(path.string() + ": " + e.what());
    }
}

std::vector<PixelCoord> bs_from_meta(const nlohmann::json& meta,
                                     const std::filesystem::path& path) {
    std::vector<PixelCoord> bs;
    try {
        for (const auto& j : meta.at("bs")) {
            bs.push_back({j.at("x").get<int>(), j.at("y").get<int>()});
        }
    } catch (const nlohmann::json::exception& e) {
        throw MalformedFile(path.string() + ": " + e.what());
    }
    if (bs.empty()) throw MalformedFile(path.string() + ": no base stations listed");
    return bs;
}

}  // namespace

Scene load_scene(const std::filesystem::path& dir, const std::string& stem) {
    const auto buildings_path = dir / (stem + ".buildings.pgm");
    const auto truth_path = dir / (stem + ".truth.pgm");
    const auto meta_path = dir / (stem + ".meta.json");
    const auto obs_path = dir / (stem + ".observations.csv");
    for (const auto& p : {buildings_path, truth_path, meta_path}) {
        if (!std::filesystem::exists(p)) throw MissingFile("missing " + p.string());
    }
    GridMap buildings = load_map(buildings_path, MapKind::Binary);
    GridMap truth = load_map(truth_path, MapKind::NormalizedPower);
    if (buildings.width() != truth.width() || buildings.height() != truth.height()) {
        throw InconsistentDims(stem + ": building and truth dims disagree");
    }

    const nlohmann::json meta = read_json_file(meta_path);
    const std::vector<PixelCoord> bs = bs_from_meta(meta, meta_path);
    std::vector<LdplParams> params;
    if (meta.contains("true_params")) {
        for (const auto& j : meta["true_params"]) {
            params.push_back({j.at("pl0").get<double>(), j.at("theta_tilde").get<double>()});
        }
    }
    if (meta.contains("p_min_dbm") && meta.contains("p_max_dbm")) {
        truth = truth.retagged(MapKind::NormalizedPower,
                               DynamicRange{meta["p_min_dbm"].get<double>(),
                                            meta["p_max_dbm"].get<double>()});
    }

    std::vector<Observation> obs;
    if (std::filesystem::exists(obs_path)) {
        std::ifstream in(obs_path);
        if (!in) throw IoError("cannot open " + obs_path.string());
        std::string line;
        std::getline(in, line);  // header
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            std::istringstream ls(line);
            Observation o;
            char comma = 0;
            if (!(ls >> o.x >> comma >> o.y >> comma >> o.psd_dbm)) {
                throw MalformedFile(obs_path.string() + ": bad row '" + line + "'");
            }
            obs.push_back(o);
        }
    }
    SparseObservationSet observations(buildings.width(), buildings.height(), std::move(obs));
    return Scene{std::move(buildings), bs, std::move(params), std::move(truth),
                 std::move(observations)};
}

std::vector<DatasetRecord> load_dataset_dir(const std::filesystem::path& dir) {
    if (!std::filesystem::exists(dir)) throw MissingFile("missing directory " + dir.string());
    const std::string suffix = ".meta.json";
    std::vector<std::string> stems;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (name.size() > suffix.size() &&
            name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0) {
            stems.push_back(name.substr(0, name.size() - suffix.size()));
        }
    }
    std::sort(stems.begin(), stems.end());

    std::vector<DatasetRecord> records;
    records.reserve(stems.size());
    int dims_w = -1, dims_h = -1;
    for (const auto& stem : stems) {
        Scene scene = load_scene(dir, stem);
        if (dims_w < 0) {
            dims_w = scene.buildings.width();
            dims_h = scene.buildings.height();
        } else if (scene.buildings.width() != dims_w || scene.buildings.height() != dims_h) {
            throw InconsistentDims(stem + ": dims differ from the rest of the dataset");
        }
        records.push_back({stem, std::move(scene.buildings), std::move(scene.bs_list),
                           std::move(scene.truth)});
    }
    return records;
}

SplitSizes default_split(std::size_t n) {
    SplitSizes s;
    s.train = static_cast<std::size_t>(std::llround(static_cast<double>(n) * 4.0 / 6.0));
    s.val = static_cast<std::size_t>(std::llround(static_cast<double>(n) / 6.0));
    if (s.train + s.val > n) s.val = n - s.train;
    s.test = n - s.train - s.val;
    return s;
}

}  // namespace radiosem
