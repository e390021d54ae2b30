// Command-line front end: scene synthesis, LDPL fitting, depth maps,
// segmentation codecs, the end-to-end transmission pipeline, centralized and
// federated training, and batch evaluation.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "radiosem/depthmap.hpp"
#include "radiosem/fedtrain.hpp"
#include "radiosem/harness.hpp"
#include "radiosem/metrics.hpp"
#include "radiosem/rng.hpp"

namespace fs = std::filesystem;
using namespace radiosem;

namespace {

struct AppConfig {
    SceneConfig scene;
    TrainConfig train;
    PipelineConfig pipeline;
    FedConfig fed;
    int codebook_size = 256;
    int patch = 8;
    int kmeans_iters = 25;
};

void apply_json(AppConfig& cfg, const nlohmann::json& j) {
    const auto get = [](const nlohmann::json& o, const char* key, auto& out) {
        if (o.contains(key)) out = o[key].get<std::decay_t<decltype(out)>>();
    };
    if (j.contains("scene")) {
        const auto& s = j["scene"];
        get(s, "width", cfg.scene.width);
        get(s, "height", cfg.scene.height);
        get(s, "n_buildings", cfg.scene.n_buildings);
        get(s, "building_min", cfg.scene.building_min);
        get(s, "building_max", cfg.scene.building_max);
        get(s, "n_bs", cfg.scene.n_bs);
        get(s, "pl0_min", cfg.scene.pl0_min);
        get(s, "pl0_max", cfg.scene.pl0_max);
        get(s, "theta_min", cfg.scene.theta_min);
        get(s, "theta_max", cfg.scene.theta_max);
        get(s, "shadow_penalty", cfg.scene.shadow_penalty);
        get(s, "noise_sigma", cfg.scene.noise_sigma);
        get(s, "sample_ratio", cfg.scene.sample_ratio);
        get(s, "tx_power_dbm", cfg.scene.tx_power_dbm);
        get(s, "combine_sum_linear", cfg.scene.combine_sum_linear);
        get(s, "seed", cfg.scene.seed);
    }
    if (j.contains("train")) {
        const auto& t = j["train"];
        get(t, "alpha", cfg.train.alpha);
        get(t, "lr", cfg.train.lr);
        get(t, "batch", cfg.train.batch);
        get(t, "epochs", cfg.train.epochs);
        get(t, "seed", cfg.train.seed);
        get(t, "work_resolution", cfg.train.work_resolution);
        get(t, "train_discriminator", cfg.train.train_discriminator);
        get(t, "threads", cfg.train.threads);
    }
    if (j.contains("pipeline")) {
        const auto& p = j["pipeline"];
        std::string scheme;
        get(p, "scheme", scheme);
        if (scheme == "vq") cfg.pipeline.scheme = Scheme::Vq;
        if (scheme == "jpeg") cfg.pipeline.scheme = Scheme::Jpeg;
        get(p, "jpeg_quality", cfg.pipeline.jpeg_quality);
        get(p, "fit_radius", cfg.pipeline.fit.radius);
        get(p, "tx_power_dbm", cfg.pipeline.tx_power_dbm);
        get(p, "outage_threshold", cfg.pipeline.outage_threshold);
        get(p, "work_resolution", cfg.pipeline.work_resolution);
    }
    if (j.contains("fed")) {
        const auto& f = j["fed"];
        get(f, "rounds", cfg.fed.rounds);
        get(f, "local_epochs", cfg.fed.local_epochs);
        get(f, "clients_per_round", cfg.fed.clients_per_round);
        get(f, "seed", cfg.fed.seed);
        get(f, "aggregate_discriminator", cfg.fed.aggregate_discriminator);
    }
    if (j.contains("codebook")) {
        const auto& c = j["codebook"];
        get(c, "size", cfg.codebook_size);
        get(c, "patch", cfg.patch);
        get(c, "iters", cfg.kmeans_iters);
    }
}

AppConfig load_config(const std::string& path) {
    AppConfig cfg;
    if (path.empty()) return cfg;
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path);
    try {
        apply_json(cfg, nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
        throw MalformedFile(path + ": " + e.what());
    }
    return cfg;
}

std::vector<std::string> dataset_stems(const fs::path& dir) {
    const std::string suffix = ".meta.json";
    std::vector<std::string> stems;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (name.size() > suffix.size() &&
            name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0) {
            stems.push_back(name.substr(0, name.size() - suffix.size()));
        }
    }
    std::sort(stems.begin(), stems.end());
    return stems;
}

std::vector<Scene> load_scenes(const fs::path& dir) {
    if (!fs::exists(dir)) throw MissingFile("missing directory " + dir.string());
    std::vector<Scene> scenes;
    for (const auto& stem : dataset_stems(dir)) scenes.push_back(load_scene(dir, stem));
    if (scenes.empty()) throw EmptyDataset("no scenes under " + dir.string());
    return scenes;
}

Codebook train_codebook_from_scenes(const std::vector<Scene>& scenes, int n, int patch,
                                    int iters, std::uint64_t seed) {
    std::vector<std::vector<double>> latents;
    for (const auto& s : scenes) {
        PatchSet ps = patchify(s.buildings, patch);
        for (auto& z : ps.patches) latents.push_back(std::move(z));
    }
    const std::set<std::vector<double>> distinct(latents.begin(), latents.end());
    if (distinct.size() < static_cast<std::size_t>(n)) {
        std::cerr << "warning: corpus has only " << distinct.size()
                  << " distinct patches; shrinking the codebook from " << n << "\n";
        n = static_cast<int>(distinct.size());
    }
    return train_codebook(latents, n, iters, seed);
}

std::string scheme_name(Scheme s) { return s == Scheme::Vq ? "vq" : "jpeg"; }

void warn_negative_slopes(const std::vector<LdplParams>& fits) {
    for (std::size_t t = 0; t < fits.size(); ++t) {
        if (fits[t].theta_tilde < 0.0) {
            std::cerr << "warning: BS " << t << " fitted a negative path-loss slope ("
                      << fits[t].theta_tilde << " dB/decade)\n";
        }
    }
}

int run(int argc, char** argv) {
    CLI::App app{"physics-enhanced semantic radiomap transmission simulator"};
    app.require_subcommand(1);
    app.fallthrough();  // global --config/--seed may follow the subcommand

    std::string config_path;
    app.add_option("-c,--config", config_path, "JSON config file");
    std::optional<std::uint64_t> seed_override;
    app.add_option("--seed", seed_override, "seed override for every stage");

    // ---- synth ----
    auto* synth = app.add_subcommand("synth", "generate synthetic scenes");
    std::string synth_out = "scenes";
    int synth_count = 1;
    synth->add_option("-o,--out", synth_out, "output directory");
    synth->add_option("-n,--count", synth_count, "number of scenes");

    // ---- fit ----
    auto* fit = app.add_subcommand("fit", "fit LDPL parameters from observations");
    std::string fit_scene;
    std::string fit_out;
    fit->add_option("--scene", fit_scene, "scene dir/stem")->required();
    fit->add_option("-o,--out", fit_out, "write the JSON here instead of stdout");

    // ---- depthmap ----
    auto* depth = app.add_subcommand("depthmap", "compute a radio depth map");
    std::string depth_scene, depth_out = "depth.pgm";
    bool depth_fitted = false;
    depth->add_option("--scene", depth_scene, "scene dir/stem")->required();
    depth->add_option("-o,--out", depth_out, "output PGM");
    depth->add_flag("--fitted", depth_fitted,
                    "use parameters fitted from observations instead of true ones");

    // ---- encode / decode ----
    auto* encode = app.add_subcommand("encode", "compress a segmentation map");
    std::string enc_map, enc_out = "seg.bin", enc_scheme = "vq", enc_codebook;
    int enc_quality = 50;
    encode->add_option("--map", enc_map, "binary PGM input")->required();
    encode->add_option("-o,--out", enc_out, "output blob");
    encode->add_option("--scheme", enc_scheme, "vq or jpeg");
    encode->add_option("--codebook", enc_codebook, "codebook file (vq)");
    encode->add_option("-q,--quality", enc_quality, "jpeg quality");

    auto* decode = app.add_subcommand("decode", "decompress a segmentation blob");
    std::string dec_blob, dec_out = "seg.pgm", dec_scheme = "vq", dec_codebook;
    int dec_w = 0, dec_h = 0;
    decode->add_option("--blob", dec_blob, "input blob")->required();
    decode->add_option("-o,--out", dec_out, "output PGM");
    decode->add_option("--scheme", dec_scheme, "vq or jpeg");
    decode->add_option("--codebook", dec_codebook, "codebook file (vq)");
    decode->add_option("--width", dec_w, "map width (vq)");
    decode->add_option("--height", dec_h, "map height (vq)");

    // ---- transmit ----
    auto* transmit = app.add_subcommand("transmit", "run the full pipeline on a scene");
    std::string tx_scene, tx_model, tx_codebook, tx_payload_out, tx_recon_out;
    double tx_ber = 0.0;
    std::string tx_scheme;
    transmit->add_option("--scene", tx_scene, "scene dir/stem")->required();
    transmit->add_option("--model", tx_model, "generator RSMP file")->required();
    transmit->add_option("--codebook", tx_codebook, "codebook file")->required();
    transmit->add_option("--ber", tx_ber, "channel bit error rate");
    transmit->add_option("--scheme", tx_scheme, "vq or jpeg");
    transmit->add_option("--out-payload", tx_payload_out, "write the .rsem wire bytes");
    transmit->add_option("--out-recon", tx_recon_out, "write the reconstruction PGM");

    // ---- train ----
    auto* train_cmd = app.add_subcommand("train", "train the generative model");
    std::string train_scenes, train_out = "model", train_history;
    std::string train_codebook_out;
    int train_synth = 0;
    train_cmd->add_option("--scenes", train_scenes, "scene directory");
    train_cmd->add_option("--synth-count", train_synth,
                          "generate this many scenes instead of loading");
    train_cmd->add_option("-o,--out", train_out, "output stem (.g.rsmp / .d.rsmp)");
    train_cmd->add_option("--history", train_history, "loss history CSV");
    train_cmd->add_option("--codebook-out", train_codebook_out,
                          "also train and save a VQ codebook");
    int train_epochs = -1;
    train_cmd->add_option("-e,--epochs", train_epochs, "epoch count override");

    // ---- fedtrain ----
    auto* fed_cmd = app.add_subcommand("fedtrain", "federated training over shards");
    std::string fed_scenes, fed_out = "fed_model", fed_metrics;
    int fed_clients = 2;
    fed_cmd->add_option("--scenes", fed_scenes, "scene directory")->required();
    fed_cmd->add_option("--clients", fed_clients, "number of clients");
    fed_cmd->add_option("-o,--out", fed_out, "output stem");
    fed_cmd->add_option("--metrics", fed_metrics, "round metrics CSV");
    int fed_rounds = -1, fed_local = -1;
    fed_cmd->add_option("--rounds", fed_rounds, "rounds override");
    fed_cmd->add_option("--local-epochs", fed_local, "local epochs override");

    // ---- eval ----
    auto* eval_cmd = app.add_subcommand("eval", "evaluate a model over scenes");
    std::string eval_scenes, eval_model, eval_codebook, eval_csv = "metrics.csv";
    std::string eval_figures;
    double eval_ber = 0.0;
    eval_cmd->add_option("--scenes", eval_scenes, "scene directory")->required();
    eval_cmd->add_option("--model", eval_model, "generator RSMP file")->required();
    eval_cmd->add_option("--codebook", eval_codebook, "codebook file")->required();
    eval_cmd->add_option("--ber", eval_ber, "channel bit error rate");
    eval_cmd->add_option("-o,--out", eval_csv, "metrics CSV");
    eval_cmd->add_option("--figures", eval_figures,
                         "directory for reconstruction and outage PGMs");

    CLI11_PARSE(app, argc, argv);

    AppConfig cfg = load_config(config_path);
    if (seed_override) {
        cfg.scene.seed = *seed_override;
        cfg.train.seed = *seed_override;
        cfg.fed.seed = *seed_override;
    }
    cfg.fed.train = cfg.train;

    const auto split_scene_arg = [](const std::string& arg) {
        const fs::path p(arg);
        return std::pair<fs::path, std::string>{p.parent_path(), p.filename().string()};
    };

    if (*synth) {
        for (int i = 0; i < synth_count; ++i) {
            SceneConfig sc = cfg.scene;
            sc.seed = mix_seed(cfg.scene.seed, static_cast<std::uint64_t>(i));
            const Scene scene = generate_scene(sc);
            char stem[32];
            std::snprintf(stem, sizeof(stem), "scene_%04d", i);
            save_scene(synth_out, stem, scene);
        }
        std::cout << "wrote " << synth_count << " scenes to " << synth_out << "\n";
        return 0;
    }

    if (*fit) {
        const auto [dir, stem] = split_scene_arg(fit_scene);
        const Scene scene = load_scene(dir, stem);
        FitConfig fc = cfg.pipeline.fit;
        if (fc.radius <= 0.0) {
            fc.radius = default_fit_config(scene.buildings.width(),
                                           scene.buildings.height()).radius;
        }
        const auto fits = fit_ldpl_multi(scene.observations, scene.bs_list,
                                         cfg.pipeline.tx_power_dbm, fc);
        warn_negative_slopes(fits);
        nlohmann::json j = nlohmann::json::array();
        for (const auto& f : fits) {
            j.push_back({{"pl0", f.pl0}, {"theta_tilde", f.theta_tilde}});
        }
        if (fit_out.empty()) {
            std::cout << j.dump(2) << "\n";
        } else {
            std::ofstream out(fit_out);
            out << j.dump(2) << "\n";
            std::cout << "wrote " << fit_out << "\n";
        }
        return 0;
    }

    if (*depth) {
        const auto [dir, stem] = split_scene_arg(depth_scene);
        const Scene scene = load_scene(dir, stem);
        std::vector<LdplParams> params = scene.true_params;
        if (depth_fitted || params.empty()) {
            FitConfig fc = default_fit_config(scene.buildings.width(),
                                              scene.buildings.height());
            params = fit_ldpl_multi(scene.observations, scene.bs_list,
                                    cfg.pipeline.tx_power_dbm, fc);
            warn_negative_slopes(params);
        }
        const GridMap d = radio_depth_map(scene.buildings, scene.bs_list, params);
        save_map(depth_out, d);
        std::cout << "wrote " << depth_out << "\n";
        return 0;
    }

    if (*encode) {
        const GridMap map = load_map(enc_map, MapKind::Binary);
        std::vector<std::uint8_t> blob;
        if (enc_scheme == "vq") {
            if (enc_codebook.empty()) throw MissingFile("vq encoding needs --codebook");
            const Codebook cb = load_codebook(enc_codebook);
            const int patch = static_cast<int>(std::sqrt(double(cb.L)));
            const VqEncoding enc_v = vq_encode(patchify(map, patch), cb);
            blob = pack_vq_blob(enc_v, cb.n);
            std::cout << "payload_bits=" << payload_bits(enc_v, cb.n) << "\n";
        } else {
            blob = jpeg_encode_binary(map, enc_quality);
            std::cout << "payload_bits=" << payload_bits(blob) << "\n";
        }
        std::ofstream out(enc_out, std::ios::binary);
        out.write(reinterpret_cast<const char*>(blob.data()),
                  static_cast<std::streamsize>(blob.size()));
        std::cout << "wrote " << enc_out << " (" << blob.size() << " bytes)\n";
        return 0;
    }

    if (*decode) {
        std::ifstream in(dec_blob, std::ios::binary);
        if (!in) throw IoError("cannot open " + dec_blob);
        std::vector<std::uint8_t> blob((std::istreambuf_iterator<char>(in)),
                                       std::istreambuf_iterator<char>());
        GridMap map = [&] {
            if (dec_scheme == "vq") {
                if (dec_codebook.empty()) throw MissingFile("vq decoding needs --codebook");
                if (dec_w <= 0 || dec_h <= 0) {
                    throw InvalidGrid("vq decoding needs --width and --height");
                }
                const Codebook cb = load_codebook(dec_codebook);
                const int patch = static_cast<int>(std::sqrt(double(cb.L)));
                return vq_decode(unpack_vq_blob(blob, cb.n, patch, dec_w, dec_h), cb);
            }
            return jpeg_decode_binary(blob);
        }();
        save_map(dec_out, map);
        std::cout << "wrote " << dec_out << "\n";
        return 0;
    }

    if (*transmit) {
        const auto [dir, stem] = split_scene_arg(tx_scene);
        const Scene scene = load_scene(dir, stem);
        const ModelParams gen = load_model_params(tx_model);
        const Codebook cb = load_codebook(tx_codebook);
        if (tx_scheme == "vq") cfg.pipeline.scheme = Scheme::Vq;
        if (tx_scheme == "jpeg") cfg.pipeline.scheme = Scheme::Jpeg;
        ChannelConfig channel;
        channel.ber = tx_ber;
        channel.seed = seed_override.value_or(cfg.scene.seed);
        const PipelineResult r = run_pipeline(scene, cb, gen, channel, cfg.pipeline);
        warn_negative_slopes(r.sent.ldpl_list);
        std::cout << "scheme=" << scheme_name(cfg.pipeline.scheme)
                  << " bandwidth_kbit=" << r.bandwidth_kbit << " mse=" << r.report.mse
                  << " nmse=" << r.report.nmse
                  << " outage_agreement=" << *r.report.outage_accuracy << "\n";
        if (!tx_payload_out.empty()) {
            std::ofstream out(tx_payload_out, std::ios::binary);
            out.write(reinterpret_cast<const char*>(r.wire.data()),
                      static_cast<std::streamsize>(r.wire.size()));
        }
        if (!tx_recon_out.empty()) save_map(tx_recon_out, r.reconstruction);
        return 0;
    }

    if (*train_cmd) {
        std::vector<Scene> scenes;
        if (train_synth > 0) {
            for (int i = 0; i < train_synth; ++i) {
                SceneConfig sc = cfg.scene;
                sc.seed = mix_seed(cfg.scene.seed, static_cast<std::uint64_t>(i));
                scenes.push_back(generate_scene(sc));
            }
        } else {
            if (train_scenes.empty()) throw MissingFile("train needs --scenes or --synth-count");
            scenes = load_scenes(train_scenes);
        }
        if (train_epochs >= 0) cfg.train.epochs = train_epochs;
        const auto dataset = build_dataset(scenes, cfg.train.work_resolution);
        const TrainResult r = train(dataset, cfg.train);
        save_model_params(train_out + ".g.rsmp", r.generator);
        save_model_params(train_out + ".d.rsmp", r.discriminator);
        if (!train_history.empty()) write_loss_history_csv(train_history, r.history);
        if (!train_codebook_out.empty()) {
            const Codebook cb = train_codebook_from_scenes(
                scenes, cfg.codebook_size, cfg.patch, cfg.kmeans_iters, cfg.train.seed);
            save_codebook(train_codebook_out, cb);
        }
        if (!r.history.empty()) {
            std::cout << "final losses: L_D=" << r.history.back().loss_d
                      << " L_G=" << r.history.back().loss_g
                      << " L_MSE=" << r.history.back().loss_mse << "\n";
        }
        std::cout << "wrote " << train_out << ".g.rsmp and " << train_out << ".d.rsmp\n";
        return 0;
    }

    if (*fed_cmd) {
        const std::vector<Scene> scenes = load_scenes(fed_scenes);
        if (fed_rounds > 0) cfg.fed.rounds = fed_rounds;
        if (fed_local > 0) cfg.fed.local_epochs = fed_local;
        const auto dataset = build_dataset(scenes, cfg.train.work_resolution);
        // shard round-robin over clients; hold out every sixth sample for the
        // global test split
        std::vector<TrainSample> test_set;
        std::vector<ClientState> pool(static_cast<std::size_t>(fed_clients));
        for (int c = 0; c < fed_clients; ++c) pool[c].id = c;
        for (std::size_t i = 0; i < dataset.size(); ++i) {
            if (i % 6 == 5) {
                test_set.push_back(dataset[i]);
            } else {
                pool[i % fed_clients].dataset.push_back(dataset[i]);
            }
        }
        const FedResult r = fed_train(pool, test_set, cfg.fed);
        save_model_params(fed_out + ".g.rsmp", r.generator);
        save_model_params(fed_out + ".d.rsmp", r.discriminator);
        if (!fed_metrics.empty()) write_round_metrics_csv(fed_metrics, r.history);
        if (!r.history.empty()) {
            std::cout << "final global test mse=" << r.history.back().global_mse
                      << " nmse=" << r.history.back().global_nmse << "\n";
        }
        return 0;
    }

    if (*eval_cmd) {
        const std::vector<Scene> scenes = load_scenes(eval_scenes);
        const ModelParams gen = load_model_params(eval_model);
        const Codebook cb = load_codebook(eval_codebook);
        std::ofstream csv(eval_csv);
        if (!csv) throw IoError("cannot open " + eval_csv);
        csv << "scene,scheme,bandwidth_kbit,mse,nmse,outage_agreement\n";
        csv.precision(10);
        if (!eval_figures.empty()) fs::create_directories(eval_figures);
        int index = 0;
        for (const auto& scene : scenes) {
            ChannelConfig channel;
            channel.ber = eval_ber;
            channel.seed = mix_seed(cfg.scene.seed, static_cast<std::uint64_t>(index));
            const PipelineResult r = run_pipeline(scene, cb, gen, channel, cfg.pipeline);
            csv << index << ',' << scheme_name(cfg.pipeline.scheme) << ','
                << r.bandwidth_kbit << ',' << r.report.mse << ',' << r.report.nmse << ','
                << *r.report.outage_accuracy << '\n';
            if (!eval_figures.empty()) {
                char name[64];
                std::snprintf(name, sizeof(name), "recon_%04d.pgm", index);
                save_map(fs::path(eval_figures) / name, r.reconstruction);
                std::snprintf(name, sizeof(name), "outage_%04d.pgm", index);
                save_map(fs::path(eval_figures) / name,
                         outage_map(r.reconstruction, cfg.pipeline.outage_threshold));
            }
            ++index;
        }
        std::cout << "wrote " << eval_csv << "\n";
        return 0;
    }

    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const PipelineError& e) {
        std::cerr << "error in stage '" << e.stage() << "': " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
