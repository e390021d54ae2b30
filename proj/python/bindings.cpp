#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "radiosem/depthmap.hpp"
#include "radiosem/fedtrain.hpp"
#include "radiosem/harness.hpp"
#include "radiosem/metrics.hpp"

namespace py = pybind11;
using namespace radiosem;

namespace {

MapKind kind_from_string(const std::string& s) {
    if (s == "power_dbm") return MapKind::PowerDbm;
    if (s == "normalized") return MapKind::NormalizedPower;
    if (s == "binary") return MapKind::Binary;
    if (s == "depth") return MapKind::Depth;
    throw py::value_error("unknown map kind '" + s + "'");
}

std::string kind_to_string(MapKind k) {
    switch (k) {
        case MapKind::PowerDbm: return "power_dbm";
        case MapKind::NormalizedPower: return "normalized";
        case MapKind::Binary: return "binary";
        case MapKind::Depth: return "depth";
    }
    return "?";
}

GridMap grid_from_numpy(py::array_t<double, py::array::c_style | py::array::forcecast> arr,
                        const std::string& kind,
                        std::optional<std::pair<double, double>> range) {
    if (arr.ndim() != 2) throw py::value_error("expected a 2-D array");
    const int h = static_cast<int>(arr.shape(0));
    const int w = static_cast<int>(arr.shape(1));
    std::vector<double> values(arr.data(), arr.data() + arr.size());
    std::optional<DynamicRange> r;
    if (range) r = DynamicRange{range->first, range->second};
    return GridMap(w, h, kind_from_string(kind), std::move(values), r);
}

py::array_t<double> grid_to_numpy(const GridMap& g) {
    py::array_t<double> arr({g.height(), g.width()});
    std::copy(g.values().begin(), g.values().end(), arr.mutable_data());
    return arr;
}

SparseObservationSet obs_from_list(int width, int height,
                                   const std::vector<std::tuple<int, int, double>>& rows) {
    std::vector<Observation> obs;
    obs.reserve(rows.size());
    for (const auto& [x, y, psd] : rows) obs.push_back({x, y, psd});
    return SparseObservationSet(width, height, std::move(obs));
}

std::vector<std::uint8_t> bytes_to_vec(const py::bytes& b) {
    const std::string s = b;
    return {s.begin(), s.end()};
}

py::bytes vec_to_bytes(const std::vector<std::uint8_t>& v) {
    return py::bytes(reinterpret_cast<const char*>(v.data()), v.size());
}

}  // namespace

PYBIND11_MODULE(_radiosem, m) {
    m.doc() = "physics-enhanced semantic radiomap transmission";

    py::register_exception<Error>(m, "RadiosemError");

    // ---- core ----
    py::class_<GridMap>(m, "GridMap")
        .def(py::init(&grid_from_numpy), py::arg("array"), py::arg("kind"),
             py::arg("range") = std::nullopt)
        .def_property_readonly("width", &GridMap::width)
        .def_property_readonly("height", &GridMap::height)
        .def_property_readonly("kind",
                               [](const GridMap& g) { return kind_to_string(g.kind()); })
        .def_property_readonly("range",
                               [](const GridMap& g) -> std::optional<std::pair<double, double>> {
                                   if (!g.range()) return std::nullopt;
                                   return std::pair{g.range()->p_min_dbm,
                                                    g.range()->p_max_dbm};
                               })
        .def("to_numpy", &grid_to_numpy)
        .def("__eq__", [](const GridMap& a, const GridMap& b) { return a == b; });

    py::class_<SparseObservationSet>(m, "SparseObservationSet")
        .def(py::init(&obs_from_list), py::arg("width"), py::arg("height"),
             py::arg("observations"))
        .def_property_readonly("observations", [](const SparseObservationSet& s) {
            std::vector<std::tuple<int, int, double>> rows;
            for (const auto& o : s.observations()) rows.emplace_back(o.x, o.y, o.psd_dbm);
            return rows;
        });

    py::class_<MetricReport>(m, "MetricReport")
        .def_readonly("mse", &MetricReport::mse)
        .def_readonly("nmse", &MetricReport::nmse)
        .def_readonly("outage_accuracy", &MetricReport::outage_accuracy);

    m.def("mse", &mse);
    m.def("nmse", &nmse);
    m.def("max_normalize",
          [](const GridMap& g) { return max_normalize(g); });
    m.def("outage_map", &outage_map, py::arg("radiomap"), py::arg("threshold"));
    m.def("outage_agreement", &outage_agreement);

    // ---- ldpl ----
    py::class_<LdplParams>(m, "LdplParams")
        .def(py::init([](double pl0, double theta) {
                 return LdplParams{pl0, theta};
             }),
             py::arg("pl0"), py::arg("theta_tilde"))
        .def_readwrite("pl0", &LdplParams::pl0)
        .def_readwrite("theta_tilde", &LdplParams::theta_tilde)
        .def("__repr__", [](const LdplParams& p) { return to_json(p); });

    py::class_<FitConfig>(m, "FitConfig")
        .def(py::init<>())
        .def_readwrite("radius", &FitConfig::radius)
        .def_readwrite("d_min", &FitConfig::d_min)
        .def_readwrite("min_samples", &FitConfig::min_samples);

    m.def("default_fit_config", &default_fit_config);
    m.def("eval_path_loss", &eval_path_loss);
    m.def("fit_ldpl",
          [](const SparseObservationSet& obs, std::pair<int, int> bs, double tx_power,
             const FitConfig& cfg) {
              return fit_ldpl(obs, {bs.first, bs.second}, tx_power, cfg);
          },
          py::arg("observations"), py::arg("bs"), py::arg("tx_power_dbm"),
          py::arg("config"));
    m.def("predict_freespace_map",
          [](const LdplParams& p, std::pair<int, int> bs, int w, int h, double d_min) {
              return predict_freespace_map(p, {bs.first, bs.second}, w, h, d_min);
          },
          py::arg("params"), py::arg("bs"), py::arg("width"), py::arg("height"),
          py::arg("d_min") = 1.0);

    // ---- depth ----
    m.def("los_path", [](std::pair<int, int> a, std::pair<int, int> b) {
        std::vector<std::pair<int, int>> out;
        for (const auto& p : los_path({a.first, a.second}, {b.first, b.second})) {
            out.emplace_back(p.x, p.y);
        }
        return out;
    });
    m.def("los_ratio",
          [](const GridMap& buildings, std::pair<int, int> target, std::pair<int, int> tx) {
              return los_ratio(buildings, {target.first, target.second},
                               {tx.first, tx.second});
          });
    m.def("radio_depth_map",
          [](const GridMap& buildings, const std::vector<std::pair<int, int>>& bs,
             const std::vector<LdplParams>& params) {
              std::vector<PixelCoord> coords;
              for (const auto& [x, y] : bs) coords.push_back({x, y});
              return radio_depth_map(buildings, coords, params);
          });

    // ---- semantic compression ----
    py::class_<Codebook>(m, "Codebook")
        .def_readonly("n", &Codebook::n)
        .def_readonly("L", &Codebook::L);

    m.def("train_codebook_from_maps",
          [](const std::vector<GridMap>& maps, int n, int patch, int iters,
             std::uint64_t seed) {
              std::vector<std::vector<double>> latents;
              for (const auto& map : maps) {
                  PatchSet ps = patchify(map, patch);
                  for (auto& z : ps.patches) latents.push_back(std::move(z));
              }
              return train_codebook(latents, n, iters, seed);
          },
          py::arg("maps"), py::arg("n") = 256, py::arg("patch") = 8,
          py::arg("iters") = 25, py::arg("seed") = 0);
    m.def("vq_encode_map", [](const GridMap& map, const Codebook& cb) {
        const int patch = static_cast<int>(std::sqrt(double(cb.L)));
        return vec_to_bytes(pack_vq_blob(vq_encode(patchify(map, patch), cb), cb.n));
    });
    m.def("vq_decode_map", [](const py::bytes& blob, const Codebook& cb, int w, int h) {
        const int patch = static_cast<int>(std::sqrt(double(cb.L)));
        return vq_decode(unpack_vq_blob(bytes_to_vec(blob), cb.n, patch, w, h), cb);
    });
    m.def("vq_payload_bits", [](const GridMap& map, const Codebook& cb) {
        const int patch = static_cast<int>(std::sqrt(double(cb.L)));
        return payload_bits(vq_encode(patchify(map, patch), cb), cb.n);
    });
    m.def("jpeg_encode_binary", [](const GridMap& map, int quality) {
        return vec_to_bytes(jpeg_encode_binary(map, quality));
    });
    m.def("jpeg_decode_binary",
          [](const py::bytes& b) { return jpeg_decode_binary(bytes_to_vec(b)); });
    m.def("save_codebook", &save_codebook);
    m.def("load_codebook", &load_codebook);

    // ---- payload / channel ----
    py::class_<ChannelConfig>(m, "ChannelConfig")
        .def(py::init([](double ber, std::uint64_t seed, bool protect_header) {
                 return ChannelConfig{ber, seed, protect_header};
             }),
             py::arg("ber") = 0.0, py::arg("seed") = 0, py::arg("protect_header") = true)
        .def_readwrite("ber", &ChannelConfig::ber)
        .def_readwrite("seed", &ChannelConfig::seed)
        .def_readwrite("protect_header", &ChannelConfig::protect_header);

    m.def("apply_channel", [](const py::bytes& b, const ChannelConfig& cfg) {
        return vec_to_bytes(apply_channel(bytes_to_vec(b), cfg));
    });
    m.def("measure_bandwidth",
          [](const py::bytes& b) { return measure_bandwidth(bytes_to_vec(b)); });
    m.def("raw_baseline_bits", &raw_baseline_bits);

    // ---- generative model ----
    py::class_<FeatureStack>(m, "FeatureStack")
        .def(py::init<GridMap, GridMap, GridMap, std::vector<double>>(),
             py::arg("buildings"), py::arg("bs_map"), py::arg("depth"),
             py::arg("side_info") = std::vector<double>{})
        .def_readonly("buildings", &FeatureStack::buildings)
        .def_readonly("bs_map", &FeatureStack::bs_map)
        .def_readonly("depth", &FeatureStack::depth);

    py::class_<TrainSample>(m, "TrainSample")
        .def(py::init<FeatureStack, GridMap>(), py::arg("features"), py::arg("target"))
        .def_readonly("features", &TrainSample::features)
        .def_readonly("target", &TrainSample::target);

    py::class_<TrainConfig>(m, "TrainConfig")
        .def(py::init<>())
        .def_readwrite("alpha", &TrainConfig::alpha)
        .def_readwrite("lr", &TrainConfig::lr)
        .def_readwrite("batch", &TrainConfig::batch)
        .def_readwrite("epochs", &TrainConfig::epochs)
        .def_readwrite("seed", &TrainConfig::seed)
        .def_readwrite("work_resolution", &TrainConfig::work_resolution)
        .def_readwrite("train_discriminator", &TrainConfig::train_discriminator)
        .def_readwrite("threads", &TrainConfig::threads);

    py::class_<EpochStats>(m, "EpochStats")
        .def_readonly("loss_d", &EpochStats::loss_d)
        .def_readonly("loss_g", &EpochStats::loss_g)
        .def_readonly("loss_mse", &EpochStats::loss_mse);

    py::class_<ModelParams>(m, "ModelParams");

    py::class_<TrainResult>(m, "TrainResult")
        .def_readonly("generator", &TrainResult::generator)
        .def_readonly("discriminator", &TrainResult::discriminator)
        .def_readonly("history", &TrainResult::history);

    m.def("train", &train, py::arg("dataset"), py::arg("config"));
    m.def("generator_forward", &generator_forward, py::arg("params"), py::arg("features"));
    m.def("discriminator_forward", &discriminator_forward);
    m.def("generator_loss", &generator_loss);
    m.def("discriminator_loss", &discriminator_loss);
    m.def("physics_baseline",
          [](const GridMap& buildings, const std::vector<std::pair<int, int>>& bs,
             const std::vector<LdplParams>& params) {
              std::vector<PixelCoord> coords;
              for (const auto& [x, y] : bs) coords.push_back({x, y});
              return physics_baseline(buildings, coords, params);
          });
    m.def("save_model_params", &save_model_params);
    m.def("load_model_params", &load_model_params);

    // ---- federated ----
    py::class_<ClientState>(m, "ClientState")
        .def(py::init([](int id, std::vector<TrainSample> dataset) {
                 return ClientState{id, std::move(dataset)};
             }),
             py::arg("id"), py::arg("dataset"))
        .def_readonly("id", &ClientState::id);

    py::class_<FedConfig>(m, "FedConfig")
        .def(py::init<>())
        .def_readwrite("rounds", &FedConfig::rounds)
        .def_readwrite("local_epochs", &FedConfig::local_epochs)
        .def_readwrite("clients_per_round", &FedConfig::clients_per_round)
        .def_readwrite("seed", &FedConfig::seed)
        .def_readwrite("aggregate_discriminator", &FedConfig::aggregate_discriminator)
        .def_readwrite("train", &FedConfig::train);

    py::class_<RoundStats>(m, "RoundStats")
        .def_readonly("round", &RoundStats::round)
        .def_readonly("global_mse", &RoundStats::global_mse)
        .def_readonly("global_nmse", &RoundStats::global_nmse);

    py::class_<FedResult>(m, "FedResult")
        .def_readonly("generator", &FedResult::generator)
        .def_readonly("discriminator", &FedResult::discriminator)
        .def_readonly("history", &FedResult::history);

    m.def("fed_train", &fed_train, py::arg("pool"), py::arg("test_set"), py::arg("config"));
    m.def("aggregate", &aggregate);

    // ---- harness ----
    py::class_<SceneConfig>(m, "SceneConfig")
        .def(py::init<>())
        .def_readwrite("width", &SceneConfig::width)
        .def_readwrite("height", &SceneConfig::height)
        .def_readwrite("n_buildings", &SceneConfig::n_buildings)
        .def_readwrite("building_min", &SceneConfig::building_min)
        .def_readwrite("building_max", &SceneConfig::building_max)
        .def_readwrite("n_bs", &SceneConfig::n_bs)
        .def_readwrite("pl0_min", &SceneConfig::pl0_min)
        .def_readwrite("pl0_max", &SceneConfig::pl0_max)
        .def_readwrite("theta_min", &SceneConfig::theta_min)
        .def_readwrite("theta_max", &SceneConfig::theta_max)
        .def_readwrite("shadow_penalty", &SceneConfig::shadow_penalty)
        .def_readwrite("noise_sigma", &SceneConfig::noise_sigma)
        .def_readwrite("sample_ratio", &SceneConfig::sample_ratio)
        .def_readwrite("tx_power_dbm", &SceneConfig::tx_power_dbm)
        .def_readwrite("combine_sum_linear", &SceneConfig::combine_sum_linear)
        .def_readwrite("seed", &SceneConfig::seed);

    m.def("full_scale_config", &full_scale_config);

    py::class_<Scene>(m, "Scene")
        .def_readonly("buildings", &Scene::buildings)
        .def_readonly("truth", &Scene::truth)
        .def_readonly("observations", &Scene::observations)
        .def_property_readonly("bs_list",
                               [](const Scene& s) {
                                   std::vector<std::pair<int, int>> out;
                                   for (const auto& p : s.bs_list) {
                                       out.emplace_back(p.x, p.y);
                                   }
                                   return out;
                               })
        .def_readonly("true_params", &Scene::true_params);

    m.def("generate_scene", &generate_scene);
    m.def("scene_to_sample", &scene_to_sample, py::arg("scene"),
          py::arg("work_resolution") = 64);
    m.def("build_dataset", &build_dataset, py::arg("scenes"),
          py::arg("work_resolution") = 64);
    m.def("downsample", &downsample, py::arg("map"), py::arg("factor"),
          py::arg("preserve_ones") = false);

    py::class_<PipelineConfig>(m, "PipelineConfig")
        .def(py::init<>())
        .def_property("scheme",
                      [](const PipelineConfig& c) {
                          return c.scheme == Scheme::Vq ? "vq" : "jpeg";
                      },
                      [](PipelineConfig& c, const std::string& s) {
                          if (s == "vq") c.scheme = Scheme::Vq;
                          else if (s == "jpeg") c.scheme = Scheme::Jpeg;
                          else throw py::value_error("scheme must be 'vq' or 'jpeg'");
                      })
        .def_readwrite("jpeg_quality", &PipelineConfig::jpeg_quality)
        .def_readwrite("fit", &PipelineConfig::fit)
        .def_readwrite("tx_power_dbm", &PipelineConfig::tx_power_dbm)
        .def_readwrite("outage_threshold", &PipelineConfig::outage_threshold)
        .def_readwrite("work_resolution", &PipelineConfig::work_resolution);

    py::class_<PipelineResult>(m, "PipelineResult")
        .def_readonly("reconstruction", &PipelineResult::reconstruction)
        .def_readonly("truth", &PipelineResult::truth)
        .def_readonly("report", &PipelineResult::report)
        .def_readonly("bandwidth_kbit", &PipelineResult::bandwidth_kbit)
        .def_property_readonly("wire", [](const PipelineResult& r) {
            return vec_to_bytes(r.wire);
        });

    m.def("run_pipeline", &run_pipeline, py::arg("scene"), py::arg("codebook"),
          py::arg("generator"), py::arg("channel"), py::arg("config"));

    m.def("save_map", &save_map);
    m.def("load_map", [](const std::filesystem::path& p, const std::string& kind) {
        return load_map(p, kind_from_string(kind));
    });
    m.def("save_scene", &save_scene);
    m.def("load_scene", &load_scene);
}
