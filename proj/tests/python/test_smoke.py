"""Smoke tests for the Python bindings: every major operation once, end to end."""

import math

import numpy as np
import pytest

import radiosem as rs


def binary_map(arr):
    return rs.GridMap(np.asarray(arr, dtype=np.float64), "binary")


def test_metrics_roundtrip():
    a = rs.GridMap(np.zeros((4, 4)), "normalized")
    b = rs.GridMap(np.ones((4, 4)), "normalized")
    assert rs.mse(a, a) == 0.0
    assert rs.mse(a, b) == 1.0
    assert rs.nmse(a, b) == 1.0

    g = rs.GridMap(np.array([[1.0, 2.0, 4.0]]), "power_dbm")
    n = rs.max_normalize(g)
    assert np.allclose(n.to_numpy(), [[0.25, 0.5, 1.0]])

    out = rs.outage_map(rs.GridMap(np.array([[0.2, 0.8]]), "normalized"), 0.5)
    assert out.to_numpy().tolist() == [[1.0, 0.0]]
    assert rs.outage_agreement(out, out) == 1.0


def test_gridmap_validates():
    with pytest.raises(rs.RadiosemError):
        rs.GridMap(np.array([[0.5]]), "binary")


def test_ldpl_fit_recovers_parameters():
    true = rs.LdplParams(40.0, 25.0)
    obs = []
    for x, y in [(2, 0), (0, 5), (10, 0), (0, 20), (15, 15)]:
        d = math.hypot(x, y)
        obs.append((x, y, -rs.eval_path_loss(true, d)))
    samples = rs.SparseObservationSet(64, 64, obs)
    cfg = rs.default_fit_config(64, 64)
    fit = rs.fit_ldpl(samples, (0, 0), 0.0, cfg)
    assert abs(fit.pl0 - 40.0) < 1e-9
    assert abs(fit.theta_tilde - 25.0) < 1e-9

    pl = rs.predict_freespace_map(true, (1, 1), 3, 3)
    assert pl.to_numpy()[1, 1] == 40.0


def test_depth_map_and_los():
    path = rs.los_path((0, 0), (2, 2))
    assert path == [(0, 0), (1, 1), (2, 2)]

    empty = binary_map(np.zeros((8, 8)))
    assert rs.los_ratio(empty, (0, 0), (7, 7)) == 1.0
    depth = rs.radio_depth_map(empty, [(4, 4)], [rs.LdplParams(40.0, 20.0)])
    assert depth.to_numpy().max() == 1.0


def test_vq_and_jpeg_codecs():
    rng = np.random.default_rng(7)
    maps = []
    for _ in range(4):
        m = np.zeros((64, 64))
        x0, y0 = rng.integers(0, 40, size=2)
        m[y0:y0 + 16, x0:x0 + 20] = 1.0
        maps.append(binary_map(m))
    cb = rs.train_codebook_from_maps(maps, n=16, patch=8, iters=10, seed=3)
    blob = rs.vq_encode_map(maps[0], cb)
    back = rs.vq_decode_map(blob, cb, 64, 64)
    assert back.kind == "binary"
    assert rs.vq_payload_bits(maps[0], cb) == 64 * 4  # 8x8 patches, 4 bits each

    stream = rs.jpeg_encode_binary(maps[0], 95)
    decoded = rs.jpeg_decode_binary(stream)
    assert decoded.to_numpy().shape == (64, 64)
    with pytest.raises(rs.RadiosemError):
        rs.jpeg_decode_binary(stream[: len(stream) // 2])


def test_channel_and_bandwidth():
    cfg = rs.ChannelConfig(ber=0.0, seed=1, protect_header=False)
    data = bytes(range(256))
    assert rs.apply_channel(data, cfg) == data

    noisy_cfg = rs.ChannelConfig(ber=0.1, seed=1, protect_header=False)
    a = rs.apply_channel(data, noisy_cfg)
    b = rs.apply_channel(data, noisy_cfg)
    assert a == b
    assert a != data

    assert rs.measure_bandwidth(bytes(1024)) == 8.192


def test_scene_pipeline_end_to_end():
    cfg = rs.SceneConfig()
    cfg.width = cfg.height = 32
    cfg.n_buildings = 3
    cfg.building_min = 3
    cfg.building_max = 8
    cfg.sample_ratio = 0.2
    cfg.seed = 11
    scene = rs.generate_scene(cfg)
    assert scene.truth.to_numpy().max() == 1.0

    scenes = []
    for seed in range(6):
        c = rs.SceneConfig()
        c.width = c.height = 32
        c.n_buildings = 3
        c.building_min = 3
        c.building_max = 8
        c.sample_ratio = 0.2
        c.seed = 100 + seed
        scenes.append(rs.generate_scene(c))
    dataset = rs.build_dataset(scenes, 32)

    tc = rs.TrainConfig()
    tc.epochs = 2
    tc.batch = 4
    tc.lr = 1e-3
    tc.seed = 5
    result = rs.train(dataset, tc)
    assert len(result.history) == 2

    cb = rs.train_codebook_from_maps([s.buildings for s in scenes], n=16, patch=8,
                                     iters=8, seed=2)
    pc = rs.PipelineConfig()
    pc.work_resolution = 32
    ch = rs.ChannelConfig(ber=0.0, seed=0)
    r = rs.run_pipeline(scene, cb, result.generator, ch, pc)
    assert r.report.mse >= 0.0
    assert r.bandwidth_kbit > 0.0
    assert r.report.outage_accuracy is not None

    base = rs.physics_baseline(scene.buildings, scene.bs_list, scene.true_params)
    assert base.to_numpy().max() == 1.0


def test_federated_round():
    def make_shard(seed_base, count):
        shard = []
        for i in range(count):
            c = rs.SceneConfig()
            c.width = c.height = 16
            c.n_buildings = 2
            c.building_min = 2
            c.building_max = 5
            c.seed = seed_base + i
            shard.append(rs.generate_scene(c))
        return rs.build_dataset(shard, 16)

    pool = [rs.ClientState(0, make_shard(0, 3)), rs.ClientState(1, make_shard(50, 3))]
    test_set = make_shard(99, 2)
    fc = rs.FedConfig()
    fc.rounds = 1
    fc.local_epochs = 1
    fc.seed = 9
    fc.train.batch = 3
    fc.train.lr = 1e-3
    result = rs.fed_train(pool, test_set, fc)
    assert len(result.history) == 1
    assert result.history[0].global_mse >= 0.0


def test_map_files_roundtrip(tmp_path):
    m = binary_map((np.arange(64).reshape(8, 8) % 3 == 0).astype(float))
    path = tmp_path / "m.pgm"
    rs.save_map(path, m)
    back = rs.load_map(path, "binary")
    assert back == m
