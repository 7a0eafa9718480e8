# SPDX-License-Identifier: Apache-2.0
#
# resparray: multi-person respiration measurement with MIMO array radar
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
# http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
# ------------------------------------------------------------------------


import json

import numpy as np
import pytest

import resparray as ra


def test_version_and_presets():
    assert ra.version.startswith("resparray")
    assert {"u_shape", "square", "single"} <= set(ra.preset_names())
    cfg = ra.default_config()
    assert cfg["alpha"] > 0


def test_taper_is_symmetric():
    w = np.array(ra.taylor_taper(12, -35.0, 5))
    assert w.shape == (12,)
    np.testing.assert_allclose(w, w[::-1], atol=1e-12)
    assert w.max() == pytest.approx(w[5])


def test_beamform_matches_direct_sum():
    rng = np.random.default_rng(3)
    cube = rng.normal(size=(4, 6, 12)) + 1j * rng.normal(size=(4, 6, 12))
    w = np.array(ra.taylor_taper())
    u = np.array(ra.angle_grid(32))
    img = ra.beamform(cube, fft_size=32)
    assert img.shape == (4, 6, 32)
    k = np.arange(12)
    steer = np.exp(-1j * np.pi * np.outer(u, k))  # [angle, element]
    direct = np.einsum("tle,ae->tla", cube * w, np.conj(steer))
    np.testing.assert_allclose(img, direct, atol=1e-9)


def test_simulate_shape_and_determinism():
    a = ra.simulate("preset:single", seed=2)
    b = ra.simulate("preset:single", seed=2)
    assert a.dtype == np.complex128
    assert a.shape[1:] == (128, 12)
    assert a.shape[0] == 1200
    np.testing.assert_array_equal(a, b)


def test_single_person_run():
    scene = json.loads(ra.preset_scene_json("single"))
    cube = ra.simulate(json.dumps(scene), seed=1)
    out = ra.run(cube, method="resp4d", seed=1, monte_carlo=2)
    assert len(out["ticks"]) == len(out["people"])
    assert len(out["counts"]) == 2
    assert all(n == 1 for row in out["counts"] for n in row)
    truth = scene["targets"][0]["breathing"]["base_interval_s"]
    late = [t[0]["interval_s"] for t in out["people"] if t[0]["timestamp_s"] >= 40]
    assert late and np.allclose(late, truth, rtol=0.03)


def test_cost_curve_minimum_at_period():
    n = 400
    d = np.sin(2 * np.pi * np.arange(n) / 40.0)
    curve = np.array(ra.resp_cost_curve(d, 300, 80))
    assert curve.shape == (80,)
    assert np.argmin(curve[10:60]) + 11 == 40


def test_xmeans_on_blobs():
    rng = np.random.default_rng(0)
    centres = [(1.0, -0.5, 0.2, 0.2), (2.5, 0.4, 0.4, 0.4), (3.5, 0.0, 0.3, 0.3)]
    pts = np.vstack([c + 0.02 * rng.normal(size=(40, 4)) for c in centres])
    labels = np.array(ra.xmeans(pts, seed=5))
    assert len(set(labels)) == 3
    for i in range(3):
        assert len(set(labels[i * 40:(i + 1) * 40])) == 1
    assert ra.bic(pts, list(labels)) > ra.bic(pts, [0] * len(pts))


def test_metrics():
    assert ra.count_accuracy([2, 2, 3, 2], 2) == pytest.approx(0.75)
    r = [(10.0, 4.1), (20.0, 3.9)]
    t = [(0.0, 4.0), (30.0, 4.0)]
    assert ra.interval_rmse(r, t) == pytest.approx(100.0, rel=1e-6)
    x, y = ra.polar_to_cartesian(2.0, 0.0)
    assert (x, y) == pytest.approx((0.0, 2.0))


def test_rcube_round_trip(tmp_path):
    cube = ra.simulate("preset:single", seed=1)[:50]
    p = tmp_path / "c.rcube"
    ra.write_rcube(p, cube)
    back, radar = ra.read_rcube(p)
    assert json.loads(radar)
    # stored as float32
    np.testing.assert_allclose(back, cube, rtol=1e-6, atol=1e-6 * np.abs(cube).max())


def test_errors_map_to_python_types(tmp_path):
    with pytest.raises(ValueError, match="nowhere"):
        ra.simulate("preset:nowhere")
    with pytest.raises(ValueError):
        ra.run(np.zeros((10, 8, 5), complex))
    with pytest.raises(ValueError, match="alpah"):
        ra.run(np.zeros((10, 8, 12), complex), json.dumps({"alpah": 1}))
    with pytest.raises(OSError):
        ra.read_rcube(tmp_path / "missing.rcube")
    assert issubclass(ra.ValidationError, ValueError)
    assert issubclass(ra.IoError, OSError)
