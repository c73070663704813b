import math

import numpy as np
import pytest

import tobitkf


def test_gauss_stats_match_reference_values():
    assert tobitkf.normal_cdf(1.0) == pytest.approx(0.8413447460685429, rel=1e-14)
    assert tobitkf.censored_mean(-1.0, 1.0, 0.0) == pytest.approx(0.083315470587686298, rel=1e-12)
    assert tobitkf.censored_variance_term(-1.0, 1.0, 0.0) == pytest.approx(
        0.19909766557034879, rel=1e-12
    )
    assert tobitkf.eth_complement(math.inf) == 0.0


def test_simulate_shapes_and_determinism():
    a = tobitkf.simulate("attitude", seed=3, steps=40)
    b = tobitkf.simulate("attitude", seed=3, steps=40)
    assert a["x_true"].shape == (40, 2)
    assert a["y_observed"].shape == (40, 1)
    assert a["censored"].dtype == bool
    np.testing.assert_array_equal(a["y_observed"], b["y_observed"])
    assert np.all(a["y_observed"] >= 0.0)


def test_filter_tracks_constant_state():
    data = tobitkf.simulate("constant-1d", seed=11)
    tkf = tobitkf.Filter("tkf", "constant-1d")
    kf = tobitkf.Filter("kf", "constant-1d")
    for y in data["y_observed"]:
        tkf.step(y)
        kf.step(y)
    assert abs(tkf.x_hat[0] + 1.0) < 0.3
    assert kf.x_hat[0] > 0.0
    assert kf.q_hat is None
    assert tobitkf.Filter("atkf", "constant-1d").r_hat.shape == (1, 1)


def test_run_summary(tmp_path):
    report = tobitkf.run("vlc", ["tkf", "kf"], replicates=2, seed=4, out_dir=tmp_path)
    assert set(report["filters"]) == {"tkf", "kf"}
    assert len(report["seeds"]) == 2
    assert (tmp_path / "summary.json").exists()
    assert (tmp_path / "vlc_r001.csv").exists()


def test_errors():
    with pytest.raises(ValueError):
        tobitkf.Filter("ukf", "attitude")
    with pytest.raises(ValueError):
        tobitkf.simulate("nope", seed=1)
    with pytest.raises(ValueError):
        tobitkf.Filter("kf", "attitude").step(np.zeros(3))
