import numpy as np
import pytest

from causalfm import Dataset, ModelConfig, init_state, load_dataset
from causalfm.data import standardize, write_dataset
from causalfm.errors import SchemaError, ValidationError


def test_standardize_simple_column():
    x, means, sds = standardize(np.array([[1.0], [2.0], [3.0]]))
    np.testing.assert_allclose(x[:, 0], [-1.0, 0.0, 1.0])
    assert means[0] == 2.0 and sds[0] == 1.0


def test_standardize_is_idempotent():
    rng = np.random.default_rng(0)
    x0, _, _ = standardize(rng.standard_normal((50, 3)) * 4 + 1)
    x1, means, sds = standardize(x0)
    np.testing.assert_allclose(x1, x0, atol=1e-12)
    np.testing.assert_allclose(means, 0.0, atol=1e-12)
    np.testing.assert_allclose(sds, 1.0, atol=1e-12)


def test_standardize_two_level_column():
    # sd of (0,0,10,10) with ddof=1 is sqrt(100/3)
    x, means, sds = standardize(np.array([[0.0], [0.0], [10.0], [10.0]]))
    assert sds[0] == pytest.approx(np.sqrt(100.0 / 3.0), rel=1e-15)
    np.testing.assert_allclose(
        x[:, 0], np.array([-1.0, -1.0, 1.0, 1.0]) * (5.0 / sds[0]))


def test_standardize_rejects_constant_column():
    with pytest.raises(ValidationError, match="constant"):
        standardize(np.array([[1.0, 2.0], [1.0, 3.0], [1.0, 4.0]]))


def _write_csv(path, text):
    path.write_text(text)
    return path


def test_load_dataset_minimal(tmp_path):
    path = _write_csv(tmp_path / "d.csv",
                      "id,t,y_1,y_2,x_1\n"
                      "a,0,1.0,2.0,0.1\nb,1,0.5,1.5,0.9\n"
                      "c,0,0.2,0.1,0.4\nd,1,1.2,0.3,0.7\n")
    data = load_dataset(path)
    assert (data.n, data.q, data.p) == (4, 2, 1)
    assert set(np.unique(data.T)) == {0, 1}
    np.testing.assert_allclose(data.X.mean(axis=0), 0.0, atol=1e-10)
    np.testing.assert_allclose(data.X.std(axis=0, ddof=1), 1.0, atol=1e-10)


def test_load_dataset_rejects_constant_covariate(tmp_path):
    path = _write_csv(tmp_path / "d.csv",
                      "id,t,y_1,x_1\na,0,1.0,2.0\nb,1,0.5,2.0\nc,1,0.1,2.0\n")
    with pytest.raises(ValidationError, match="constant"):
        load_dataset(path)


def test_load_dataset_rejects_nonbinary_treatment(tmp_path):
    path = _write_csv(tmp_path / "d.csv",
                      "id,t,y_1,x_1\na,0,1.0,0.2\nb,2,0.5,1.0\nc,1,0.1,0.5\n")
    with pytest.raises(ValidationError, match="row 1"):
        load_dataset(path)


def test_load_dataset_rejects_nan_cell_naming_position(tmp_path):
    path = _write_csv(tmp_path / "d.csv",
                      "id,t,y_1,x_1\na,0,1.0,0.2\nb,1,nan,1.0\nc,0,0.1,0.5\n")
    with pytest.raises(ValidationError, match="row 1, column 'y_1'"):
        load_dataset(path)


def test_load_dataset_missing_column_is_schema_error(tmp_path):
    path = _write_csv(tmp_path / "d.csv", "id,y_1,x_1\na,1.0,0.2\n")
    with pytest.raises(SchemaError):
        load_dataset(path)


def test_dataset_round_trip(tmp_path):
    rng = np.random.default_rng(3)
    y = rng.standard_normal((20, 3))
    t = np.repeat([0, 1], 10)
    x = rng.standard_normal((20, 2)) * 3 + 5
    data = Dataset.from_arrays(y, t, x)
    write_dataset(data, tmp_path / "round.csv")
    back = load_dataset(tmp_path / "round.csv")
    np.testing.assert_allclose(back.Y, data.Y, atol=1e-12)
    np.testing.assert_allclose(back.X, data.X, atol=1e-12)
    np.testing.assert_array_equal(back.T, data.T)
    np.testing.assert_allclose(back.x_means, data.x_means, atol=1e-12)


def test_both_arms_required():
    with pytest.raises(ValidationError, match="arms"):
        Dataset.from_arrays(np.zeros((3, 1)), [1, 1, 1], np.arange(3.0)[:, None])


def test_init_state_deterministic_and_shaped(tiny_data):
    cfg = ModelConfig(j_max=3, l_max=4)
    s0a, s1a = init_state(tiny_data, cfg, seed=9)
    s0b, _ = init_state(tiny_data, cfg, seed=9)
    np.testing.assert_array_equal(s0a.Lambda, s0b.Lambda)
    np.testing.assert_array_equal(s0a.scores, s0b.scores)
    assert s0a.Lambda.shape == (tiny_data.q, 3)
    assert s0a.iota.shape == (3,)
    assert s0a.iota[0] == s0a.delta[0]
    assert s1a.alpha.shape == (3, 3, tiny_data.p + 1)
    s0c, _ = init_state(tiny_data, cfg, seed=10)
    assert not np.array_equal(s0a.scores, s0c.scores)
    for st in (s0a, s1a):
        st.validate()


def test_init_state_finite_over_config_range(tiny_data):
    for j in (1, 2, 5):
        for l in (1, 2, 8):
            cfg = ModelConfig(j_max=j, l_max=l)
            for st in init_state(tiny_data, cfg, seed=1):
                st.validate()


def test_config_validation():
    with pytest.raises(ValidationError):
        ModelConfig(burn_in=10, n_iter=10)
    with pytest.raises(ValidationError):
        ModelConfig(thin=0)
    with pytest.raises(ValidationError):
        ModelConfig(sigma_alpha2=0.0)
    with pytest.raises(ValidationError):
        ModelConfig(credible_level=1.0)
    with pytest.raises(ValidationError):
        ModelConfig(prior="other")


def test_config_json_round_trip(tmp_path):
    cfg = ModelConfig(j_max=4, n_iter=100, burn_in=10, rng_seed=7)
    path = tmp_path / "cfg.json"
    import json

    path.write_text(json.dumps(cfg.to_dict()))
    assert ModelConfig.from_json(path) == cfg
    path.write_text(json.dumps({"bogus": 1}))
    with pytest.raises(ValidationError, match="bogus"):
        ModelConfig.from_json(path)


def test_kept_draw_count():
    cfg = ModelConfig(n_iter=10, burn_in=5, thin=1)
    assert cfg.n_kept == 5
    assert ModelConfig(n_iter=10, burn_in=5, thin=2).n_kept == 2
