import json

import numpy as np
import pytest

from clearn.data import gen_sine
from clearn.errors import InvalidInputError
from clearn.kernels import KernelSpec
from clearn.modelfile import SCHEMA_VERSION, load_model, model_from_dict, model_to_dict, save_model
from clearn.solver import TrainConfig, fit_kernel, fit_linear


@pytest.fixture(scope="module")
def data():
    return gen_sine(40, seed=2)


def test_kernel_round_trip_bitwise(data, tmp_path):
    m = fit_kernel(data.X, data.y, KernelSpec("rbf", 0.8), TrainConfig(gamma=0.01, omega=0.3))
    save_model(m, tmp_path / "k.json", calibration={"crho": 1.0})
    back, raw = load_model(tmp_path / "k.json")
    Xn = gen_sine(25, seed=9).X
    assert np.array_equal(back.decision_function(Xn), m.decision_function(Xn))
    assert back.config == m.config and back.info.converged == m.info.converged
    assert raw["calibration"] == {"crho": 1.0} and raw["schema_version"] == SCHEMA_VERSION


def test_linear_round_trip_bitwise(data, tmp_path):
    m = fit_linear(data.X, data.y, TrainConfig(gamma=0.01, omega=0.9))
    save_model(m, tmp_path / "l.json")
    back, raw = load_model(tmp_path / "l.json")
    assert raw["kind"] == "linear" and "support_inputs" not in raw
    assert np.array_equal(back.decision_function(data.X), m.decision_function(data.X))


def test_rejects_bad_files(tmp_path, data):
    m = fit_linear(data.X, data.y, TrainConfig(gamma=0.1))
    d = model_to_dict(m)
    with pytest.raises(InvalidInputError):
        model_from_dict({**d, "schema_version": 99})
    with pytest.raises(InvalidInputError):
        model_from_dict({**d, "kind": "forest"})
    with pytest.raises(InvalidInputError):
        model_from_dict({"kind": "linear"})
    p = tmp_path / "bad.json"
    p.write_text("{")
    with pytest.raises(InvalidInputError):
        load_model(p)
    p.write_text(json.dumps({**d, "coefficients": "abc"}))
    with pytest.raises(InvalidInputError):
        load_model(p)
