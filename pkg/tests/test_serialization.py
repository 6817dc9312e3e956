import numpy as np
import pytest

from mcca import CCA, MCCA, MPCA, PCA
from mcca.exceptions import FormatError
from mcca.serialization import (load_model, load_tensor, method_name, model_from_bytes, model_to_bytes, save_model,
                                save_tensor, tensor_from_bytes, tensor_to_bytes)


@pytest.mark.parametrize("shape", [(3,), (2, 3), (4, 1, 2), (2, 2, 2, 2)])
def test_tensor_round_trip(rng, shape, tmp_path):
    t = rng.standard_normal(shape)
    t.flat[0] = -0.0
    assert tensor_from_bytes(tensor_to_bytes(t)).tobytes() == t.tobytes()
    save_tensor(tmp_path / "t.mctn", t)
    assert load_tensor(tmp_path / "t.mctn").tobytes() == t.tobytes()


def test_tensor_layout():
    t = np.array([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]])
    buf = tensor_to_bytes(t)
    assert buf[:5] == b"MCTN1"
    assert buf[5:17] == b"\x02\x00\x00\x00\x02\x00\x00\x00\x03\x00\x00\x00"
    # first mode runs fastest
    np.testing.assert_array_equal(np.frombuffer(buf[17:], "<f8"), [1, 4, 2, 5, 3, 6])


def test_tensor_errors():
    buf = tensor_to_bytes(np.ones((2, 2)))
    for bad in (buf[:-1], buf + b"\x00", b"XXXXX" + buf[5:], buf[:7]):
        with pytest.raises(FormatError):
            tensor_from_bytes(bad)


def fitted_models(rng):
    x = rng.standard_normal((24, 4, 3))
    y = np.repeat([0, 1, 2], 8)
    return [("mcca", MCCA(ranks=(2, 2)).fit(x, y)), ("mpca", MPCA(ranks=(3, 1)).fit(x)),
            ("cca", CCA(n_components=3).fit(x, y)), ("pca", PCA(n_components=5).fit(x))], x


def test_model_round_trip(rng, tmp_path):
    models, x = fitted_models(rng)
    for name, model in models:
        buf = model_to_bytes(model)
        assert buf[:5] == b"MCCA1"
        back = model_from_bytes(buf)
        assert method_name(back) == name
        assert model_to_bytes(back) == buf
        orig = model.components_ if isinstance(model.components_, list) else [model.components_]
        new = back.components_ if isinstance(back.components_, list) else [back.components_]
        for a, b in zip(orig, new):
            assert a.tobytes() == b.tobytes()
        np.testing.assert_array_equal(back.transform(x), model.transform(x))
        save_model(tmp_path / f"{name}.mcca", model)
        assert model_to_bytes(load_model(tmp_path / f"{name}.mcca")) == buf


def test_model_errors(rng):
    models, _ = fitted_models(rng)
    buf = model_to_bytes(models[0][1])
    with pytest.raises(FormatError):
        model_from_bytes(buf[:-3])
    with pytest.raises(FormatError):
        model_from_bytes(buf + b"\x00")
    with pytest.raises(FormatError):
        model_from_bytes(b"MCTN1" + buf[5:])
    with pytest.raises(FormatError):
        model_from_bytes(buf[:5] + b"\x09" + buf[6:])
    with pytest.raises(TypeError):
        model_to_bytes(object())
