"""M4CK container: bitwise round-trips and model save/load."""

import numpy as np
import pytest

from motion4d.nn import Linear, Module, checkpoint
from motion4d.nn.tensor import Tensor


class TinyModel(Module):
    def __init__(self, rng):
        self.fc1 = Linear(4, 8, rng)
        self.fc2 = Linear(8, 2, rng)
        self.token = Tensor(rng.normal(size=(3, 4)).astype(np.float32), requires_grad=True)

    def forward(self, x):
        return self.fc2(self.fc1(x))


def test_array_roundtrip_bitwise(tmp_path):
    rng = np.random.default_rng(0)
    arrays = {
        "a.weight": rng.normal(size=(5, 7)).astype(np.float32),
        "b": rng.normal(size=(3,)).astype(np.float32),
        "scalar": np.array([42.5], dtype=np.float32),
    }
    path = tmp_path / "ck.m4ck"
    checkpoint.save_arrays(path, arrays)
    loaded = checkpoint.load_arrays(path)
    assert set(loaded) == set(arrays)
    for k in arrays:
        assert loaded[k].dtype == np.float32
        assert np.array_equal(loaded[k].view(np.uint32), arrays[k].view(np.uint32))


def test_magic_and_layout(tmp_path):
    path = tmp_path / "ck.m4ck"
    checkpoint.save_arrays(path, {"x": np.zeros((2, 2), dtype=np.float32)})
    blob = path.read_bytes()
    assert blob[:4] == b"M4CK"
    assert int.from_bytes(blob[4:8], "little") == 1
    assert int.from_bytes(blob[8:12], "little") == 1  # name length
    assert blob[12:13] == b"x"


def test_bad_magic_rejected(tmp_path):
    path = tmp_path / "junk.bin"
    path.write_bytes(b"NOPE" + b"\x00" * 16)
    with pytest.raises(checkpoint.CheckpointError):
        checkpoint.load_arrays(path)


def test_model_roundtrip_reproduces_forward_bitwise(tmp_path):
    rng = np.random.default_rng(1)
    model = TinyModel(rng)
    x = Tensor(rng.normal(size=(6, 4)).astype(np.float32))
    before = model(x).data.copy()

    path = tmp_path / "model.m4ck"
    checkpoint.save_model(path, model, extra={"opt.step": np.array([3.0], dtype=np.float32)})

    model2 = TinyModel(np.random.default_rng(99))
    leftover = checkpoint.load_model(path, model2)
    after = model2(x).data
    assert np.array_equal(before, after)
    assert leftover == {"opt.step": pytest.approx(np.array([3.0]))} or "opt.step" in leftover


def test_shape_mismatch_diagnosed(tmp_path):
    rng = np.random.default_rng(2)
    model = TinyModel(rng)
    path = tmp_path / "model.m4ck"
    checkpoint.save_model(path, model)

    class OtherModel(Module):
        def __init__(self):
            self.fc1 = Linear(5, 8, np.random.default_rng(0))
            self.fc2 = Linear(8, 2, np.random.default_rng(0))
            self.token = Tensor(np.zeros((3, 4), dtype=np.float32), requires_grad=True)

    with pytest.raises(checkpoint.CheckpointError, match="shape mismatch"):
        checkpoint.load_model(path, OtherModel())
