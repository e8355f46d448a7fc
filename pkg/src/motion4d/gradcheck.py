"""Full-pipeline gradient verification.

Builds the gradcheck-sized model in float64, runs one forward/backward of
the training loss, then checks every parameter tensor against central finite
differences: a random directional derivative over the whole tensor plus a
sample of individual entries. Relative error is normalized per tensor (the
larger of the analytic/numeric magnitudes), so near-zero entries do not
manufacture false alarms.
"""

from __future__ import annotations

import numpy as np

from .dataset.primitives import creature
from .geometry import normalize_to_cube, sample_surface
from .model import ModelConfig, build_model
from .training.loss import mse_loss

ENTRIES_PER_TENSOR = 2
FLOOR = 1e-8


def _build_problem(seed: int):
    cfg = ModelConfig.gradcheck_profile()  # C=32, K=4, L=2, N=M=32, P=16
    model = build_model(cfg, seed=seed, dtype=np.float64)
    rng = np.random.default_rng(np.random.SeedSequence((seed, 1234)))
    mesh, _ = normalize_to_cube(creature())
    enc = sample_surface(mesh, cfg.encoder_points, seed=seed + 1).attributes9()
    qry = sample_surface(mesh, cfg.decoder_points, seed=seed + 2).attributes9()
    frames = rng.uniform(0.0, 1.0, size=(3, cfg.image_size, cfg.image_size, 3))
    target = rng.uniform(-0.5, 0.5, size=(3, cfg.decoder_points, 3))

    def loss_fn():
        pred = model.forward_tracks(enc, frames, qry)
        return mse_loss(pred, target)

    return model, loss_fn


def full_pipeline_gradcheck(seed: int = 0, h: float = 1e-3, order: int = 2,
                            negative_control: bool = False) -> tuple[float, str]:
    """Returns (worst relative error, offending parameter name).

    order=2 is the plain central stencil; order=4 (the tight mode) uses the
    five-point formula, pushing truncation well below 1e-5.
    """
    if order not in (2, 4):
        raise ValueError("order must be 2 or 4")
    model, loss_fn = _build_problem(seed)
    loss = loss_fn()
    model.zero_grad()
    loss.backward(free=True)

    params = list(model.named_parameters())
    grads = {name: p.grad.copy() for name, p in params}
    if negative_control:
        name0 = params[0][0]
        grads[name0] = grads[name0] * 1.5 + 0.37

    rng = np.random.default_rng(np.random.SeedSequence((seed, 4321)))
    worst = 0.0
    worst_name = "none"

    def eval_loss() -> float:
        return float(loss_fn().data)

    def fd_along(add_delta) -> float:
        """Finite-difference derivative along a perturbation callable."""
        if order == 2:
            add_delta(h)
            up = eval_loss()
            add_delta(-2.0 * h)
            down = eval_loss()
            add_delta(h)
            return (up - down) / (2.0 * h)
        add_delta(h)
        f1 = eval_loss()
        add_delta(h)
        f2 = eval_loss()
        add_delta(-3.0 * h)
        fm1 = eval_loss()
        add_delta(-h)
        fm2 = eval_loss()
        add_delta(2.0 * h)
        return (-f2 + 8.0 * f1 - 8.0 * fm1 + fm2) / (12.0 * h)

    for name, p in params:
        g = grads[name]
        scale = max(float(np.abs(g).max(initial=0.0)), FLOOR)

        # directional derivative over the whole tensor
        d = rng.normal(size=p.data.shape)
        d /= max(np.linalg.norm(d), 1e-30)

        def move_dir(step, _p=p, _d=d):
            _p.data += step * _d

        fd = fd_along(move_dir)
        an = float((g * d).sum())
        err = abs(fd - an) / max(abs(fd), abs(an), FLOOR)
        if err > worst:
            worst, worst_name = err, f"{name} (directional)"

        # sampled entries
        flat = p.data.reshape(-1)
        gflat = g.reshape(-1)
        for idx in rng.choice(flat.size, size=min(ENTRIES_PER_TENSOR, flat.size), replace=False):
            def move_entry(step, _flat=flat, _idx=idx):
                _flat[_idx] += step

            fd = fd_along(move_entry)
            err = abs(fd - gflat[idx]) / scale
            if err > worst:
                worst, worst_name = err, f"{name}[{idx}]"
    return worst, worst_name
