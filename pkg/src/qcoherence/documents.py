"""JSON documents for states, observables and channels.

A matrix is stored as ``{"re": [[...]], "im": [[...]]}``; entry ``(i, j)`` is
``re[i][j] + 1j * im[i][j]``. States and observables add ``"dim"``, channels
add ``"in_dim"``, ``"out_dim"`` and a ``"kraus"`` list of such matrices.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .channels import KrausChannel, Observable
from .errors import InvalidSpec
from .states import STATE_TOL, DensityState


def matrix_to_doc(m) -> dict:
    m = np.asarray(m, dtype=complex)
    return {"re": m.real.tolist(), "im": m.imag.tolist()}


def matrix_from_doc(doc, shape=None) -> np.ndarray:
    try:
        re = np.asarray(doc["re"], dtype=float)
        im = np.asarray(doc.get("im", np.zeros_like(re)), dtype=float)
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise InvalidSpec(f"malformed matrix document: {exc}") from None
    if re.ndim != 2 or re.shape != im.shape:
        raise InvalidSpec(f"re/im must be matching 2-D arrays, got {re.shape} and {im.shape}")
    if shape is not None and re.shape != tuple(shape):
        raise InvalidSpec(f"matrix shape {re.shape} does not match declared {tuple(shape)}")
    return re + 1j * im


def _dim(doc, key="dim") -> int:
    try:
        d = doc[key]
    except (KeyError, TypeError):
        raise InvalidSpec(f"document lacks integer field {key!r}") from None
    if not isinstance(d, int) or isinstance(d, bool) or d < 1:
        raise InvalidSpec(f"field {key!r} must be a positive integer, got {d!r}")
    return d


def state_to_doc(rho: DensityState) -> dict:
    return {"dim": rho.dim, **matrix_to_doc(rho.mat)}


def state_from_doc(doc, tol: float = STATE_TOL) -> DensityState:
    d = _dim(doc)
    return DensityState(matrix_from_doc(doc, (d, d)), tol)


def observable_to_doc(H: Observable) -> dict:
    return {"dim": H.dim, **matrix_to_doc(H.mat)}


def observable_from_doc(doc) -> Observable:
    d = _dim(doc)
    return Observable(matrix_from_doc(doc, (d, d)))


def channel_to_doc(ch: KrausChannel) -> dict:
    return {"in_dim": ch.in_dim, "out_dim": ch.out_dim, "kraus": [matrix_to_doc(k) for k in ch.kraus]}


def channel_from_doc(doc) -> KrausChannel:
    n_in, n_out = _dim(doc, "in_dim"), _dim(doc, "out_dim")
    ops = doc.get("kraus") if isinstance(doc, dict) else None
    if not isinstance(ops, list) or not ops:
        raise InvalidSpec("channel document needs a nonempty 'kraus' list")
    return KrausChannel([matrix_from_doc(k, (n_out, n_in)) for k in ops])


def load_json(path) -> object:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InvalidSpec(f"cannot read {path}: {exc}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidSpec(f"{path} is not valid JSON: {exc}") from None


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False)
