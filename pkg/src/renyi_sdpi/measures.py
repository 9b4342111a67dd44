"""Finite probability measures and Markov kernels.

Both types are immutable wrappers around read-only numpy arrays. Support is
always computed with an exact comparison against zero: inputs meant to have
zeros must carry literal zeros.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    NegativeWeight,
    NotNormalized,
    ParameterOutOfRange,
    ParseError,
    ZeroMassEvent,
    ZeroTotalMass,
)

NORM_TOL = 1e-12


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class ProbabilityMeasure:
    """Probability vector on ``{0, ..., n-1}``."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise DimensionMismatch("weights must be a non-empty 1-d vector")
        if not np.all(np.isfinite(w)):
            raise NotNormalized("weights must be finite")
        if np.any(w < 0):
            raise NegativeWeight(f"negative weight in {w.tolist()}")
        if abs(w.sum() - 1.0) > NORM_TOL:
            raise NotNormalized(f"weights sum to {w.sum()!r}")
        object.__setattr__(self, "weights", _frozen(w))

    @property
    def n(self) -> int:
        return self.weights.size

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.weights > 0)

    @property
    def has_full_support(self) -> bool:
        return bool(np.all(self.weights > 0))

    def __len__(self) -> int:
        return self.n

    def __eq__(self, other):
        if not isinstance(other, ProbabilityMeasure):
            return NotImplemented
        return np.array_equal(self.weights, other.weights)

    def __repr__(self):
        return f"ProbabilityMeasure({self.weights.tolist()})"

    def to_dict(self) -> dict:
        return {"weights": self.weights.tolist()}


@dataclass(frozen=True, eq=False)
class MarkovKernel:
    """Row-stochastic matrix, ``rows[x, y] = K(y|x)``."""

    rows: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.rows, dtype=float)
        if r.ndim != 2 or r.size == 0:
            raise DimensionMismatch("kernel must be a non-empty 2-d matrix")
        if not np.all(np.isfinite(r)):
            raise NotNormalized("kernel entries must be finite")
        if np.any(r < 0):
            raise NegativeWeight("kernel has a negative entry")
        bad = np.abs(r.sum(axis=1) - 1.0) > NORM_TOL
        if np.any(bad):
            raise NotNormalized(f"rows {np.flatnonzero(bad).tolist()} do not sum to 1")
        object.__setattr__(self, "rows", _frozen(r))

    @property
    def n_in(self) -> int:
        return self.rows.shape[0]

    @property
    def n_out(self) -> int:
        return self.rows.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows.shape

    def row(self, x: int) -> ProbabilityMeasure:
        return ProbabilityMeasure(self.rows[x])

    def row_support(self, x: int) -> np.ndarray:
        return np.flatnonzero(self.rows[x] > 0)

    def __eq__(self, other):
        if not isinstance(other, MarkovKernel):
            return NotImplemented
        return np.array_equal(self.rows, other.rows)

    def __repr__(self):
        return f"MarkovKernel({self.rows.tolist()})"

    def to_dict(self) -> dict:
        return {"rows": self.rows.tolist()}


def _renormalized(w: np.ndarray) -> np.ndarray:
    w = np.clip(w, 0.0, None)
    return w / w.sum()


def make_measure(weights: Sequence[float], renormalize: bool = False) -> ProbabilityMeasure:
    """Validate ``weights`` (optionally rescaling them) into a measure."""
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1 or w.size == 0:
        raise DimensionMismatch("weights must be a non-empty 1-d vector")
    if np.any(w < 0):
        raise NegativeWeight(f"negative weight in {w.tolist()}")
    total = w.sum()
    if total == 0:
        raise ZeroTotalMass("weights have zero total mass")
    if renormalize:
        w = w / total
    elif abs(total - 1.0) > NORM_TOL:
        raise NotNormalized(f"weights sum to {total!r}; pass renormalize=True to rescale")
    return ProbabilityMeasure(w)


def make_kernel(rows, renormalize: bool = False) -> MarkovKernel:
    r = np.asarray(rows, dtype=float)
    if r.ndim != 2:
        raise DimensionMismatch("kernel must be a 2-d matrix")
    if renormalize:
        if np.any(r < 0):
            raise NegativeWeight("kernel has a negative entry")
        s = r.sum(axis=1, keepdims=True)
        if np.any(s == 0):
            raise ZeroTotalMass("kernel row with zero mass")
        r = r / s
    return MarkovKernel(r)


def apply_kernel(mu: ProbabilityMeasure, K: MarkovKernel) -> ProbabilityMeasure:
    """Push ``mu`` through ``K``: ``(muK)(y) = sum_x K(y|x) mu(x)``."""
    if mu.n != K.n_in:
        raise DimensionMismatch(f"measure has {mu.n} points, kernel expects {K.n_in}")
    return ProbabilityMeasure(_renormalized(mu.weights @ K.rows))


def dual_kernel(mu: ProbabilityMeasure, K: MarkovKernel) -> MarkovKernel:
    """Backward channel ``K*_mu(x|y) = mu(x) K(y|x) / muK(y)``.

    Rows are emitted only for ``y`` in the support of ``muK``, in increasing
    order, i.e. row ``i`` of the result belongs to ``apply_kernel(mu, K).support[i]``.
    """
    if mu.n != K.n_in:
        raise DimensionMismatch(f"measure has {mu.n} points, kernel expects {K.n_in}")
    joint = mu.weights[:, None] * K.rows
    out = joint.sum(axis=0)
    keep = np.flatnonzero(out > 0)
    back = joint[:, keep].T / out[keep, None]
    return MarkovKernel(back / back.sum(axis=1, keepdims=True))


def restrict(mu: ProbabilityMeasure, A: Iterable[int]) -> ProbabilityMeasure:
    """Condition ``mu`` on the event ``A``."""
    idx = np.unique(np.fromiter(A, dtype=int))
    if idx.size and (idx.min() < 0 or idx.max() >= mu.n):
        raise DimensionMismatch(f"event {idx.tolist()} outside alphabet of size {mu.n}")
    w = np.zeros(mu.n)
    w[idx] = mu.weights[idx]
    mass = w.sum()
    if mass <= 0:
        raise ZeroMassEvent(f"event {idx.tolist()} has zero mass")
    return ProbabilityMeasure(w / mass)


def tensor(K1: MarkovKernel, K2: MarkovKernel) -> MarkovKernel:
    """Product channel with row-major index pairing ``(x1, x2) -> x1 * |X2| + x2``."""
    return MarkovKernel(np.kron(K1.rows, K2.rows))


# named channels

def bsc(eps: float) -> MarkovKernel:
    _check_unit("eps", eps)
    return MarkovKernel([[1 - eps, eps], [eps, 1 - eps]])


def z_channel(lam: float) -> MarkovKernel:
    _check_unit("lam", lam)
    return MarkovKernel([[1.0, 0.0], [1 - lam, lam]])


def identity(n: int) -> MarkovKernel:
    if n < 1:
        raise ParameterOutOfRange("identity needs n >= 1")
    return MarkovKernel(np.eye(n))


def rank_one(mu: ProbabilityMeasure | Sequence[float], n_in: int | None = None) -> MarkovKernel:
    """Kernel whose every row equals ``mu``; square unless ``n_in`` is given."""
    w = mu.weights if isinstance(mu, ProbabilityMeasure) else make_measure(mu).weights
    n_in = w.size if n_in is None else n_in
    return MarkovKernel(np.tile(w, (n_in, 1)))


def _check_unit(name, v):
    if not 0.0 <= v <= 1.0:
        raise ParameterOutOfRange(f"{name}={v} outside [0, 1]")


_NAMED = {"bsc": bsc, "z": z_channel, "zchannel": z_channel, "identity": identity, "id": identity}


def named_channel(spec: str) -> MarkovKernel:
    """Parse ``"bsc:0.1"``, ``"z:0.3"``, ``"identity:4"`` or ``"rankone:0.2,0.8"``."""
    name, _, arg = spec.partition(":")
    name = name.strip().lower().replace("_", "").replace("-", "")
    try:
        if name == "rankone":
            return rank_one([float(v) for v in arg.split(",")])
        if name in ("identity", "id"):
            return identity(int(arg))
        return _NAMED[name](float(arg))
    except KeyError:
        raise ParseError(f"unknown channel {spec!r}") from None
    except ValueError as exc:
        if isinstance(exc, ParameterOutOfRange):
            raise
        raise ParseError(f"bad channel parameter in {spec!r}") from exc


# serialization

def measure_from_json(data: dict | str) -> ProbabilityMeasure:
    obj = json.loads(data) if isinstance(data, str) else data
    try:
        return make_measure(obj["weights"])
    except (KeyError, TypeError) as exc:
        raise ParseError('measure JSON must look like {"weights": [...]}') from exc


def kernel_from_json(data: dict | str) -> MarkovKernel:
    obj = json.loads(data) if isinstance(data, str) else data
    try:
        return MarkovKernel(obj["rows"])
    except (KeyError, TypeError) as exc:
        raise ParseError('kernel JSON must look like {"rows": [[...], ...]}') from exc


def kernel_from_csv(text: str) -> MarkovKernel:
    rows = []
    for line in csv.reader(text.splitlines()):
        cells = [c.strip() for c in line if c.strip()]
        if not cells:
            continue
        try:
            rows.append([float(c) for c in cells])
        except ValueError as exc:
            raise ParseError(f"non-numeric cell in kernel CSV line {line!r}") from exc
    if not rows or len({len(r) for r in rows}) != 1:
        raise ParseError("kernel CSV must hold a rectangular matrix")
    return MarkovKernel(rows)


def load_measure(path: str | Path) -> ProbabilityMeasure:
    try:
        return measure_from_json(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc


def load_kernel(path: str | Path) -> MarkovKernel:
    """Load a kernel from JSON (``{"rows": ...}``) or CSV, chosen by suffix."""
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".csv":
        return kernel_from_csv(text)
    try:
        return kernel_from_json(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc
