"""Problem data for the cheapest-hub problem.

An instance is an ordered list of ``k`` point sets in ``R^d``. Points are
numbered globally by concatenating the sets in order; that ordering is used
by the distance matrix, the lifted variables and the instance file format.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np


class InstanceError(ValueError):
    """Invalid instance data, optionally tagged with where it was found."""

    def __init__(self, message: str, location: str | None = None):
        self.location = location
        if location:
            message = f"{location}: {message}"
        super().__init__(message)


@dataclass(eq=False)
class Instance:
    """``k`` ordered point sets in ``R^d``.

    Attributes:
        d: embedding dimension.
        points: ``(N, d)`` array, sets stacked in order.
        sizes: number of points in each set.
        label: free-form description.
    """

    d: int
    points: np.ndarray
    sizes: tuple[int, ...]
    label: str = ""

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float)
        self.sizes = tuple(int(n) for n in self.sizes)
        if self.d < 1:
            raise InstanceError(f"dimension must be positive, got {self.d}", "d")
        if len(self.sizes) == 0:
            raise InstanceError("at least one point set is required", "sets")
        for j, n in enumerate(self.sizes):
            if n < 1:
                raise InstanceError("point sets must be nonempty", f"sets[{j}]")
        if self.points.ndim != 2 or self.points.shape != (sum(self.sizes), self.d):
            raise InstanceError(
                f"points array has shape {self.points.shape}, "
                f"expected ({sum(self.sizes)}, {self.d})",
                "points",
            )

    @classmethod
    def from_sets(cls, sets: Sequence[Sequence[Sequence[float]]], label: str = "", d: int | None = None) -> Instance:
        """Build an instance from nested per-set coordinate lists."""
        if len(sets) == 0:
            raise InstanceError("at least one point set is required", "sets")
        if d is None:
            try:
                d = len(sets[0][0])
            except (IndexError, TypeError):
                raise InstanceError("point sets must be nonempty", "sets[0]") from None
        rows = []
        for j, pts in enumerate(sets):
            if len(pts) == 0:
                raise InstanceError("point sets must be nonempty", f"sets[{j}]")
            for i, p in enumerate(pts):
                if len(p) != d:
                    raise InstanceError(f"point has {len(p)} coordinates, expected d={d}", f"sets[{j}][{i}]")
                rows.append([float(c) for c in p])
        return cls(d=d, points=np.array(rows).reshape(-1, d), sizes=tuple(len(s) for s in sets), label=label)

    @property
    def k(self) -> int:
        return len(self.sizes)

    @property
    def N(self) -> int:
        return int(sum(self.sizes))

    @property
    def offsets(self) -> np.ndarray:
        """Global index of the first point of each set (0-based)."""
        return np.concatenate([[0], np.cumsum(self.sizes)[:-1]]).astype(int)

    @property
    def sets(self) -> list[np.ndarray]:
        return [self.points[o:o + n] for o, n in zip(self.offsets, self.sizes)]

    def translated(self, shift) -> Instance:
        return Instance(self.d, self.points + np.asarray(shift, dtype=float), self.sizes, self.label)

    def __eq__(self, other):
        if not isinstance(other, Instance):
            return NotImplemented
        return (
            self.d == other.d
            and self.sizes == other.sizes
            and self.label == other.label
            and np.array_equal(self.points, other.points)
        )


@dataclass(frozen=True)
class Selection:
    """One chosen point per set, as 1-based local indices."""

    picks: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "picks", tuple(int(p) for p in self.picks))

    def validate(self, sizes: Sequence[int]) -> None:
        if len(self.picks) != len(sizes):
            raise InstanceError(f"selection has {len(self.picks)} picks for {len(sizes)} sets", "picks")
        for j, (p, n) in enumerate(zip(self.picks, sizes)):
            if not 1 <= p <= n:
                raise InstanceError(f"pick {p} out of range 1..{n}", f"picks[{j}]")

    def global_indices(self, sizes: Sequence[int]) -> np.ndarray:
        """0-based global point indices of the chosen points."""
        self.validate(sizes)
        offsets = np.concatenate([[0], np.cumsum(sizes)[:-1]]).astype(int)
        return offsets + np.asarray(self.picks, dtype=int) - 1

    def to_vector(self, sizes: Sequence[int]) -> np.ndarray:
        """Binary incidence vector ``x`` with ``Ax = e``."""
        x = np.zeros(int(sum(sizes)))
        x[self.global_indices(sizes)] = 1.0
        return x

    def __str__(self):
        return "(" + ",".join(map(str, self.picks)) + ")"


@dataclass(frozen=True)
class EDMData:
    """Squared-distance data derived from an instance.

    ``Dhat`` borders ``D`` with a zero row and column in position 0, the
    index of the homogenizing coordinate of the lifted variable.
    """

    D: np.ndarray
    Dhat: np.ndarray
    sizes: tuple[int, ...]
    point_index: tuple[tuple[int, int], ...] = field(repr=False)

    @property
    def k(self) -> int:
        return len(self.sizes)

    @property
    def N(self) -> int:
        return int(sum(self.sizes))


def build_edm(inst: Instance) -> EDMData:
    """Squared Euclidean distance matrix over the global point ordering."""
    P = inst.points
    diff = P[:, None, :] - P[None, :, :]
    D = np.einsum("ijk,ijk->ij", diff, diff)
    N = inst.N
    Dhat = np.zeros((N + 1, N + 1))
    Dhat[1:, 1:] = D
    index = tuple((j, i + 1) for j, n in enumerate(inst.sizes) for i in range(n))
    return EDMData(D=D, Dhat=Dhat, sizes=inst.sizes, point_index=index)


def objective_value(edm: EDMData, sel: Selection) -> float:
    """``x^T D x`` for the incidence vector of ``sel``."""
    idx = sel.global_indices(edm.sizes)
    return float(edm.D[np.ix_(idx, idx)].sum())


def wasserstein_value(p_star: float, k: int) -> float:
    """Sum of squared distances to the barycenter, ``p* / (2k)``."""
    return p_star / (2 * k)


def barycenter_cost(inst: Instance, sel: Selection) -> float:
    """Sum of squared distances of the chosen points to their barycenter."""
    Q = inst.points[sel.global_indices(inst.sizes)]
    return float(((Q - Q.mean(axis=0)) ** 2).sum())


def gen_random(k: int, n: int, d: int, vary_sizes: bool = False, seed: int = 0) -> Instance:
    """Random instance with coordinates uniform on the unit cube.

    With ``vary_sizes`` each set size is drawn uniformly from ``[n-2, n+2]``.
    """
    if min(k, n, d) < 1:
        raise ValueError("k, n and d must be positive")
    if vary_sizes and n < 3:
        raise ValueError("varying sizes need n >= 3")
    rng = np.random.default_rng(seed)
    if vary_sizes:
        sizes = tuple(int(s) for s in rng.integers(max(n - 2, 1), n + 2, size=k, endpoint=True))
    else:
        sizes = (n,) * k
    points = rng.uniform(0.0, 1.0, size=(sum(sizes), d))
    tag = "varying" if vary_sizes else "equal"
    return Instance(d, points, sizes, label=f"random k={k} n={n} d={d} {tag} seed={seed}")


def wheel_radius(k: int) -> float:
    theta = 2 * math.pi / k
    return math.sqrt((math.cos(theta) - 1) ** 2 + math.sin(theta) ** 2) / 4


def gen_wheel(k: int) -> Instance:
    """Wheel of wheels: ``k`` sets of ``k`` points in the plane.

    Set ``j`` is a copy of the centroid wheel scaled by a quarter of the
    adjacent-centroid chord and centered at centroid ``j``.
    """
    if k < 3:
        raise ValueError(f"wheel needs k >= 3, got {k}")
    theta = 2 * math.pi / k
    angles = theta * np.arange(k)
    C = np.column_stack([np.cos(angles), np.sin(angles)])
    ones = np.ones((k, 1))
    P = np.kron(C, ones) + wheel_radius(k) * np.kron(ones, C)
    return Instance(2, P, (k,) * k, label=f"wheel k={k}")


def wheel_fixture() -> Instance:
    """The printed 9-point odd-wheel configuration (k = n = 3)."""
    text = resources.files("whub").joinpath("data/wheel3.json").read_text()
    return instance_from_json(json.loads(text))


def instance_to_json(inst: Instance) -> dict:
    return {
        "label": inst.label,
        "d": inst.d,
        "sets": [[[float(c) for c in p] for p in s] for s in inst.sets],
    }


def instance_from_json(obj) -> Instance:
    if not isinstance(obj, dict):
        raise InstanceError("top level must be an object", "$")
    for key in ("d", "sets"):
        if key not in obj:
            raise InstanceError(f"missing key {key!r}", "$")
    d = obj["d"]
    if not isinstance(d, int) or isinstance(d, bool) or d < 1:
        raise InstanceError(f"d must be a positive integer, got {d!r}", "d")
    sets = obj["sets"]
    if not isinstance(sets, list) or not sets:
        raise InstanceError("sets must be a nonempty list", "sets")
    for j, s in enumerate(sets):
        if not isinstance(s, list) or not s:
            raise InstanceError("point set must be a nonempty list", f"sets[{j}]")
        for i, p in enumerate(s):
            if not isinstance(p, list):
                raise InstanceError("point must be a list of coordinates", f"sets[{j}][{i}]")
            for c in p:
                if isinstance(c, bool) or not isinstance(c, (int, float)):
                    raise InstanceError(f"non-numeric coordinate {c!r}", f"sets[{j}][{i}]")
    label = obj.get("label", "")
    if not isinstance(label, str):
        raise InstanceError("label must be a string", "label")
    return Instance.from_sets(sets, label=label, d=d)


def save_instance(inst: Instance, path) -> None:
    # json writes floats with repr(), which round-trips doubles exactly
    Path(path).write_text(json.dumps(instance_to_json(inst), indent=1) + "\n")


def load_instance(path) -> Instance:
    try:
        obj = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InstanceError(f"malformed JSON: {exc.msg}", f"line {exc.lineno} column {exc.colno}") from None
    return instance_from_json(obj)
