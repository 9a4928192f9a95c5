"""Code parameters, coordinates and the coupling between paired symbols.

Nodes are ``(x, y)`` with ``x`` in ``0..2q-1`` and ``y`` in ``1..t``. A plane
is a vector ``z`` of ``t`` digits base ``2q``; its index reads ``z_1`` as the
most significant digit. Node ``(x, y)`` has canonical index ``(y-1)*2q + x``,
so the ``k`` systematic nodes (``y < t``) come first.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field as dc_field
from functools import cached_property, total_ordering
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidParameters
from .field import FieldContext, get_field


@total_ordering
@dataclass(frozen=True)
class NodeId:
    x: int
    y: int

    def __lt__(self, other: "NodeId"):
        # canonical order: by column, then row
        return (self.y, self.x) < (other.y, other.x)

    def __str__(self):
        return f"({self.x},{self.y})"


Plane = tuple  # digit vector (z_1, ..., z_t)


@dataclass(frozen=True)
class CodeParams:
    q: int
    t: int
    n: int
    k: int
    d: int
    r: int
    alpha0: int
    alpha: int
    beta: int
    field: FieldContext = dc_field(repr=False)
    u: int = 2
    theta: tuple = dc_field(default=(), repr=False)

    # -- node bookkeeping ----------------------------------------------------

    @property
    def width(self) -> int:
        """Number of rows per column, ``2q``."""
        return 2 * self.q

    @cached_property
    def nodes(self) -> list[NodeId]:
        return [NodeId(x, y) for y in range(1, self.t + 1) for x in range(self.width)]

    def node_index(self, node: NodeId) -> int:
        self.check_node(node)
        return (node.y - 1) * self.width + node.x

    def node_at(self, index: int) -> NodeId:
        return self.nodes[index]

    def check_node(self, node: NodeId) -> None:
        if not (0 <= node.x < self.width and 1 <= node.y <= self.t):
            raise InvalidParameters(f"node {node} outside the {self.width}x{self.t} grid")

    @property
    def systematic_nodes(self) -> list[NodeId]:
        return self.nodes[: self.k]

    def column(self, y: int) -> list[NodeId]:
        return [NodeId(x, y) for x in range(self.width)]

    def theta_of(self, node: NodeId) -> int:
        return self.theta[self.node_index(node)]

    @cached_property
    def theta_powers(self) -> np.ndarray:
        """``theta_powers[j, l]`` is theta of node j raised to ``l``, ``l < 2q``."""
        out = np.zeros((self.n, self.width), dtype=np.int64)
        for j, th in enumerate(self.theta):
            for ell in range(self.width):
                out[j, ell] = self.field.pow(th, ell)
        return out

    # -- planes --------------------------------------------------------------

    def plane_index(self, z: Sequence[int]) -> int:
        if len(z) != self.t or any(not 0 <= c < self.width for c in z):
            raise InvalidParameters(f"plane {tuple(z)} is not in Z_{self.width}^{self.t}")
        idx = 0
        for c in z:
            idx = idx * self.width + int(c)
        return idx

    def plane_coords(self, index: int) -> Plane:
        return tuple(int(c) for c in self.digits[index])

    @cached_property
    def digits(self) -> np.ndarray:
        """``digits[z, y-1]`` is ``z_y`` for plane index z."""
        idx = np.arange(self.alpha0)
        out = np.zeros((self.alpha0, self.t), dtype=np.int64)
        for i in range(self.t):
            out[:, i] = (idx // self.width ** (self.t - 1 - i)) % self.width
        return out

    @cached_property
    def companion_plane_table(self) -> np.ndarray:
        """``[j, z]``: index of plane z with coordinate y_j replaced by x_j."""
        out = np.zeros((self.n, self.alpha0), dtype=np.int64)
        planes = np.arange(self.alpha0)
        for j, node in enumerate(self.nodes):
            place = self.width ** (self.t - node.y)
            out[j] = planes + (node.x - self.digits[:, node.y - 1]) * place
        return out

    @cached_property
    def companion_node_table(self) -> np.ndarray:
        """``[j, z]``: canonical index of node ``(z_y, y)`` for node j = (x, y)."""
        out = np.zeros((self.n, self.alpha0), dtype=np.int64)
        for j, node in enumerate(self.nodes):
            out[j] = (node.y - 1) * self.width + self.digits[:, node.y - 1]
        return out

    @cached_property
    def self_paired(self) -> np.ndarray:
        """``[j, z]`` true when z_y == x for node j."""
        return self.companion_node_table == np.arange(self.n)[:, None]

    def groups(self, y: int) -> np.ndarray:
        """Planes grouped by coordinate y: row g lists the 2q planes of group g.

        Groups are ordered by their lowest plane index; within a row, column w
        holds the plane with ``z_y = w``.
        """
        return self._groups[y - 1]

    @cached_property
    def _groups(self) -> list[np.ndarray]:
        out = []
        for y in range(1, self.t + 1):
            place = self.width ** (self.t - y)
            base = np.nonzero(self.digits[:, y - 1] == 0)[0]
            out.append(base[:, None] + np.arange(self.width)[None, :] * place)
        return out

    # -- MSR bookkeeping -----------------------------------------------------

    @property
    def repair_bandwidth(self) -> int:
        return self.d * self.beta

    @property
    def naive_bandwidth(self) -> int:
        return self.k * self.alpha

    @property
    def rate(self) -> float:
        return self.k / self.n


def derive_params(q: int, t: int, m: int | None = None) -> CodeParams:
    if not isinstance(q, int) or not isinstance(t, int) or q < 2 or t < 2:
        raise InvalidParameters(f"need q >= 2 and t >= 2, got q={q}, t={t}")
    n = 2 * q * t
    if m is None:
        m = 8 if n <= 255 else 16
    ctx = get_field(m)
    if n >= ctx.order:
        raise InvalidParameters(f"n={n} needs more than {ctx.order - 1} distinct evaluation points")
    alpha0 = (2 * q) ** t
    theta = tuple(range(1, n + 1))
    u = 2
    params = CodeParams(
        q=q,
        t=t,
        n=n,
        k=2 * q * (t - 1),
        d=n - (q + 1),
        r=2 * q,
        alpha0=alpha0,
        alpha=alpha0 // 2,
        beta=(2 * q) ** (t - 1),
        field=ctx,
        u=u,
        theta=theta,
    )
    _validate(params)
    return params


def _validate(p: CodeParams) -> None:
    if len(set(p.theta)) != p.n or 0 in p.theta:
        raise InvalidParameters("evaluation points must be distinct and nonzero")
    if p.u in (0, 1) or p.field.mul(p.u, p.u) == 1:
        raise InvalidParameters("coupling coefficient must satisfy u != 0 and u^2 != 1")
    assert p.alpha == (p.d - p.k + 1) * p.beta
    assert p.alpha == p.q * p.beta and 2 * p.alpha == p.alpha0


# -- coordinate maps ---------------------------------------------------------


def companion_plane(z: Sequence[int], node: NodeId) -> Plane:
    """Replace coordinate ``node.y`` of z by ``node.x``."""
    z = tuple(z)
    return z[: node.y - 1] + (node.x,) + z[node.y :]


def companion_coords(node: NodeId, z: Sequence[int]) -> tuple[NodeId, Plane]:
    z = tuple(z)
    return NodeId(z[node.y - 1], node.y), companion_plane(z, node)


def pair_transform(a: int, ac: int, params: CodeParams) -> tuple[int, int]:
    f, u = params.field, params.u
    return a ^ f.mul(u, ac), f.mul(u, a) ^ ac


def inverse_pair_transform(b: int, bc: int, params: CodeParams) -> tuple[int, int]:
    f, u = params.field, params.u
    s = f.inv(1 ^ f.mul(u, u))
    return f.mul(s, b ^ f.mul(u, bc)), f.mul(s, f.mul(u, b) ^ bc)


def theta_entry(node: NodeId, ell: int, params: CodeParams) -> int:
    if not 0 <= ell < params.width:
        raise InvalidParameters(f"row index {ell} outside 0..{params.width - 1}")
    return params.field.pow(params.theta_of(node), ell)


def intersection_score(erased: Iterable[NodeId], z: Sequence[int]) -> int:
    erased = set(erased)
    return sum(1 for y, zy in enumerate(z, start=1) if NodeId(zy, y) in erased)


def plane_scores(params: CodeParams, erased: Iterable[NodeId]) -> np.ndarray:
    """Intersection score of every plane, indexed by plane index."""
    scores = np.zeros(params.alpha0, dtype=np.int64)
    hit = np.zeros((params.t, params.width), dtype=bool)
    for node in erased:
        hit[node.y - 1, node.x] = True
    for i in range(params.t):
        scores += hit[i][params.digits[:, i]]
    return scores


def hyperplane(params: CodeParams, x1: int, y1: int) -> np.ndarray:
    """Plane indices with ``z_{y1} = x1``, ascending."""
    return np.nonzero(params.digits[:, y1 - 1] == x1)[0]


def all_planes(params: CodeParams):
    return itertools.product(range(params.width), repeat=params.t)
