"""Encoding, parity checking and erasure decoding of coupled-layer stripes.

A stripe is held as a ``DataCube`` whose ``data`` array has shape
``(n, alpha0, *batch)``: node (canonical index), plane index, then any number
of trailing axes that are processed in lockstep (one entry per stripe).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping

import numpy as np

from .code import CodeParams, NodeId, plane_scores
from .errors import IncompleteInput, InvalidParameters, SingularMatrix, TooManyErasures
from .field import inverse


@dataclass
class DataCube:
    params: CodeParams
    data: np.ndarray

    @classmethod
    def zeros(cls, params: CodeParams, batch: tuple = ()) -> "DataCube":
        return cls(params, params.field.zeros((params.n, params.alpha0) + tuple(batch)))

    @property
    def batch_shape(self) -> tuple:
        return self.data.shape[2:]

    def node(self, node: NodeId) -> np.ndarray:
        return self.data[self.params.node_index(node)]

    def content(self, node: NodeId) -> "NodeContent":
        return NodeContent(node, self.node(node).copy())

    def copy(self) -> "DataCube":
        return DataCube(self.params, self.data.copy())

    def __eq__(self, other):
        return (
            isinstance(other, DataCube)
            and self.params == other.params
            and np.array_equal(self.data, other.data)
        )


@dataclass
class NodeContent:
    node: NodeId
    symbols: np.ndarray  # (alpha0, *batch)

    def __eq__(self, other):
        return (
            isinstance(other, NodeContent)
            and self.node == other.node
            and np.array_equal(self.symbols, other.symbols)
        )


@dataclass(frozen=True)
class Violation:
    kind: str  # "plane" or "nodal"
    ell: int
    plane: tuple | None = None
    node: NodeId | None = None
    group: int | None = None


def _expand(coef: np.ndarray, ndim: int) -> np.ndarray:
    """Append singleton axes so a per-plane coefficient broadcasts over batch axes."""
    return coef.reshape(coef.shape + (1,) * (ndim - coef.ndim))


# -- nodal checks -----------------------------------------------------------


def nodal_matrix(params: CodeParams, node: NodeId) -> np.ndarray:
    """q x 2q coefficients of one group's nodal checks; column w is plane ``z_y = w``."""
    f = params.field
    out = np.zeros((params.q, params.width), dtype=np.int64)
    for w in range(params.width):
        th = params.theta_of(NodeId(w, node.y))
        c = 1 if w == node.x else params.u
        for ell in range(params.q):
            out[ell, w] = f.mul(c, f.pow(th, ell))
    return out


@lru_cache(maxsize=None)
def _completion_matrix(params: CodeParams, node: NodeId) -> np.ndarray:
    N = nodal_matrix(params, node)
    q = params.q
    try:
        dep_inv = inverse(params.field, N[:, q:])
    except SingularMatrix:
        raise SingularMatrix(f"nodal system of node {node} is singular") from None
    # char 2: D a_dep = F a_free
    return params.field.dot(dep_inv, N[:, :q]).astype(np.int64)


def complete_node(node: NodeId, free_symbols, params: CodeParams) -> NodeContent:
    """Fill in the q dependent symbols of every group from the alpha free ones."""
    free = np.asarray(free_symbols)
    if free.shape[0] != params.alpha:
        raise IncompleteInput(f"expected {params.alpha} free symbols, got {free.shape[0]}")
    f, q = params.field, params.q
    groups = params.groups(node.y)
    batch = free.shape[1:]
    free_g = free.reshape((params.beta, q) + batch).astype(f.dtype)
    out = f.zeros((params.alpha0,) + batch)
    out[groups[:, :q]] = free_g
    M = _completion_matrix(params, node)
    dep = f.dot(M, np.moveaxis(free_g, 1, 0))  # (q, beta, *batch)
    out[groups[:, q:]] = np.moveaxis(dep, 0, 1)
    return NodeContent(node, out)


def extract_free(content: NodeContent, params: CodeParams) -> np.ndarray:
    groups = params.groups(content.node.y)
    sel = content.symbols[groups[:, : params.q]]
    return sel.reshape((params.alpha,) + sel.shape[2:])


# -- parity checks -----------------------------------------------------------


def transformed(params: CodeParams, data: np.ndarray) -> np.ndarray:
    """B-symbols for the whole cube: B = A + u A^c, or A when self-paired."""
    f = params.field
    cn, cp = params.companion_node_table, params.companion_plane_table
    coef = np.where(params.self_paired, 0, params.u)
    Ac = data[cn, cp]
    return data ^ f.vmul(_expand(coef, data.ndim), Ac)


def is_codeword(cube: DataCube, params: CodeParams | None = None) -> list[Violation]:
    params = params or cube.params
    f = params.field
    data = cube.data
    out: list[Violation] = []

    B = transformed(params, data)
    residual = f.dot(params.theta_powers.T, B)  # (2q, alpha0, *batch)
    bad = residual.reshape(residual.shape[:2] + (-1,)).any(axis=2)
    for ell, z in zip(*np.nonzero(bad)):
        out.append(Violation("plane", int(ell), plane=params.plane_coords(int(z))))

    for j, node in enumerate(params.nodes):
        groups = params.groups(node.y)
        sym = np.moveaxis(data[j][groups], 1, 0)  # (2q, beta, *batch)
        res = f.dot(nodal_matrix(params, node), sym)
        bad = res.reshape(res.shape[:2] + (-1,)).any(axis=2)
        for ell, g in zip(*np.nonzero(bad)):
            out.append(Violation("nodal", int(ell), node=node, group=int(g)))
    return out


# -- erasure decoding --------------------------------------------------------


def pad_erasures(params: CodeParams, erased: Iterable[NodeId]) -> list[NodeId]:
    erased = set(erased)
    for node in erased:
        params.check_node(node)
    if len(erased) > params.r:
        raise TooManyErasures(f"{len(erased)} erasures exceed the {params.r} the code corrects")
    for node in params.nodes:
        if len(erased) == params.r:
            break
        erased.add(node)
    return sorted(erased)


@lru_cache(maxsize=None)
def _plane_system_inverse(params: CodeParams, erased: tuple) -> np.ndarray:
    idx = [params.node_index(e) for e in erased]
    V = params.theta_powers[idx].T  # V[l, i] = theta_i^l
    return inverse(params.field, V).astype(np.int64)


def decode_erasures(cube: DataCube, erased: Iterable[NodeId], params: CodeParams | None = None) -> DataCube:
    """Recover the erased nodes of ``cube`` plane by plane in order of intersection score.

    Entries of erased nodes in ``cube`` are ignored. The returned cube is a
    new object; the input is not modified.
    """
    params = params or cube.params
    f, u = params.field, params.u
    if cube.data.shape[:2] != (params.n, params.alpha0):
        raise IncompleteInput(f"cube shape {cube.data.shape} does not match {(params.n, params.alpha0)}")
    erased = set(erased)
    if not erased:
        return cube.copy()
    E = pad_erasures(params, erased)
    e_idx = np.array([params.node_index(e) for e in E])
    is_erased = np.zeros(params.n, dtype=bool)
    is_erased[e_idx] = True
    slot = np.full(params.n, -1)
    slot[e_idx] = np.arange(len(E))
    known = np.nonzero(~is_erased)[0]

    Vinv = _plane_system_inverse(params, tuple(E))
    scores = plane_scores(params, E)
    cn_tab, cp_tab, self_tab = params.companion_node_table, params.companion_plane_table, params.self_paired
    scale_pair = f.inv(1 ^ f.mul(u, u))

    data = cube.data.copy()
    data[e_idx] = 0
    batch = data.shape[2:]
    solved_B = f.zeros((len(E), params.alpha0) + batch)

    for s in range(int(scores.max()) + 1):
        P = np.nonzero(scores == s)[0]
        if P.size == 0:
            continue
        kappa = f.zeros((params.r, P.size) + batch)
        for j in known:
            cn, cp, sp = cn_tab[j, P], cp_tab[j, P], self_tab[j, P]
            reads = is_erased[cn]
            # companions held by erased nodes come from planes finished in earlier stages
            assert np.all(scores[cp[reads]] < s), "companion read from an unfinished plane"
            Bj = data[j, P] ^ f.vmul(_expand(np.where(sp, 0, u), data.ndim - 1), data[cn, cp])
            for ell in range(params.r):
                kappa[ell] ^= f.scale(int(params.theta_powers[j, ell]), Bj)
        B = f.dot(Vinv, kappa)
        solved_B[:, P] = B

        for i, e in enumerate(e_idx):
            cn, cp, sp = cn_tab[e, P], cp_tab[e, P], self_tab[e, P]
            pair_erased = is_erased[cn] & ~sp
            assert np.all(scores[cp[pair_erased]] == s)
            # E1: companion known
            a1 = B[i] ^ f.vmul(_expand(np.full(P.size, u), data.ndim - 1), data[cn, cp])
            # E2: companion B solved in this stage
            Bc = solved_B[np.where(pair_erased, slot[cn], 0), cp]
            a2 = f.scale(scale_pair, B[i] ^ f.scale(u, Bc))
            A = np.where(_expand(sp, data.ndim - 1), B[i], np.where(_expand(pair_erased, data.ndim - 1), a2, a1))
            data[e, P] = A
    return DataCube(params, data)


def decode_nodes(params: CodeParams, contents: Mapping[NodeId, np.ndarray]) -> DataCube:
    """Assemble a cube from completed node contents and decode the missing nodes."""
    present = {node: np.asarray(sym) for node, sym in contents.items()}
    missing = [node for node in params.nodes if node not in present]
    if len(missing) > params.r:
        raise TooManyErasures(f"only {len(present)} of the {params.k} needed nodes are available")
    if not present:
        raise IncompleteInput("no node contents given")
    batch = next(iter(present.values())).shape[1:]
    cube = DataCube.zeros(params, batch)
    for node, sym in present.items():
        if sym.shape != (params.alpha0,) + batch:
            raise IncompleteInput(f"node {node} has shape {sym.shape}")
        cube.data[params.node_index(node)] = sym
    return decode_erasures(cube, missing, params)


# -- message level -----------------------------------------------------------


def encode(msg, params: CodeParams) -> DataCube:
    msg = np.asarray(msg)
    if msg.shape[0] != params.k * params.alpha:
        raise InvalidParameters(f"message must hold k*alpha = {params.k * params.alpha} symbols, got {msg.shape[0]}")
    if msg.size and int(msg.max()) >= params.field.order:
        raise InvalidParameters("message symbol outside the field")
    cube = DataCube.zeros(params, msg.shape[1:])
    for j, node in enumerate(params.systematic_nodes):
        part = msg[j * params.alpha : (j + 1) * params.alpha]
        cube.data[j] = complete_node(node, part, params).symbols
    return decode_erasures(cube, params.column(params.t), params)


def decode_message(cube: DataCube, params: CodeParams | None = None) -> np.ndarray:
    params = params or cube.params
    parts = [extract_free(cube.content(node), params) for node in params.systematic_nodes]
    return np.concatenate(parts, axis=0)


# -- shortening and puncturing -----------------------------------------------


@dataclass(frozen=True)
class DerivedCode:
    """A shortened or punctured view of a base code.

    Shortened: the first ``delta`` systematic nodes hold zeros and are never
    stored. Punctured: the last ``delta`` nodes of column t are never stored
    and count as permanently erased (and aloof during repair).
    """

    base: CodeParams
    kind: str  # "base", "shortened" or "punctured"
    delta: int
    dropped: tuple

    @property
    def n(self):
        return self.base.n - self.delta

    @property
    def k(self):
        return self.base.k - (self.delta if self.kind == "shortened" else 0)

    @property
    def d(self):
        return self.base.d - (self.delta if self.kind == "shortened" else 0)

    @property
    def alpha(self):
        return self.base.alpha

    @property
    def beta(self):
        return self.base.beta

    @property
    def stored_nodes(self) -> list[NodeId]:
        return [node for node in self.base.nodes if node not in self.dropped]

    def as_row(self) -> tuple:
        return (self.n, self.k, self.d, self.alpha)

    def encode(self, msg) -> DataCube:
        msg = np.asarray(msg)
        if self.kind == "shortened":
            pad = self.base.field.zeros((self.delta * self.alpha,) + msg.shape[1:])
            msg = np.concatenate([pad, msg], axis=0)
        return encode(msg, self.base)

    def decode(self, contents: Mapping[NodeId, np.ndarray]) -> np.ndarray:
        contents = {node: sym for node, sym in contents.items() if node not in self.dropped}
        if self.kind == "shortened" and contents:
            sample = next(iter(contents.values()))
            for node in self.dropped:
                contents[node] = np.zeros_like(sample)
        msg = decode_message(decode_nodes(self.base, contents))
        if self.kind == "shortened":
            msg = msg[self.delta * self.alpha :]
        return msg

    def repair(self, cube: DataCube, failed: NodeId, aloof: Iterable[NodeId]):
        """Repair ``failed`` from a base-code cube; ``aloof`` excludes dropped nodes.

        Returns the repair result; only the stored helpers are charged for
        download (dropped shortened nodes are known zeros).
        """
        from .repair import helper_extract, plan_repair, repair_with_accounting

        if failed in self.dropped:
            raise InvalidParameters(f"node {failed} is not stored in this code")
        aloof = set(aloof)
        if self.kind == "punctured":
            aloof |= set(self.dropped)
        plan = plan_repair(self.base, failed, aloof)
        bundles = {}
        for h in plan.helpers:
            if h in self.dropped:
                bundles[h] = self.base.field.zeros((self.beta,) + cube.batch_shape)
            else:
                bundles[h] = helper_extract(cube.content(h), plan)
        result = repair_with_accounting(plan, bundles, self.base)
        result.downloaded -= sum(self.beta for h in plan.helpers if h in self.dropped)
        return result


def shorten_profile(params: CodeParams, delta_s: int) -> DerivedCode:
    if not 0 <= delta_s <= params.k - 1:
        raise InvalidParameters(f"shortening needs 0 <= delta_s <= {params.k - 1}")
    if delta_s == 0:
        return DerivedCode(params, "base", 0, ())
    return DerivedCode(params, "shortened", delta_s, tuple(params.systematic_nodes[:delta_s]))


def puncture_profile(params: CodeParams, delta_p: int) -> DerivedCode:
    if not 0 <= delta_p <= params.n - params.d - 1:
        raise InvalidParameters(f"puncturing needs 0 <= delta_p <= {params.n - params.d - 1}")
    if delta_p == 0:
        return DerivedCode(params, "base", 0, ())
    col = params.column(params.t)
    return DerivedCode(params, "punctured", delta_p, tuple(col[len(col) - delta_p :]))
