"""Single-node repair from d = n - q - 1 helpers, beta symbols each.

Every helper sends the symbols of its planes with ``z_{y1} = x1`` (the
hyperplane of the failed node). Each such plane contributes 2q plane
equations; the m nodal equations of the failed node that avoid the
aligned-aloof companions close the system. Planes are processed in order
of intersection score with E = {failed} + aloof; planes of score s > 1 reuse
the transformed symbols of unaligned aloof nodes solved at score s - 1.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Mapping

import numpy as np

from .code import CodeParams, NodeId, hyperplane, plane_scores
from .codec import NodeContent, nodal_matrix
from .errors import (
    IncompleteBundles,
    InvalidPlan,
    NotAHelper,
    PivotSingular,
    SingularMatrix,
    SingularRepairSystem,
)
from .field import inverse, row_reduce


@dataclass(frozen=True)
class RepairPlan:
    params: CodeParams = field(repr=False)
    failed: NodeId
    aloof: tuple
    helpers: tuple = field(repr=False)
    aligned_helpers: tuple = ()
    aligned_aloof: tuple = ()
    unaligned_aloof: tuple = ()

    @property
    def m(self) -> int:
        return len(self.unaligned_aloof)

    @property
    def erased(self) -> tuple:
        return (self.failed,) + self.aloof

    @property
    def unknown_nodes(self) -> tuple:
        """Column order of the combined system."""
        return (self.failed,) + self.aligned_helpers + self.aligned_aloof + self.unaligned_aloof


@dataclass
class HelperBundle:
    helper: NodeId
    symbols: np.ndarray  # (beta, *batch), hyperplane order


@dataclass
class RepairResult:
    content: NodeContent
    downloaded: int
    per_helper: dict
    stages: int


def plan_repair(params: CodeParams, failed: NodeId, aloof: Iterable[NodeId]) -> RepairPlan:
    params.check_node(failed)
    aloof = sorted(set(aloof))
    for node in aloof:
        params.check_node(node)
    if failed in aloof:
        raise InvalidPlan(f"failed node {failed} cannot also be aloof")
    if len(aloof) != params.q:
        raise InvalidPlan(f"need exactly q={params.q} aloof nodes, got {len(aloof)}")
    skip = set(aloof) | {failed}
    helpers = tuple(node for node in params.nodes if node not in skip)
    y1 = failed.y
    return RepairPlan(
        params=params,
        failed=failed,
        aloof=tuple(aloof),
        helpers=helpers,
        aligned_helpers=tuple(h for h in helpers if h.y == y1),
        aligned_aloof=tuple(a for a in aloof if a.y == y1),
        unaligned_aloof=tuple(a for a in aloof if a.y != y1),
    )


@dataclass(frozen=True)
class RepairSystem:
    matrix: np.ndarray  # (2q+m) x (2q+m)
    inverse: np.ndarray
    C1: np.ndarray  # m x q
    C2: np.ndarray  # (q-m) x q
    C3: np.ndarray  # m x m, Schur block on the unaligned-aloof unknowns


@lru_cache(maxsize=None)
def repair_system(plan: RepairPlan) -> RepairSystem:
    """Combined plane + reduced nodal system; identical for every plane of the hyperplane."""
    p, f, q, m = plan.params, plan.params.field, plan.params.q, plan.m
    cols = plan.unknown_nodes
    size = 2 * q + m
    V = p.theta_powers[[p.node_index(c) for c in cols]].T  # 2q x (2q+m)

    # failed-node nodal checks on [a1, u*a_ah^c, u*a_aa^c]; column w carries theta_w^l
    column_order = (plan.failed,) + plan.aligned_helpers + plan.aligned_aloof
    N = nodal_matrix(p, plan.failed)
    u_inv = f.inv(p.u)
    nod = np.zeros((q, 2 * q), dtype=np.int64)
    for c, node in enumerate(column_order):
        coef = N[:, node.x]
        nod[:, c] = coef if node == plan.failed else [f.mul(u_inv, int(v)) for v in coef]
    try:
        R = row_reduce(f, nod, range(q, 2 * q)).astype(np.int64)
    except PivotSingular:
        raise SingularRepairSystem(f"nodal pivots singular for {plan.failed}") from None

    G = np.zeros((size, size), dtype=np.int64)
    G[: 2 * q] = V
    G[2 * q :, : 2 * q] = R[:m]
    try:
        Ginv = inverse(f, G).astype(np.int64)
    except SingularMatrix:
        raise SingularRepairSystem(
            f"combined repair matrix singular for failed={plan.failed}, aloof={plan.aloof}"
        ) from None

    C3 = _schur_ua_block(f, G, q, m)
    return RepairSystem(G, Ginv, R[:m, :q], R[m:, :q], C3)


def _schur_ua_block(f, G, q, m):
    """Block left on the b_ua unknowns once the first 2q columns are eliminated."""
    if m == 0:
        return np.zeros((0, 0), dtype=np.int64)
    null = _left_null(f, G[:, : 2 * q])
    return f.dot(null, G[:, 2 * q :]).astype(np.int64)


def _left_null(f, M):
    """Basis (as rows) of {y : y M = 0}."""
    rows, cols = M.shape
    aug = np.concatenate([M, np.eye(rows, dtype=np.int64)], axis=1).astype(f.dtype)
    r = 0
    for col in range(cols):
        cand = np.nonzero(aug[r:, col])[0]
        if cand.size == 0:
            continue
        piv = r + int(cand[0])
        aug[[r, piv]] = aug[[piv, r]]
        aug[r] = f.scale(f.inv(int(aug[r, col])), aug[r])
        for i in range(rows):
            if i != r and aug[i, col]:
                aug[i] ^= f.scale(int(aug[i, col]), aug[r])
        r += 1
    return aug[r:, cols:].astype(np.int64)


def helper_extract(content: NodeContent, plan: RepairPlan) -> HelperBundle:
    if content.node not in plan.helpers:
        raise NotAHelper(f"{content.node} is not a helper for repairing {plan.failed}")
    H = hyperplane(plan.params, plan.failed.x, plan.failed.y)
    return HelperBundle(content.node, content.symbols[H])


def _bundle_array(bundle) -> np.ndarray:
    return bundle.symbols if isinstance(bundle, HelperBundle) else np.asarray(bundle)


def repair_with_accounting(
    plan: RepairPlan, bundles: Mapping[NodeId, object], params: CodeParams | None = None
) -> RepairResult:
    p = params or plan.params
    f, u, q, m = p.field, p.u, p.q, plan.m
    x1, y1 = plan.failed.x, plan.failed.y

    missing = [h for h in plan.helpers if h not in bundles]
    if missing:
        raise IncompleteBundles(f"no data from helpers {missing}")
    data = {h: _bundle_array(bundles[h]) for h in plan.helpers}
    batch = data[plan.helpers[0]].shape[1:]
    for h, arr in data.items():
        if arr.shape != (p.beta,) + batch:
            raise IncompleteBundles(f"helper {h} sent shape {arr.shape}, expected {(p.beta,) + batch}")

    system = repair_system(plan)
    H = hyperplane(p, x1, y1)
    pos = np.full(p.alpha0, -1)
    pos[H] = np.arange(p.beta)
    scores = plane_scores(p, plan.erased)
    ndim = 1 + len(batch)

    helper_idx = {h: i for i, h in enumerate(plan.helpers)}
    touched = np.zeros((len(plan.helpers), p.beta), dtype=bool)

    def read(h: NodeId, planes: np.ndarray) -> np.ndarray:
        where = pos[planes]
        assert np.all(where >= 0), "read outside the failed node's hyperplane"
        touched[helper_idx[h], where] = True
        return data[h][where]

    ua_slot = {node: i for i, node in enumerate(plan.unaligned_aloof)}
    memo = f.zeros((m, p.alpha0) + batch)
    memo_stage = np.full((m, p.alpha0), -1)

    erased_set = set(plan.erased)
    node_of = p.nodes
    cn_tab, cp_tab, self_tab = p.companion_node_table, p.companion_plane_table, p.self_paired
    one_plus_u2 = 1 ^ f.mul(u, u)
    u_inv = f.inv(u)
    unaligned_helpers = [h for h in plan.helpers if h.y != y1]

    out = f.zeros((p.alpha0,) + batch)
    h_scores = scores[H]
    stages = 0
    for s in range(1, int(h_scores.max()) + 1):
        P = H[h_scores == s]
        if P.size == 0:
            continue
        stages += 1
        kappa = f.zeros((2 * q + m, P.size) + batch)
        for h in unaligned_helpers:
            j = p.node_index(h)
            cn, cp, sp = cn_tab[j, P], cp_tab[j, P], self_tab[j, P]
            a = read(h, P)
            B = a.copy()
            for c_idx in np.unique(cn[~sp]):
                partner = node_of[c_idx]
                sel = (cn == c_idx) & ~sp
                if partner in erased_set:
                    slot = ua_slot[partner]
                    assert np.all(memo_stage[slot, cp[sel]] == s - 1), "memo read out of stage order"
                    B[sel] = f.scale(one_plus_u2, a[sel]) ^ f.scale(u, memo[slot, cp[sel]])
                else:
                    B[sel] = a[sel] ^ f.scale(u, read(partner, cp[sel]))
            for ell in range(2 * q):
                kappa[ell] ^= f.scale(int(p.theta_powers[j, ell]), B)
        for h in plan.aligned_helpers:
            j = p.node_index(h)
            a = read(h, P)
            for ell in range(2 * q):
                kappa[ell] ^= f.scale(int(p.theta_powers[j, ell]), a)

        X = f.dot(system.inverse, kappa)  # (2q+m, |P|, *batch)

        out[P] = X[0]
        for i, h in enumerate(plan.aligned_helpers, start=1):
            out[cp_tab[p.node_index(h), P]] = f.scale(u_inv, X[i])
        if q - m:
            ua_aa = f.dot(system.C2, X[:q])
            for i, a_node in enumerate(plan.aligned_aloof):
                out[cp_tab[p.node_index(a_node), P]] = f.scale(u_inv, ua_aa[i])
        for i in range(m):
            memo[i, P] = X[2 * q + i]
            memo_stage[i, P] = s

    per_helper = {h: int(touched[i].sum()) for h, i in helper_idx.items()}
    return RepairResult(NodeContent(plan.failed, out), int(touched.sum()), per_helper, stages)


def repair_node(plan: RepairPlan, bundles: Mapping[NodeId, object], params: CodeParams | None = None) -> NodeContent:
    return repair_with_accounting(plan, bundles, params).content


def bandwidth_accounting(plan: RepairPlan, bundles: Mapping[NodeId, object] | None = None) -> dict:
    p = plan.params
    if bundles is None:
        per = {str(h): p.beta for h in plan.helpers}
    else:
        per = {str(h): int(_bundle_array(bundles[h]).shape[0]) for h in plan.helpers}
    total = sum(per.values())
    return {
        "failed": str(plan.failed),
        "aloof": [str(a) for a in plan.aloof],
        "helpers": len(per),
        "per_helper": per,
        "beta": p.beta,
        "total": total,
        "baseline_kalpha": p.naive_bandwidth,
        "ratio": total / p.naive_bandwidth,
    }
