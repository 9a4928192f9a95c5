"""Brute-force checks that do not share code paths with the decoder or repair."""
from __future__ import annotations

import itertools
import time
from dataclasses import asdict, dataclass, field
from math import comb

import numpy as np

from .code import CodeParams, NodeId
from .errors import TooLarge
from .field import rank

RANK_GUARD = 5000


def parity_check_matrix(params: CodeParams, include_nodal: bool = True) -> np.ndarray:
    """Stacked B-plane and nodal checks as a dense matrix on the n*alpha0 cube symbols.

    Column ``j * alpha0 + z`` is symbol A(node j; plane z).
    """
    f, u, a0 = params.field, params.u, params.alpha0
    rows = []
    for z in range(a0):
        digits = params.digits[z]
        for ell in range(params.r):
            row = np.zeros(params.n * a0, dtype=np.int64)
            for j, node in enumerate(params.nodes):
                th = f.pow(params.theta[j], ell)
                row[j * a0 + z] ^= th
                zy = int(digits[node.y - 1])
                if zy != node.x:
                    # companion A(z_y, y; z with coordinate y set to x)
                    zc = list(digits)
                    zc[node.y - 1] = node.x
                    cz = params.plane_index(zc)
                    cj = params.node_index(NodeId(zy, node.y))
                    row[cj * a0 + cz] ^= f.mul(params.u, th)
            rows.append(row)
    if include_nodal:
        for j, node in enumerate(params.nodes):
            for z in range(a0):
                digits = params.digits[z]
                if digits[node.y - 1] != node.x:
                    continue
                for ell in range(params.q):
                    row = np.zeros(params.n * a0, dtype=np.int64)
                    for w in range(params.width):
                        zw = list(digits)
                        zw[node.y - 1] = w
                        th = f.pow(params.theta_of(NodeId(w, node.y)), ell)
                        row[j * a0 + params.plane_index(zw)] = th if w == node.x else f.mul(u, th)
                    rows.append(row)
    return np.array(rows, dtype=np.int64)


def pc_rank(params: CodeParams, include_nodal: bool = True) -> int:
    if params.n * params.alpha0 > RANK_GUARD:
        raise TooLarge(f"n*alpha0 = {params.n * params.alpha0} exceeds {RANK_GUARD}")
    return rank(params.field, parity_check_matrix(params, include_nodal))


def decode_via_dense_solve(cube, erased, params: CodeParams | None = None) -> np.ndarray:
    """Recover erased node contents by one dense solve of the B-plane checks.

    Returns the recovered (|erased|, alpha0) block. Only for single stripes.
    """
    from .field import solve

    params = params or cube.params
    erased = sorted(set(erased))
    H = parity_check_matrix(params, include_nodal=False)
    a0 = params.alpha0
    cols_e = np.concatenate([np.arange(params.node_index(e) * a0, (params.node_index(e) + 1) * a0) for e in erased])
    mask = np.ones(params.n * a0, dtype=bool)
    mask[cols_e] = False
    known = cube.data.reshape(params.n * a0)[mask]
    rhs = params.field.dot(H[:, mask], known)
    He = H[:, cols_e]
    # keep an independent square subsystem
    f = params.field
    reduced, rhs_r = _independent_rows(f, He, rhs)
    x = solve(f, reduced, rhs_r)
    return x.reshape(len(erased), a0)


def _independent_rows(f, M, rhs):
    picked, basis = [], np.zeros((0, M.shape[1]), dtype=np.int64)
    for i in range(M.shape[0]):
        trial = np.vstack([basis, M[i]])
        if rank(f, trial) > len(picked):
            picked.append(i)
            basis = trial
        if len(picked) == M.shape[1]:
            break
    return M[picked], rhs[picked]


def repair_via_full_decode(cube, failed: NodeId, aloof, params: CodeParams | None = None):
    """Reference repair: erase failed + aloof and run the full decoder (downloads everything)."""
    from .codec import decode_erasures

    params = params or cube.params
    erased = {failed} | set(aloof)
    if len(erased) > params.r:
        from .errors import TooManyErasures

        raise TooManyErasures(f"{len(erased)} erasures")
    return decode_erasures(cube, erased, params).content(failed)


@dataclass
class VerificationReport:
    params: dict
    seed: int | None = None
    cases_run: int = 0
    cases_passed: int = 0
    erasure_cases: int = 0
    erasure_passed: int = 0
    repair_cases: int = 0
    repair_passed: int = 0
    repair_oracle_agree: int = 0
    systems_probed: int = 0
    systems_singular: int = 0
    pc_rank: int | None = None
    failures: list = field(default_factory=list)
    elapsed_s: float = 0.0

    def to_dict(self) -> dict:
        return asdict(self)


def _sample_or_all(pool_size, budget, draw_all, draw_one, rng):
    if budget is None or budget >= pool_size:
        return list(draw_all())
    return [draw_one(rng) for _ in range(budget)]


def exhaustive_verify(
    params: CodeParams,
    erasure_budget: int | None = None,
    repair_budget: int | None = None,
    seed: int = 0,
    cube=None,
) -> VerificationReport:
    """Run erasure decoding and repair against their references.

    A budget of None means exhaustive; a budget smaller than the case count
    draws that many seeded-uniform cases.
    """
    from .codec import DataCube, decode_erasures, encode
    from .errors import SingularRepairSystem
    from .repair import helper_extract, plan_repair, repair_system, repair_with_accounting

    t0 = time.perf_counter()
    report = VerificationReport(
        params={"q": params.q, "t": params.t, "n": params.n, "k": params.k, "d": params.d,
                "alpha": params.alpha, "beta": params.beta},
        seed=seed,
    )
    if erasure_budget == 0 and repair_budget == 0:
        report.elapsed_s = time.perf_counter() - t0
        return report
    rng = np.random.default_rng(seed)
    if cube is None:
        msg = params.field.random((params.k * params.alpha,), rng)
        cube = encode(msg, params)
    assert isinstance(cube, DataCube)
    nodes = params.nodes

    def one_pattern(g):
        return tuple(nodes[i] for i in sorted(g.choice(params.n, size=params.r, replace=False)))

    patterns = _sample_or_all(
        comb(params.n, params.r), erasure_budget,
        lambda: itertools.combinations(nodes, params.r), one_pattern, rng,
    )
    for E in patterns:
        report.erasure_cases += 1
        got = decode_erasures(cube, E)
        if np.array_equal(got.data, cube.data):
            report.erasure_passed += 1
        else:
            report.failures.append({"kind": "erasure", "pattern": [str(e) for e in E]})

    def all_repairs():
        for failed in nodes:
            others = [x for x in nodes if x != failed]
            for aloof in itertools.combinations(others, params.q):
                yield failed, aloof

    def one_repair(g):
        failed = nodes[int(g.integers(params.n))]
        others = [x for x in nodes if x != failed]
        picks = sorted(g.choice(len(others), size=params.q, replace=False))
        return failed, tuple(others[i] for i in picks)

    cases = _sample_or_all(params.n * comb(params.n - 1, params.q), repair_budget, all_repairs, one_repair, rng)
    seen_shapes = set()
    for failed, aloof in cases:
        report.repair_cases += 1
        plan = plan_repair(params, failed, aloof)
        if plan not in seen_shapes:
            seen_shapes.add(plan)
            report.systems_probed += 1
        try:
            repair_system(plan)
        except SingularRepairSystem:
            report.systems_singular += 1
            report.failures.append({"kind": "singular", "failed": str(failed), "aloof": [str(a) for a in aloof]})
            continue
        bundles = {h: helper_extract(cube.content(h), plan) for h in plan.helpers}
        result = repair_with_accounting(plan, bundles)
        truth = cube.node(failed)
        reference = repair_via_full_decode(cube, failed, aloof).symbols
        same_truth = np.array_equal(result.content.symbols, truth)
        same_ref = np.array_equal(result.content.symbols, reference)
        report.repair_oracle_agree += same_ref
        if same_truth and same_ref and result.downloaded == params.repair_bandwidth:
            report.repair_passed += 1
        else:
            report.failures.append({
                "kind": "repair", "failed": str(failed), "aloof": [str(a) for a in aloof],
                "matches_original": bool(same_truth), "matches_reference": bool(same_ref),
                "downloaded": result.downloaded,
            })

    report.cases_run = report.erasure_cases + report.repair_cases
    report.cases_passed = report.erasure_passed + report.repair_passed
    report.elapsed_s = time.perf_counter() - t0
    return report
