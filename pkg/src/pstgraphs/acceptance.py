"""Acceptance runner over the bundled fixture files (one JSON file per row).

Each fixture lists typed checks; a row passes when every check passes.
Expected values are stored as expression strings (``"sqrt(5)"``) and
profiles as expressions in ``t``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources
from typing import Callable

import numpy as np
from scipy.linalg import expm

from . import families as fam
from .design import piecewise_evolve, retrieval_schedule, verify_design
from .expr import evaluate, number
from .givens import ChainBlock, tridiagonalize
from .graph import SpinGraph, one_excitation_hamiltonian
from .spectral import (
    eigendecompose,
    jacobi_from_spectrum,
    transfer_probabilities,
)


@dataclass(frozen=True)
class CheckResult:
    kind: str
    passed: bool
    deviation: float
    detail: str


@dataclass(frozen=True)
class RowResult:
    row: int
    title: str
    checks: tuple[CheckResult, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        summary = "; ".join(("" if c.passed else "FAILED ") + f"{c.kind}: {c.detail}" for c in self.checks)
        return f"row {self.row:2d} {status}  {self.title}  [{summary}]"


def fixture_rows() -> list[int]:
    files = resources.files("pstgraphs").joinpath("fixtures")
    rows = [int(p.name[3:5]) for p in files.iterdir() if p.name.startswith("row") and p.name.endswith(".json")]
    return sorted(rows)


def load_fixture(row: int) -> dict:
    path = resources.files("pstgraphs").joinpath("fixtures", f"row{row:02d}.json")
    return json.loads(path.read_text(encoding="utf-8"))


def _graph(spec: dict, override: dict | None = None) -> SpinGraph:
    params = {}
    for k, v in {**spec.get("params", {}), **(override or {})}.items():
        params[k] = [number(x) for x in v] if isinstance(v, list) else number(v)
    return fam.build_family(fam.FamilySpec(spec["family"], params, spec.get("sizes", {})))


def _times(chk: dict) -> np.ndarray:
    return np.linspace(0.0, number(chk.get("t_max", "2*pi")), int(chk.get("samples", 1000)))


def _result(kind: str, dev: float, tol: float, what: str) -> CheckResult:
    ok = bool(dev < tol)
    return CheckResult(kind, ok, float(dev), f"{what} max dev {dev:.3g} (tol {tol:g})")


# -- check kinds ----------------------------------------------------------------


def _check_profile(chk: dict, rng) -> CheckResult:
    t = _times(chk)
    tol = float(chk["tol"])
    variants = [dict(zip(chk["vary"], vals)) for vals in zip(*chk["vary"].values())] if "vary" in chk else [{}]
    dev = 0.0
    first = None
    for over in variants:
        h = one_excitation_hamiltonian(_graph(chk["graph"], over))
        spec = eigendecompose(h)
        for a, b, expr in chk["pairs"]:
            p = transfer_probabilities(h, a, b, t, spec)
            target = np.broadcast_to(evaluate(expr, {"t": t}), t.shape)
            dev = max(dev, float(np.max(np.abs(p - target))))
            if first is None:
                first = p
            elif chk.get("identical_across_variants") and a == chk["pairs"][0][0]:
                dev = max(dev, float(np.max(np.abs(p - first))))
    pairs = ", ".join(f"P{a},{b}" for a, b, _ in chk["pairs"])
    return _result("profile", dev, tol, pairs)


def _block_dev(block: ChainBlock, couplings, fields=None) -> float:
    J = [number(x) for x in couplings]
    if block.length != len(J) + 1:
        return math.inf
    dev = float(np.max(np.abs(np.asarray(block.offdiag) - J))) if J else 0.0
    B = [number(x) for x in fields] if fields is not None else [0.0] * block.length
    return max(dev, float(np.max(np.abs(np.asarray(block.diag) - B))))


def _check_chain(chk: dict, rng) -> CheckResult:
    R = tridiagonalize(one_excitation_hamiltonian(_graph(chk["graph"])))
    dev = _block_dev(R.blocks[0], chk["couplings"], chk.get("fields"))
    tail = chk.get("tail", [])
    rest = list(R.blocks[1:])
    expected = []
    for item in tail:
        if "null" in item:
            expected.append(("null", int(item["null"])))
        else:
            expected.append(("chain", item))
    if len(rest) != len(expected):
        dev = math.inf
    else:
        for blk, (kind, item) in zip(rest, expected):
            if kind == "null":
                dev = max(dev, 0.0 if blk.null_block and blk.length == item else math.inf)
            else:
                dev = max(dev, _block_dev(blk, item.get("couplings", []), item.get("fields")))
    shape = "+".join(str(b.length) for b in R.blocks)
    return _result("chain", dev, float(chk["tol"]), f"blocks {shape},")


def _check_spectrum(chk: dict, rng) -> CheckResult:
    lam = np.sort(np.linalg.eigvalsh(one_excitation_hamiltonian(_graph(chk["graph"]))))
    want = np.sort([number(x) for x in chk["eigenvalues"]])
    dev = float(np.max(np.abs(lam - want))) if lam.size == want.size else math.inf
    got = ",".join(f"{x:.6g}" for x in lam)
    return _result("spectrum", dev, float(chk["tol"]), f"eigenvalues [{got}]")


def _check_pt(chk: dict, rng) -> CheckResult:
    bad = []
    for spec in chk["graphs"]:
        g = _graph(spec)
        report, _, p = verify_design(g, 0, int(spec["receiver"]))
        if report.verdict != chk["verdict"]:
            bad.append(f"{spec['params']} -> {report.verdict}")
    dev = float(len(bad))
    res = _result("pt", dev, 0.5, f"{len(chk['graphs'])} graphs, mismatches")
    return CheckResult(res.kind, res.passed, dev, res.detail + (": " + "; ".join(bad) if bad else ""))


# -- oracle checks: closed forms against the reduction on random draws ------------


def _oracle_coutinho(rng) -> float:
    x, y, z = rng.uniform(0.2, 3.0, 3) * rng.choice([-1, 1], 3)
    blk = tridiagonalize(one_excitation_hamiltonian(fam.coutinho(x, y, z))).blocks[0]
    r = math.hypot(y, z)
    return _block_dev(blk, [abs(x), r, r, abs(x)])


def _oracle_wheatstone_fields(rng) -> float:
    x, y, z, w = rng.uniform(0.2, 3.0, 4)
    R = tridiagonalize(one_excitation_hamiltonian(fam.wheatstone(x, y, z, w)))
    return float(np.max(np.abs(np.diag(R.T) - fam.wheatstone_fields(x, y, z, w))))


def _oracle_wheatstone_yz(rng) -> float:
    x, y, w = rng.uniform(0.2, 3.0, 3)
    R = tridiagonalize(one_excitation_hamiltonian(fam.wheatstone(x, y, y, w)))
    if [b.length for b in R.blocks] != [5, 1]:
        return math.inf
    r = math.sqrt(2) * y
    dev = _block_dev(R.blocks[0], [x, r, r, x], [0, 0, w, 0, 0])
    dev = max(dev, abs(R.blocks[1].diag[0] + w))
    report, _, _ = verify_design(fam.wheatstone(x, y, y, w), 0, 4)
    return dev if report.verdict == "no-PT" else math.inf


def _oracle_decorated8(rng) -> float:
    v1, v2 = rng.uniform(0.2, 3.0, 2)
    blk = tridiagonalize(one_excitation_hamiltonian(fam.decorated8(1, 1, 1, v1, v2))).blocks[0]
    ref = fam.decorated8_reduced_general(v1, v2)
    return _block_dev(blk, ref.offdiag)


def _oracle_generalized_families(rng) -> float:
    """Worst ``1 - P(pi/2)`` over the bridged and parallel-chain families."""
    worst = 0.0
    cases = []
    for n in range(1, 6):
        x, z0, z = fam.gen1_pt_couplings(n, rng)
        cases.append((fam.gen1(n, x, z0, z), 4))
    for k in range(2, 5):
        for n in range(1, 6):
            x, y, w = fam.gen3_pt_couplings(k, n, rng)
            cases.append((fam.gen3(k, n, x, y, w), n + 3))
    for g, b in cases:
        p = transfer_probabilities(one_excitation_hamiltonian(g), 0, b, [math.pi / 2])[0]
        worst = max(worst, 1.0 - float(p))
    return worst


def _oracle_jacobi_roundtrip(rng, n_max: int = 12) -> float:
    m = int(rng.integers(1, n_max))
    half = rng.uniform(0.3, 3.0, (m + 1) // 2)
    J = np.concatenate([half, half[::-1][m % 2:]])
    blk = ChainBlock.from_couplings(J)
    eigs = np.linalg.eigvalsh(blk.matrix())
    eigs = 0.5 * (eigs - eigs[::-1])
    back = jacobi_from_spectrum(eigs)
    return float(np.max(np.abs(np.asarray(back.offdiag) - J)))


ORACLES: dict[str, Callable] = {
    "coutinho_chain": _oracle_coutinho,
    "wheatstone_fields": _oracle_wheatstone_fields,
    "wheatstone_yz": _oracle_wheatstone_yz,
    "decorated8_general": _oracle_decorated8,
    "generalized_families": _oracle_generalized_families,
    "jacobi_roundtrip": _oracle_jacobi_roundtrip,
}


def _check_oracle(chk: dict, rng) -> CheckResult:
    fn = ORACLES[chk["oracle"]]
    draws = int(chk.get("draws", 1))
    dev = max(fn(rng) for _ in range(draws))
    return _result("oracle", dev, float(chk["tol"]), f"{chk['oracle']} x{draws},")


def _check_jacobi(chk: dict, rng) -> CheckResult:
    blk = jacobi_from_spectrum([number(x) for x in chk["eigenvalues"]])
    return _result("jacobi", _block_dev(blk, chk["couplings"]), float(chk["tol"]), "chain")


def _check_retrieval(chk: dict, rng) -> CheckResult:
    store = _graph(chk["graph"])
    sched = retrieval_schedule(store, 1)
    t = _times(chk)
    h = one_excitation_hamiltonian(store)
    spec = eigendecompose(h)
    far = max(float(np.max(transfer_probabilities(h, 0, j, t, spec))) for j in chk["far_sites"])
    surv = transfer_probabilities(h, 0, 0, t, spec)
    want = evaluate(chk["survival"], {"t": t})
    dev_s = float(np.max(np.abs(surv - want)))
    t_hold = number(chk["hold"])
    dev_t = abs(t_hold - sched.times[0])
    send = _graph(chk["graph"], chk["switch_to"])
    psi = piecewise_evolve([(h, t_hold), (one_excitation_hamiltonian(send), number(chk["transfer_time"]))], 0)
    miss = 1.0 - float(abs(psi[int(chk["receiver"])]) ** 2)
    ok = far < chk["far_tol"] and dev_s < chk["tol"] and dev_t < 1e-12 and miss < chk["transfer_tol"]
    detail = f"far max {far:.3g}, survival dev {dev_s:.3g}, 1-P_final {miss:.3g}"
    return CheckResult("retrieval", bool(ok), max(dev_s, miss), detail)


def _check_properties(chk: dict, rng) -> CheckResult:
    worst = {}

    def note(name, val):
        worst[name] = max(worst.get(name, 0.0), float(val))

    for _ in range(int(chk.get("draws", 20))):
        n = int(rng.integers(2, 17))
        a = rng.normal(size=(n, n))
        h = a + a.T
        R = tridiagonalize(h)
        norm = np.linalg.norm(h, 2)
        note("spectrum", np.max(np.abs(np.linalg.eigvalsh(R.T) - np.linalg.eigvalsh(h))) / norm)
        note("orthogonality", np.max(np.abs(R.Q @ R.Q.T - np.eye(n))))
        note("idempotence", len(tridiagonalize(R.T).rotations))
        t = float(rng.uniform(0, 10))
        spec = eigendecompose(h)
        total = sum(transfer_probabilities(h, 0, b, [t], spec)[0] for b in range(n))
        note("unitarity", abs(total - 1.0))
        psi = expm(-1j * h * t)[:, 0]
        p = np.array([transfer_probabilities(h, 0, b, [t], spec)[0] for b in range(n)])
        note("oracle", np.max(np.abs(p - np.abs(psi) ** 2)))
        # weighted bipartite graph: random tree plus even cycles
        m = int(rng.integers(2, 13))
        hb = np.zeros((m, m))
        side = rng.integers(0, 2, m)
        side[0], side[1] = 0, 1
        for i in range(m):
            for j in range(i + 1, m):
                if side[i] != side[j] and rng.random() < 0.6:
                    hb[i, j] = hb[j, i] = rng.uniform(0.2, 2.0)
        lam = np.linalg.eigvalsh(hb)
        note("bipartite", np.max(np.abs(lam + lam[::-1])) / max(np.linalg.norm(hb, 2), 1e-300))
    limits = chk["limits"]
    failed = [k for k, v in worst.items() if not v <= limits[k]]
    detail = ", ".join(f"{k} {worst[k]:.2g}" for k in worst)
    return CheckResult("properties", not failed, max(worst.values()), detail)


CHECKS: dict[str, Callable] = {
    "profile": _check_profile,
    "chain": _check_chain,
    "spectrum": _check_spectrum,
    "pt": _check_pt,
    "oracle": _check_oracle,
    "jacobi": _check_jacobi,
    "retrieval": _check_retrieval,
    "properties": _check_properties,
}


def run_row(row: int, seed: int = 0) -> RowResult:
    fx = load_fixture(row)
    rng = np.random.default_rng([seed, row])
    out = []
    for chk in fx["checks"]:
        try:
            out.append(CHECKS[chk["kind"]](chk, rng))
        except Exception as exc:  # a crashing check is a failed check, reported as such
            out.append(CheckResult(chk["kind"], False, math.inf, f"error: {type(exc).__name__}: {exc}"))
    return RowResult(row, fx["title"], tuple(out))


def run_all(rows=None, seed: int = 0) -> list[RowResult]:
    return [run_row(r, seed) for r in (rows or fixture_rows())]


