"""Verification suite orchestration: fixture configs, groups, reports.

Groups: algebra, complexes, brackets, chern, transgression, pairing.
Each group returns ValidationReports; the run report serializes them
with tolerances, verdicts and timings.  Results are deterministic for a
fixed (config, seed) in single-threaded mode; timings and the
environment fingerprint live under the "volatile" key.
"""

from __future__ import annotations

import json
import os
import platform
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .algebra import MatrixElement, acyclic_extension, dga_validate, mat_lift, maurer_cartan, maurer_cartan_residual
from .chains import CYCLIC, Chain, random_basis_word
from .fixtures import (
    circle_loop_element,
    complex_line,
    discrete_circle,
    discrete_circle_algebra,
    exterior_algebra,
    getzler_trivial,
    matrix2_algebra,
    random_weak_cq,
)
from .fredholm import (
    Homotopy,
    acyclic_extend_module,
    bianchi_residual,
    calibrate_nu,
    chen_vanish,
    chern_eval,
    chern_pullback_residual,
    chern_scale,
    coclosed_residual,
    double_odd,
    getzler_closed_form,
    phi_estimate_ratio,
)
from .report import ValidationReport
from .serialize import round17
from .spectral import ch_g_closed, pairing, partition_resum_check
from .verification import (
    bracket_kernel_report,
    bracket_trace_norm_report,
    codifferential_squares_report,
    complex_axiom_residuals,
    delta_leibniz_report,
    supertrace_report,
)

GROUPS = ("algebra", "complexes", "brackets", "chern", "transgression", "pairing")


@dataclass
class SuiteConfig:
    seed: int = 0
    groups: tuple = GROUPS
    n: int = 6                    # discrete circle size for module-level groups
    pairing_eps: float = 0.10     # loop amplitude for the pairing fixture
    pairing_N_max: int = 10
    chg_N_max: int = 8
    jobs: int = 1
    fast: bool = False            # trims sample counts (used by unit tests)
    tol_scale: float = 1.0        # rescales every tolerance (0 forces failures)

    @classmethod
    def from_json(cls, data: dict) -> "SuiteConfig":
        known = {f for f in cls.__dataclass_fields__}
        bad = set(data) - known
        if bad:
            raise ValueError(f"unknown config keys: {sorted(bad)}")
        if "groups" in data:
            data = dict(data)
            unknown = set(data["groups"]) - set(GROUPS)
            if unknown:
                raise ValueError(f"unknown groups: {sorted(unknown)}")
            data["groups"] = tuple(data["groups"])
        cfg = cls(**data)
        if cfg.seed is None:
            raise ValueError("seed is mandatory")
        return cfg


# -- groups ------------------------------------------------------------------------


def group_algebra(cfg: SuiteConfig):
    reports = []
    algs = [complex_line(), exterior_algebra(1), exterior_algebra(2),
            discrete_circle_algebra(3), discrete_circle_algebra(cfg.n), matrix2_algebra()]
    for alg in algs:
        reports.append(dga_validate(alg))
        reports.append(dga_validate(acyclic_extension(alg)))
    reports.append(dga_validate(mat_lift(exterior_algebra(1), 2)))
    # Maurer-Cartan forms over the circle
    alg = discrete_circle_algebra(cfg.n)
    rep = ValidationReport("maurer-cartan")
    g1 = circle_loop_element(alg, eps=0.4, seed=cfg.seed + 1)
    rep.add("scalar-loop", maurer_cartan_residual(maurer_cartan(g1)), 1e-12,
            "d omega + omega^2 = 0 for omega = f^{-1} df")
    rng = np.random.default_rng(cfg.seed + 2)
    entries = np.zeros((2, 2, alg.dim), dtype=complex)
    for p in range(2):
        for q in range(2):
            vals = rng.standard_normal(cfg.n) + 1j * rng.standard_normal(cfg.n)
            if p == q:
                vals += 4.0
            entries[p, q] = alg.deg0_uneval(vals)
    g2 = MatrixElement(entries, alg)
    rep.add("gl2-loop", maurer_cartan_residual(maurer_cartan(g2)), 1e-10,
            "d omega + omega^2 = 0 for a random GL_2 loop")
    reports.append(rep)
    return reports


def group_complexes(cfg: SuiteConfig):
    reports = []
    # exhaustive layers within the runtime budget, sampled on top
    plan = [
        (complex_line(), 6, None),
        (acyclic_extension(complex_line()), 6, None),
        (exterior_algebra(2), 6, None),
        (acyclic_extension(exterior_algebra(2)), 5, None),
        (acyclic_extension(exterior_algebra(2)), 6, 1500),
        (discrete_circle_algebra(2), 6, None),
        (acyclic_extension(discrete_circle_algebra(2)), 4, None),
        (acyclic_extension(discrete_circle_algebra(2)), 6, 1500),
        (discrete_circle_algebra(cfg.n), 6, 1500),
        (acyclic_extension(discrete_circle_algebra(cfg.n)), 6, 1000),
    ]
    if cfg.fast:
        plan = plan[:4] + plan[5:7]
    for alg, L, sample in plan:
        reports.append(complex_axiom_residuals(alg, max_slots=L, sample=sample, seed=cfg.seed))
    alg_T = acyclic_extension(discrete_circle_algebra(3))
    reports.append(delta_leibniz_report(alg_T, n_cochains=40 if cfg.fast else 200, seed=cfg.seed))
    reports.append(codifferential_squares_report(alg_T, seed=cfg.seed))
    return reports


def group_brackets(cfg: SuiteConfig):
    n_inst = 30 if cfg.fast else 100
    return [
        bracket_kernel_report(n_instances=n_inst, seed=cfg.seed),
        supertrace_report(n_tuples=50 if cfg.fast else 200, seed=cfg.seed),
        bracket_trace_norm_report(n_instances=n_inst, seed=cfg.seed),
    ]


def _chern_fixtures(cfg: SuiteConfig):
    fixtures = [
        random_weak_cq(hdim=4, q=0, seed=cfg.seed + 3, k=1),
        random_weak_cq(hdim=6, q=1, seed=cfg.seed + 4, k=2),
        double_odd(discrete_circle(cfg.n, seed=cfg.seed)),
    ]
    return fixtures


def group_chern(cfg: SuiteConfig):
    reports = []
    for M in _chern_fixtures(cfg):
        rep = ValidationReport(f"chern:{M.name}")
        rng = np.random.default_rng(cfg.seed + 5)
        scale = chern_scale(M)
        ext = acyclic_extension(M.alg)
        M_T = acyclic_extend_module(M, ext)
        scale_T = chern_scale(M_T)
        small = M.alg.dim > 20 or cfg.fast
        max_len = 3 if small else 4

        def words_of(alg, budget):
            out = []
            u = alg.unit_index
            reduced = [i for i in range(alg.dim) if i != u]
            layer = [(i,) for i in range(alg.dim)]
            out.extend(layer)
            for _ in range(budget - 1):
                layer = [w + (i,) for w in layer for i in reduced]
                out.extend(layer)
            return out

        # exhaustive over the base algebra when small, sampled otherwise
        if M.alg.dim <= 8:
            base_words = words_of(M.alg, max_len)
        else:
            base_words = [random_basis_word(M.alg, CYCLIC, int(rng.integers(0, max_len)), rng)
                          for _ in range(150 if not cfg.fast else 40)]
        worst = 0.0
        for w in base_words:
            worst = max(worst, abs(coclosed_residual(M, w)))
        rep.add("coclosed-base", worst / scale, 1e-9,
                "(d + b - B)^dual Ch = 0 over the base algebra",
                note=f"{len(base_words)} words, max length {max_len}")
        if ext.dim <= 16:
            ext_words = words_of(ext, min(max_len, 3))
        else:
            ext_words = [random_basis_word(ext, CYCLIC, int(rng.integers(0, 3)), rng)
                         for _ in range(100 if not cfg.fast else 30)]
        worst = 0.0
        for w in ext_words:
            worst = max(worst, abs(coclosed_residual(M_T, w)))
        rep.add("coclosed-extension", worst / scale_T, 1e-8,
                "(d + b - B)^dual Ch = 0 over the acyclic extension",
                note=f"{len(ext_words)} words")
        worst = 0.0
        for _ in range(30 if cfg.fast else 60):
            N = int(rng.integers(0, 3))
            w = random_basis_word(ext, CYCLIC, N, rng)
            worst = max(worst, chern_pullback_residual(M_T, w))
        rep.add("pullback-identity", worst / scale_T, 1e-9,
                "Ch of the extension = - rotation-pullback of CStr(Phi)")
        # wrong-parity vanishing
        worst = 0.0
        for _ in range(40):
            N = int(rng.integers(0, 4))
            w = random_basis_word(M.alg, CYCLIC, N, rng)
            c = Chain.basis_word(M.alg, CYCLIC, w)
            if c.parity() != M.q % 2:
                worst = max(worst, abs(chern_eval(M, c)))
        rep.add("wrong-parity-vanishing", worst / scale, 1e-12,
                "the character kills words of the wrong parity")
        reports.append(rep)
        if not M.weak:
            reports.append(chen_vanish(M, seed=cfg.seed + 6,
                                       n_words=25 if cfg.fast else 100, ext_alg=ext))
    # getzler comparison
    Modd = getzler_trivial(4, seed=cfg.seed + 7)
    Mq1 = double_odd(Modd)
    rng = np.random.default_rng(cfg.seed + 8)
    rep = ValidationReport("odd-character-closed-form")
    worst, worst_even = 0.0, 0.0
    for _ in range(20 if cfg.fast else 50):
        N = int(rng.integers(0, 6))
        w = random_basis_word(Modd.alg, CYCLIC, N, rng)
        closed = getzler_closed_form(Modd, w)
        doubled = chern_eval(Mq1, w)
        worst = max(worst, abs(closed - doubled))
        if N % 2 == 0:
            worst_even = max(worst_even, abs(doubled))
    scale = chern_scale(Mq1)
    rep.add("doubled-equals-closed-form", worst / scale, 1e-9,
            "doubled-module character = alternating heat commutator integral")
    rep.add("even-degree-vanishing", worst_even / scale, 1e-12,
            "the odd character vanishes in even degrees")
    reports.append(rep)
    # fundamental estimate
    reports.append(fundamental_estimate_report(cfg))
    return reports


def fundamental_estimate_report(cfg: SuiteConfig):
    M = double_odd(discrete_circle(cfg.n, seed=cfg.seed))
    rng_cal = np.random.default_rng(cfg.seed + 100)
    rng_test = np.random.default_rng(cfg.seed + 200)
    cal_words = [random_basis_word(M.alg, CYCLIC, 1 + int(rng_cal.integers(0, 4)), rng_cal)[1:]
                 for _ in range(30)]
    kappa = calibrate_nu(M, cal_words, (0.25, 1.0, 4.0), safety=1.25)
    worst = 0.0
    n_words = 25 if cfg.fast else 100
    for _ in range(n_words):
        w = random_basis_word(M.alg, CYCLIC, 1 + int(rng_test.integers(0, 4)), rng_test)[1:]
        for T in (0.25, 1.0, 4.0):
            worst = max(worst, phi_estimate_ratio(M, w, T, kappa=kappa))
    rep = ValidationReport("fundamental-estimate")
    rep.add("trace-norm-bound", max(worst - 1.0, 0.0), 1e-10,
            "||Phi_T||_1 under the calibrated factorial heat bound",
            note=f"kappa={kappa:.6g}, {n_words} words x 3 T-values")
    rep.notes["kappa"] = round17(kappa)
    return rep


def group_transgression(cfg: SuiteConfig):
    reports = []
    rng = np.random.default_rng(cfg.seed + 9)
    n_words = 8 if cfg.fast else 15
    fixtures = []
    M0 = random_weak_cq(hdim=4, q=0, seed=cfg.seed + 10, k=2, strong=True)
    V0 = M0.cm.project_equivariant(
        rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4)), 1)
    V0 = 0.5 * (V0 + V0.conj().T)
    fixtures.append(Homotopy.affine_Q(M0, V0))
    Mq = double_odd(discrete_circle(3, seed=cfg.seed))
    h = Mq.hdim // 2
    Vq = np.kron(np.array([[0, 1], [1, 0]]), np.diag(rng.standard_normal(h)))
    fixtures.append(Homotopy.affine_Q(Mq, Vq))
    for hom in fixtures:
        ext = acyclic_extension(hom.alg)
        words = []
        nonzero_probe = 0
        M1 = acyclic_extend_module(hom.module(1.0), ext)
        Msmall = acyclic_extend_module(hom.module(0.0), ext)
        while len(words) < n_words:
            N = int(rng.integers(1, 3))
            w = random_basis_word(ext, CYCLIC, N, rng)
            words.append(w)
            lhs = chern_eval(M1, Chain.basis_word(ext, CYCLIC, w)) - \
                chern_eval(Msmall, Chain.basis_word(ext, CYCLIC, w))
            if abs(lhs) > 1e-8:
                nonzero_probe += 1
        from .fredholm import transgression_check

        rep = transgression_check(hom, words, s_nodes=24, ext_alg=ext)
        rep.notes["nonzero_lhs_words"] = nonzero_probe
        rep.add("nonvacuous", 0.0 if nonzero_probe > 0 else 1.0, 0.5,
                "at least one word with a nonzero character difference")
        worst = 0.0
        for _ in range(4 if cfg.fast else 8):
            N = int(rng.integers(0, 3))
            w = random_basis_word(hom.alg, "bar_red", N, rng)
            worst = max(worst, bianchi_residual(hom, float(rng.uniform(0.1, 0.9)), 1.0, w))
        rep.add("bianchi-identity", worst, 1e-6,
                "d/ds Phi = delta Psi + [omega, Psi] against finite differences")
        # Chern-Simons parity: odd for q even
        from .fredholm import chern_simons_eval

        hom_T = hom.extended(ext)
        worst = 0.0
        for _ in range(10):
            N = int(rng.integers(0, 3))
            w = random_basis_word(ext, CYCLIC, N, rng)
            c = Chain.basis_word(ext, CYCLIC, w)
            if (c.parity() + hom.cm.q + 1) % 2 == 1:  # wrong parity for CS
                worst = max(worst, abs(chern_simons_eval(hom_T, c, s_nodes=8)))
        rep.add("chern-simons-parity", worst, 1e-10,
                "the transgression form has parity opposite to the character")
        reports.append(rep)
    return reports


def group_pairing(cfg: SuiteConfig):
    reports = []
    alg = discrete_circle_algebra(2)
    g_small = circle_loop_element(alg, eps=0.5, seed=cfg.seed + 11)
    reports.append(ch_g_closed(g_small, 4 if cfg.fast else cfg.chg_N_max))
    M = discrete_circle(cfg.n, seed=cfg.seed)
    g = circle_loop_element(M.alg, eps=cfg.pairing_eps, seed=cfg.seed + 12)
    pr = pairing(M, g, N_max=8 if cfg.fast else cfg.pairing_N_max)
    reports.append(pr.checks)
    rep = ValidationReport("partition-resummation")
    from .spectral import twisted_family

    tf = twisted_family(M, g)
    worst = 0.0
    for s, T, m_max in ((0.0, 1.0, 2), (0.6, 1.0, 2), (0.9, 0.7, 3)):
        worst = max(worst, partition_resum_check(tf, s, T, m_max))
    rep.add("resummation-identity", worst, 1e-8,
            "X-power heat series = partition-capped quantization of A-words")
    reports.append(rep)
    return reports, pr


GROUP_RUNNERS = {
    "algebra": group_algebra,
    "complexes": group_complexes,
    "brackets": group_brackets,
    "chern": group_chern,
    "transgression": group_transgression,
    "pairing": lambda cfg: group_pairing(cfg)[0],
}


def run_suite(cfg: SuiteConfig) -> dict:
    """Execute the selected groups; returns the run report dict."""
    jobs = int(os.environ.get("CHERNLAB_THREADS", cfg.jobs))
    t0 = time.time()
    results = {}
    timings = {}
    errors = {}

    def run_group(name):
        t = time.time()
        try:
            reports = GROUP_RUNNERS[name](cfg)
            return name, reports, time.time() - t, None
        except Exception as exc:  # keep other groups running
            return name, [], time.time() - t, f"{type(exc).__name__}: {exc}"

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            outs = list(pool.map(run_group, cfg.groups))
    else:
        outs = [run_group(name) for name in cfg.groups]
    for name, reports, dt, err in sorted(outs, key=lambda o: cfg.groups.index(o[0])):
        items = [r.as_dict() for r in reports]
        if cfg.tol_scale != 1.0:
            for item in items:
                for c in item["checks"]:
                    c["tol"] = round17(c["tol"] * cfg.tol_scale)
                    c["passed"] = bool(c["residual"] <= c["tol"])
                item["passed"] = all(c["passed"] for c in item["checks"])
        results[name] = items
        timings[name] = round17(dt)
        if err:
            errors[name] = err
    passed = not errors and all(
        item["passed"] for group in results.values() for item in group
    )
    report = {
        "config": {
            "seed": cfg.seed, "groups": list(cfg.groups), "n": cfg.n,
            "pairing_eps": cfg.pairing_eps, "pairing_N_max": cfg.pairing_N_max,
            "chg_N_max": cfg.chg_N_max, "jobs": jobs, "fast": cfg.fast,
            "tol_scale": cfg.tol_scale,
        },
        "results": results,
        "errors": errors,
        "passed": bool(passed),
        "volatile": {
            "timings": timings,
            "total_seconds": round17(time.time() - t0),
            "fingerprint": {
                "python": platform.python_version(),
                "numpy": np.__version__,
                "machine": platform.machine(),
            },
        },
    }
    return report


def summarize(report: dict) -> str:
    lines = []
    mark = "PASS" if report["passed"] else "FAIL"
    lines.append(f"[{mark}] chernlab suite (seed={report['config']['seed']})")
    for group, items in report["results"].items():
        n_checks = sum(len(i["checks"]) for i in items)
        ok = all(i["passed"] for i in items)
        t = report["volatile"]["timings"].get(group, 0.0)
        lines.append(f"  [{'ok ' if ok else 'BAD'}] {group}: {len(items)} reports, {n_checks} checks, {t:.1f}s")
        for item in items:
            for c in item["checks"]:
                if not c["passed"]:
                    lines.append(f"      FAIL {item['subject']} :: {c['id']} residual={c['residual']:.3e} tol={c['tol']:.1e}")
    for group, err in report.get("errors", {}).items():
        lines.append(f"  [ERR] {group}: {err}")
    return "\n".join(lines)


def explain(report: dict, item_id: str) -> str:
    """Look up one check in a stored report: formula, inputs, residual."""
    cfg_hash = json.dumps(report.get("config", {}), sort_keys=True)
    for group, items in report.get("results", {}).items():
        for item in items:
            for c in item["checks"]:
                if c["id"] == item_id or f"{item['subject']}::{c['id']}" == item_id:
                    return "\n".join([
                        f"check:    {item['subject']} :: {c['id']}",
                        f"group:    {group}",
                        f"formula:  {c['formula']}",
                        f"residual: {c['residual']:.6e}  (tol {c['tol']:.1e})",
                        f"verdict:  {'pass' if c['passed'] else 'FAIL'}",
                        f"note:     {c.get('note', '')}",
                        f"config:   {cfg_hash}",
                    ])
    raise KeyError(f"no check with id {item_id!r} in the report")
