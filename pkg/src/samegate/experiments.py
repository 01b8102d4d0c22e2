"""Reproducible experiment drivers shared by the CLI and the acceptance tests."""

from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass, field

import numpy as np

from . import circuit_algebra as ca
from . import spectral_stats as st
from . import unitary_engine as ue
from .errors import InvalidClassParameters
from .seeding import derive_rng

IDENTITY_TOL = 1e-11
SECTOR_TOL = 1e-8

# KS thresholds for the full-scale level-spacing run
LSD_THRESHOLDS = {
    "root_vs_cue": ("max", 0.02),
    "floquet_vs_pq": ("max", 0.03),
    "floquet_vs_cue": ("min", 0.1),
}


def circuit_gate(master_seed: int, index: int, d: int = 2) -> ue.LocalGate:
    return ue.haar_gate(d, derive_rng(master_seed, index))


def enumerate_classes(n_sites: int) -> list[dict]:
    rows = []
    for q, r in ca.allowed_qr(n_sites):
        rows.append({
            "q": q,
            "r": r,
            "C": ca.c_of_class_closed_form(n_sites, q, r),
            "family": "S" if q == n_sites else "BW",
        })
    return rows


def verify_class(n_sites: int, q: int, r: int, seed: int = 0, d: int = 2, identity_gate: bool = False, sectors: bool = True) -> dict:
    """Operator identities of one class plus the per-sector phase relation."""
    if not ca.is_allowed(n_sites, q, r):
        raise InvalidClassParameters(n_sites, q, r)
    v = np.eye(d * d, dtype=complex) if identity_gate else circuit_gate(seed, 0, d).matrix
    errors = ue.verify_identities(n_sites, q, r, v, d)
    checks = {name: {"error": err, "tol": IDENTITY_TOL, "pass": err <= IDENTITY_TOL} for name, err in errors.items()}
    if sectors:
        worst = 0.0
        if not identity_gate:
            for k in range(n_sites // q):
                worst = max(worst, ue.sector_phase_relation(n_sites, q, r, k, v, d))
        checks["sector_phase_relation"] = {"error": worst, "tol": SECTOR_TOL, "pass": worst <= SECTOR_TOL}
    return {
        "n": n_sites,
        "q": q,
        "r": r,
        "d": d,
        "seed": seed,
        "gate": "identity" if identity_gate else "haar",
        "checks": checks,
        "pass": all(c["pass"] for c in checks.values()),
    }


@dataclass
class LsdResult:
    n_sites: int
    q: int
    r: int
    k: int
    n_circuits: int
    seed: int
    floquet: st.SpacingSample
    root: st.SpacingSample
    reports: dict[str, st.GofReport]
    max_mean_deviation: float
    sector_dim: int
    bins: int = 40
    s_max: float = 4.0
    seconds: float = 0.0
    checks: dict = field(default_factory=dict)

    def table_csv(self) -> str:
        mids, hist_f = st.histogram(self.floquet, self.bins, self.s_max)
        _, hist_root = st.histogram(self.root, self.bins, self.s_max)
        cue = st.wigner_cue(mids)
        pq = st.p_m(mids, self.q)
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["s_mid", "hist_F", "hist_root", "cue", "p_m"])
        for row in zip(mids, hist_f, hist_root, cue, pq):
            writer.writerow([f"{x:.10g}" for x in row])
        return buf.getvalue()

    def to_json(self) -> dict:
        return {
            "n": self.n_sites,
            "q": self.q,
            "r": self.r,
            "k": self.k,
            "circuits": self.n_circuits,
            "seed": self.seed,
            "sector_dim": self.sector_dim,
            "max_mean_spacing_deviation": self.max_mean_deviation,
            "reports": {name: rep.to_json() for name, rep in self.reports.items()},
            "checks": self.checks,
            "seconds": round(self.seconds, 2),
        }

    def evaluate(self, thresholds=LSD_THRESHOLDS) -> bool:
        self.checks = {}
        for name, (sense, limit) in thresholds.items():
            ks = self.reports[name].ks_distance
            ok = ks <= limit if sense == "max" else ks >= limit
            self.checks[name] = {"ks": ks, sense: limit, "pass": bool(ok)}
        return all(c["pass"] for c in self.checks.values())


def lsd_experiment(n_sites: int, q: int, r: int, k: int = 0, n_circuits: int = 10, seed: int = 0, d: int = 2, bins: int = 40, s_max: float = 4.0) -> LsdResult:
    """Sector-``k`` spacings of the Floquet operator and of its root over Haar gates.

    Circuit ``i`` uses the gate drawn from ``derive_rng(seed, i)``; results are
    pooled in index order.
    """
    if not ca.is_allowed(n_sites, q, r):
        raise InvalidClassParameters(n_sites, q, r)
    start = time.perf_counter()
    basis = ue.momentum_basis(n_sites, d, q, k)
    seq = ca.canonical_fqr(n_sites, q, r)
    f_samples, root_samples = [], []
    deviation = 0.0
    for i in range(n_circuits):
        v = circuit_gate(seed, i, d)
        meta = {"N": n_sites, "q": q, "r": r, "k": k, "seed": seed, "index": i}
        f_block = ue.restrict(ue.floquet_action(seq, v, d), basis)
        root_block = ue.restrict(ue.root_action(n_sites, q, r, v, d), basis)
        fs = st.spacings(ue.eigenphases(f_block), meta)
        rs = st.spacings(ue.eigenphases(root_block), meta)
        deviation = max(deviation, abs(fs.mean - 1), abs(rs.mean - 1))
        f_samples.append(fs)
        root_samples.append(rs)
    floquet = st.pool(f_samples)
    root = st.pool(root_samples)
    reports = {
        "root_vs_cue": st.ks_distance(root, st.ReferenceCurve.cue()),
        "floquet_vs_pq": st.ks_distance(floquet, st.ReferenceCurve.superposition(q)),
        "floquet_vs_cue": st.ks_distance(floquet, st.ReferenceCurve.cue()),
        "floquet_vs_poisson": st.ks_distance(floquet, st.ReferenceCurve.poisson()),
    }
    return LsdResult(
        n_sites, q, r, k, n_circuits, seed, floquet, root, reports, deviation,
        basis.dim, bins, s_max, time.perf_counter() - start,
    )


def bruteforce_report(n_sites: int, force: bool = False) -> dict:
    classes = ca.equivalence_classes_bruteforce(n_sites, force=force)
    summary = []
    for members in classes:
        cs = {ca.invariant_c(ca.GateSequence(n_sites, m)) for m in members}
        summary.append({"size": len(members), "C": sorted(cs)})
    return {"n": n_sites, "classes": len(classes), "detail": summary}
