"""Command-line front end.

Subcommands
-----------
phase-shift   tan δ on an energy grid
converge      tan δ against N at one energy, with one reference run
nr-limit      relativistic tangent against c at one energy
verify        invariant checks, exit 0 iff all pass
oracle        J-matrix and direct integration side by side

The run is described by one JSON document (``--config``); single fields can
be overridden with ``--set basis.n=20``. A ``channel.kappa`` entry selects the
relativistic solver, ``channel.l`` the non-relativistic one.

Exit codes: 0 success, 2 configuration error, 3 numerical error,
4 verification failure.
"""
from __future__ import annotations

import argparse
import copy
import csv
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np

from . import __version__
from .basis import KINDS, BasisSpec, biorthonormality_matrix, l_of_kappa, overlaps, overlaps_quadrature
from .errors import ConfigError, DomainError, JMatrixError, NumericalError, PoleError
from .freewave import recursion_residuals, sine_cosine_coefficients
from .nonrel_solver import DEFAULT_POLE_GUARD, NonRelSolver, tune_nonrel_scale
from .oracle import dirac_phase_shift, schrodinger_phase_shift
from .potential import PotentialModel
from .rel_solver import (DEFAULT_C, DEFAULT_CONSISTENCY_TOL, RelSolver, kinematics,
                         nonrel_limit_scan, tune_rel_scale)
from .specfun import riccati_bessel_derivs, riccati_bessel_pair

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_VERIFY = 0, 2, 3, 4

PHASE_COLUMNS = ("energy", "k_or_ktilde", "tan_delta", "delta", "pole_proximity")
CONVERGE_COLUMNS = ("N", "tan_delta", "abs_err_vs_oracle")
LIMIT_COLUMNS = ("c", "tan_rel", "tan_nonrel", "gap")
ORACLE_COLUMNS = ("energy", "k_or_ktilde", "tan_delta", "tan_oracle", "abs_err")

DEFAULT_CONFIG: Dict[str, Any] = {
    "basis": {"kind": "laguerre", "lambda": 2.0, "n": 40},
    "channel": {"l": 0},
    "particle": {"mass": 1.0, "c": DEFAULT_C},
    "potential": {"kind": "square_well", "params": {"V0": -1.0, "a": 1.0}},
    "energies": {"min": 0.1, "max": 2.0, "count": 20, "spacing": "linear"},
    "pole_guard": DEFAULT_POLE_GUARD,
    "consistency_tol": DEFAULT_CONSISTENCY_TOL,
    "lambda_grid": {"min": 0.7, "max": 14.0, "count": 32},
    "converge": {"n_list": [10, 20, 30, 40], "lambda_list": None, "energy": None},
    "nr_limit": {"c_list": [137.0, 1370.0, 13700.0], "energy": None},
    "verify": {"fault": None},
}
FAULTS = (None, "overlap")
_REPLACE = ("params", "channel")   # sections taken whole from the user config


# ------------------------------------------------------------------ config


@dataclass(frozen=True)
class RunConfig:
    """Validated run description."""

    kind: str
    scale: Optional[float]          # None means tune λ per energy
    n: int
    kappa: int
    relativistic: bool
    mass: float
    c: float
    model: PotentialModel
    energies: np.ndarray
    pole_guard: float
    consistency_tol: Optional[float]
    scale_grid: np.ndarray
    n_list: tuple
    lambda_list: Optional[tuple]
    converge_energy: float
    c_list: tuple
    limit_energy: float
    fault: Optional[str]

    @property
    def l(self) -> int:
        return l_of_kappa(self.kappa)

    def spec(self, scale: Optional[float] = None, n: Optional[int] = None) -> BasisSpec:
        s = self.scale if scale is None else scale
        return BasisSpec(self.kind, self.kappa, 1.0 if s is None else s, self.n if n is None else n)


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict) and k not in _REPLACE:
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def apply_override(cfg: dict, item: str) -> None:
    """Apply one ``key.path=value`` override; the value is parsed as JSON if possible."""
    if "=" not in item:
        raise ConfigError(f"--set expects key=value, got {item!r}")
    key, raw = item.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    parts = key.strip().split(".")
    node = cfg
    for p in parts[:-1]:
        if not isinstance(node.get(p), dict):
            node[p] = {}
        node = node[p]
    node[parts[-1]] = value
    if parts[0] == "channel" and len(parts) == 2 and parts[1] in ("l", "kappa"):
        # l and kappa are alternatives; setting one replaces the other
        node.pop("kappa" if parts[1] == "l" else "l", None)


def _num(section: dict, key: str, where: str, *, positive=False, nonneg=False, integer=False,
         minimum=None):
    v = section.get(key)
    name = f"{where}.{key}"
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{name}: expected a number, got {v!r}")
    if not math.isfinite(v):
        raise ConfigError(f"{name}: must be finite")
    if integer:
        if int(v) != v:
            raise ConfigError(f"{name}: must be an integer")
        v = int(v)
    if positive and not v > 0:
        raise ConfigError(f"{name}: must be positive")
    if nonneg and v < 0:
        raise ConfigError(f"{name}: must be non-negative")
    if minimum is not None and v < minimum:
        raise ConfigError(f"{name}: must be >= {minimum}")
    return v


def _float_list(v, name: str, positive=True) -> tuple:
    if not isinstance(v, (list, tuple)) or not v:
        raise ConfigError(f"{name}: expected a non-empty list")
    out = []
    for x in v:
        if isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x):
            raise ConfigError(f"{name}: entries must be finite numbers")
        if positive and not x > 0:
            raise ConfigError(f"{name}: entries must be positive")
        out.append(float(x))
    return tuple(out)


def energy_grid(section: dict) -> np.ndarray:
    emin = _num(section, "min", "energies", positive=True)
    count = _num(section, "count", "energies", integer=True, minimum=1)
    emax = _num(section, "max", "energies", positive=True) if count > 1 else emin
    if emax < emin:
        raise ConfigError("energies.max: must be >= energies.min")
    spacing = section.get("spacing", "linear")
    if spacing not in ("linear", "log"):
        raise ConfigError("energies.spacing: must be 'linear' or 'log'")
    if count == 1:
        return np.array([float(emin)])
    if spacing == "linear":
        return np.linspace(emin, emax, count)
    return np.geomspace(emin, emax, count)


def parse_config(doc: dict) -> RunConfig:
    """Validate a raw config (already merged with defaults)."""
    if not isinstance(doc, dict):
        raise ConfigError("config: top level must be a JSON object")
    b = doc.get("basis") or {}
    kind = str(b.get("kind", "")).lower()
    if kind not in KINDS:
        raise ConfigError(f"basis.kind: must be one of {list(KINDS)}, got {b.get('kind')!r}")
    lam = b.get("lambda")
    scale = None if lam == "auto" else _num(b, "lambda", "basis", positive=True)
    n = _num(b, "n", "basis", integer=True)
    if n < 2:
        raise ConfigError("basis.n: must be >= 2")

    ch = doc.get("channel") or {}
    if ("l" in ch) == ("kappa" in ch):
        raise ConfigError("channel: give exactly one of 'l' (non-relativistic) or 'kappa'")
    if "l" in ch:
        l = _num(ch, "l", "channel", integer=True)
        if l < 0:
            raise ConfigError("channel.l: must be >= 0")
        kappa, rel = -(l + 1), False
    else:
        kappa = _num(ch, "kappa", "channel", integer=True)
        if kappa == 0:
            raise ConfigError("channel.kappa: must be a non-zero integer")
        rel = True

    p = doc.get("particle") or {}
    mass = float(_num(p, "mass", "particle", positive=True))
    c = float(_num(p, "c", "particle", positive=True))
    if not rel and mass != 1.0:
        raise ConfigError("particle.mass: the non-relativistic solver uses m = 1")

    pot = doc.get("potential") or {}
    params = pot.get("params")
    if not isinstance(params, dict):
        raise ConfigError("potential.params: expected an object")
    for key, v in params.items():
        _num(params, key, "potential.params")
    try:
        model = PotentialModel.from_params(pot.get("kind", ""), params)
    except ConfigError as exc:
        raise ConfigError(f"potential: {exc}") from None

    energies = energy_grid(doc.get("energies") or {})
    guard = float(_num(doc, "pole_guard", "config", nonneg=True))
    tol = doc.get("consistency_tol")
    if tol is not None:
        tol = float(_num(doc, "consistency_tol", "config", positive=True))

    g = doc.get("lambda_grid") or {}
    gmin = _num(g, "min", "lambda_grid", positive=True)
    gmax = _num(g, "max", "lambda_grid", positive=True)
    gcount = _num(g, "count", "lambda_grid", integer=True, minimum=3)
    if gmax <= gmin:
        raise ConfigError("lambda_grid.max: must exceed lambda_grid.min")
    grid = np.geomspace(gmin, gmax, gcount)

    cv = doc.get("converge") or {}
    n_list = cv.get("n_list")
    if not isinstance(n_list, (list, tuple)) or not n_list:
        raise ConfigError("converge.n_list: expected a non-empty list")
    for x in n_list:
        if isinstance(x, bool) or not isinstance(x, (int, float)) or int(x) != x or x < 2:
            raise ConfigError("converge.n_list: entries must be integers >= 2")
    lam_list = cv.get("lambda_list")
    lam_list = None if lam_list is None else _float_list(lam_list, "converge.lambda_list")
    ce = cv.get("energy")
    ce = float(energies[0]) if ce is None else float(_num(cv, "energy", "converge", positive=True))

    nl = doc.get("nr_limit") or {}
    c_list = _float_list(nl.get("c_list"), "nr_limit.c_list")
    if any(b2 <= a2 for a2, b2 in zip(c_list, c_list[1:])):
        raise ConfigError("nr_limit.c_list: must be ascending")
    le = nl.get("energy")
    le = float(energies[0]) if le is None else float(_num(nl, "energy", "nr_limit", positive=True))

    fault = (doc.get("verify") or {}).get("fault")
    if fault not in FAULTS:
        raise ConfigError(f"verify.fault: must be one of {list(FAULTS)}")

    return RunConfig(kind, None if scale is None else float(scale), int(n), int(kappa), rel, mass, c,
                     model, energies, guard, tol, grid, tuple(int(x) for x in n_list), lam_list,
                     ce, c_list, le, fault)


def load_config(path: Optional[str], overrides: Sequence[str] = ()) -> RunConfig:
    doc = {}
    if path is not None:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                doc = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"config: cannot read {path}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config: invalid JSON in {path}: {exc}") from None
        if not isinstance(doc, dict):
            raise ConfigError("config: top level must be a JSON object")
    merged = _merge(DEFAULT_CONFIG, doc)
    for item in overrides:
        apply_override(merged, item)
    return parse_config(merged)


# ------------------------------------------------------------------ output


def fmt(x) -> str:
    """17 significant digits, '.' separator; integers stay integers."""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def _json_value(x):
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return int(x)
    x = float(x)
    return x if math.isfinite(x) else fmt(x)


def render(columns: Sequence[str], blocks: List[dict], fmt_kind: str, meta: dict) -> str:
    """CSV (one or several blocks) or JSON text.

    ``blocks`` is a list of ``{"label": str or None, "rows": [...], ...}``.
    Several blocks in CSV are introduced by ``# label`` lines.
    """
    if fmt_kind == "json":
        doc = dict(meta)
        doc["columns"] = list(columns)
        out_blocks = []
        for b in blocks:
            ob = {k: v for k, v in b.items() if k != "rows"}
            ob["rows"] = [{c: _json_value(v) for c, v in zip(columns, row)} for row in b["rows"]]
            out_blocks.append(ob)
        if len(out_blocks) == 1 and out_blocks[0].get("label") is None:
            doc.update({k: v for k, v in out_blocks[0].items() if k != "label"})
        else:
            doc["blocks"] = out_blocks
        return json.dumps(doc, indent=2, sort_keys=False) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    multi = len(blocks) > 1 or blocks[0].get("label") is not None
    for i, b in enumerate(blocks):
        if multi:
            if i:
                buf.write("\n")
            buf.write(f"# {b['label']}\n")
        w.writerow(columns)
        for row in b["rows"]:
            w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def _emit(text: str, path: Optional[str]) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _pmap(fn: Callable, items: Sequence, threads: int) -> list:
    """Ordered map; results are gathered by index whatever the completion order."""
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _warn(msg: str) -> None:
    sys.stderr.write(f"jmatrix: {msg}\n")


# ------------------------------------------------------------------ drivers


class _Runner:
    """Builds solvers for a config; tuned runs pick λ per energy."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self._cache: Dict[tuple, Any] = {}

    def solver(self, scale: float, n: Optional[int] = None, c: Optional[float] = None):
        cfg = self.cfg
        spec = cfg.spec(scale, n)
        key = (spec, c)
        if key not in self._cache:
            if cfg.relativistic:
                self._cache[key] = RelSolver(spec, cfg.model, cfg.c if c is None else c, cfg.mass,
                                             cfg.pole_guard, cfg.consistency_tol)
            else:
                self._cache[key] = NonRelSolver(spec, cfg.model, cfg.pole_guard)
        return self._cache[key]

    def scale_for(self, energy: float) -> float:
        cfg = self.cfg
        if cfg.scale is not None:
            return cfg.scale
        if cfg.relativistic:
            ch = tune_rel_scale(cfg.spec(), cfg.model, kinematics(cfg.mass, cfg.c, energy),
                                cfg.scale_grid, cfg.pole_guard)
        else:
            ch = tune_nonrel_scale(cfg.spec(), cfg.model, energy, cfg.scale_grid, cfg.pole_guard)
        return ch.scale

    def point(self, energy: float, scale: Optional[float] = None, n: Optional[int] = None):
        """``(k or k̃, tan, δ, pole proximity, λ)`` at one energy."""
        lam = self.scale_for(energy) if scale is None else scale
        r = self.solver(lam, n).tan_delta(energy)
        k = r.ktilde if self.cfg.relativistic else r.k
        return k, r.tan_delta, r.delta, r.pole_proximity, lam

    def warm(self) -> None:
        """Build the shared solver before a parallel scan so workers only read it."""
        if self.cfg.scale is not None:
            self.solver(self.cfg.scale)

    def oracle(self, energy: float) -> float:
        cfg = self.cfg
        if cfg.relativistic:
            return dirac_phase_shift(cfg.model, cfg.kappa, kinematics(cfg.mass, cfg.c, energy))
        return schrodinger_phase_shift(cfg.model, cfg.l, energy)


def _scan(cfg: RunConfig, threads: int, with_oracle: bool):
    run = _Runner(cfg)
    run.warm()

    def one(e):
        try:
            k, t, d, prox, lam = run.point(float(e))
        except PoleError as exc:
            return ("skip", float(e), exc)
        extra = run.oracle(float(e)) if with_oracle else None
        return ("ok", float(e), (k, t, d, prox, lam, extra))

    results = _pmap(one, list(cfg.energies), threads)
    rows, skipped, lams = [], [], []
    for status, e, payload in results:
        if status == "skip":
            _warn(f"energy {fmt(e)} skipped: within {payload.gap:.3e} of Harris level {fmt(payload.nearest)}")
            skipped.append({"energy": e, "nearest_level": payload.nearest, "gap": payload.gap})
            continue
        k, t, d, prox, lam, ora = payload
        rows.append((e, k, t, d, prox) if not with_oracle else (e, k, t, ora, abs(t - ora)))
        lams.append(lam)
    return rows, skipped, lams


def _meta(cfg: RunConfig, command: str) -> dict:
    return {"command": command, "relativistic": cfg.relativistic, "kappa": cfg.kappa, "l": cfg.l,
            "basis": cfg.kind, "n": cfg.n, "lambda": "auto" if cfg.scale is None else cfg.scale,
            "potential": {"kind": cfg.model.kind, "params": cfg.model.params}}


def cmd_phase_shift(cfg: RunConfig, threads: int = 1, fmt_kind: str = "csv") -> str:
    rows, skipped, lams = _scan(cfg, threads, with_oracle=False)
    meta = _meta(cfg, "phase-shift")
    meta["skipped"] = skipped
    if cfg.scale is None:
        meta["lambda_per_row"] = lams
    return render(PHASE_COLUMNS, [{"label": None, "rows": rows}], fmt_kind, meta)


def cmd_oracle(cfg: RunConfig, threads: int = 1, fmt_kind: str = "csv") -> str:
    rows, skipped, lams = _scan(cfg, threads, with_oracle=True)
    meta = _meta(cfg, "oracle")
    meta["skipped"] = skipped
    if cfg.scale is None:
        meta["lambda_per_row"] = lams
    return render(ORACLE_COLUMNS, [{"label": None, "rows": rows}], fmt_kind, meta)


def cmd_converge(cfg: RunConfig, threads: int = 1, fmt_kind: str = "csv") -> str:
    run = _Runner(cfg)
    energy = cfg.converge_energy
    ref = run.oracle(energy)          # the single reference run
    sweep = cfg.lambda_list is not None
    scales = list(cfg.lambda_list) if sweep else [run.scale_for(energy)]
    jobs = [(lam, n) for lam in scales for n in cfg.n_list]

    def one(job):
        lam, n = job
        try:
            return run.point(energy, lam, n)[1]
        except PoleError as exc:
            return exc

    vals = _pmap(one, jobs, threads)
    blocks = []
    for bi, lam in enumerate(scales):
        rows = []
        for ni, n in enumerate(cfg.n_list):
            t = vals[bi * len(cfg.n_list) + ni]
            if isinstance(t, PoleError):
                _warn(f"N={n}, lambda={fmt(lam)} skipped: {t}")
                continue
            rows.append((n, t, abs(t - ref)))
        blocks.append({"label": f"lambda={fmt(lam)}" if sweep else None, "lambda": lam, "rows": rows})
    meta = _meta(cfg, "converge")
    meta.update({"energy": energy, "oracle_tan_delta": ref})
    return render(CONVERGE_COLUMNS, blocks, fmt_kind, meta)


def cmd_nr_limit(cfg: RunConfig, threads: int = 1, fmt_kind: str = "csv") -> str:
    spec = cfg.spec(cfg.scale if cfg.scale is not None else None)
    if cfg.scale is None:
        spec = spec.with_(scale=_Runner(cfg).scale_for(cfg.limit_energy))
    rows = nonrel_limit_scan(spec, cfg.model, cfg.limit_energy, cfg.c_list, cfg.mass)
    out = [(r.c, r.tan_rel, r.tan_nonrel, r.gap) for r in rows]
    meta = _meta(cfg, "nr-limit")
    meta.update({"energy": cfg.limit_energy, "lambda": spec.scale,
                 "green_ratio_gap": [r.green_ratio_gap for r in rows]})
    return render(LIMIT_COLUMNS, [{"label": None, "rows": out}], fmt_kind, meta)


# ------------------------------------------------------------------ verify


def _overlap_source(fault: Optional[str]):
    """Overlap matrices used by the checks; ``fault='overlap'`` corrupts them (test hook)."""
    def source(spec, size):
        ov = overlaps(spec, size)
        if fault != "overlap":
            return ov.s_phi, ov.s_psi
        s = np.array(ov.s_phi)
        bump = 1e-3 * abs(s[0, 0])
        s[0, 2] += bump
        s[2, 0] += bump
        return s, np.array(ov.s_psi)
    return source


def _check(name: str, fn) -> tuple:
    try:
        ok, detail = fn()
    except JMatrixError as exc:
        ok, detail = False, f"{type(exc).__name__}: {exc}"
    return name, bool(ok), detail


def verify_checks(cfg: RunConfig) -> List[tuple]:
    """Run the invariant groups; returns ``[(name, passed, detail)]``."""
    lam = cfg.scale if cfg.scale is not None else 2.0
    source = _overlap_source(cfg.fault)
    out = []

    def tridiagonal():
        worst = 0.0
        for kind in KINDS:
            for l in (0, 1, 2):
                spec = BasisSpec.from_l(kind, l, lam, 31)
                sp, ss = source(spec, 31)
                for k in (0.3 * lam, lam, 3 * lam):
                    J = 0.5 * ss - 0.5 * k * k * sp
                    band = np.abs(np.subtract.outer(np.arange(31), np.arange(31))) >= 2
                    rows = np.linalg.norm(J, axis=1)[:, None]
                    worst = max(worst, float(np.max(np.abs(J[band]) / np.broadcast_to(rows, J.shape)[band])))
        return worst <= 1e-10, f"max |J_mn|/|row| off the band = {worst:.2e}"

    def recursion():
        worst = 0.0
        for kind in KINDS:
            for l in (0, 1, 2):
                spec = BasisSpec.from_l(kind, l, lam, 40)
                for k in (0.3 * lam, lam, 3 * lam):
                    wc = sine_cosine_coefficients(spec, k, 41)
                    rs, rc = recursion_residuals(spec, wc)
                    worst = max(worst, float(np.max(rs)), float(np.max(rc)))
        return worst <= 1e-9, f"max relative row residual = {worst:.2e}"

    def kinetic():
        worst = 0.0
        for kind in KINDS:
            spec = BasisSpec.from_l(kind, cfg.l, lam, 11)
            sp, ss = source(spec, 11)
            qp, qs, qk = overlaps_quadrature(spec, 11)
            k = lam
            lhs = 0.5 * ss - 0.5 * k * k * sp
            rhs = 0.5 * qk - 0.5 * k * k * qp
            worst = max(worst, float(np.max(np.abs(lhs - rhs)) / np.max(np.abs(rhs))))
        return worst <= 1e-8, f"max entrywise deviation = {worst:.2e}"

    def biorthonormal():
        worst = 0.0
        for kind in KINDS:
            for kappa in (-1, 1):
                spec = BasisSpec(kind, kappa, lam, 6)
                b = biorthonormality_matrix(spec, 5, form="parts")
                worst = max(worst, float(np.max(np.abs(b - np.eye(5)))))
        return worst <= 1e-7, f"max |<psibar_m|psi_n> - delta_mn| = {worst:.2e}"

    def free():
        spec = cfg.spec(lam)
        free_model = PotentialModel.free()
        worst = 0.0
        for e in (0.1, 0.5, 2.0):
            worst = max(worst, abs(NonRelSolver(spec.with_(kappa=-(cfg.l + 1)), free_model).tan_delta(e).tan_delta))
            worst = max(worst, abs(RelSolver(spec, free_model, cfg.c, cfg.mass).tan_delta(e).tan_delta))
        return worst <= 1e-12, f"max |tan delta| at V=0 = {worst:.2e}"

    def split():
        spec = cfg.spec(lam, 20)
        rs = RelSolver(spec, PotentialModel.free(), cfg.c, cfg.mass)
        mc2 = cfg.mass * cfg.c ** 2
        e = rs.spectrum.energies
        up, down = int(np.sum(e >= mc2)), int(np.sum(e <= -mc2))
        return up == 20 and down == 20, f"{up} levels >= mc^2, {down} levels <= -mc^2"

    def green_symmetry():
        rs = RelSolver(cfg.spec(lam, 20), cfg.model, cfg.c, cfg.mass, consistency_tol=None)
        G = rs.green_matrix(0.37)
        dev = float(np.max(np.abs(G - G.T)) / np.max(np.abs(G)))
        return dev <= 1e-10, f"max |G - G^T|/max|G| = {dev:.2e}"

    def riccati():
        worst = 0.0
        x = np.linspace(0.5, 20.0, 40)
        for l in range(0, 6):
            j, n = riccati_bessel_pair(l, x)
            dj, dn = riccati_bessel_derivs(l, x)
            w = j * dn - dj * n
            worst = max(worst, float(np.max(np.abs(w - 1.0))))
        return worst <= 1e-10, f"max |W - 1| = {worst:.2e}"

    for name, fn in (("tridiagonality", tridiagonal), ("coefficient recursions", recursion),
                     ("kinetic-balance identity", kinetic), ("biorthonormality", biorthonormal),
                     ("free-case exactness", free), ("relativistic spectrum split", split),
                     ("Green matrix symmetry", green_symmetry), ("Riccati Wronskian", riccati)):
        out.append(_check(name, fn))
    return out


def cmd_verify(cfg: RunConfig, fmt_kind: str = "csv"):
    checks = verify_checks(cfg)
    ok = all(p for _, p, _ in checks)
    if fmt_kind == "json":
        text = json.dumps({"command": "verify", "passed": ok,
                           "checks": [{"name": n, "passed": p, "detail": d} for n, p, d in checks]},
                          indent=2) + "\n"
    else:
        lines = [f"{'PASS' if p else 'FAIL'}  {n}: {d}" for n, p, d in checks]
        lines.append(f"{sum(p for _, p, _ in checks)}/{len(checks)} invariant groups passed")
        text = "\n".join(lines) + "\n"
    return text, ok


# ------------------------------------------------------------------ main


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="jmatrix", description="J-matrix phase shifts (non-relativistic and Dirac).")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_ in (("phase-shift", "tan delta on an energy grid"),
                        ("converge", "tan delta against N at one energy"),
                        ("nr-limit", "relativistic tangent against c"),
                        ("verify", "run the invariant checks"),
                        ("oracle", "J-matrix and direct integration side by side")):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", help="JSON run description")
        sp.add_argument("--output", help="output file (default: stdout)")
        sp.add_argument("--format", choices=("csv", "json"), default="csv")
        sp.add_argument("--threads", type=int, default=1, help="worker threads for grid scans")
        sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override one config field, e.g. basis.n=20 (repeatable)")
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.threads < 1:
            raise ConfigError("--threads: must be >= 1")
        cfg = load_config(args.config, args.set)
        if args.command == "verify":
            text, ok = cmd_verify(cfg, args.format)
            _emit(text, args.output)
            return EXIT_OK if ok else EXIT_VERIFY
        fn = {"phase-shift": cmd_phase_shift, "converge": cmd_converge,
              "nr-limit": cmd_nr_limit, "oracle": cmd_oracle}[args.command]
        _emit(fn(cfg, args.threads, args.format), args.output)
        return EXIT_OK
    except (ConfigError, DomainError) as exc:
        _warn(f"configuration error: {exc}")
        return EXIT_CONFIG
    except NumericalError as exc:
        _warn(f"numerical error: {exc}")
        return EXIT_NUMERICAL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
