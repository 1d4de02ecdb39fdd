"""Count grids, the log-polynomial fit and the JSON report."""

from __future__ import annotations

import csv
import hashlib
import io
import itertools
import json
import math
import platform
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .cubics import HeightSpec, canonical_spec, load_height_spec
from .enumerate import (
    BudgetExceeded,
    count_direct,
    count_torsor_naive,
    count_torsor_reduced,
    w_tail_fraction,
)
from .nfield import make_field

SCHEMA_VERSION = 1
GRID_HEADER = ["B", "N", "raw", "class0", "class1", "class2", "class3", "class4", "status"]
ENGINES = ("direct", "naive", "reduced")


class FitError(ValueError):
    """The grid cannot support the five-term fit."""


@dataclass
class RunConfig:
    field: str = "Q"
    heights: str = "std6"
    engine: str = "reduced"
    grid: tuple = ()
    shards: int = 1
    seed: int = 0
    out: str | None = None
    p_max: int = 10**6
    rtol: float | None = None

    def __post_init__(self):
        self.grid = tuple(self.grid)
        if any(b <= a for a, b in zip(self.grid, self.grid[1:])):
            raise ValueError("B grid must be strictly increasing")
        if self.shards < 1:
            raise ValueError("shard count must be >= 1")
        if self.engine not in ENGINES:
            raise ValueError(f"unknown engine {self.engine!r}")

    def height_spec(self) -> HeightSpec:
        return resolve_heights(self.heights, self.field)


def resolve_heights(heights: str, field: str) -> HeightSpec:
    """A canonical name (std6, sym12) or a path to a JSON member list."""
    try:
        return canonical_spec(heights, field)
    except KeyError:
        return load_height_spec(heights, field)


def geometric_grid(lo: float, hi: float, points: int) -> tuple[int, ...]:
    """``points`` integers spaced geometrically from lo to hi (floors, deduplicated)."""
    if points < 1:
        return ()
    if points == 1:
        return (int(math.floor(lo)),)
    e0, e1 = math.log10(lo), math.log10(hi)
    vals = []
    for t in range(points):
        # exact decades stay exact
        e = e0 + (e1 - e0) * t / (points - 1)
        v = 10 ** round(e) if abs(e - round(e)) < 1e-12 else math.floor(10**e)
        if not vals or v > vals[-1]:
            vals.append(int(v))
    return tuple(vals)


def _run_one(cfg: RunConfig, H: HeightSpec, B: int):
    if cfg.engine == "direct":
        return count_direct(cfg.field, H, B)
    if cfg.engine == "naive":
        return count_torsor_naive(cfg.field, H, B, shards=cfg.shards)
    return count_torsor_reduced(cfg.field, H, B, shards=cfg.shards)


def run_count_grid(cfg: RunConfig, log=None) -> str:
    """CSV text with one row per grid point and provenance comment lines.

    Rows are deterministic: no timings, so reruns and reshardings are
    byte-identical.  A point over the engine budget gets status
    ``budget-exceeded`` and an empty count.
    """
    H = cfg.height_spec()
    buf = io.StringIO()
    buf.write(f"# schema={SCHEMA_VERSION} tool=dp5count-{__version__} engine={cfg.engine} "
              f"field={make_field(cfg.field).label} heights_hash={H.spec_hash} seed={cfg.seed} "
              f"numpy={np.__version__} python={platform.python_version()}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(GRID_HEADER)
    for B in cfg.grid:
        try:
            r = _run_one(cfg, H, int(B))
        except BudgetExceeded:
            w.writerow([int(B), "", "", "", "", "", "", "", "budget-exceeded"])
            continue
        cls = list(r.classes) if r.classes is not None else [""] * 5
        w.writerow([r.B, r.N, r.raw, *cls, "ok"])
        if log is not None:
            log(f"B={r.B} N={r.N} ({r.seconds:.1f}s)")
    text = buf.getvalue()
    if cfg.out:
        Path(cfg.out).write_text(text)
    return text


def read_count_grid(text_or_path) -> list[tuple[int, int]]:
    """(B, N) pairs of the ``ok`` rows of a grid CSV."""
    text = text_or_path
    if isinstance(text_or_path, Path) or (isinstance(text_or_path, str) and "\n" not in text_or_path):
        text = Path(text_or_path).read_text()
    rows = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    out = []
    for row in csv.DictReader(rows):
        if row["status"] == "ok":
            out.append((int(row["B"]), int(row["N"])))
    return out


# ---------------------------------------------------------------------------
# fit

@dataclass
class FitResult:
    coeffs: tuple[float, ...]
    c4: float
    c_target: float | None
    ratio: float | None
    ratio_interval: tuple[float, float] | None
    residuals: tuple[float, ...]
    cond: float
    n_points: int

    def as_dict(self) -> dict:
        return asdict(self)


def _fit_coeffs(B: np.ndarray, N: np.ndarray) -> tuple[np.ndarray, np.ndarray, float]:
    L = np.log(B)
    X = np.stack([B * L**k for k in range(5)], axis=1)
    # weights 1/(B (log B)^4): the fit is on relative residuals
    w = 1.0 / (B * L**4)
    Xw = X * w[:, None]
    scale = np.linalg.norm(Xw, axis=0)
    Xs = Xw / scale
    coef, *_ = np.linalg.lstsq(Xs, N * w, rcond=None)
    coef = coef / scale
    resid = (N - X @ coef) * w
    return coef, resid, float(np.linalg.cond(Xs))


def fit_leading(data: Sequence[tuple[float, float]], c_target: float | None = None,
                max_cond: float = 1e12) -> FitResult:
    """Weighted least squares of N(B) on B (log B)^k, k = 0..4.

    The bootstrap interval for c4 / c_target is the range over all subsets of
    the grid that still have six points (the full grid included).
    """
    pts = sorted((float(b), float(n)) for b, n in data)
    if len(pts) < 6:
        raise FitError("need at least 6 grid points")
    B = np.array([p[0] for p in pts])
    N = np.array([p[1] for p in pts])
    if math.log10(B[-1] / B[0]) < 2 - 1e-12:
        raise FitError("grid must span at least two decades")
    coef, resid, cond = _fit_coeffs(B, N)
    if not np.isfinite(cond) or cond > max_cond:
        raise FitError(f"ill-conditioned basis (cond {cond:.3g})")
    ratio = interval = None
    if c_target:
        ratio = float(coef[4] / c_target)
        vals = [ratio]
        for sub in itertools.combinations(range(len(pts)), 6):
            if len(sub) == len(pts):
                continue
            idx = np.array(sub)
            if math.log10(B[idx][-1] / B[idx][0]) < 2 - 1e-12:
                continue
            c, _, _ = _fit_coeffs(B[idx], N[idx])
            vals.append(float(c[4] / c_target))
        interval = (min(vals), max(vals))
    return FitResult(tuple(float(c) for c in coef), float(coef[4]), c_target, ratio, interval,
                     tuple(float(r) for r in resid), cond, len(pts))


def ratio_curve(data: Sequence[tuple[float, float]], c_target: float) -> list[tuple[float, float]]:
    """(log B, N(B) / (c B (log B)^4)) for each grid point."""
    return [(math.log(b), n / (c_target * b * math.log(b) ** 4)) for b, n in sorted(data)]


def trending_to_one(curve: Sequence[tuple[float, float]], top: int = 3) -> bool:
    """|ratio - 1| nonincreasing across the last ``top`` points."""
    d = [abs(r - 1.0) for _, r in curve[-top:]]
    return all(b <= a for a, b in zip(d, d[1:]))


# ---------------------------------------------------------------------------
# report

PLOT_TEMPLATE = '''"""Plot N(B) / (c B (log B)^4) against log B (generated by dp5count report)."""
import matplotlib.pyplot as plt

curve = {curve}
c = {c}

x = [p[0] for p in curve]
y = [p[1] for p in curve]
plt.plot(x, y, "o-")
plt.axhline(1.0, color="gray", lw=0.8)
plt.xlabel("log B")
plt.ylabel("N(B) / (c B (log B)^4)")
plt.title("c = %.6g" % c)
plt.savefig({png!r}, dpi=120)
'''


def _canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), default=str)


def build_report(data: Sequence[tuple[int, int]], breakdown, fit: FitResult | None,
                 wtail: Sequence[tuple[float, float]] | None = None,
                 wtail_B: int | None = None, meta: dict | None = None) -> dict:
    """The JSON report; ``report_hash`` covers every other field."""
    c = float(breakdown.value)
    bd = breakdown.as_dict()
    for k in ("seconds",):
        bd["archimedean"].pop(k, None)
    rep = {
        "schema": SCHEMA_VERSION,
        "tool": f"dp5count-{__version__}",
        "meta": meta or {},
        "alpha": "1/144",
        "counts": [{"B": int(b), "N": int(n)} for b, n in sorted(data)],
        "constant": bd,
        "fit": fit.as_dict() if fit is not None else None,
        "ratio_curve": [{"logB": x, "ratio": r} for x, r in ratio_curve(data, c)],
        "diagnostics": {
            "w_tail_B": wtail_B,
            "w_tail_fraction": [{"W": w, "fraction": f} for w, f in (wtail or [])],
        },
    }
    rep["report_hash"] = hashlib.sha256(_canonical(rep).encode()).hexdigest()[:16]
    return rep


def plot_script(report: dict, png: str = "ratio.png") -> str:
    curve = [(p["logB"], p["ratio"]) for p in report["ratio_curve"]]
    return PLOT_TEMPLATE.format(curve=repr(curve), c=report["constant"]["c"], png=png)


def write_report(report: dict, json_path: str | Path, plot_path: str | Path | None = None) -> None:
    Path(json_path).write_text(json.dumps(report, indent=2, sort_keys=True, default=str) + "\n")
    if plot_path is not None:
        png = str(Path(plot_path).with_suffix(".png").name)
        Path(plot_path).write_text(plot_script(report, png))


def wtail_table(field: str, H: HeightSpec, B: int, wgrid=(1, 2, 4, 8, 16)):
    return w_tail_fraction(field, H, B, [float(w) for w in wgrid])


__all__ = [
    "SCHEMA_VERSION",
    "RunConfig",
    "FitResult",
    "FitError",
    "resolve_heights",
    "geometric_grid",
    "run_count_grid",
    "read_count_grid",
    "fit_leading",
    "ratio_curve",
    "trending_to_one",
    "build_report",
    "plot_script",
    "write_report",
    "wtail_table",
]
