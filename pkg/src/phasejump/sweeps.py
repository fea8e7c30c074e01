"""Parameter sweeps, figure datasets, convergence reports, CSV output.

A sweep evaluates one model family over a grid of one parameter with a chosen
set of methods (direct numerics plus the closed-form approximations) and
collects the results into a rectangular table.  Points are independent, so a
sweep may run on several worker threads; results are gathered in grid order
either way, and identical inputs produce identical tables.
"""

from __future__ import annotations

import hashlib
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

from .adiabatic import to_adiabatic
from .errors import DegenerateFieldError, InvalidArgumentError, PhasejumpError
from .models import (
    DriveModel,
    ParabolicParams,
    constant_detuning_pulse,
    parabolic,
    phase_jump,
    sample,
    superparabolic,
)
from .analytic import (
    ica_propagator_phase_jump,
    ica_propagator_reference,
    universal_probability,
)
from .propagation import SimConfig, auto_window, propagate, transition_probability

__all__ = [
    "METHODS",
    "FAMILIES",
    "SweepSpec",
    "SweepTable",
    "run_sweep",
    "reproduce_figure",
    "ConvergenceReport",
    "convergence_report",
    "write_csv",
    "build_model",
]

METHODS = ("numeric", "ica-reference", "ica-phase-jump", "universal")
FAMILIES = ("parabolic", "superparabolic", "const-detuning")

FIGURE_IDS = ("fig2", "fig3", "fig4", "fig5", "fig6")

# Default sweep grid: b from 0 to 5 in steps of 0.025.
DEFAULT_GRID_STEP = 0.025
DEFAULT_GRID_MAX = 5.0


def default_grid(step: float = DEFAULT_GRID_STEP, stop: float = DEFAULT_GRID_MAX) -> tuple[float, ...]:
    n = int(round(stop / step))
    return tuple(round(k * step, 12) for k in range(n + 1))


@dataclass(frozen=True)
class SweepSpec:
    """One sweep: model family, fixed parameters, swept parameter and methods.

    For the const-detuning family the generic keys map as: c is the detuning,
    b the pulse amplitude and a the pulse half-width.
    """

    grid: tuple[float, ...]
    family: str = "parabolic"
    a: float = 1.0
    b: float = 0.0
    c: float = 0.0
    n: int = 1
    phase_jump: bool = False
    param: str = "b"
    methods: tuple[str, ...] = ("numeric",)
    config: SimConfig = field(default_factory=SimConfig)

    def __post_init__(self):
        object.__setattr__(self, "grid", tuple(float(g) for g in self.grid))
        object.__setattr__(self, "methods", tuple(self.methods))
        if self.family not in FAMILIES:
            raise InvalidArgumentError(f"unknown family {self.family!r}; choose from {FAMILIES}")
        if self.param not in ("b", "c"):
            raise InvalidArgumentError(f"swept parameter must be 'b' or 'c', got {self.param!r}")
        if not self.grid:
            raise InvalidArgumentError("sweep grid must be non-empty")
        if any(y <= x for x, y in zip(self.grid, self.grid[1:])):
            raise InvalidArgumentError("sweep grid must be strictly increasing")
        if not self.methods:
            raise InvalidArgumentError("need at least one method")
        for m in self.methods:
            if m not in METHODS:
                raise InvalidArgumentError(f"unknown method {m!r}; choose from {METHODS}")

    def params_at(self, value: float) -> dict:
        kw = {"a": self.a, "b": self.b, "c": self.c, "n": self.n}
        kw[self.param] = value
        return kw


def build_model(spec: SweepSpec, value: float) -> DriveModel:
    """Instantiate the drive model of ``spec`` with the swept parameter set to ``value``."""
    kw = spec.params_at(value)
    if spec.family == "parabolic":
        m = parabolic(ParabolicParams(b=kw["b"], c=kw["c"], a=kw["a"]))
    elif spec.family == "superparabolic":
        m = superparabolic(ParabolicParams(b=kw["b"], c=kw["c"], n=kw["n"]))
    else:
        m = constant_detuning_pulse(delta=kw["c"], amplitude=kw["b"], half_width=kw["a"])
    if spec.phase_jump:
        m = phase_jump(m)
    return m


@dataclass(frozen=True)
class SweepTable:
    """Rectangular result set: named columns, numeric rows, metadata lines."""

    columns: tuple[str, ...]
    rows: tuple[tuple[float, ...], ...]
    metadata: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        for row in self.rows:
            if len(row) != len(self.columns):
                raise InvalidArgumentError(
                    f"row width {len(row)} does not match {len(self.columns)} columns"
                )
        for j, name in enumerate(self.columns):
            if name in METHODS or name.startswith("numeric"):
                for row in self.rows:
                    x = row[j]
                    if not math.isnan(x) and not 0.0 <= x <= 1.0:
                        raise InvalidArgumentError(
                            f"probability column {name!r} out of range: {x}"
                        )

    def column(self, name: str) -> tuple[float, ...]:
        j = self.columns.index(name)
        return tuple(row[j] for row in self.rows)

    def meta(self, key: str) -> Optional[str]:
        for k, v in self.metadata:
            if k == key:
                return v
        return None

    def with_metadata(self, *pairs: tuple[str, str]) -> "SweepTable":
        return replace(self, metadata=self.metadata + tuple(pairs))


def _spec_digest(spec: SweepSpec) -> str:
    return hashlib.sha256(repr(spec).encode()).hexdigest()[:12]


def _evaluate_point(spec: SweepSpec, value: float):
    """One sweep row: requested method values plus a failure count.

    Structurally inapplicable methods give NaN; methods that raise record NaN,
    bump the failure count and keep a diagnostic message.
    """
    kw = spec.params_at(value)
    out = []
    failures = 0
    notes = []
    model = None
    for method in spec.methods:
        try:
            if method == "numeric":
                if model is None:
                    model = build_model(spec, value)
                out.append(transition_probability(model, spec.config))
            elif method in ("ica-reference", "ica-phase-jump"):
                applicable = spec.family != "const-detuning" and kw["n"] == 1 and kw["c"] > 0.0
                if not applicable:
                    out.append(math.nan)
                    continue
                p = ParabolicParams(b=kw["b"], c=kw["c"], a=kw["a"])
                if method == "ica-reference":
                    out.append(ica_propagator_reference(p).p)
                else:
                    out.append(ica_propagator_phase_jump(p).p)
            else:
                if model is None:
                    model = build_model(spec, value)
                s = sample(model, 0.0)
                if s.v == 0.0 and s.alpha == 0.0:
                    out.append(math.nan)
                    continue
                out.append(universal_probability(s.v, s.alpha))
        except PhasejumpError as exc:
            out.append(math.nan)
            failures += 1
            notes.append(f"{spec.param}={value:g} {method}: {exc}")
    return (value, *out, float(failures)), notes


def run_sweep(spec: SweepSpec, workers: int = 1) -> SweepTable:
    """Evaluate every grid point and gather the rows in grid order."""
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda v: _evaluate_point(spec, v), spec.grid))
    else:
        results = [_evaluate_point(spec, v) for v in spec.grid]
    rows = tuple(r for r, _ in results)
    notes = [n for _, ns in results for n in ns]
    sample_model = build_model(spec, spec.grid[0])
    metadata = [
        ("label", sample_model.label),
        ("family", spec.family),
        ("swept", spec.param),
        ("phase_jump", str(spec.phase_jump).lower()),
        ("config", repr(spec.config)),
        ("spec_hash", _spec_digest(spec)),
        ("timestamp", time.strftime("%Y-%m-%dT%H:%M:%S%z")),
    ]
    for note in notes:
        metadata.append(("diagnostic", note))
    return SweepTable(
        columns=(spec.param, *spec.methods, "failures"),
        rows=rows,
        metadata=tuple(metadata),
    )


# Figure datasets.  fig4's c values are not listed in the source material; the
# fig3 set is assumed by parallelism of presentation (flagged in metadata).
_FIG_SETS = {
    "fig2": {"cs": (0.0, -0.1, -0.5, -1.0), "phase_jump": False, "methods": ("numeric",)},
    "fig3": {"cs": (0.5, 1.0, 10.0), "phase_jump": False, "methods": ("numeric", "ica-reference")},
    "fig4": {"cs": (0.5, 1.0, 10.0), "phase_jump": True,
             "methods": ("numeric", "ica-phase-jump", "universal")},
    "fig5": {"cs": (-1.0, -4.0, -10.0), "phase_jump": True, "methods": ("numeric", "universal")},
}


def reproduce_figure(
    fig_id: str,
    b_grid: Optional[tuple[float, ...]] = None,
    config: Optional[SimConfig] = None,
    workers: int = 1,
) -> list[SweepTable]:
    """Produce the sweep tables behind one of the figure datasets (fig2..fig6)."""
    if fig_id not in FIGURE_IDS:
        raise InvalidArgumentError(f"unknown figure id {fig_id!r}; choose from {FIGURE_IDS}")
    grid = tuple(b_grid) if b_grid is not None else default_grid()
    cfg = config if config is not None else SimConfig()

    if fig_id == "fig6":
        ref = run_sweep(SweepSpec(grid=grid, c=0.0, param="b", methods=("numeric",),
                                  config=cfg), workers)
        jump = run_sweep(SweepSpec(grid=grid, c=0.0, param="b", phase_jump=True,
                                   methods=("numeric",), config=cfg), workers)
        rows = tuple(
            (rr[0], rr[1], jr[1]) for rr, jr in zip(ref.rows, jump.rows)
        )
        merged = SweepTable(
            columns=("b", "numeric-reference", "numeric-phase-jump"),
            rows=rows,
            metadata=(("figure", "fig6"), ("c", "0")) + ref.metadata,
        )
        return [merged]

    fig = _FIG_SETS[fig_id]
    tables = []
    for c in fig["cs"]:
        spec = SweepSpec(grid=grid, c=c, param="b", phase_jump=fig["phase_jump"],
                         methods=fig["methods"], config=cfg)
        table = run_sweep(spec, workers).with_metadata(("figure", fig_id), ("c", f"{c:g}"))
        if fig_id == "fig4":
            table = table.with_metadata(
                ("note", "c values assumed equal to the fig3 set")
            )
        tables.append(table)
    return tables


# ---------------------------------------------------------------------------
# convergence report
# ---------------------------------------------------------------------------

CONVERGENCE_DELTA = 1e-6


def _window_probability(model: DriveModel, t_half: float, cfg: SimConfig) -> float:
    """Transition probability over [-T, T], measured in the adiabatic basis.

    The adiabatic populations settle once |alpha| >> V, while the diabatic
    ones keep a small interference ripple of order V/alpha, so the adiabatic
    reading is the one that converges under window doubling.  Both agree in
    the asymptotic limit.  Falls back to the diabatic entry when the field is
    degenerate at the window edge (e.g. zero coupling).
    """
    u = propagate(model, -t_half, t_half, cfg)
    try:
        ua = to_adiabatic(u, model, t_half, -t_half)
        p = abs(ua.entries[2]) ** 2
    except DegenerateFieldError:
        p = abs(u.entries[1]) ** 2
    return min(max(p, 0.0), 1.0)


@dataclass(frozen=True)
class ConvergenceReport:
    """Probability versus doubled window and halved tolerance."""

    window_rows: tuple[tuple[float, float], ...]  # (half_width, probability)
    tolerance_rows: tuple[tuple[float, float], ...]  # (tolerance, probability)
    window_converged: bool
    tolerance_converged: bool
    threshold: float = CONVERGENCE_DELTA

    @property
    def converged(self) -> bool:
        return self.window_converged and self.tolerance_converged

    def to_text(self) -> str:
        lines = [f"{'T':>14}  {'P':>18}  {'|delta|':>10}"]
        prev = None
        for t, p in self.window_rows:
            d = "" if prev is None else f"{abs(p - prev):10.3e}"
            lines.append(f"{t:14.6f}  {p:18.12f}  {d}")
            prev = p
        lines.append(f"{'tol':>14}  {'P':>18}  {'|delta|':>10}")
        prev = None
        for tol, p in self.tolerance_rows:
            d = "" if prev is None else f"{abs(p - prev):10.3e}"
            lines.append(f"{tol:14.3e}  {p:18.12f}  {d}")
            prev = p
        status = "converged" if self.converged else "NOT converged"
        lines.append(f"{status} (threshold {self.threshold:g})")
        return "\n".join(lines)


def convergence_report(
    model: DriveModel,
    cfg: SimConfig = SimConfig(),
    threshold: float = CONVERGENCE_DELTA,
    max_doublings: int = 3,
) -> ConvergenceReport:
    """Tabulate P against doubled windows and halved tolerance.

    Windows double from the configured (or automatic) half-width until two
    successive probabilities differ by less than ``threshold``; the tolerance
    check then halves the local error tolerance at the final window.
    """
    t0 = cfg.window_half_width if cfg.window_half_width is not None else auto_window(
        model, cfg.window_scale_factor
    )
    window_rows = [(t0, _window_probability(model, t0, cfg))]
    window_converged = False
    t = t0
    for _ in range(max_doublings):
        t *= 2.0
        window_rows.append((t, _window_probability(model, t, cfg)))
        if abs(window_rows[-1][1] - window_rows[-2][1]) < threshold:
            window_converged = True
            break
    final_t = window_rows[-1][0]
    half_tol = replace(cfg, local_error_tol=cfg.local_error_tol / 2.0)
    tolerance_rows = (
        (cfg.local_error_tol, window_rows[-1][1]),
        (half_tol.local_error_tol, _window_probability(model, final_t, half_tol)),
    )
    tolerance_converged = abs(tolerance_rows[1][1] - tolerance_rows[0][1]) < threshold
    return ConvergenceReport(
        window_rows=tuple(window_rows),
        tolerance_rows=tolerance_rows,
        window_converged=window_converged,
        tolerance_converged=tolerance_converged,
        threshold=threshold,
    )


# ---------------------------------------------------------------------------
# CSV output
# ---------------------------------------------------------------------------

def _format_number(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    return f"{x:.16e}"


def write_csv(table: SweepTable, destination) -> None:
    """Write a sweep table as UTF-8 CSV.

    Metadata goes first as '#'-prefixed comment lines, then the header row,
    then one line per row with every number in round-trip precision scientific
    notation (missing values as the literal NaN).
    """
    lines = [f"# {k}: {v}" for k, v in table.metadata]
    lines.append(",".join(table.columns))
    for row in table.rows:
        lines.append(",".join(_format_number(x) for x in row))
    text = "\n".join(lines) + "\n"
    if hasattr(destination, "write"):
        destination.write(text)
        return
    path = Path(destination)
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise OSError(f"failed to write sweep table to {path}: {exc}") from exc
