"""Experiment runner: single runs, spec-file grids, CSV traces and SVG plots."""

from __future__ import annotations

import csv
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from xml.sax.saxutils import escape

from .metrics import EXPLOITABILITY_FLOOR, ConvergenceRecord
from .solver import SolverConfig, solve

log = logging.getLogger(__name__)

CSV_HEADER = ("iteration", "exploitability", "delta1", "delta2", "elapsed_ms")
DEFAULT_EVAL_INTERVAL = 20


class SpecError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentSpec:
    game: str
    variant: str
    iterations: int
    out: str
    alpha: float | None = None
    beta: float | None = None
    gamma: float | None = None
    eval_interval: int = DEFAULT_EVAL_INTERVAL
    seed: int = 0  # runs are deterministic; kept so spec files can carry one
    timing: bool = False

    def config(self) -> SolverConfig:
        return SolverConfig(
            variant=self.variant,
            alpha=self.alpha,
            beta=self.beta,
            gamma=self.gamma,
            iterations=self.iterations,
            eval_interval=self.eval_interval,
            timing=self.timing,
        )


def _fmt(value) -> str:
    # repr gives the shortest string that round-trips the double exactly
    return str(value) if isinstance(value, int) else repr(float(value))


def write_csv(records, path) -> None:
    path = Path(path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for rec in records:
            writer.writerow([_fmt(v) for v in rec.as_row()])


def read_csv(path) -> list[ConvergenceRecord]:
    records = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != CSV_HEADER:
            raise SpecError(f"{path}:1: expected header {','.join(CSV_HEADER)}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(CSV_HEADER):
                raise SpecError(f"{path}:{lineno}: expected {len(CSV_HEADER)} fields, got {len(row)}")
            try:
                records.append(ConvergenceRecord(int(row[0]), *(float(v) for v in row[1:])))
            except ValueError as exc:
                raise SpecError(f"{path}:{lineno}: {exc}") from None
    return records


def run(spec: ExperimentSpec) -> list[ConvergenceRecord]:
    result = solve(spec.game, spec.config())
    write_csv(result.records, spec.out)
    log.info("wrote %s (%d rows)", spec.out, len(result.records))
    return result.records


# Spec files ------------------------------------------------------------------

_CASTS = {
    "iterations": int,
    "eval_interval": int,
    "seed": int,
    "alpha": float,
    "beta": float,
    "gamma": float,
    "timing": lambda s: s.lower() in ("1", "true", "yes", "on"),
}
_KEYS = {f.name for f in fields(ExperimentSpec)}


def default_name(game: str, variant: str) -> str:
    safe = "".join(c if c.isalnum() or c in "-_." else "_" for c in game)
    return f"{safe}__{variant}.csv"


def parse_specs(text: str, out_dir=".", source: str = "<specs>") -> list[ExperimentSpec]:
    """Stanzas of ``key=value`` lines separated by blank lines; ``#`` starts a comment."""
    stanzas, current = [], []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            if current:
                stanzas.append(current)
                current = []
            continue
        current.append((lineno, line))
    if current:
        stanzas.append(current)

    specs = []
    for stanza in stanzas:
        values: dict = {}
        for lineno, line in stanza:
            key, sep, value = line.partition("=")
            key = key.strip().replace("-", "_")
            if not sep or key not in _KEYS:
                raise SpecError(f"{source}:{lineno}: expected key=value with key in {sorted(_KEYS)}")
            try:
                values[key] = _CASTS.get(key, str)(value.strip())
            except ValueError:
                raise SpecError(f"{source}:{lineno}: bad value for {key}: {value.strip()!r}") from None
        first = stanza[0][0]
        for key in ("game", "variant", "iterations"):
            if key not in values:
                raise SpecError(f"{source}:{first}: stanza is missing {key}")
        out = values.pop("out", default_name(values["game"], values["variant"]))
        values["out"] = str(Path(out_dir) / out) if not os.path.isabs(out) else out
        specs.append(ExperimentSpec(**values))

    seen: dict[str, int] = {}
    for i, spec in enumerate(specs):
        key = os.path.normpath(spec.out)
        if key in seen:
            raise SpecError(f"{source}: stanzas {seen[key] + 1} and {i + 1} both write {spec.out}")
        seen[key] = i
    return specs


def _run_one(spec_dict: dict):
    spec = ExperimentSpec(**spec_dict)
    try:
        run(spec)
        return spec.out, None
    except Exception as exc:  # reported per stanza, the rest keep going
        return spec.out, f"{type(exc).__name__}: {exc}"


def grid(specs_file, out_dir, jobs: int = 1) -> list[tuple[str, str | None]]:
    """Run every stanza; returns ``(output path, error or None)`` per stanza."""
    text = Path(specs_file).read_text()
    specs = parse_specs(text, out_dir, source=str(specs_file))
    Path(out_dir).mkdir(parents=True, exist_ok=True)
    if not specs:
        log.warning("%s holds no experiments; nothing to do", specs_file)
        return []
    payload = [asdict(s) for s in specs]
    if jobs <= 1 or len(specs) == 1:
        return [_run_one(p) for p in payload]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run_one, payload))


# SVG -------------------------------------------------------------------------

WIDTH, HEIGHT = 800, 600
MARGIN = {"left": 80, "right": 170, "top": 30, "bottom": 60}
COLORS = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")


def series_label(path) -> str:
    stem = Path(path).stem
    return stem.rsplit("__", 1)[-1]


def render_svg(series: list[tuple[str, list[tuple[int, float]]]]) -> str:
    points = [p for _, pts in series for p in pts]
    x_max = max((p[0] for p in points), default=1)
    x_min = min((p[0] for p in points), default=0)
    if x_max == x_min:
        x_max = x_min + 1
    logs = [math.log10(max(p[1], EXPLOITABILITY_FLOOR)) for p in points] or [0.0]
    y_lo, y_hi = math.floor(min(logs)), math.ceil(max(logs))
    if y_hi == y_lo:
        y_hi = y_lo + 1
    pw = WIDTH - MARGIN["left"] - MARGIN["right"]
    ph = HEIGHT - MARGIN["top"] - MARGIN["bottom"]

    def sx(x):
        return MARGIN["left"] + (x - x_min) / (x_max - x_min) * pw

    def sy(v):
        lv = math.log10(max(v, EXPLOITABILITY_FLOOR))
        return MARGIN["top"] + (y_hi - lv) / (y_hi - y_lo) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        '<rect width="100%" height="100%" fill="white"/>',
        f'<rect x="{MARGIN["left"]}" y="{MARGIN["top"]}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    step = max(1, (y_hi - y_lo) // 8)
    for e in range(y_lo, y_hi + 1, step):
        y = MARGIN["top"] + (y_hi - e) / (y_hi - y_lo) * ph
        out.append(f'<line x1="{MARGIN["left"]}" y1="{y:.2f}" x2="{MARGIN["left"] + pw}" y2="{y:.2f}" stroke="#ddd"/>')
        out.append(f'<text x="{MARGIN["left"] - 8}" y="{y + 4:.2f}" font-size="12" text-anchor="end">1e{e}</text>')
    for k in range(5):
        xv = x_min + (x_max - x_min) * k / 4
        x = sx(xv)
        out.append(f'<text x="{x:.2f}" y="{MARGIN["top"] + ph + 20}" font-size="12" text-anchor="middle">{int(round(xv))}</text>')
    out.append(f'<text x="{MARGIN["left"] + pw / 2}" y="{HEIGHT - 15}" font-size="14" text-anchor="middle">iteration</text>')
    out.append(
        f'<text x="20" y="{MARGIN["top"] + ph / 2}" font-size="14" text-anchor="middle" '
        f'transform="rotate(-90 20 {MARGIN["top"] + ph / 2})">exploitability</text>'
    )
    for i, (label, pts) in enumerate(series):
        color = COLORS[i % len(COLORS)]
        coords = " ".join(f"{sx(x):.2f},{sy(v):.2f}" for x, v in pts)
        out.append(f'<polyline class="series" data-label="{escape(label)}" fill="none" stroke="{color}" stroke-width="1.5" points="{coords}"/>')
        ly = MARGIN["top"] + 20 + 20 * i
        lx = MARGIN["left"] + pw + 15
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 25}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text class="legend" x="{lx + 32}" y="{ly + 4}" font-size="12">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def plot(csv_paths, out_svg) -> None:
    if not csv_paths:
        raise SpecError("plot needs at least one CSV")
    series = []
    for path in csv_paths:
        recs = read_csv(path)
        series.append((series_label(path), [(r.iteration, r.exploitability) for r in recs]))
    Path(out_svg).write_text(render_svg(series))
