"""Sweep runner: repeated estimation over a p grid, CSV/SVG emission.

A sweep walks the mixing parameter p over a grid at fixed q, runs M repeated
estimations of all six estimators (three measures, non-optimal and optimal
variants) from fresh samples at each point, and aggregates means and
single-estimate standard deviations together with the three theory curves.
Each grid point also gets a tomographic reconstruction whose family fit
supplies the p_fitted column, so plots can use either the true or the
reconstructed mixing parameter on the x axis.

All randomness derives from the master seed through counter-based stream
indices, making sweep outputs byte-identical across runs and platforms.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from . import estimation, measurement, states, tomography
from .errors import ConfigError
from .streams import RandomStream

DIRECT_STATE = "DirectState"
POST_PROCESS_MIX = "PostProcessMix"
MIXING_MODES = (DIRECT_STATE, POST_PROCESS_MIX)

# sweep kinds: concurrence coincides with negativity on the family and is
# deliberately not duplicated as a fourth block of rows
SWEEP_KINDS = (states.NEGATIVITY, states.LOG_NEGATIVITY, states.QGD)

CSV_HEADER = ("p_true,p_fitted,kind,variant,mean,stddev,"
              "theory_value,unc_nonopt,unc_qcrb,n_shots,reps,seed")

# stream slot layout: run_index = (point*M + rep)*8 + slot
SLOT_DIRECT = 0
SLOT_PURE = 1
SLOT_MIX = 2
SLOT_SELECT = 3
TOMO_FLAG = 1 << 62

_DEFAULT_GRID = tuple(round(0.1 * k, 10) for k in range(11))


@dataclass(frozen=True)
class SweepConfig:
    """Sweep parameters; defaults reproduce the reference figure layout."""

    q: float = 0.5
    p_grid: tuple[float, ...] = _DEFAULT_GRID
    n_shots: int = 10_000
    repetitions: int = 10
    variance_reps: int = 1_000
    master_seed: int = 42
    mixing_mode: str = DIRECT_STATE

    def validate(self) -> "SweepConfig":
        if not 0.0 <= self.q <= 1.0:
            raise ConfigError(f"q must lie in [0, 1], got {self.q}")
        if len(self.p_grid) == 0:
            raise ConfigError("p_grid is empty")
        for p in self.p_grid:
            if not 0.0 <= p <= 1.0:
                raise ConfigError(f"grid value {p} outside [0, 1]")
        if self.n_shots < 1:
            raise ConfigError(f"n_shots must be >= 1, got {self.n_shots}")
        if self.repetitions < 2:
            raise ConfigError("repetitions must be >= 2 for a standard deviation")
        if self.variance_reps < 1:
            raise ConfigError(f"variance_reps must be >= 1, got {self.variance_reps}")
        if not isinstance(self.master_seed, int):
            raise ConfigError("master_seed must be an integer")
        if self.mixing_mode not in MIXING_MODES:
            raise ConfigError(f"mixing_mode must be one of {MIXING_MODES}, "
                              f"got {self.mixing_mode!r}")
        return self

    def to_text(self) -> str:
        grid = ", ".join(format(p, ".12g") for p in self.p_grid)
        return (
            "# sweep configuration (flat key = value format)\n"
            f"q = {format(self.q, '.12g')}\n"
            f"p_grid = {grid}\n"
            f"n_shots = {self.n_shots}\n"
            f"repetitions = {self.repetitions}\n"
            f"variance_reps = {self.variance_reps}\n"
            f"master_seed = {self.master_seed}\n"
            f"mixing_mode = {self.mixing_mode}\n"
        )


def _parse_int(value: str) -> int:
    try:
        return int(value, 0)
    except ValueError as exc:
        raise ValueError(f"not an integer: {value!r}") from exc


def parse_grid(value: str) -> tuple[float, ...]:
    cleaned = value.strip().strip("[]")
    parts = [part for chunk in cleaned.split(",") for part in chunk.split()]
    return tuple(float(part) for part in parts)


_FIELD_PARSERS = {
    "q": float,
    "p_grid": parse_grid,
    "n_shots": _parse_int,
    "repetitions": _parse_int,
    "variance_reps": _parse_int,
    "master_seed": _parse_int,
    "mixing_mode": str,
}


def parse_config_text(text: str) -> dict:
    """Parse the flat key = value config format into typed values."""
    out: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"config line {lineno}: expected key = value")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in _FIELD_PARSERS:
            raise ConfigError(f"config line {lineno}: unknown key {key!r}")
        try:
            out[key] = _FIELD_PARSERS[key](value)
        except ValueError as exc:
            raise ConfigError(f"config line {lineno}: {exc}") from exc
    return out


def build_config(file_text: str | None = None, **overrides) -> SweepConfig:
    """Defaults, overlaid by an optional config file, then keyword overrides."""
    merged: dict = {}
    if file_text is not None:
        merged.update(parse_config_text(file_text))
    for key, value in overrides.items():
        if value is None:
            continue
        if key not in _FIELD_PARSERS:
            raise ConfigError(f"unknown config key {key!r}")
        merged[key] = value
    if "p_grid" in merged:
        merged["p_grid"] = tuple(float(p) for p in merged["p_grid"])
    return dataclasses.replace(SweepConfig(), **merged).validate()


@dataclass
class EstimatorStats:
    """Aggregates for one estimator at one grid point."""

    kind: str
    variant: str
    mean: float
    stddev: float
    theory_value: float
    unc_nonopt: float
    unc_qcrb: float


@dataclass
class SweepRow:
    p_true: float
    p_fitted: float
    stats: list[EstimatorStats] = field(default_factory=list)


_CLOSED_FORMS = {
    states.NEGATIVITY: states.negativity_closed,
    states.LOG_NEGATIVITY: states.log_negativity_closed,
    states.QGD: states.qgd_closed,
}


def _run_stream(cfg: SweepConfig, point: int, rep: int, slot: int) -> RandomStream:
    return RandomStream(cfg.master_seed,
                        (point * cfg.repetitions + rep) * 8 + slot)


def _draw_counts(cfg: SweepConfig, p: float, point: int,
                 rep: int) -> measurement.OutcomeCounts:
    if cfg.mixing_mode == DIRECT_STATE:
        rho = states.family_state(p, cfg.q)
        return measurement.sample_counts(rho, measurement.DA_DA, cfg.n_shots,
                                         _run_stream(cfg, point, rep, SLOT_DIRECT))
    pure = measurement.sample_counts(states.family_state(1.0, cfg.q),
                                     measurement.DA_DA, cfg.n_shots,
                                     _run_stream(cfg, point, rep, SLOT_PURE))
    mixed = measurement.sample_counts(states.dephased_mixture(),
                                      measurement.DA_DA, cfg.n_shots,
                                      _run_stream(cfg, point, rep, SLOT_MIX))
    return measurement.mix_counts(pure, mixed, p,
                                  _run_stream(cfg, point, rep, SLOT_SELECT))


def _fit_p(cfg: SweepConfig, p: float, point: int) -> float:
    rho = states.family_state(p, cfg.q)
    stream = RandomStream(cfg.master_seed, TOMO_FLAG | point)
    dataset = tomography.simulate_tomography(rho, cfg.n_shots, stream)
    recon = tomography.reconstruct_mle(dataset)
    fit = states.fit_family_params(tomography.project_physical(recon.rho_hat))
    return fit.p


def run_sweep(cfg: SweepConfig) -> list[SweepRow]:
    """M repeated six-estimator runs at every grid point, plus a tomographic fit."""
    cfg.validate()
    rows = []
    for point, p in enumerate(cfg.p_grid):
        values: dict[tuple[str, str], list[float]] = {
            (kind, variant): []
            for kind in SWEEP_KINDS for variant in estimation.VARIANTS}
        for rep in range(cfg.repetitions):
            counts = _draw_counts(cfg, p, point, rep)
            for kind in SWEEP_KINDS:
                for variant in estimation.VARIANTS:
                    result = estimation.estimate(kind, variant, counts)
                    values[(kind, variant)].append(result.value_clamped)
        stats = []
        for kind in SWEEP_KINDS:
            truth = _CLOSED_FORMS[kind](p, cfg.q)
            for variant in estimation.VARIANTS:
                arr = np.asarray(values[(kind, variant)])
                stats.append(EstimatorStats(
                    kind=kind,
                    variant=variant,
                    mean=float(arr.mean()),
                    stddev=float(arr.std(ddof=1)),
                    theory_value=truth,
                    unc_nonopt=float(estimation.nonopt_unc_curves(kind, truth)),
                    unc_qcrb=float(estimation.qcrb_unc(kind, truth)),
                ))
        rows.append(SweepRow(p_true=float(p), p_fitted=_fit_p(cfg, p, point),
                             stats=stats))
    return rows


def _fmt(x: float) -> str:
    return format(float(x), ".12g")


def csv_text(rows: list[SweepRow], cfg: SweepConfig) -> str:
    if not rows:
        raise ConfigError("no sweep rows to emit")
    lines = [CSV_HEADER]
    for row in rows:
        for st in row.stats:
            lines.append(",".join([
                _fmt(row.p_true), _fmt(row.p_fitted), st.kind, st.variant,
                _fmt(st.mean), _fmt(st.stddev), _fmt(st.theory_value),
                _fmt(st.unc_nonopt), _fmt(st.unc_qcrb),
                str(cfg.n_shots), str(cfg.repetitions), str(cfg.master_seed),
            ]))
    return "\n".join(lines) + "\n"


def emit_csv(rows: list[SweepRow], cfg: SweepConfig, path) -> str:
    text = csv_text(rows, cfg)
    with open(path, "wb") as fh:
        fh.write(text.encode("ascii"))
    return str(path)


# --- SVG ----------------------------------------------------------------------

_SVG_W, _SVG_H = 720, 520
_ML, _MR, _MT, _MB = 72, 24, 46, 58
_CURVE_POINTS = 201

_KIND_TITLES = {
    states.NEGATIVITY: "negativity",
    states.LOG_NEGATIVITY: "log-negativity",
    states.QGD: "geometric discord",
}


def _polyline(xs, ys, sx, sy, style: str) -> str:
    pts = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(xs, ys))
    return f'<polyline fill="none" {style} points="{pts}"/>'


def svg_text(rows: list[SweepRow], cfg: SweepConfig, kind: str,
             variant: str) -> str:
    if not rows:
        raise ConfigError("no sweep rows to plot")
    if kind not in SWEEP_KINDS:
        raise ConfigError(f"unknown sweep kind {kind!r}")
    if variant not in estimation.VARIANTS:
        raise ConfigError(f"unknown variant {variant!r}")

    picked = [(row, st) for row in rows for st in row.stats
              if st.kind == kind and st.variant == variant]
    xs = np.array([row.p_true for row, _ in picked])
    means = np.array([st.mean for _, st in picked])
    errs = np.array([st.stddev for _, st in picked])

    closed = _CLOSED_FORMS[kind]
    dense = np.linspace(0.0, 1.0, _CURVE_POINTS)
    value = np.array([closed(p, cfg.q) for p in dense])
    half_n = np.array([estimation.nonopt_unc_curves(kind, v) for v in value])
    half_q = np.array([estimation.qcrb_unc(kind, v) for v in value])
    root_n = np.sqrt(cfg.n_shots)
    env_n_lo, env_n_hi = value - half_n / root_n, value + half_n / root_n
    env_q_lo, env_q_hi = value - half_q / root_n, value + half_q / root_n

    y_all = np.concatenate([value, env_n_lo, env_n_hi, env_q_lo, env_q_hi,
                            means - errs, means + errs])
    y_min, y_max = float(y_all.min()), float(y_all.max())
    pad = 0.06 * (y_max - y_min or 1.0)
    y_min, y_max = y_min - pad, y_max + pad

    def sx(x: float) -> float:
        return _ML + (x - 0.0) / 1.0 * (_SVG_W - _ML - _MR)

    def sy(y: float) -> float:
        return _SVG_H - _MB - (y - y_min) / (y_max - y_min) * (_SVG_H - _MT - _MB)

    dashed = 'stroke="#1565c0" stroke-width="1.8" stroke-dasharray="8 5"'
    dotted = 'stroke="#e65100" stroke-width="1.4" stroke-dasharray="2 4"'
    solid = 'stroke="#2e7d32" stroke-width="1.6"'

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_SVG_W}" '
        f'height="{_SVG_H}" viewBox="0 0 {_SVG_W} {_SVG_H}">',
        f'<rect width="{_SVG_W}" height="{_SVG_H}" fill="white"/>',
        f'<text x="{_SVG_W / 2:.0f}" y="26" text-anchor="middle" '
        f'font-family="sans-serif" font-size="17">'
        f'{_KIND_TITLES[kind]} ({variant} estimator)</text>',
    ]
    # axes
    x0, y0 = _ML, _SVG_H - _MB
    parts.append(f'<line x1="{x0}" y1="{y0}" x2="{_SVG_W - _MR}" y2="{y0}" '
                 f'stroke="#333" stroke-width="1"/>')
    parts.append(f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{_MT}" '
                 f'stroke="#333" stroke-width="1"/>')
    for tick in np.linspace(0.0, 1.0, 6):
        tx = sx(tick)
        parts.append(f'<line x1="{tx:.2f}" y1="{y0}" x2="{tx:.2f}" y2="{y0 + 5}" '
                     f'stroke="#333" stroke-width="1"/>')
        parts.append(f'<text x="{tx:.2f}" y="{y0 + 20}" text-anchor="middle" '
                     f'font-family="sans-serif" font-size="12">{tick:.1f}</text>')
    for tick in np.linspace(y_min, y_max, 6):
        ty = sy(tick)
        parts.append(f'<line x1="{x0 - 5}" y1="{ty:.2f}" x2="{x0}" y2="{ty:.2f}" '
                     f'stroke="#333" stroke-width="1"/>')
        parts.append(f'<text x="{x0 - 9}" y="{ty + 4:.2f}" text-anchor="end" '
                     f'font-family="sans-serif" font-size="12">{tick:.3g}</text>')
    parts.append(f'<text x="{(_ML + _SVG_W - _MR) / 2:.0f}" y="{_SVG_H - 16}" '
                 f'text-anchor="middle" font-family="sans-serif" font-size="14">'
                 f'mixing parameter p</text>')
    parts.append(f'<text x="20" y="{(_MT + _SVG_H - _MB) / 2:.0f}" '
                 f'text-anchor="middle" font-family="sans-serif" font-size="14" '
                 f'transform="rotate(-90 20 {(_MT + _SVG_H - _MB) / 2:.0f})">'
                 f'{_KIND_TITLES[kind]}</text>')
    # theory curves: dashed value, dotted non-optimal envelope, solid qcrb envelope
    parts.append(_polyline(dense, value, sx, sy, dashed))
    parts.append(_polyline(dense, env_n_lo, sx, sy, dotted))
    parts.append(_polyline(dense, env_n_hi, sx, sy, dotted))
    parts.append(_polyline(dense, env_q_lo, sx, sy, solid))
    parts.append(_polyline(dense, env_q_hi, sx, sy, solid))
    # data: error bars are the single-estimate standard deviation
    for x, m, e in zip(xs, means, errs):
        cx, top, bot = sx(x), sy(m + e), sy(m - e)
        parts.append(f'<line x1="{cx:.2f}" y1="{top:.2f}" x2="{cx:.2f}" '
                     f'y2="{bot:.2f}" stroke="#111" stroke-width="1.2"/>')
        for ty in (top, bot):
            parts.append(f'<line x1="{cx - 4:.2f}" y1="{ty:.2f}" '
                         f'x2="{cx + 4:.2f}" y2="{ty:.2f}" '
                         f'stroke="#111" stroke-width="1.2"/>')
        parts.append(f'<circle cx="{cx:.2f}" cy="{sy(m):.2f}" r="3" fill="#111"/>')
    # legend
    lx, ly = _ML + 12, _MT + 8
    for label, style in (("theory value", dashed),
                         ("non-optimal bound", dotted),
                         ("quantum bound", solid)):
        parts.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 34}" y2="{ly}" {style}/>')
        parts.append(f'<text x="{lx + 40}" y="{ly + 4}" font-family="sans-serif" '
                     f'font-size="12">{label}</text>')
        ly += 18
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def emit_svg(rows: list[SweepRow], cfg: SweepConfig, kind: str, variant: str,
             path) -> str:
    text = svg_text(rows, cfg, kind, variant)
    with open(path, "wb") as fh:
        fh.write(text.encode("ascii"))
    return str(path)


def emit_all(rows: list[SweepRow], cfg: SweepConfig, out_dir) -> list[str]:
    """sweep.csv plus one SVG per (kind, variant): the six-panel figure set."""
    import os
    os.makedirs(out_dir, exist_ok=True)
    written = [emit_csv(rows, cfg, os.path.join(out_dir, "sweep.csv"))]
    for kind in SWEEP_KINDS:
        for variant in estimation.VARIANTS:
            name = f"{kind}_{variant}.svg"
            written.append(emit_svg(rows, cfg, kind, variant,
                                    os.path.join(out_dir, name)))
    return written
