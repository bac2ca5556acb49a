"""Command-line driver: configured sweeps (``run``) and canonical checks (``reproduce``).

Exit codes: 0 success, 1 a reproduced claim FAILed, 2 invalid input,
3 numerical failure, 4 I/O error.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError as SchemaError, model_validator

from . import __version__
from .claims import CLAIMS, ClaimReport, run_claim
from .delays import delay_report
from .errors import DeltaTunnelError, NumericalError
from .errors import ValidationError as ModelValidationError
from .packets import WavePacketSpec, propagate, synthesize
from .scatter import BarrierArray, scattering_amplitudes
from .superosc import FabryPerotSpec, SuperoscSpec, f_eval, fabry_perot_sum, local_wavenumber
from .weakval import (
    DwellIntegralSpec,
    construct_states,
    dwell_weak_integral,
    pointer_shift,
    two_level_problem,
    weak_value,
)

log = logging.getLogger("deltatunnel")

EXIT_OK, EXIT_FAIL, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_IO = 0, 1, 2, 3, 4
EXPERIMENTS = ("transmission", "delays", "packet", "superosc", "fabry", "weak", "dwell-weak")


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", strict=True)


class SceneConfig(_Strict):
    """Either an equally spaced array (``n``, ``length``, ``strength``) or explicit lists."""

    n: Optional[int] = Field(default=None, ge=0)
    length: Optional[float] = Field(default=None, gt=0)
    strength: Optional[float] = None
    positions: Optional[list[float]] = None
    strengths: Optional[list[float]] = None
    mass: float = Field(default=1.0, gt=0)
    hbar: float = Field(default=1.0, gt=0)
    inner_potential: float = 0.0

    @model_validator(mode="after")
    def _one_form(self):
        listed = self.positions is not None or self.strengths is not None
        spaced = self.n is not None or self.length is not None or self.strength is not None
        if listed == spaced:
            raise ValueError("give either n/length/strength or positions/strengths")
        if spaced and (self.n is None or self.strength is None or (self.n > 1 and self.length is None)):
            raise ValueError("n, length and strength are all required")
        if listed and (self.positions is None or self.strengths is None):
            raise ValueError("positions and strengths are both required")
        return self

    def build(self) -> BarrierArray:
        kw = dict(mass=self.mass, hbar=self.hbar, inner_potential=self.inner_potential)
        if self.positions is not None:
            return BarrierArray(tuple(self.positions), tuple(self.strengths), **kw)
        return BarrierArray.equally_spaced(self.n, self.length or 0.0, self.strength, **kw)


class SweepConfig(_Strict):
    k_min: Optional[float] = Field(default=None, gt=0)
    k_max: Optional[float] = Field(default=None, gt=0)
    steps: Optional[int] = Field(default=None, ge=1)
    N: Optional[int] = Field(default=None, ge=1)
    L: Optional[float] = None
    x0: Optional[float] = Field(default=None, gt=0)
    z_real: Optional[list[float]] = None
    z_imag: Optional[list[float]] = None
    a1: float = 0.0
    a2: float = 1.0

    @model_validator(mode="after")
    def _k_range(self):
        if self.k_min is not None and self.k_max is not None and self.k_max < self.k_min:
            raise ValueError("k_max < k_min")
        if (self.z_real is None) != (self.z_imag is None):
            raise ValueError("z_real and z_imag go together")
        if self.z_real is not None and len(self.z_real) != len(self.z_imag):
            raise ValueError("z_real and z_imag differ in length")
        return self

    def k_grid(self) -> np.ndarray:
        if self.k_min is None or self.k_max is None or self.steps is None:
            raise ValueError("sweep needs k_min, k_max and steps")
        return np.linspace(self.k_min, self.k_max, self.steps)


class PacketConfig(_Strict):
    k0: float = Field(gt=0)
    dk: float = Field(gt=0)
    x_center: float = 0.0
    k_points: int = Field(default=1025, ge=512)
    x_min: Optional[float] = None
    x_max: Optional[float] = None
    x_points: int = Field(default=201, ge=1)
    t_min: Optional[float] = None
    t_max: Optional[float] = None
    t_points: int = Field(default=1, ge=1)
    side: Literal["full", "left_of_barriers", "right_of_barriers"] = "full"
    post_selection: Literal["transmitted", "incident"] = "transmitted"
    region: Optional[tuple[float, float]] = None
    sigma_tau: Optional[float] = Field(default=None, gt=0)


class NumericsConfig(_Strict):
    dk_rel: float = Field(default=1e-5, gt=0)
    dv_rel: float = Field(default=1e-6, gt=0)
    local_dk: float = Field(default=1e-3, gt=0)
    quadrature_tol: float = Field(default=1e-5, gt=0)
    fabry_terms: int = Field(default=200, ge=1)


class OutputConfig(_Strict):
    path: str
    format: Literal["csv", "json"] = "csv"


class RunConfig(_Strict):
    experiment: Literal["transmission", "delays", "packet", "superosc", "fabry", "weak", "dwell-weak"]
    scene: Optional[SceneConfig] = None
    sweep: Optional[SweepConfig] = None
    packet: Optional[PacketConfig] = None
    numerics: NumericsConfig = NumericsConfig()
    output: OutputConfig

    @model_validator(mode="after")
    def _sections(self):
        need = {
            "transmission": ("scene", "sweep"),
            "delays": ("scene", "sweep"),
            "packet": ("scene", "packet"),
            "superosc": ("sweep",),
            "fabry": ("scene", "sweep"),
            "weak": ("sweep",),
            "dwell-weak": ("scene", "packet"),
        }[self.experiment]
        missing = [s for s in need if getattr(self, s) is None]
        if missing:
            raise ValueError(f"experiment {self.experiment!r} needs section(s) {missing}")
        if self.experiment in ("transmission", "delays", "fabry", "superosc"):
            sw = self.sweep
            if sw.k_min is None or sw.k_max is None or sw.steps is None:
                raise ValueError("sweep.k_min, sweep.k_max and sweep.steps are required")
        if self.experiment == "superosc" and (
            self.sweep.N is None or self.sweep.L is None or self.sweep.x0 is None
        ):
            raise ValueError("superosc needs sweep.N, sweep.L and sweep.x0")
        if self.experiment == "weak" and self.sweep.z_real is None:
            raise ValueError("weak needs sweep.z_real and sweep.z_imag")
        if self.experiment == "fabry" and (
            self.scene.n != 2 or self.scene.positions is not None
        ):
            raise ValueError("fabry needs an equally spaced scene with n = 2")
        if self.experiment == "packet":
            p = self.packet
            if None in (p.x_min, p.x_max, p.t_min, p.t_max):
                raise ValueError("packet needs x_min, x_max, t_min and t_max")
        return self


# --- table assembly ---------------------------------------------------------

def _status(exc: Exception) -> str:
    return type(exc).__name__


def _parallel(fn, items, threads):
    if threads <= 1 or len(items) < 2:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _nan_row(width):
    return (float("nan"),) * width


def _transmission(cfg: RunConfig, threads):
    b = cfg.scene.build()
    ks = cfg.sweep.k_grid()

    def row(k):
        try:
            t = complex(scattering_amplitudes(b, float(k))[0])
            return (t.real, t.imag, abs(t) ** 2, float(np.angle(t))), "ok"
        except NumericalError as e:
            return _nan_row(4), _status(e)

    out = _parallel(row, list(ks), threads)
    phase = np.array([r[0][3] for r in out])
    good = np.isfinite(phase)
    if np.any(good):
        phase[good] = np.unwrap(phase[good])
    rows = [(float(k), *r[:3], float(p), s) for k, (r, s), p in zip(ks, out, phase)]
    return ("k", "re_t", "im_t", "abs_t2", "arg_t", "status"), rows, {}


def _delays(cfg: RunConfig, threads):
    b = cfg.scene.build()
    ks = cfg.sweep.k_grid()
    nu = cfg.numerics

    def row(k):
        k = float(k)
        try:
            d = delay_report(b, k, dk=nu.dk_rel * k, dv=nu.dv_rel * float(b.energy(k)))
            vals = (d.group_delay, d.free_time, d.traversal_time, d.dwell_time,
                    d.group_delay_error, d.dwell_error)
            return (k, *vals, "ok")
        except (NumericalError, ModelValidationError, ValueError) as e:
            return (k, *_nan_row(6), _status(e))

    cols = ("k", "group_delay", "free_time", "traversal", "dwell", "group_delay_error",
            "dwell_error", "status")
    return cols, _parallel(row, list(ks), threads), {}


def _packet(cfg: RunConfig, threads):
    b = cfg.scene.build()
    p = cfg.packet
    spec = WavePacketSpec(p.k0, p.dk, x_center=p.x_center)
    amp = synthesize(spec, spec.k_grid(p.k_points))
    x = np.linspace(p.x_min, p.x_max, p.x_points)
    t = np.linspace(p.t_min, p.t_max, p.t_points)
    f = propagate(amp, b, x, t, side=p.side, tol=cfg.numerics.quadrature_tol)
    rows = [
        (float(ti), float(xj), complex(v).real, complex(v).imag, "ok")
        for ti, line in zip(t, f.values)
        for xj, v in zip(x, line)
    ]
    return ("t", "x", "re_psi", "im_psi", "status"), rows, {"quadrature_error": f.error_estimate}


def _superosc(cfg: RunConfig, threads):
    sw = cfg.sweep
    s = SuperoscSpec(sw.N, sw.L, sw.x0)
    ks = sw.k_grid()
    dk = cfg.numerics.local_dk
    f = f_eval(s, ks, track_branch=ks.size > 1)

    def row(i):
        k = float(ks[i])
        try:
            lw, status = local_wavenumber(s, k, dk), "ok"
        except NumericalError as e:
            lw, status = float("nan"), _status(e)
        return (k, f[i].real, f[i].imag, abs(f[i]), lw, status)

    return ("k", "re_F", "im_F", "abs_F", "local_wavenumber", "status"), _parallel(
        row, list(range(ks.size)), threads
    ), {}


def _fabry(cfg: RunConfig, threads):
    sc = cfg.scene
    ks = cfg.sweep.k_grid()

    def row(k):
        k = float(k)
        try:
            spec = FabryPerotSpec.from_strength(
                sc.strength, k, sc.length, cfg.numerics.fabry_terms, sc.mass, sc.hbar
            )
            s = fabry_perot_sum(spec)
            vals = (s.closed_form, s.exact_partial, s.exact_closed)
            return (k, *[p for v in vals for p in (v.real, v.imag)], s.ratio, "ok")
        except (NumericalError, DeltaTunnelError) as e:
            return (k, *_nan_row(7), _status(e))

    cols = ("k", "re_closed", "im_closed", "re_exact_partial", "im_exact_partial",
            "re_exact_closed", "im_exact_closed", "ratio", "status")
    return cols, _parallel(row, list(ks), threads), {}


def _weak(cfg: RunConfig, threads):
    sw = cfg.sweep

    def row(z):
        try:
            a = construct_states(z, sw.a1, sw.a2)
            w = weak_value(two_level_problem(a, sw.a1, sw.a2))
            return (z.real, z.imag, a[0].real, a[0].imag, a[1].real, a[1].imag,
                    w.real, w.imag, "ok")
        except DeltaTunnelError as e:
            return (z.real, z.imag, *_nan_row(6), _status(e))

    zs = [complex(r, i) for r, i in zip(sw.z_real, sw.z_imag)]
    cols = ("re_z", "im_z", "re_alpha1", "im_alpha1", "re_alpha2", "im_alpha2", "re_weak",
            "im_weak", "status")
    return cols, _parallel(row, zs, threads), {}


def _dwell_weak(cfg: RunConfig, threads):
    p = cfg.packet
    spec = DwellIntegralSpec(
        WavePacketSpec(p.k0, p.dk, x_center=p.x_center),
        cfg.scene.build(),
        region=p.region,
        post_selection=p.post_selection,
        k_points=p.k_points,
    )
    r = dwell_weak_integral(spec)
    cols = ["re_E", "im_E", "re_denominator", "im_denominator", "denominator_drift",
            "t_start", "t_end"]
    row = [r.value.real, r.value.imag, r.denominator.real, r.denominator.imag,
           r.denominator_drift, *r.t_window]
    if p.sigma_tau is not None:
        ptr = pointer_shift(r.value, p.sigma_tau, cfg.scene.hbar)
        cols += ["pointer_position_shift", "pointer_momentum_shift"]
        row += [ptr.position_shift, ptr.momentum_shift]
    return tuple(cols) + ("status",), [tuple(row) + ("ok",)], {"tail_fraction": r.tail_fraction}


_RUNNERS = {
    "transmission": _transmission,
    "delays": _delays,
    "packet": _packet,
    "superosc": _superosc,
    "fabry": _fabry,
    "weak": _weak,
    "dwell-weak": _dwell_weak,
}


# --- output ------------------------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    v = float(v)
    if np.isnan(v):
        return "nan"
    return format(v, ".16e")


def _timestamp() -> str:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    when = (
        _dt.datetime.fromtimestamp(int(epoch), _dt.timezone.utc)
        if epoch
        else _dt.datetime.now(_dt.timezone.utc)
    )
    return when.strftime("%Y-%m-%dT%H:%M:%SZ")


def render_csv(meta: list[tuple[str, str]], columns, rows) -> str:
    lines = [f"# tool: deltatunnel {__version__}", f"# generated: {_timestamp()}"]
    lines += [f"# {k}: {v}" for k, v in meta]
    lines.append(",".join(columns))
    lines += [",".join(_fmt(v) for v in r) for r in rows]
    return "\n".join(lines) + "\n"


def render_json(meta: list[tuple[str, str]], columns, rows) -> str:
    def clean(v):
        if isinstance(v, str):
            return v
        v = float(v)
        return None if np.isnan(v) else v

    doc = {
        "tool": f"deltatunnel {__version__}",
        "generated": _timestamp(),
        "metadata": dict(meta),
        "columns": list(columns),
        "rows": [[clean(v) for v in r] for r in rows],
    }
    return json.dumps(doc, indent=1) + "\n"


def config_from_text(text: str) -> RunConfig:
    return RunConfig.model_validate_json(text)


def config_echo(cfg: RunConfig) -> str:
    """One-line JSON that :func:`config_from_text` turns back into ``cfg``."""
    return cfg.model_dump_json()


def execute(cfg: RunConfig, threads: int = 1) -> str:
    """Run one configured experiment and return the rendered file contents."""
    columns, rows, extra = _RUNNERS[cfg.experiment](cfg, threads)
    meta = [("config", config_echo(cfg)), ("experiment", cfg.experiment), ("rows", str(len(rows)))]
    if cfg.sweep is not None and cfg.sweep.steps is not None:
        meta.append(("grid", f"k_min={cfg.sweep.k_min!r} k_max={cfg.sweep.k_max!r} steps={cfg.sweep.steps}"))
    meta += [(k, _fmt(v)) for k, v in extra.items()]
    failed = sum(1 for r in rows if r[-1] != "ok")
    meta.append(("failed_rows", str(failed)))
    render = render_json if cfg.output.format == "json" else render_csv
    return render(meta, columns, rows)


def render_claim(rep: ClaimReport) -> str:
    meta = [
        ("claim", rep.claim_id),
        ("description", rep.description),
        ("config", json.dumps(rep.config, sort_keys=True)),
    ]
    for c in rep.checks:
        meta.append(("check", f"{c.name} = {_fmt(c.value)} {c.relation} {_fmt(c.bound)} "
                              f"{'PASS' if c.passed else 'FAIL'}"))
    meta.append(("verdict", rep.verdict))
    return render_csv(meta, rep.columns, rep.rows)


# --- entry point -------------------------------------------------------------

def resolve_threads(cli_value: int) -> int:
    env = os.environ.get("TOOL_THREADS")
    n = cli_value
    if env is not None and env.strip():
        try:
            n = int(env)
        except ValueError:
            raise ValueError(f"TOOL_THREADS must be an integer, got {env!r}") from None
    if n < 0:
        raise ValueError(f"thread count must be >= 0, got {n}")
    return n or (os.cpu_count() or 1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="deltatunnel",
        description="Tunneling through delta-barrier arrays: sweeps and canonical checks.",
    )
    parser.add_argument("--version", action="version", version=f"deltatunnel {__version__}")
    parser.add_argument("--quiet", action="store_true", help="only report errors")
    parser.add_argument("--threads", type=int, default=0, help="worker threads (0 = auto)")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run an experiment from a JSON config")
    run.add_argument("--config", required=True, type=Path)
    rep = sub.add_parser("reproduce", help="run a canonical check and report PASS/FAIL")
    rep.add_argument("claim", choices=sorted(CLAIMS))
    rep.add_argument("--out", type=Path, default=None, help="directory for <claim>.csv")
    return parser


def _write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write(text)


def _cmd_run(args, threads) -> int:
    try:
        text = args.config.read_text()
    except OSError as e:
        log.error("cannot read config: %s", e)
        return EXIT_IO
    try:
        cfg = config_from_text(text)
    except SchemaError as e:
        for err in e.errors():
            loc = ".".join(str(p) for p in err["loc"]) or "<root>"
            log.error("config %s: %s", loc, err["msg"])
        return EXIT_VALIDATION
    try:
        out = execute(cfg, threads)
    except (ModelValidationError, ValueError) as e:
        log.error("invalid input: %s", e)
        return EXIT_VALIDATION
    except NumericalError as e:
        log.error("numerical failure (%s): %s", type(e).__name__, e)
        return EXIT_NUMERICAL
    try:
        _write(Path(cfg.output.path), out)
    except OSError as e:
        log.error("cannot write output: %s", e)
        return EXIT_IO
    log.info("wrote %s", cfg.output.path)
    return EXIT_OK


def _cmd_reproduce(args) -> int:
    try:
        rep = run_claim(args.claim)
    except NumericalError as e:
        log.error("numerical failure (%s): %s", type(e).__name__, e)
        return EXIT_NUMERICAL
    text = render_claim(rep)
    if args.out is not None:
        try:
            _write(args.out / f"{args.claim}.csv", text)
        except OSError as e:
            log.error("cannot write output: %s", e)
            return EXIT_IO
    else:
        sys.stdout.write(text)
    for c in rep.checks:
        log.info("%s  %s = %.6g %s %.6g", "PASS" if c.passed else "FAIL", c.name, c.value,
                 c.relation, c.bound)
    log.info("%s: %s", rep.claim_id, rep.verdict)
    return EXIT_OK if rep.passed else EXIT_FAIL


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.ERROR if args.quiet else logging.INFO,
        format="%(levelname)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )
    try:
        threads = resolve_threads(args.threads)
    except ValueError as e:
        log.error("%s", e)
        return EXIT_VALIDATION
    if args.command == "run":
        return _cmd_run(args, threads)
    return _cmd_reproduce(args)


if __name__ == "__main__":
    sys.exit(main())
