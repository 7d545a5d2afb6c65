"""Command-line entry point: ``spinxfer {spectrum,check-spmc,evolve,transfer,sweep}``.

Runs are described by an INI-style file::

    [model]
    type = engineered        ; engineered | parabolic | custom
    N = 10
    k = 2

    [spmc]
    tol = 1e-9

Parabolic models take ``distance``, ``width`` and either ``lambda`` or ``B0``
plus ``margin`` (or ``half_length``). Custom models read ``diagonal`` and
``offdiagonal`` from two-column ``index value`` text files, resolved relative
to the config file.

Exit status: 0 success or certificate pass, 1 eigensolver failure,
2 certificate fail, 3 invalid input, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import configparser
import io
import math
import os
import sys
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from . import __version__
from .chains import (
    EngineeredChainSpec,
    ParabolicChainSpec,
    TridiagonalOperator,
    build_engineered_hamiltonian,
    build_parabolic_hamiltonian,
    engineered_spectrum_formula,
)
from .dynamics import evolve, fidelity_curve, site_state
from .spectral import (
    DEFAULT_COMMENSURABILITY_TOL,
    DEFAULT_MAX_INTEGER,
    DEFAULT_PARITY_TOL,
    SpectralError,
    SpmcReport,
    certify,
    classify_parities,
    diagonalize,
)
from .transfer import SweepConfig, optimize_lambda, transfer_report

EXIT_OK, EXIT_SOLVER, EXIT_CERT_FAIL, EXIT_INVALID, EXIT_IO = 0, 1, 2, 3, 4


class ConfigError(ValueError):
    """Invalid run configuration; reported as a one-line reason."""


class OutputError(OSError):
    pass


def fmt(x) -> str:
    """17 significant digits, enough to round-trip a double."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


# ---------------------------------------------------------------- config


@dataclass
class Model:
    kind: str
    operator: TridiagonalOperator
    engineered: Optional[EngineeredChainSpec] = None
    parabolic: Optional[SweepConfig] = None
    lam: Optional[float] = None


@dataclass
class RunConfig:
    model: Model
    sections: dict = field(default_factory=dict)
    base_dir: Path = Path(".")

    def get(self, section: str, key: str, cast: Callable = str, default=None):
        raw = self.sections.get(section, {}).get(key)
        if raw is None:
            return default
        try:
            return cast(raw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"[{section}] {key} = {raw!r}: {exc}") from None


def _int(s: str) -> int:
    v = float(s)
    if not v.is_integer():
        raise ValueError("expected an integer")
    return int(v)


def _bool(s: str) -> bool:
    t = s.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError("expected a boolean")


def _floats(s: str) -> tuple[float, ...]:
    return tuple(float(x) for x in s.replace(",", " ").split())


def read_indexed_values(path: Path) -> np.ndarray:
    """Two-column ``index value`` file; indices must run 1..n."""
    try:
        text = path.read_text()
    except OSError as exc:
        raise OutputError(f"cannot read {path}: {exc.strerror or exc}") from exc
    pairs = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.replace(",", " ").split()
        if len(parts) != 2:
            raise ConfigError(f"{path}:{lineno}: expected 'index value'")
        try:
            pairs.append((_int(parts[0]), float(parts[1])))
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: {exc}") from None
    if not pairs:
        raise ConfigError(f"{path}: no values")
    pairs.sort()
    if [i for i, _ in pairs] != list(range(1, len(pairs) + 1)):
        raise ConfigError(f"{path}: indices must be 1..{len(pairs)} without gaps")
    return np.array([v for _, v in pairs])


def _parabolic_from(sec: dict, overrides: argparse.Namespace) -> tuple[SweepConfig, Optional[float], Optional[float]]:
    def num(key, cast=float, default=None):
        raw = sec.get(key)
        if raw is None:
            return default
        try:
            return cast(raw)
        except ValueError as exc:
            raise ConfigError(f"[model] {key} = {raw!r}: {exc}") from None

    distance = num("distance", _int)
    width = num("width")
    if distance is None or width is None:
        raise ConfigError("parabolic model needs distance and width")
    margin = num("margin", _int)
    half = num("half_length", _int)
    if getattr(overrides, "margin", None) is not None:
        margin = overrides.margin
    if half is not None and margin is not None and "margin" in sec:
        raise ConfigError("give margin or half_length, not both")
    if half is not None and getattr(overrides, "margin", None) is None:
        margin = half - distance // 2
        if margin < 0:
            raise ConfigError("half_length must be at least distance/2")
    if margin is None:
        margin = 20
    lam = num("lambda")
    B0 = num("B0")
    if lam is not None and B0 is not None:
        raise ConfigError("give lambda or B0, not both")
    cfg = SweepConfig(distance, width, margin=margin, J=num("J", default=1.0))
    return cfg, lam, B0


def load_config(path: Optional[str], args: argparse.Namespace) -> RunConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    parser.optionxform = str
    base = Path(".")
    if path is not None:
        p = Path(path)
        try:
            with p.open() as fh:
                parser.read_file(fh)
        except OSError as exc:
            raise OutputError(f"cannot read config {p}: {exc.strerror or exc}") from exc
        except configparser.Error as exc:
            raise ConfigError(f"malformed config: {exc}".splitlines()[0]) from None
        base = p.parent
    sections = {s: dict(parser[s]) for s in parser.sections()}
    if "model" not in sections:
        raise ConfigError("config needs a [model] section")
    sec = sections["model"]
    kind = sec.get("type", "").strip().lower()
    try:
        if kind == "engineered":
            spec = EngineeredChainSpec(_int(sec.get("N", "")), _int(sec.get("k", "0")))
            model = Model(kind, build_engineered_hamiltonian(spec), engineered=spec)
        elif kind == "parabolic":
            cfg, lam, B0 = _parabolic_from(sec, args)
            if B0 is not None:
                chain = ParabolicChainSpec(cfg.half_length, J=cfg.J, B0=B0)
            else:
                chain = cfg.chain(lam if lam is not None else 1.0)
            model = Model(kind, build_parabolic_hamiltonian(chain), parabolic=cfg, lam=lam)
        elif kind == "custom":
            if "diagonal" not in sec or "offdiagonal" not in sec:
                raise ConfigError("custom model needs diagonal and offdiagonal files")
            d = read_indexed_values(base / sec["diagonal"])
            e = read_indexed_values(base / sec["offdiagonal"])
            model = Model(kind, TridiagonalOperator(d, e))
        else:
            raise ConfigError(f"unknown model type {kind!r} (engineered | parabolic | custom)")
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return RunConfig(model, sections, base)


# ---------------------------------------------------------------- output


def write_atomic(path: Optional[str], text: str) -> None:
    """Write ``text`` to ``path`` via temp file + rename; stdout when path is None."""
    if path is None:
        sys.stdout.write(text)
        return
    target = Path(path)
    try:
        fd, tmp = tempfile.mkstemp(dir=target.parent or Path("."), prefix=f".{target.name}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "w", newline="") as fh:
                fh.write(text)
            os.replace(tmp, target)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
    except OSError as exc:
        raise OutputError(f"cannot write {target}: {exc.strerror or exc}") from exc


def csv_text(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for r in rows:
        buf.write(",".join(v if isinstance(v, str) else fmt(v) for v in r) + "\n")
    return buf.getvalue()


def report_fields(rep: SpmcReport) -> list[tuple[str, str]]:
    return [
        ("passes", fmt(rep.passes)),
        ("diagnostic", rep.diagnostic),
        ("E0", fmt(rep.E0)),
        ("offset", fmt(rep.offset)),
        ("sign", fmt(rep.sign)),
        ("level_integers", " ".join(fmt(n) for n in rep.level_integers)),
        ("parities", " ".join(rep.parities)),
        ("max_commensurability_residual", fmt(rep.max_commensurability_residual)),
        ("max_parity_mismatch_count", fmt(rep.max_parity_mismatch_count)),
        ("predicted_transfer_time", fmt(rep.predicted_transfer_time)),
        ("tol", fmt(rep.tol)),
        ("max_integer", fmt(rep.max_integer)),
    ]


# ---------------------------------------------------------------- commands


def _spmc_params(run: RunConfig, args) -> tuple[float, int, float]:
    tol = args.tol if args.tol is not None else run.get("spmc", "tol", float, DEFAULT_COMMENSURABILITY_TOL)
    mi = args.max_integer if args.max_integer is not None else run.get("spmc", "max_integer", _int, DEFAULT_MAX_INTEGER)
    ptol = run.get("spmc", "parity_tol", float, DEFAULT_PARITY_TOL)
    if not (tol > 0 and ptol > 0 and mi >= 1):
        raise ConfigError("tol and parity_tol must be positive, max_integer >= 1")
    return tol, mi, ptol


def cmd_spectrum(run: RunConfig, args) -> int:
    _, _, ptol = _spmc_params(run, args)
    sys_ = classify_parities(diagonalize(run.model.operator), ptol)
    header = ["index", "eigenvalue", "parity"]
    rows = [[i + 1, v, p] for i, (v, p) in enumerate(zip(sys_.values, sys_.parities))]
    if run.model.engineered is not None:
        formula = engineered_spectrum_formula(run.model.engineered)
        header += ["formula", "residual"]
        for r, f in zip(rows, formula):
            r += [f, abs(r[1] - f)]
    if args.format == "text":
        out = "".join(" ".join(c if isinstance(c, str) else fmt(c) for c in r) + "\n" for r in rows)
        write_atomic(args.out, "# " + " ".join(header) + "\n" + out)
    else:
        write_atomic(args.out, csv_text(header, rows))
    return EXIT_OK


def cmd_check_spmc(run: RunConfig, args) -> int:
    tol, mi, ptol = _spmc_params(run, args)
    _, rep = certify(run.model.operator, tol, mi, ptol)
    items = report_fields(rep)
    if args.format == "csv":
        text = csv_text(["field", "value"], [[k, v] for k, v in items])
    else:
        text = "".join(f"{k} = {v}\n" for k, v in items)
    write_atomic(args.out, text)
    return EXIT_OK if rep.passes else EXIT_CERT_FAIL


def _time_grid(run: RunConfig, section: str, args, default_tmax: Optional[float]) -> Optional[np.ndarray]:
    explicit = run.get(section, "times", _floats)
    if explicit is not None:
        return np.array(explicit)
    tmax = args.tmax if args.tmax is not None else run.get(section, "tmax", float, default_tmax)
    if tmax is None:
        return None
    if not tmax > 0:
        raise ConfigError("tmax must be positive")
    n = run.get(section, "num_times", _int, 2001)
    if n < 1:
        raise ConfigError("num_times must be >= 1")
    return np.linspace(0.0, tmax, n)


def cmd_evolve(run: RunConfig, args) -> int:
    op = run.model.operator
    site = run.get("evolve", "initial_site", _int, 1)
    t = run.get("evolve", "time", float)
    if t is None:
        raise ConfigError("[evolve] time is required")
    psi0 = site_state(op.size, site)
    psi = evolve(diagonalize(op), psi0, t)
    rows = [[i + 1, a.real, a.imag, abs(a) ** 2] for i, a in enumerate(psi)]
    write_atomic(args.out, csv_text(["site", "real", "imag", "probability"], rows))
    return EXIT_OK


def cmd_transfer(run: RunConfig, args) -> int:
    m = run.model
    if m.kind == "parabolic":
        cfg = m.parabolic
        lam = run.get("transfer", "lambda", float, m.lam)
        if lam is None:
            raise ConfigError("parabolic transfer needs lambda ([transfer] or [model])")
        if args.tmax is not None:
            cfg = SweepConfig(cfg.distance, cfg.width, margin=cfg.margin, J=cfg.J, t_max=args.tmax)
        times = _time_grid(run, "transfer", argparse.Namespace(tmax=None), None)
        rep = transfer_report(cfg, lam, times)
        curve, analytic = rep.curve, rep.analytic
    else:
        op = m.operator
        a = run.get("transfer", "initial_site", _int, 1)
        b = run.get("transfer", "target_site", _int, op.size)
        times = _time_grid(run, "transfer", args, None)
        if times is None:
            raise ConfigError("[transfer] needs tmax or times for site models")
        curve = fidelity_curve(diagonalize(op), site_state(op.size, a), site_state(op.size, b), times)
        analytic = np.full(curve.times.size, math.nan)
    rows = [[t, f, g] for t, f, g in zip(curve.times, curve.values, analytic)]
    write_atomic(args.out, csv_text(["time", "fidelity", "analytic_fidelity"], rows))
    print(f"peak_time={fmt(curve.peak_time)} peak_fidelity={fmt(curve.peak_value)}", file=sys.stderr)
    return EXIT_OK


def cmd_sweep(run: RunConfig, args) -> int:
    m = run.model
    if m.kind != "parabolic":
        raise ConfigError("sweep needs a parabolic model")
    c = m.parabolic
    grid = run.get("sweep", "lambda_grid", _floats)
    if grid is None and run.get("sweep", "lambda_min", float) is not None:
        lo = run.get("sweep", "lambda_min", float)
        hi = run.get("sweep", "lambda_max", float, lo)
        n = run.get("sweep", "points", _int, 60)
        if not (0 < lo <= hi) or n < 1:
            raise ConfigError("need 0 < lambda_min <= lambda_max and points >= 1")
        grid = tuple(np.geomspace(lo, hi, n)) if n > 1 else (lo,)
    try:
        cfg = SweepConfig(
            c.distance, c.width, lambda_grid=grid, margin=c.margin, J=c.J,
            t_max=args.tmax if args.tmax is not None else run.get("sweep", "tmax", float),
            time_step=run.get("sweep", "time_step", float),
            refine=run.get("sweep", "refine", _bool, True),
            workers=run.get("sweep", "workers", _int, 1),
        )
        if cfg.lambda_grid is None and cfg.distance == 0:
            raise ValueError("default lambda grid needs distance > 0")
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    res = optimize_lambda(cfg)
    rows = [[r.lam, r.B0, r.peak_time, r.peak_fidelity, int(r.peak_found)] for r in res.rows]
    write_atomic(args.out, csv_text(["lambda", "B0", "peak_time", "peak_fidelity", "peak_found"], rows))
    b = res.best
    print(
        f"best row {res.best_row}: lambda={fmt(b.lam)} B0={fmt(b.B0)} "
        f"peak_time={fmt(b.peak_time)} peak_fidelity={fmt(b.peak_fidelity)}",
        file=sys.stderr,
    )
    return EXIT_OK


COMMANDS = {
    "spectrum": cmd_spectrum,
    "check-spmc": cmd_check_spmc,
    "evolve": cmd_evolve,
    "transfer": cmd_transfer,
    "sweep": cmd_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="spinxfer", description="Spin-chain state transfer simulator")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", required=True, help="run configuration file")
        s.add_argument("--out", help="output path (default: stdout)")
        s.add_argument("--format", choices=("csv", "text"),
                       default="text" if name == "check-spmc" else "csv")
        s.add_argument("--tol", type=float)
        s.add_argument("--max-integer", type=int)
        s.add_argument("--tmax", type=float)
        s.add_argument("--margin", type=int)
    return p


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        run = load_config(args.config, args)
        return COMMANDS[args.command](run, args)
    except OutputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except SpectralError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
