"""Command-line front end: solve, verify, sweep, mesh, flat.

Artifacts go to files (or stdout for solve records when no --record path is
given); human diagnostics go to stderr.  Exit status 0 means success, 1 a
numeric failure, 2 a configuration error.
"""

from __future__ import annotations

import argparse
import datetime
import json
import os
import re
import sys
from dataclasses import dataclass

from .curve import EndAngleClass
from .families import (
    ConfigurationError,
    FamilyKind,
    FamilySpec,
    OrderingError,
    StructuralError,
    default_seed,
    instantiate,
    residual_vector,
    table_seed,
)
from .geometry import (
    ClearanceError,
    MeshError,
    MeshGrid,
    build_mesh,
    develop_flat,
    export_flat_svg,
    export_flat_text,
    export_obj,
    lattice_periods,
)
from .numerics import parse_decimal, to_decimal_string, working_precision
from .quadrature import FormKind, QuadratureError
from .solver import Branch, SolveOptions, SolverError, continue_family, solve_period_problem
from .store import (
    StoreError,
    bundled_record,
    load,
    record_from_solution,
    save,
    serialize,
)

_CONFIG_ERRORS = (ConfigurationError, StoreError, OrderingError)
_NUMERIC_ERRORS = (
    SolverError,
    QuadratureError,
    StructuralError,
    MeshError,
    ClearanceError,
)

_DECIMAL_RE = re.compile(r"^-?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$")


@dataclass
class RunConfig:
    command: str
    family: str | None = None
    n: int | None = None
    m: int | None = None
    precision: int | None = None
    pin: str | None = None
    schedule: str | None = None
    seed: str = "default"
    out: str | None = None
    record: str | None = None
    tolerance: str = "1e-5"
    form: str = "gdh"
    mesh_size: int = 32
    radius: float = 1000.0


def _max_threads() -> int:
    raw = os.environ.get("PERIODFORGE_MAX_THREADS")
    if raw is None:
        return 1
    try:
        value = int(raw)
    except ValueError:
        raise ConfigurationError(
            f"PERIODFORGE_MAX_THREADS must be an integer, got {raw!r}"
        ) from None
    if value < 1:
        raise ConfigurationError("PERIODFORGE_MAX_THREADS must be >= 1")
    return value


def _note(msg: str) -> None:
    print(msg, file=sys.stderr)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="periodforge",
        description="Period problems and geometry for doubly periodic "
        "minimal surface families.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    specs = {
        "solve": "solve a family's period problem and write a record",
        "verify": "recompute residuals for a record and print a verdict",
        "sweep": "continuation sweep along a pin schedule",
        "mesh": "export a triangulated fundamental piece as OBJ",
        "flat": "export flat-structure polygons as SVG plus vertex list",
    }
    kinds = sorted(k.value for k in FamilyKind)
    for name, help_text in specs.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="JSON file supplying any flag; "
                       "command-line values override it")
        p.add_argument("--family", choices=kinds, help="family kind")
        p.add_argument("--n", type=int, help="discrete shape parameter n")
        p.add_argument("--m", type=int, help="discrete shape parameter m")
        p.add_argument("--precision", type=int,
                       help="working decimal digits (solve target follows it)")
        p.add_argument("--pin", metavar="NAME[=VALUE]",
                       help="hold one parameter fixed")
        p.add_argument("--schedule", metavar="FILE",
                       help="pin values for sweep, one decimal per line")
        p.add_argument("--seed", default=None,
                       metavar="default|file:PATH|paper",
                       help="starting parameter vector source")
        p.add_argument("--out", metavar="PATH", help="artifact output path")
        p.add_argument("--record", metavar="PATH|bundled:NAME",
                       help="record to write (solve) or read (verify/mesh/flat)")
        p.add_argument("--tolerance", default=None, metavar="DEC",
                       help="verify verdict threshold (default 1e-5)")
        p.add_argument("--form", choices=("gdh", "invgdh"), default=None,
                       help="flat-structure 1-form to develop")
        p.add_argument("--mesh-size", type=int, default=None,
                       help="radial and angular sample count (default 32)")
        p.add_argument("--radius", type=float, default=None,
                       help="mesh truncation radius (default 1000)")
    return parser


_CONFIG_KEYS = {
    "family", "n", "m", "precision", "pin", "schedule", "seed", "out",
    "record", "tolerance", "form", "mesh_size", "radius",
}


def _merge_config(args: argparse.Namespace) -> RunConfig:
    values: dict = {}
    if args.config:
        try:
            with open(args.config) as fh:
                file_values = json.load(fh)
        except OSError as exc:
            raise ConfigurationError(f"cannot read config {args.config}: {exc}")
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"config {args.config} is not JSON: {exc}")
        if not isinstance(file_values, dict):
            raise ConfigurationError("config file must hold a JSON object")
        for key, value in file_values.items():
            norm = key.replace("-", "_")
            if norm not in _CONFIG_KEYS:
                raise ConfigurationError(f"unknown config key {key!r}")
            values[norm] = value
    for key in _CONFIG_KEYS:
        got = getattr(args, key)
        if got is not None:
            values[key] = got
    cfg = RunConfig(command=args.command)
    for key, value in values.items():
        setattr(cfg, key, value)
    return cfg


def _family_spec(cfg: RunConfig) -> FamilySpec:
    if not cfg.family:
        raise ConfigurationError("--family is required for this command")
    try:
        kind = FamilyKind(cfg.family)
    except ValueError:
        raise ConfigurationError(f"unknown family kind {cfg.family!r}") from None
    return FamilySpec(kind, n=cfg.n, m=cfg.m)


def _load_record(ref: str):
    if ref.startswith("bundled:"):
        return bundled_record(ref[len("bundled:"):])
    return load(ref)


def _resolve_seed(cfg: RunConfig, spec: FamilySpec) -> tuple[str, ...]:
    source = cfg.seed or "default"
    if source == "default":
        return default_seed(spec)
    if source == "paper":
        return table_seed(spec)
    if source.startswith("file:"):
        record = _load_record(source[len("file:"):])
        if record.family_spec() != spec:
            raise ConfigurationError(
                f"seed record is for {record.family_spec().label}, "
                f"not {spec.label}"
            )
        return record.param_tuple()
    raise ConfigurationError(
        f"--seed must be default, paper, or file:PATH, got {source!r}"
    )


def _solve_options(cfg: RunConfig) -> SolveOptions:
    if cfg.precision is None:
        return SolveOptions()
    P = cfg.precision
    if P < 15:
        raise ConfigurationError("--precision must be at least 15")
    with working_precision(P):
        target = parse_decimal("10", P) ** (min(10 - P, -10))
    return SolveOptions(
        target_residual=target,
        initial_precision=min(30, P),
        max_precision=P,
    )


def _parse_pin(cfg: RunConfig, seed: tuple[str, ...], spec: FamilySpec):
    """Return (pin_name, seed) with the pin value substituted when given."""
    if cfg.pin is None:
        return None, seed
    name, eq, value = cfg.pin.partition("=")
    if name not in spec.param_names:
        raise ConfigurationError(
            f"cannot pin {name!r}; {spec.label} has {spec.param_names}"
        )
    if eq:
        if not _DECIMAL_RE.match(value):
            raise ConfigurationError(f"pin value is not decimal: {value!r}")
        out = list(seed)
        out[spec.param_names.index(name)] = value
        return name, tuple(out)
    return name, seed


def _timestamp() -> str:
    return (
        datetime.datetime.now(datetime.timezone.utc)
        .replace(microsecond=0)
        .isoformat()
        .replace("+00:00", "Z")
    )


def _cmd_solve(cfg: RunConfig) -> int:
    spec = _family_spec(cfg)
    seed = _resolve_seed(cfg, spec)
    pin, seed = _parse_pin(cfg, seed, spec)
    solution = solve_period_problem(spec, seed, _solve_options(cfg), pin=pin)
    record = record_from_solution(solution, timestamp=_timestamp())
    _note(
        f"{spec.label}: residual norm {record.residual_norm} at "
        f"P={solution.precision_used} after {solution.iteration_count} iterations"
    )
    if cfg.record:
        save(record, cfg.record)
        _note(f"record written to {cfg.record}")
    else:
        sys.stdout.write(serialize(record))
    return 0


def _corrected_params(record, spec: FamilySpec) -> tuple[tuple[str, ...], list[str]]:
    """Printed parameter strings, with documented corrections overlaid for
    reference tables whose printing breaks the ordering."""
    notes = []
    overlay = {}
    if record.provenance == "PAPER_TABLE" and record.anomaly:
        try:
            corrected = dict(zip(spec.param_names, table_seed(spec)))
        except ConfigurationError:
            corrected = {}
        for name, printed in record.parameters.items():
            fixed = corrected.get(name)
            if fixed is not None and fixed != printed:
                overlay[name] = fixed
                notes.append(f"using documented correction {name}={fixed}")
    params = []
    for name in spec.param_names:
        source = overlay.get(name) or record.parameters.get(name)
        if source is None and name == "b1":
            source = record.parameters.get("b")
        if source is None:
            raise ConfigurationError(f"record lacks parameter {name}")
        params.append(source)
    return tuple(params), notes


def _cmd_verify(cfg: RunConfig) -> int:
    if not cfg.record:
        raise ConfigurationError("verify needs --record PATH|bundled:NAME")
    record = _load_record(cfg.record)
    spec = record.family_spec()
    params, notes = _corrected_params(record, spec)
    for line in notes:
        _note(line)
    P = cfg.precision or 40
    wd, system = instantiate(spec, params, P)
    residuals = residual_vector(wd, system, P)
    with working_precision(P):
        norm = max(abs(r) for r in residuals) if residuals else parse_decimal("0", P)
        tol = parse_decimal(cfg.tolerance, P)
    for eq, r in zip(system.equations, residuals):
        print(f"  {eq.label}: {to_decimal_string(r, 6)}")
    verdict = "PASS" if norm <= tol else "FAIL"
    stored = f" (record states {record.residual_norm})" if record.residual_norm else ""
    print(
        f"{verdict} {spec.label}: max residual {to_decimal_string(norm, 6)} "
        f"vs tolerance {cfg.tolerance} at P={P}{stored}"
    )
    return 0 if verdict == "PASS" else 1


def _read_schedule(path: str) -> list[str]:
    try:
        with open(path) as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ConfigurationError(f"cannot read schedule {path}: {exc}")
    values = []
    for i, line in enumerate(lines, start=1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        if not _DECIMAL_RE.match(text):
            raise ConfigurationError(
                f"schedule {path} line {i} is not a decimal: {text!r}"
            )
        values.append(text)
    if not values:
        raise ConfigurationError(f"schedule {path} holds no values")
    return values


def _cmd_sweep(cfg: RunConfig) -> int:
    spec = _family_spec(cfg)
    if spec.end_angle_class is not EndAngleClass.PARALLEL:
        raise ConfigurationError(
            f"sweep needs a parallel-end family, {spec.label} is orthogonal"
        )
    if not cfg.pin:
        raise ConfigurationError("sweep needs --pin NAME")
    if "=" in cfg.pin:
        raise ConfigurationError(
            "sweep takes a bare --pin NAME; values come from --schedule"
        )
    pin_name = cfg.pin
    if not cfg.schedule:
        raise ConfigurationError("sweep needs --schedule FILE")
    schedule = _read_schedule(cfg.schedule)
    seed = _resolve_seed(cfg, spec)
    out_dir = cfg.out or "."
    os.makedirs(out_dir, exist_ok=True)
    branch: Branch = continue_family(
        spec, pin_name, schedule, seed, _solve_options(cfg)
    )
    stamp = _timestamp()
    for k, sol in enumerate(branch.solutions):
        record = record_from_solution(sol, timestamp=stamp)
        path = os.path.join(out_dir, f"sweep_{spec.kind.value}_{k:03d}.json")
        save(record, path)
        _note(
            f"{pin_name}={sol.pinned[1]}: norm {record.residual_norm}, "
            f"{sol.iteration_count} iterations -> {path}"
        )
    if branch.failure:
        _note(f"branch stopped: {branch.failure}")
        return 1
    print(f"swept {len(branch.solutions)} points of {spec.label}")
    return 0


def _surface_params(cfg: RunConfig) -> tuple[FamilySpec, tuple[str, ...]]:
    """Parameter point for geometry commands: a record's values verbatim,
    or a fresh solve when the family has equations to satisfy."""
    if cfg.record:
        record = _load_record(cfg.record)
        spec = record.family_spec()
        params, notes = _corrected_params(record, spec)
        for line in notes:
            _note(line)
        return spec, params
    spec = _family_spec(cfg)
    seed = _resolve_seed(cfg, spec)
    _, system = instantiate(spec, seed, 20)
    if not system.equations:
        return spec, seed
    pin, seed = _parse_pin(cfg, seed, spec)
    solution = solve_period_problem(spec, seed, _solve_options(cfg), pin=pin)
    _note(
        f"solved {spec.label} to norm "
        f"{to_decimal_string(solution.residual_norm, 6)} before meshing"
    )
    return spec, solution.params


def _cmd_mesh(cfg: RunConfig) -> int:
    if not cfg.out:
        raise ConfigurationError("mesh needs --out PATH for the OBJ file")
    spec, params = _surface_params(cfg)
    digits = cfg.precision or 20
    wd, _ = instantiate(spec, params, digits)
    grid = MeshGrid(
        radial_samples=cfg.mesh_size,
        angular_samples=cfg.mesh_size,
        truncation_radius=cfg.radius,
    )
    mesh = build_mesh(wd, grid, digits=digits)
    export_obj(mesh, cfg.out)
    periods = lattice_periods(wd, digits=digits)
    t1 = ", ".join(to_decimal_string(c, 6) for c in periods.t1)
    t2 = ", ".join(to_decimal_string(c, 6) for c in periods.t2)
    print(
        f"{spec.label}: {len(mesh.vertices)} vertices, {len(mesh.triangles)} "
        f"triangles -> {cfg.out}"
    )
    print(f"lattice T1 = ({t1}), T2 = ({t2})")
    print(f"seam watertightness {to_decimal_string(mesh.watertightness(), 6)}")
    return 0


def _cmd_flat(cfg: RunConfig) -> int:
    if not cfg.out:
        raise ConfigurationError("flat needs --out PATH for the SVG file")
    spec, params = _surface_params(cfg)
    digits = cfg.precision or 30
    wd, _ = instantiate(spec, params, digits)
    form = FormKind.GDH if cfg.form == "gdh" else FormKind.INVGDH
    polygon = develop_flat(wd, form, digits=digits)
    export_flat_svg(polygon, cfg.out)
    text_path = os.path.splitext(cfg.out)[0] + ".txt"
    export_flat_text(polygon, text_path)
    count = sum(len(chain) for chain in polygon.chains)
    print(
        f"{spec.label} {cfg.form}: {len(polygon.chains)} chains, "
        f"{count} vertices -> {cfg.out}, {text_path}"
    )
    return 0


_COMMANDS = {
    "solve": _cmd_solve,
    "verify": _cmd_verify,
    "sweep": _cmd_sweep,
    "mesh": _cmd_mesh,
    "flat": _cmd_flat,
}


def run(cfg: RunConfig) -> int:
    _max_threads()
    return _COMMANDS[cfg.command](cfg)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _merge_config(args)
        return run(cfg)
    except _CONFIG_ERRORS as exc:
        _note(f"configuration error: {exc}")
        return 2
    except _NUMERIC_ERRORS as exc:
        _note(f"numeric failure: {exc}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
