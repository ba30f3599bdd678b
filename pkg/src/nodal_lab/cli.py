"""Command-line front end.

Subcommands: ``verify`` runs identity checkers and writes a report
document, ``scan`` sweeps an eigenfunction family and fits scaling
exponents, ``extract`` writes level-set meshes, ``report`` merges prior
JSON documents into a summary plus plot-ready data files and figures.

Exit codes: 0 success, 1 a numerical tolerance or exponent band failed,
2 invalid configuration (including an empty input directory for
``report``).
"""

from __future__ import annotations

import argparse
import dataclasses
import math
import os
import sys

import numpy as np

from . import __version__
from .asymptotics import FAMILIES, fit_exponent, scan_family, verify_bounds
from .geometry import circle, flat_torus, sphere
from .identities import (
    check_abs_pair_symmetry,
    check_coarea,
    check_level_corollary,
    check_level_identity,
    check_localized_identity,
    check_multiplicity_orthogonality,
    check_nodal_identity,
    check_pair_identity,
    check_weighted_identity,
)
from .levelset import ExtractionConfig, extract
from .report_io import (
    mesh_document,
    read_json_document,
    write_csv_table,
    write_json_document,
    write_mesh_text,
)
from .spectra import (
    circle_mode,
    constant_test_function,
    sectoral_harmonic,
    test_function_from_mode,
    torus_mode,
    zonal_harmonic,
)

DEFAULT_TOLERANCES = {
    "nodal": 1e-3,
    "weighted": 1e-3,
    "level": 1e-3,
    "corollary": 1e-3,
    "coarea": 0.02,
    "pair": 1e-3,
    "curious": 1e-3,
    "abs-pair": 1e-3,
    "localized": 1e-3,
}

_FAMILY_MANIFOLDS = {
    "torus-axis": lambda: flat_torus(2),
    "torus-diagonal": lambda: flat_torus(2),
    "zonal": sphere,
    "sectoral": sphere,
    "circle": circle,
}

_LIST_SEP = ";"


@dataclasses.dataclass(frozen=True)
class RunConfig:
    """Everything a subcommand needs, with a canonical text form.

    ``canonical()`` renders every field explicitly (defaults included) as
    sorted ``key=value`` lines; ``parse_config_text`` inverts it exactly,
    so round-tripping is byte-stable.  The same parser reads ``--config``
    files.
    """

    ambiguity_policy: str = "subdivide"
    band: tuple = ()
    center: str = ""
    family: str = "zonal"
    fit: tuple = ()
    formats: str = "json,csv,mesh"
    identity: str = "nodal"
    index_range: str = "20:200:20"
    level: float = 0.0
    levels: int = 64
    manifold: str = ""
    mode: str = ""
    mode_j: str = ""
    mode_k: str = ""
    newton_steps: int = 3
    out: str = "out"
    phase: float = 0.0
    radius: float = 0.0
    resolution: int = 512
    threads: int = 0
    tol: tuple = ()

    def canonical(self) -> str:
        lines = []
        for field in sorted(f.name for f in dataclasses.fields(self)):
            value = getattr(self, field)
            if isinstance(value, tuple):
                text = _LIST_SEP.join(value)
            elif isinstance(value, float):
                text = repr(value)
            else:
                text = str(value)
            lines.append(f"{field}={text}")
        return "\n".join(lines) + "\n"

    def extraction_config(self) -> ExtractionConfig:
        return ExtractionConfig(
            resolution=self.resolution,
            newton_steps=self.newton_steps,
            ambiguity_policy=self.ambiguity_policy,
        )

    def format_set(self) -> set:
        return {f.strip() for f in self.formats.split(",") if f.strip()}

    def tolerances(self) -> dict:
        tols = dict(DEFAULT_TOLERANCES)
        for entry in self.tol:
            name, _, raw = entry.partition("=")
            if name not in tols or not raw:
                raise ValueError(f"bad tolerance override {entry!r}")
            tols[name] = float(raw)
        return tols


_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(RunConfig)}


def parse_config_text(text: str) -> dict:
    """Parse key=value lines into a dict of RunConfig field values."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if key == "range":
            key = "index_range"
        if not sep or key not in _FIELD_TYPES:
            raise ValueError(f"bad config line {lineno}: {raw!r}")
        values[key] = _coerce_field(key, value.strip())
    return values


def _coerce_field(key: str, raw: str):
    kind = _FIELD_TYPES[key]
    if kind in ("tuple", tuple):
        return tuple(p for p in raw.split(_LIST_SEP) if p) if raw else ()
    if kind in ("int", int):
        return int(raw)
    if kind in ("float", float):
        return float(raw)
    return raw


def build_config(file_values: dict, flag_values: dict) -> RunConfig:
    merged = dict(file_values)
    merged.update({k: v for k, v in flag_values.items() if v is not None})
    return RunConfig(**merged)


def parse_range(spec: str) -> list:
    """``a:b`` or ``a:b:s`` as an inclusive integer range."""
    parts = spec.split(":")
    if len(parts) not in (2, 3):
        raise ValueError(f"bad range {spec!r} (want a:b or a:b:s)")
    try:
        nums = [int(p) for p in parts]
    except ValueError:
        raise ValueError(f"bad range {spec!r}") from None
    step = nums[2] if len(nums) == 3 else 1
    if step <= 0 or nums[1] < nums[0]:
        raise ValueError(f"bad range {spec!r}")
    return list(range(nums[0], nums[1] + 1, step))


def parse_mode_spec(spec: str, manifold: str = "", phase: float = 0.0):
    """Turn a mode spec into an eigenfunction.

    Accepted forms: ``k=3`` (circle), ``k=2,3`` / ``k=1,1,0`` (torus),
    ``zonal:5`` and ``sectoral:7`` (sphere).  ``manifold`` cross-checks
    the inferred manifold when given.
    """
    spec = spec.strip()
    if not spec:
        raise ValueError("missing mode spec")
    if spec.startswith("zonal:") or spec.startswith("sectoral:"):
        family, _, raw = spec.partition(":")
        degree = int(raw)
        if manifold and manifold != "sphere":
            raise ValueError(f"mode {spec!r} needs the sphere, not {manifold!r}")
        return zonal_harmonic(degree) if family == "zonal" else sectoral_harmonic(degree)
    if spec.startswith("k="):
        try:
            comps = [int(p) for p in spec[2:].split(",")]
        except ValueError:
            raise ValueError(f"bad mode spec {spec!r}") from None
        if len(comps) == 1:
            if manifold and manifold != "circle":
                raise ValueError(f"mode {spec!r} needs the circle, not {manifold!r}")
            return circle_mode(comps[0], phase=phase)
        if len(comps) in (2, 3):
            expected = f"torus{len(comps)}"
            if manifold and manifold != expected:
                raise ValueError(f"mode {spec!r} needs {expected}, not {manifold!r}")
            return torus_mode(len(comps), tuple(comps), phase=phase)
        raise ValueError(f"bad mode spec {spec!r} (1-3 components)")
    raise ValueError(f"unrecognized mode spec {spec!r}")


def _parse_center(raw: str) -> np.ndarray:
    try:
        comps = [float(p) for p in raw.split(",")]
    except ValueError:
        raise ValueError(f"bad center {raw!r}") from None
    if len(comps) != 2:
        raise ValueError(f"bad center {raw!r} (want x,y)")
    return np.array(comps)


def _resolve_threads(config: RunConfig) -> int:
    if config.threads < 0:
        raise ValueError("--threads must be >= 0 (0 means auto)")
    if config.threads > 0:
        return config.threads
    raw = os.environ.get("NODAL_LAB_THREADS", "").strip()
    if raw:
        count = int(raw)
        if count < 1:
            raise ValueError(f"NODAL_LAB_THREADS={raw!r} must be >= 1")
        return count
    return 1


def _environment() -> dict:
    return {"version": __version__}


def _test_fn_or_constant(config: RunConfig, manifold):
    if config.mode_k:
        return test_function_from_mode(parse_mode_spec(config.mode_k, config.manifold))
    return constant_test_function(manifold, 1.0)


def _run_one_identity(name: str, config: RunConfig, ext_cfg: ExtractionConfig):
    if name in ("pair", "curious", "abs-pair"):
        spec_j = config.mode_j or config.mode
        if not spec_j or not config.mode_k:
            raise ValueError(f"identity {name!r} needs --mode-j and --mode-k")
        mode_j = parse_mode_spec(spec_j, config.manifold, config.phase)
        mode_k = parse_mode_spec(config.mode_k, config.manifold)
        checker = {
            "pair": check_pair_identity,
            "curious": check_multiplicity_orthogonality,
            "abs-pair": check_abs_pair_symmetry,
        }[name]
        return checker(mode_j, mode_k, ext_cfg)
    mode = parse_mode_spec(config.mode, config.manifold, config.phase)
    if name == "nodal":
        return check_nodal_identity(mode, ext_cfg)
    if name == "weighted":
        return check_weighted_identity(mode, _test_fn_or_constant(config, mode.manifold), ext_cfg)
    if name == "level":
        return check_level_identity(
            mode, config.level, _test_fn_or_constant(config, mode.manifold), ext_cfg
        )
    if name == "corollary":
        return check_level_corollary(mode, config.level, ext_cfg)
    if name == "coarea":
        return check_coarea(mode, config.levels, ext_cfg)
    if name == "localized":
        if not config.center or config.radius <= 0:
            raise ValueError("identity 'localized' needs --center x,y and --radius > 0")
        return check_localized_identity(mode, _parse_center(config.center), config.radius, ext_cfg)
    raise ValueError(f"unknown identity {name!r}")


def cmd_verify(config: RunConfig) -> int:
    names = [n.strip() for n in config.identity.split(",") if n.strip()]
    if not names:
        raise ValueError("no identity selected")
    tols = config.tolerances()
    unknown = [n for n in names if n not in tols]
    if unknown:
        raise ValueError(f"unknown identity {unknown[0]!r}")
    ext_cfg = config.extraction_config()
    reports = []
    failures = []
    for name in names:
        report = _run_one_identity(name, config, ext_cfg)
        tol = tols[name]
        entry = report.as_dict()
        entry["tolerance"] = tol
        entry["passed"] = bool(report.rel_residual <= tol)
        if name == "corollary" and not report.metadata.get("upper_bound_ok", True):
            entry["passed"] = False
        reports.append(entry)
        line = f"{name}: rel_residual={report.rel_residual:.3e} tolerance={tol:g}"
        if entry["passed"]:
            print("PASS " + line)
        else:
            failures.append(line)
            print("FAIL " + line)
    doc = {
        "config": config.canonical(),
        "environment": _environment(),
        "reports": reports,
        "tables": [],
        "fits": [],
    }
    if "json" in config.format_set():
        write_json_document(os.path.join(config.out, "verify.json"), doc)
    for line in failures:
        print("FAIL " + line, file=sys.stderr)
    return 1 if failures else 0


def _parse_fit_spec(spec: str) -> tuple:
    parts = spec.split(":")
    if len(parts) != 2 or not all(parts):
        raise ValueError(f"bad fit spec {spec!r} (want y:x)")
    return parts[0], parts[1]


def _parse_band_spec(spec: str) -> tuple:
    parts = spec.split(":")
    if len(parts) != 4:
        raise ValueError(f"bad band spec {spec!r} (want y:x:center:halfwidth)")
    try:
        center, halfwidth = float(parts[2]), float(parts[3])
    except ValueError:
        raise ValueError(f"bad band spec {spec!r}") from None
    if not parts[0] or not parts[1] or halfwidth < 0:
        raise ValueError(f"bad band spec {spec!r}")
    return parts[0], parts[1], center, halfwidth


def cmd_scan(config: RunConfig) -> int:
    if config.family not in FAMILIES:
        raise ValueError(f"unknown family {config.family!r} (one of {', '.join(FAMILIES)})")
    indices = parse_range(config.index_range)
    ext_cfg = config.extraction_config()
    rows = scan_family(config.family, indices, config=ext_cfg, max_workers=_resolve_threads(config))
    manifold = _FAMILY_MANIFOLDS[config.family]()
    bounds = verify_bounds(rows, manifold)

    bands = {}
    for spec in config.band:
        y, x, center, halfwidth = _parse_band_spec(spec)
        bands[(y, x)] = (center, halfwidth)
    fit_keys = [_parse_fit_spec(s) for s in config.fit]
    for key in bands:
        if key not in fit_keys:
            fit_keys.append(key)

    fits = []
    band_failures = []
    for y, x in fit_keys:
        fit = fit_exponent(rows, x_column=x, y_column=y)
        entry = fit.as_dict()
        entry["y_column"] = y
        entry["x_column"] = x
        line = f"fit {y} vs {x}: slope={fit.slope:.6f} stderr={fit.stderr:.2e} r2={fit.r_squared:.6f}"
        if (y, x) in bands:
            center, halfwidth = bands[(y, x)]
            ok = math.isfinite(fit.slope) and abs(fit.slope - center) <= halfwidth
            entry["band_center"] = center
            entry["band_halfwidth"] = halfwidth
            entry["band_ok"] = ok
            line += f" band={center:g}+/-{halfwidth:g} [{'PASS' if ok else 'FAIL'}]"
            if not ok:
                band_failures.append(line)
        fits.append(entry)
        print(line)
    print(f"bounds: {'PASS' if bounds.passed else 'FAIL'}")

    table = {
        "family": config.family,
        "rows": [r.as_dict() for r in rows],
        "bounds": bounds.as_dict(),
    }
    doc = {
        "config": config.canonical(),
        "environment": _environment(),
        "reports": [],
        "tables": [table],
        "fits": fits,
    }
    formats = config.format_set()
    if "json" in formats:
        write_json_document(os.path.join(config.out, "scan.json"), doc)
    if "csv" in formats:
        write_csv_table(os.path.join(config.out, "scan.csv"), rows)
    for line in band_failures:
        print("FAIL " + line, file=sys.stderr)
    return 1 if band_failures else 0


def cmd_extract(config: RunConfig) -> int:
    mode = parse_mode_spec(config.mode, config.manifold, config.phase)
    mesh = extract(mode, config.level, config.extraction_config())
    doc = {
        "config": config.canonical(),
        "environment": _environment(),
        "mesh": mesh_document(mesh),
    }
    formats = config.format_set()
    if "json" in formats:
        write_json_document(os.path.join(config.out, "mesh.json"), doc)
    if "mesh" in formats:
        write_mesh_text(os.path.join(config.out, "mesh.txt"), mesh)
    meta = doc["mesh"]["metadata"]
    print(
        f"measure={meta['measure']:.12g} vertices={meta['vertex_count']}"
        f" elements={meta['element_count']} fallbacks={meta['ambiguity_fallbacks']}"
    )
    return 0


def _load_report_documents(directory: str) -> list:
    if not os.path.isdir(directory):
        return []
    docs = []
    for name in sorted(os.listdir(directory)):
        if not name.endswith(".json") or name.endswith(".meta.json"):
            continue
        if name == "summary.json":
            continue
        docs.append((name, read_json_document(os.path.join(directory, name))))
    return docs


def cmd_report(config: RunConfig) -> int:
    docs = _load_report_documents(config.out)
    if not docs:
        print("no reports found", file=sys.stderr)
        return 2
    reports = []
    tables = []
    fits = []
    for name, doc in docs:
        for rep in doc.get("reports", []):
            merged = dict(rep)
            merged["source"] = name
            reports.append(merged)
        for tab in doc.get("tables", []):
            merged = dict(tab)
            merged["source"] = name
            tables.append(merged)
        for fit in doc.get("fits", []):
            merged = dict(fit)
            merged["source"] = name
            fits.append(merged)
    summary = {
        "config": config.canonical(),
        "environment": _environment(),
        "reports": reports,
        "tables": tables,
        "fits": fits,
    }
    write_json_document(os.path.join(config.out, "summary.json"), summary)

    from . import figures

    for fit in fits:
        y, x = fit.get("y_column"), fit.get("x_column")
        if not y or not x:
            continue
        points = _fit_points(tables, y, x)
        if points is None:
            continue
        xs, ys = points
        stem = os.path.join(config.out, f"{y}_vs_{x}")
        with open(stem + ".dat", "w", encoding="utf-8", newline="\n") as f:
            for xv, yv in zip(np.log(xs), np.log(ys)):
                f.write(f"{format(xv, '.17g')} {format(yv, '.17g')}\n")
        if fit.get("slope") is not None:
            figures.render_loglog_fit(
                stem + ".png", xs, ys, fit["slope"], fit["intercept"],
                f"log {x}", f"log {y}",
            )
    if reports:
        figures.render_residuals(os.path.join(config.out, "residuals.png"), reports)

    n_passed = sum(1 for r in reports if r.get("passed"))
    n_flagged = sum(1 for r in reports if "passed" in r)
    print(
        f"merged {len(docs)} documents: {len(reports)} identity reports"
        f" ({n_passed}/{n_flagged} passed), {len(tables)} tables, {len(fits)} fits"
    )
    return 0


def _fit_points(tables: list, y: str, x: str):
    for tab in tables:
        rows = tab.get("rows", [])
        if rows and x in rows[0] and y in rows[0]:
            xs = np.array([float(r[x]) for r in rows])
            ys = np.array([float(r[y]) for r in rows])
            if np.all(xs > 0) and np.all(ys > 0):
                return xs, ys
    return None


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", dest="config_file", metavar="FILE",
                   help="key=value file mirroring the flags; flags override it")
    p.add_argument("--out", help="output directory (default: out)")
    p.add_argument("--resolution", type=int, help="grid resolution per axis")
    p.add_argument("--newton-steps", type=int, dest="newton_steps")
    p.add_argument("--ambiguity-policy", dest="ambiguity_policy",
                   choices=["subdivide", "bilinear-decider"])
    p.add_argument("--formats", help="comma list from {json,csv,mesh}")
    p.add_argument("--threads", type=int,
                   help="worker cap (default: NODAL_LAB_THREADS or 1)")
    p.add_argument("--tol", action="append",
                   help="per-identity tolerance override, e.g. nodal=1e-4")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nodal-lab",
        description="Level-set identity checks and norm scans for model Laplace eigenfunctions.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="run identity checkers against tolerances")
    p.add_argument("--manifold", choices=["circle", "torus2", "torus3", "sphere"])
    p.add_argument("--mode", help="mode spec: k=1,0 | k=3 | zonal:5 | sectoral:7")
    p.add_argument("--mode-j", dest="mode_j", help="first mode for pair identities")
    p.add_argument("--mode-k", dest="mode_k",
                   help="second mode for pair identities, or the eigenfunction weight")
    p.add_argument("--identity", help="comma list: " + ",".join(DEFAULT_TOLERANCES))
    p.add_argument("--level", type=float, help="level value c")
    p.add_argument("--levels", type=int, help="Gauss level count for coarea")
    p.add_argument("--phase", type=float, help="phase offset for trigonometric modes")
    p.add_argument("--center", help="bump center x,y (localized identity)")
    p.add_argument("--radius", type=float, help="bump radius (localized identity)")
    _add_common(p)

    p = sub.add_parser("scan", help="scan a family, fit exponents, check bounds")
    p.add_argument("--family", choices=list(FAMILIES))
    p.add_argument("--range", dest="index_range", help="inclusive index range a:b[:s]")
    p.add_argument("--fit", action="append", help="fit spec y:x, e.g. l1:lambda")
    p.add_argument("--band", action="append",
                   help="acceptance band y:x:center:halfwidth, e.g. l1:lambda:-0.25:0.03")
    _add_common(p)

    p = sub.add_parser("extract", help="write level-set mesh files")
    p.add_argument("--manifold", choices=["circle", "torus2", "torus3", "sphere"])
    p.add_argument("--mode", help="mode spec: k=1,0 | k=3 | zonal:5 | sectoral:7")
    p.add_argument("--level", type=float, help="level value c")
    p.add_argument("--phase", type=float, help="phase offset for trigonometric modes")
    _add_common(p)

    p = sub.add_parser("report", help="merge prior JSON outputs under --out")
    _add_common(p)

    return parser


_DISPATCH = {
    "verify": cmd_verify,
    "scan": cmd_scan,
    "extract": cmd_extract,
    "report": cmd_report,
}


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
    except SystemExit as exc:
        code = exc.code
        return code if isinstance(code, int) else 0
    try:
        file_values = {}
        if getattr(args, "config_file", None):
            with open(args.config_file, encoding="utf-8") as f:
                file_values = parse_config_text(f.read())
        flag_values = {
            k: v
            for k, v in vars(args).items()
            if k in _FIELD_TYPES and v is not None
        }
        for key in ("fit", "band", "tol"):
            if flag_values.get(key) is not None:
                flag_values[key] = tuple(flag_values[key])
        config = build_config(file_values, flag_values)
        return _DISPATCH[args.command](config)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
