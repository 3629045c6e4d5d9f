"""Command-line interface: validated run configs, CSV/JSON/SVG emission.

Every command validates its full configuration before computing anything,
writes artifacts atomically (temp file + rename), and records a
manifest.json next to the first artifact.  Exit codes: 0 success, 2
configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
import time
from dataclasses import dataclass
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .central_config import (
    MassSystem,
    collinear_three_primaries,
    moulton_collinear,
    offline_equilibrium,
)
from .errors import DomainError, ErestabError
from .linearization import StabilityParams, compute_D, spectral_params
from .maslov import morse_index
from .monodromy import classify_spectrum, integrate_fundamental
from .polygon_config import PolygonSystem, Site, solve_site
from .scan import (
    CurveKind,
    ScanSettings,
    find_curves,
    find_mstar,
    mass_scan_4body,
    polygon_verdicts,
    scan_theta,
)
from .svg import PlotStyle, emit_svg

SCHEMA_VERSION = 1

THETA_COLUMNS = (
    ["beta", "e", "verdict", "phi_1", "nu_1", "phi_m1", "nu_m1"]
    + [f"eig{i}_{part}" for i in range(1, 5) for part in ("re", "im")]
    + ["sympl_residual", "error"]
)
CURVE_COLUMNS = ["e", "curve", "beta", "bracket_width"]
MASS_COLUMNS = ["m1", "m3", "m2", "beta", "verdict", "error"]
POLY_COLUMNS = [
    "n", "m0_over_M", "e", "site", "rho", "lambda3", "lambda4", "alpha", "beta",
    "verdict", "phi_1", "nu_1", "phi_m1", "nu_m1", "error",
]


class ConfigError(ValueError):
    """Invalid command-line or config-file input."""


def _f17(x) -> str:
    if x is None:
        return ""
    x = float(x)
    if math.isnan(x):
        return "nan"
    return f"{x:.17g}"


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return _f17(value)
    return str(value)


def _csv(kind: str, columns, rows, digest: str) -> str:
    lines = [f"# erestab {kind} csv v{SCHEMA_VERSION} settings={digest}"]
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_cell(row.get(c)) for c in columns))
    return "\n".join(lines) + "\n"


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".erestab-tmp-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def parse_range(text: str) -> list[float]:
    """Parse 'start:stop:step' (endpoints inclusive within half a step),
    a comma list, or a single float."""
    text = str(text).strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(f"range must be start:stop:step, got {text!r}")
        try:
            start, stop, step = (float(p) for p in parts)
        except ValueError as exc:
            raise ConfigError(f"bad range {text!r}: {exc}") from None
        if step <= 0.0 or stop < start:
            raise ConfigError(f"range {text!r} needs step > 0 and stop >= start")
        count = int(math.floor((stop - start) / step + 0.5)) + 1
        return [start + k * step for k in range(count) if start + k * step <= stop + 0.5 * step]
    if "," in text:
        try:
            return [float(p) for p in text.split(",") if p.strip()]
        except ValueError as exc:
            raise ConfigError(f"bad list {text!r}: {exc}") from None
    try:
        return [float(text)]
    except ValueError as exc:
        raise ConfigError(f"bad number {text!r}: {exc}") from None


def _as_range(value) -> list[float]:
    if isinstance(value, str):
        return parse_range(value)
    if isinstance(value, (int, float)):
        return [float(value)]
    if isinstance(value, (list, tuple)):
        return [float(v) for v in value]
    raise ConfigError(f"cannot interpret {value!r} as a value list")


def _as_float(value) -> float:
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"expected a number, got {value!r}") from None


def _as_int_list(value) -> list[int]:
    vals = _as_range(value)
    out = []
    for v in vals:
        if abs(v - round(v)) > 1e-9:
            raise ConfigError(f"expected integers, got {v}")
        out.append(int(round(v)))
    return out


def _as_sites(value) -> list[Site]:
    if isinstance(value, str):
        names = [p.strip() for p in value.split(",") if p.strip()]
    elif isinstance(value, (list, tuple)):
        names = [str(p) for p in value]
    else:
        raise ConfigError(f"cannot interpret {value!r} as sites")
    try:
        return [Site(name) for name in names]
    except ValueError:
        raise ConfigError(f"sites must be among S1,S2,S3, got {value!r}") from None


@dataclass
class RunConfig:
    command: str
    parameters: dict
    output: dict
    tolerances: dict

    def settings(self) -> ScanSettings:
        kwargs = {}
        if "tol" in self.tolerances:
            kwargs["integrator_tol"] = _as_float(self.tolerances["tol"])
        if "circle_tol" in self.tolerances:
            kwargs["circle_tol"] = _as_float(self.tolerances["circle_tol"])
        return ScanSettings(**kwargs)


_PARAM_KEYS = {
    "cc": {"m", "ordering"},
    "polygon": {"n", "m0_over_m", "site"},
    "stability": {"family", "m", "e", "guess", "n", "m0_over_m", "site"},
    "index": {"alpha", "beta", "e", "omega", "rho"},
    "scan-theta": {"beta", "e"},
    "scan-mass": {"m1", "m3", "e"},
    "find-mstar": {"tol"},
    "polygon-verdicts": {"n", "m0_over_m", "e", "sites"},
}
_OUTPUT_KEYS = {"csv", "json", "svg"}
_TOLERANCE_KEYS = {"tol", "circle_tol"}


def _merge_config_file(config: RunConfig, path: str) -> RunConfig:
    try:
        with open(path, "r") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    unknown = set(data) - {"command", "parameters", "output", "tolerances"}
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    command = data.get("command", config.command)
    if command != config.command and config.command:
        raise ConfigError(
            f"config file command {command!r} conflicts with {config.command!r}"
        )
    merged = RunConfig(
        command=command,
        parameters=dict(config.parameters),
        output=dict(config.output),
        tolerances=dict(config.tolerances),
    )
    for section, allowed, target in (
        ("parameters", _PARAM_KEYS.get(command, set()), merged.parameters),
        ("output", _OUTPUT_KEYS, merged.output),
        ("tolerances", _TOLERANCE_KEYS, merged.tolerances),
    ):
        extra = data.get(section, {})
        if not isinstance(extra, dict):
            raise ConfigError(f"config section {section!r} must be an object")
        unknown = set(extra) - allowed
        if unknown:
            raise ConfigError(f"unknown {section} keys for {command}: {sorted(unknown)}")
        target.update(extra)
    return merged


# ---------------------------------------------------------------------------
# Serialization helpers
# ---------------------------------------------------------------------------

def _verdict_name(v) -> str:
    return v.verdict.value if v is not None else "Error"


def _eig_cells(eigs) -> dict:
    cells = {}
    for i in range(4):
        val = eigs[i] if eigs is not None else None
        cells[f"eig{i + 1}_re"] = None if val is None else float(np.real(val))
        cells[f"eig{i + 1}_im"] = None if val is None else float(np.imag(val))
    return cells


def _theta_rows(records) -> list[dict]:
    rows = []
    for r in records:
        row = {
            "beta": r.beta, "e": r.e,
            "verdict": _verdict_name(r.verdict) if r.error is None else "Error",
            "phi_1": r.phi_1, "nu_1": r.nu_1, "phi_m1": r.phi_m1, "nu_m1": r.nu_m1,
            "sympl_residual": r.sympl_residual, "error": r.error,
        }
        row.update(_eig_cells(r.eigenvalues))
        rows.append(row)
    return rows


def _curve_rows(points) -> list[dict]:
    return [
        {"e": p.e, "curve": p.curve.value, "beta": p.beta, "bracket_width": p.bracket_width}
        for p in points
    ]


def _mass_rows(points) -> list[dict]:
    return [
        {
            "m1": p.m1, "m3": p.m3, "m2": p.m2, "beta": p.beta,
            "verdict": _verdict_name(p.verdict) if p.error is None else "Error",
            "error": p.error,
        }
        for p in points
    ]


def _poly_rows(records) -> list[dict]:
    return [
        {
            "n": r.n, "m0_over_M": r.m0_over_M, "e": r.e, "site": r.site.value,
            "rho": r.rho, "lambda3": r.lambda3, "lambda4": r.lambda4,
            "alpha": r.alpha, "beta": r.beta,
            "verdict": _verdict_name(r.verdict) if r.error is None else "Error",
            "phi_1": r.phi_1, "nu_1": r.nu_1, "phi_m1": r.phi_m1, "nu_m1": r.nu_m1,
            "error": r.error,
        }
        for r in records
    ]


def _config_json(config) -> dict:
    return {
        "positions": [[float(v) for v in row] for row in config.primary_positions],
        "massless_position": (
            None
            if config.massless_position is None
            else [float(v) for v in config.massless_position]
        ),
        "mu": config.mu,
        "cc_residual": config.cc_residual,
        "inertia_residual": config.inertia_residual,
        "masses": list(config.masses.masses),
    }


# ---------------------------------------------------------------------------
# Command handlers: each returns (summary dict, artifacts list[(path, text)])
# ---------------------------------------------------------------------------

def _require(cfg: RunConfig, key: str):
    if key not in cfg.parameters or cfg.parameters[key] is None:
        raise ConfigError(f"missing required parameter --{key.replace('_', '-')}")
    return cfg.parameters[key]


def _cmd_cc(cfg: RunConfig):
    masses = MassSystem.normalized(_as_range(_require(cfg, "m")))
    ordering = cfg.parameters.get("ordering")
    if ordering is not None:
        config = moulton_collinear(masses, _as_int_list(ordering))
    elif len(masses) == 3:
        config = collinear_three_primaries(masses)
    else:
        config = moulton_collinear(masses)
    summary = _config_json(config)
    return summary, _json_artifact(cfg, summary)


def _cmd_polygon(cfg: RunConfig):
    n = _as_int_list(_require(cfg, "n"))[0]
    ratio = _as_float(_require(cfg, "m0_over_m"))
    site = _as_sites(_require(cfg, "site"))[0]
    sys_ = PolygonSystem.from_mass_ratio(n, ratio)
    bang = solve_site(sys_, site)
    summary = {
        "n": n, "m0_over_M": ratio, "site": site.value, "rho": bang.rho,
        "theta": bang.theta, "omega_sq": bang.omega_sq, "A": bang.A,
        "B_re": bang.B.real, "B_im": bang.B.imag, "l2": bang.l2, "l3": bang.l3,
        "lambda3": bang.lambda3, "lambda4": bang.lambda4,
    }
    return summary, _json_artifact(cfg, summary)


def _stability_params(cfg: RunConfig) -> tuple[StabilityParams, dict]:
    family = str(_require(cfg, "family"))
    e = _as_float(_require(cfg, "e"))
    if family == "collinear":
        masses = MassSystem.normalized(_as_range(_require(cfg, "m")))
        if len(masses) == 3:
            config = collinear_three_primaries(masses)
        else:
            config = moulton_collinear(masses)
        guess = cfg.parameters.get("guess")
        config = offline_equilibrium(
            config, tuple(_as_range(guess)) if guess is not None else (0.0, 1.0)
        )
        p = spectral_params(compute_D(config), e)
        extra = {"family": family, "masses": list(masses.masses)}
    elif family == "polygon":
        n = _as_int_list(_require(cfg, "n"))[0]
        ratio = _as_float(_require(cfg, "m0_over_m"))
        site = _as_sites(_require(cfg, "site"))[0]
        bang = solve_site(PolygonSystem.from_mass_ratio(n, ratio), site)
        p = StabilityParams(bang.lambda3, bang.lambda4, e)
        extra = {"family": family, "n": n, "m0_over_M": ratio, "site": site.value}
    else:
        raise ConfigError(f"family must be 'collinear' or 'polygon', got {family!r}")
    return p, extra


def _cmd_stability(cfg: RunConfig):
    p, extra = _stability_params(cfg)
    settings = cfg.settings()
    mono = integrate_fundamental(p, settings.integrator_tol)
    verdict = classify_spectrum(mono, settings.circle_tol)
    summary = {
        **extra,
        "e": p.e,
        "lambda3": p.lambda3,
        "lambda4": p.lambda4,
        "alpha": p.alpha,
        "beta": p.beta,
        "beta_hls": None if not p.beta_hls_applicable else p.beta_hls,
        "verdict": verdict.verdict.value,
        "on_circle_count": verdict.on_circle_count,
        "eigenvalues": [[z.real, z.imag] for z in mono.eigenvalues],
        "sympl_residual": mono.symplectic_residual,
    }
    return summary, _json_artifact(cfg, summary)


def _cmd_index(cfg: RunConfig):
    alpha = _as_float(_require(cfg, "alpha"))
    beta = _as_float(_require(cfg, "beta"))
    e = _as_float(_require(cfg, "e"))
    omega = cfg.parameters.get("omega")
    rho = cfg.parameters.get("rho")
    if (omega is None) == (rho is None):
        raise ConfigError("exactly one of --omega and --rho is required")
    w = complex(np.exp(2j * np.pi * _as_float(rho))) if rho is not None else None
    if omega is not None:
        ov = _as_float(omega)
        if ov not in (1.0, -1.0):
            raise ConfigError("--omega accepts 1 or -1; use --rho for other points")
        w = complex(ov)
    p = StabilityParams.from_alpha_beta(alpha, beta, e)
    result = morse_index(p, w)
    summary = {
        "alpha": alpha, "beta": beta, "e": e,
        "omega_re": w.real, "omega_im": w.imag, "rho": result.rho,
        "phi": result.phi, "nu": result.nu, "num_modes": result.num_modes,
        "min_eigenvalue": result.min_eigenvalue, "kernel_gap": result.kernel_gap,
        "stabilized": result.stabilized,
    }
    return summary, _json_artifact(cfg, summary)


def _cmd_scan_theta(cfg: RunConfig):
    beta_grid = _as_range(_require(cfg, "beta"))
    e_grid = _as_range(_require(cfg, "e"))
    settings = cfg.settings()
    records = scan_theta(beta_grid, e_grid, settings)
    rows = _theta_rows(records)
    digest = settings.digest()
    artifacts = []
    if cfg.output.get("csv"):
        artifacts.append((cfg.output["csv"], _csv("scan-theta", THETA_COLUMNS, rows, digest)))
    if cfg.output.get("json"):
        artifacts.append(
            (cfg.output["json"], json.dumps({"settings": digest, "rows": rows}, indent=2) + "\n")
        )
    if cfg.output.get("svg"):
        curve_es = [e for e in e_grid if e <= 0.95]
        if len(curve_es) > 11:
            curve_es = [curve_es[i] for i in
                        np.linspace(0, len(curve_es) - 1, 11).astype(int)]
        curve_points = find_curves(curve_es, settings=settings)
        curves = [
            (kind.value, [(p.beta, p.e) for p in curve_points if p.curve is kind])
            for kind in (CurveKind.BETA_S, CurveKind.BETA_M, CurveKind.BETA_K)
        ]
        svg = emit_svg(
            [(r["beta"], r["e"], r["verdict"]) for r in rows],
            curves,
            PlotStyle(title="stability over (beta, e)", xlabel="beta", ylabel="e"),
        )
        artifacts.append((cfg.output["svg"], svg))
    summary = {"rows": len(rows), "settings": digest,
               "artifacts": [a[0] for a in artifacts]}
    return summary, artifacts


def _cmd_scan_mass(cfg: RunConfig):
    m1_grid = _as_range(_require(cfg, "m1"))
    m3_grid = _as_range(_require(cfg, "m3"))
    e = _as_float(cfg.parameters.get("e", 0.0))
    settings = cfg.settings()
    points = mass_scan_4body(m1_grid, m3_grid, e, settings)
    rows = _mass_rows(points)
    digest = settings.digest()
    artifacts = []
    if cfg.output.get("csv"):
        artifacts.append((cfg.output["csv"], _csv("scan-mass", MASS_COLUMNS, rows, digest)))
    if cfg.output.get("svg"):
        svg = emit_svg(
            [(r["m1"], r["m3"], r["verdict"]) for r in rows],
            [],
            PlotStyle(title=f"stable masses at e={e:g}", xlabel="m1", ylabel="m3"),
        )
        artifacts.append((cfg.output["svg"], svg))
    summary = {"rows": len(rows), "settings": digest,
               "artifacts": [a[0] for a in artifacts]}
    return summary, artifacts


def _cmd_find_mstar(cfg: RunConfig):
    tol = _as_float(cfg.parameters.get("tol", 1e-6))
    result = find_mstar(tol)
    summary = {
        "m_star": result.value,
        "bracket": [result.bracket_low, result.bracket_high],
        "bracket_width": result.bracket_width,
        "tolerance": tol,
        "monotone": result.monotone,
        "note": result.note,
    }
    path = cfg.output.get("json") or "mstar.json"
    return summary, [(path, json.dumps(summary, indent=2) + "\n")]


def _cmd_polygon_verdicts(cfg: RunConfig):
    n_list = _as_int_list(_require(cfg, "n"))
    ratios = _as_range(_require(cfg, "m0_over_m"))
    e_list = _as_range(_require(cfg, "e"))
    sites = _as_sites(cfg.parameters.get("sites", "S1,S2,S3"))
    settings = cfg.settings()
    records = polygon_verdicts(n_list, ratios, e_list, sites, settings)
    rows = _poly_rows(records)
    digest = settings.digest()
    artifacts = []
    if cfg.output.get("csv"):
        artifacts.append(
            (cfg.output["csv"], _csv("polygon-verdicts", POLY_COLUMNS, rows, digest))
        )
    summary = {"rows": len(rows), "settings": digest,
               "artifacts": [a[0] for a in artifacts]}
    return summary, artifacts


def _json_artifact(cfg: RunConfig, summary: dict):
    if cfg.output.get("json"):
        return [(cfg.output["json"], json.dumps(summary, indent=2) + "\n")]
    return []


_HANDLERS = {
    "cc": _cmd_cc,
    "polygon": _cmd_polygon,
    "stability": _cmd_stability,
    "index": _cmd_index,
    "scan-theta": _cmd_scan_theta,
    "scan-mass": _cmd_scan_mass,
    "find-mstar": _cmd_find_mstar,
    "polygon-verdicts": _cmd_polygon_verdicts,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="erestab",
        description="Stability of elliptic relative equilibria of restricted N-body problems.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command")

    def add(name, *flags):
        p = sub.add_parser(name)
        for flag in flags:
            p.add_argument(flag)
        p.add_argument("--config")
        p.add_argument("--json")
        p.add_argument("--csv")
        p.add_argument("--svg")
        p.add_argument("--tol")
        p.add_argument("--circle-tol", dest="circle_tol")
        return p

    add("cc", "--m", "--ordering")
    add("polygon", "--n", "--m0-over-m", "--site")
    add("stability", "--family", "--m", "--e", "--guess", "--n", "--m0-over-m", "--site")
    add("index", "--alpha", "--beta", "--e", "--omega", "--rho")
    add("scan-theta", "--beta", "--e")
    add("scan-mass", "--m1", "--m3", "--e")
    add("find-mstar")
    fm = sub.choices["find-mstar"]
    fm.add_argument("--mstar-tol", dest="tol")
    add("polygon-verdicts", "--n", "--m0-over-m", "--e", "--sites")
    return parser


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    command = args.command
    if command is None:
        raise ConfigError("a command is required; see --help")
    params = {}
    for key in _PARAM_KEYS[command]:
        attr = key.replace("-", "_")
        value = getattr(args, attr, None)
        if value is not None:
            params[key] = value
    output = {k: getattr(args, k) for k in ("csv", "json", "svg") if getattr(args, k, None)}
    tolerances = {}
    if getattr(args, "tol", None) is not None and command != "find-mstar":
        tolerances["tol"] = args.tol
    if getattr(args, "circle_tol", None) is not None:
        tolerances["circle_tol"] = args.circle_tol
    cfg = RunConfig(command=command, parameters=params, output=output, tolerances=tolerances)
    if getattr(args, "config", None):
        cfg = _merge_config_file(cfg, args.config)
    return cfg


def run(cfg: RunConfig) -> tuple[dict, list[tuple[str, str]]]:
    """Execute a validated run configuration; returns (summary, artifacts)."""
    if cfg.command not in _HANDLERS:
        raise ConfigError(f"unknown command {cfg.command!r}")
    started = datetime.now(timezone.utc)
    t0 = time.monotonic()
    summary, artifacts = _HANDLERS[cfg.command](cfg)
    duration = time.monotonic() - t0
    for path, text in artifacts:
        _atomic_write(path, text)
    if artifacts:
        manifest = {
            "command": cfg.command,
            "parameters": {k: cfg.parameters[k] for k in sorted(cfg.parameters)},
            "tolerances": {k: cfg.tolerances[k] for k in sorted(cfg.tolerances)},
            "version": __version__,
            "started_at": started.isoformat(),
            "duration_s": duration,
            "settings_digest": cfg.settings().digest(),
            "artifacts": [os.path.basename(p) for p, _ in artifacts],
        }
        manifest_path = os.path.join(
            os.path.dirname(os.path.abspath(artifacts[0][0])), "manifest.json"
        )
        _atomic_write(manifest_path, json.dumps(manifest, indent=2) + "\n")
    return summary, artifacts


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = _config_from_args(args)
        # force parameter parsing up front so bad values exit with code 2
        summary, _ = run(cfg)
    except (ConfigError, DomainError) as exc:
        print(f"erestab: configuration error: {exc}", file=sys.stderr)
        return 2
    except ErestabError as exc:
        print(f"erestab: numerical failure: {exc}", file=sys.stderr)
        return 3
    print(json.dumps(summary, indent=2))
    return 0


if __name__ == "__main__":
    sys.exit(main())
