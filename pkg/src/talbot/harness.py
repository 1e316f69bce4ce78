"""Scenario-driven experiment orchestration.

A scenario is a JSON document selecting one of five study kinds, the
dispersion/initial data, the observation times, and the analyses to run.
Everything is deterministic: identical scenario files produce byte-identical
outputs, which the manifest records as sha256 checksums.
"""

from __future__ import annotations

import copy
import hashlib
import json
import math
import os
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

try:
    import jsonschema
except ImportError:  # pragma: no cover
    jsonschema = None

from . import __version__
from .analysis import (
    detect_quantization,
    fourier_tail_exponent,
    minkowski_dimension,
    smoothing_diagnostic,
    weyl_sum_growth,
)
from .dispersion import DispersionQuartet, IntegralPolynomial
from .fourier import NAMED_DATA, FourierData, RationalTime, grid, time_value
from .linear_solver import (
    manakov_linear_part,
    solve_linear_bv,
    solve_riemann_case1,
    solve_riemann_case2,
)
from .spectral_solver import DivergedError, GridField, SolverConfig, simulate


class ScenarioError(ValueError):
    """Scenario file failed validation; maps to exit code 2."""


_TIME_SCHEMA = {
    "oneOf": [
        {"type": "number"},
        {
            "type": "object",
            "required": ["p", "q"],
            "properties": {"p": {"type": "integer"}, "q": {"type": "integer", "minimum": 1}},
            "additionalProperties": False,
        },
    ]
}

_POLY_SCHEMA = {"type": "array", "items": {"type": "integer"}, "minItems": 1}

_DATA_SCHEMA = {
    "oneOf": [
        {"type": "string", "enum": sorted(NAMED_DATA)},
        {
            "type": "object",
            "required": ["coefficients"],
            "properties": {
                "coefficients": {
                    "type": "object",
                    "additionalProperties": {
                        "type": "array", "items": {"type": "number"},
                        "minItems": 2, "maxItems": 2,
                    },
                }
            },
            "additionalProperties": False,
        },
        {
            "type": "object",
            "required": ["samples"],
            "properties": {
                "samples": {
                    "type": "array",
                    "items": {"type": "array", "items": {"type": "number"},
                              "minItems": 2, "maxItems": 2},
                }
            },
            "additionalProperties": False,
        },
    ]
}

SCENARIO_SCHEMA = {
    "type": "object",
    "required": ["kind"],
    "properties": {
        "kind": {
            "type": "string",
            "enum": ["linear_riemann", "linear_bv", "manakov", "weyl_study", "dimension_study"],
        },
        "name": {"type": "string"},
        "times": {"type": "array", "items": _TIME_SCHEMA},
        "dispersion": {
            "type": "object",
            "required": ["phi1", "phi2", "phi3", "phi4"],
            "properties": {
                "phi1": _POLY_SCHEMA, "phi2": _POLY_SCHEMA,
                "phi3": _POLY_SCHEMA, "phi4": _POLY_SCHEMA,
                "offsets": {"type": "array", "items": {"type": "number"},
                            "minItems": 4, "maxItems": 4},
            },
            "additionalProperties": False,
        },
        "initial_data": {
            "type": "object",
            "properties": {"f": _DATA_SCHEMA, "g": _DATA_SCHEMA},
            "additionalProperties": False,
        },
        "truncation": {"type": "integer", "minimum": 0},
        "grid_size": {"type": "integer", "minimum": 2},
        "solver": {
            "type": "object",
            "properties": {
                "M": {"type": "integer"},
                "dt": {"type": "number"},
                "dealias": {"type": "boolean"},
                "linear_only": {"type": "boolean"},
                "coupling": {"type": "array", "items": {"type": "number"},
                             "minItems": 3, "maxItems": 3},
            },
            "additionalProperties": False,
        },
        "weyl": {
            "type": "object",
            "required": ["polynomial", "t"],
            "properties": {
                "polynomial": _POLY_SCHEMA,
                "t": _TIME_SCHEMA,
                "n_list": {"type": "array", "items": {"type": "integer", "minimum": 1}},
            },
            "additionalProperties": False,
        },
        "analysis": {
            "type": "object",
            "properties": {
                "quantization": {
                    "type": "object",
                    "properties": {
                        "observable": {"type": "string",
                                       "enum": ["re_u", "im_u", "abs_u", "re_v", "im_v", "abs_v"]},
                        "q_hypothesis": {"type": "integer", "minimum": 1},
                        "gibbs_window": {"type": "integer", "minimum": 1},
                    },
                    "additionalProperties": False,
                },
                "dimension": {
                    "type": "object",
                    "properties": {
                        "observable": {"type": "string",
                                       "enum": ["re_u", "im_u", "abs_u", "re_v", "im_v", "abs_v"]},
                        "scale_range": {"type": "array", "items": {"type": "number"},
                                        "minItems": 2, "maxItems": 2},
                    },
                    "additionalProperties": False,
                },
                "smoothing": {
                    "type": "object",
                    "properties": {
                        "k_range": {"type": "array", "items": {"type": "integer"},
                                    "minItems": 2, "maxItems": 2},
                    },
                    "additionalProperties": False,
                },
            },
            "additionalProperties": False,
        },
        "conservation_stride": {"type": "integer", "minimum": 0},
    },
    "additionalProperties": False,
}


def validate_scenario(doc: dict) -> None:
    if jsonschema is not None:
        try:
            jsonschema.validate(doc, SCENARIO_SCHEMA)
        except jsonschema.ValidationError as err:
            path = "/".join(str(p) for p in err.absolute_path) or "<root>"
            raise ScenarioError(f"scenario field '{path}': {err.message}") from None
    elif "kind" not in doc:  # pragma: no cover
        raise ScenarioError("scenario missing 'kind'")
    kind = doc["kind"]
    if kind in ("linear_riemann", "linear_bv", "dimension_study") and "dispersion" not in doc:
        raise ScenarioError(f"kind '{kind}' requires a 'dispersion' block")
    if kind == "weyl_study" and "weyl" not in doc:
        raise ScenarioError("kind 'weyl_study' requires a 'weyl' block")


def parse_time(spec):
    if isinstance(spec, dict):
        return RationalTime(spec["p"], spec["q"])
    return float(spec)


def time_label(t) -> str:
    if isinstance(t, RationalTime):
        return f"t_{t.p}pi_{t.q}"
    return f"t_{fmt(float(t))}"


def fmt(x) -> str:
    """Shortest round-trip decimal text for CSV cells."""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def parse_quartet(block: dict) -> DispersionQuartet:
    polys = [IntegralPolynomial(block[f"phi{i}"]) for i in (1, 2, 3, 4)]
    offsets = tuple(block.get("offsets", (0.0, 0.0, 0.0, 0.0)))
    return DispersionQuartet(*polys, offsets=offsets)


def resolve_data(spec, M: int) -> np.ndarray:
    """Grid samples for a named/explicit initial-data spec."""
    if isinstance(spec, str):
        return NAMED_DATA[spec](M)
    if "coefficients" in spec:
        table = {int(k): complex(v[0], v[1]) for k, v in spec["coefficients"].items()}
        fd = FourierData.from_dict(table)
        x = grid(M)
        out = np.zeros(M, dtype=complex)
        for k in table:
            out += table[k] * np.exp(1j * k * x)
        return out
    vals = np.array([complex(a, b) for a, b in spec["samples"]])
    if len(vals) != M:
        raise ScenarioError(f"explicit samples length {len(vals)} != grid size {M}")
    return vals


def _observable(u: np.ndarray, v: np.ndarray, name: str) -> np.ndarray:
    comp = u if name.endswith("_u") else v
    if name.startswith("re"):
        return comp.real
    if name.startswith("im"):
        return comp.imag
    return np.abs(comp)


class OutputWriter:
    def __init__(self, out_dir: Path):
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.files = []

    def write_text(self, name: str, text: str) -> Path:
        path = self.out_dir / name
        path.write_text(text)
        self.files.append(path)
        return path

    def write_csv(self, name: str, header: str, rows) -> Path:
        lines = [header]
        for row in rows:
            lines.append(",".join(fmt(c) if not isinstance(c, str) else c for c in row))
        return self.write_text(name, "\n".join(lines) + "\n")

    def snapshot_csv(self, t, x, u, v) -> Path:
        rows = zip(x, u.real, u.imag, np.abs(u), v.real, v.imag, np.abs(v))
        return self.write_csv(
            f"{time_label(t)}.csv", "x,re_u,im_u,abs_u,re_v,im_v,abs_v", rows
        )


@dataclass
class RunManifest:
    scenario_hash: str
    version: str
    determinism: str
    outputs: list  # rows (relative path, sha256)

    def to_dict(self) -> dict:
        return {
            "scenario_sha256": self.scenario_hash,
            "tool_version": self.version,
            "determinism": self.determinism,
            "outputs": [{"path": p, "sha256": h} for p, h in self.outputs],
        }


def _sha256_file(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _summarize_snapshot(doc, t, u, v, summary_times, writer):
    analysis = doc.get("analysis", {})
    entry = {"t": time_value(t), "label": time_label(t)}
    if "quantization" in analysis:
        spec = analysis["quantization"]
        obs = spec.get("observable", "re_u")
        rep = detect_quantization(
            _observable(u, v, obs),
            q_hypothesis=spec.get("q_hypothesis"),
            gibbs_window=spec.get("gibbs_window", 4),
        )
        entry["quantization"] = {
            "observable": obs,
            "score": rep.score,
            "plateau_flatness": rep.plateau_flatness,
            "n_jumps": len(rep.jump_locations),
            "jumps_aligned": rep.jumps_aligned,
        }
        writer.write_csv(
            f"jumps_{time_label(t)}.csv", "x", [(x,) for x in rep.jump_locations]
        )
    if "dimension" in analysis:
        spec = analysis["dimension"]
        obs = spec.get("observable", "re_u")
        sr = spec.get("scale_range")
        est = minkowski_dimension(
            _observable(u, v, obs), scale_range=tuple(sr) if sr else None
        )
        entry["dimension"] = {
            "observable": obs,
            "slope": est.slope,
            "r_squared": est.r_squared,
            "valid": est.valid,
        }
        writer.write_csv(
            f"dimension_counts_{time_label(t)}.csv", "eps,count", est.counts
        )
    return entry


def _run_linear(doc, writer):
    quartet = parse_quartet(doc["dispersion"])
    N = doc.get("truncation", 4096)
    M = doc.get("grid_size", 4096)
    x = grid(M)
    kind = doc["kind"]
    summary = []
    for spec in doc.get("times", []):
        t = parse_time(spec)
        if kind == "linear_bv":
            M_data = doc.get("grid_size", 4096)
            f = resolve_data(doc.get("initial_data", {}).get("f", "sigma1"), M_data)
            g = resolve_data(doc.get("initial_data", {}).get("g", "sigma1"), M_data)
            sample = solve_linear_bv(
                quartet, FourierData.from_samples(f), FourierData.from_samples(g), t, x
            )
        elif quartet.delta_poly_is_zero():
            sample = solve_riemann_case2(quartet, t, x, N)
        else:
            sample = solve_riemann_case1(quartet, t, x, N)
        writer.snapshot_csv(t, x, sample.u_values, sample.v_values)
        summary.append(_summarize_snapshot(doc, t, sample.u_values, sample.v_values, None, writer))
    return summary


def _run_manakov(doc, writer):
    solver = doc.get("solver", {})
    cfg = SolverConfig(
        M=solver.get("M", 512),
        dt=solver.get("dt"),
        dealias=solver.get("dealias", False),
        coupling=tuple(solver.get("coupling", (1.0, 1.0, 1.0))),
        linear_only=solver.get("linear_only", False),
    )
    f = resolve_data(doc.get("initial_data", {}).get("f", "sigma1"), cfg.M)
    g = resolve_data(doc.get("initial_data", {}).get("g", "sigma1"), cfg.M)
    times = [parse_time(s) for s in doc.get("times", [])]
    if not times:
        return []
    t_final = max(times, key=time_value)
    stride = doc.get("conservation_stride", 0)
    result = simulate(
        GridField(f), GridField(g), cfg, t_final,
        snapshot_times=times, conservation_stride=stride,
    )
    if stride:
        writer.write_csv(
            "conservation.csv",
            "t,norm_u_sq,norm_v_sq,re_inner,im_inner",
            [
                (t, c.norm_u_sq, c.norm_v_sq, c.inner_uv.real, c.inner_uv.imag)
                for t, c in result.conservation
            ],
        )
    x = grid(cfg.M)
    summary = []
    for t, state in result.snapshots:
        u, v = state.u.values, state.v.values
        writer.snapshot_csv(t, x, u, v)
        entry = _summarize_snapshot(doc, t, u, v, None, writer)
        smoothing = doc.get("analysis", {}).get("smoothing")
        if smoothing is not None:
            kr = smoothing.get("k_range")
            rep = smoothing_diagnostic(
                u, v, FourierData.from_samples(f), FourierData.from_samples(g), t,
                k_range=tuple(kr) if kr else None,
            )
            entry["smoothing"] = {
                "residual_sup_u": rep.residual_sup_u,
                "tail_u": rep.tail_u,
                "tail_residual_u": rep.tail_residual_u,
                "tail_v": rep.tail_v,
                "tail_residual_v": rep.tail_residual_v,
            }
        summary.append(entry)
    return summary


def _run_weyl(doc, writer):
    block = doc["weyl"]
    P = IntegralPolynomial(block["polynomial"])
    t = parse_time(block["t"])
    growth = weyl_sum_growth(P, t, block.get("n_list"))
    writer.write_csv("weyl.csv", "N,sup", growth.table)
    return [{
        "gamma": growth.gamma,
        "n_range": list(growth.n_range),
        "r_squared": growth.r_squared,
    }]


def run_scenario(source, out_dir, overrides=None) -> RunManifest:
    """Execute one scenario (path or dict) and write outputs plus manifest."""
    if isinstance(source, (str, Path)):
        try:
            doc = json.loads(Path(source).read_text())
        except json.JSONDecodeError as err:
            raise ScenarioError(f"invalid JSON in {source}: {err}") from None
    else:
        doc = copy.deepcopy(source)
    for key, value in (overrides or {}).items():
        _apply_override(doc, key, value)
    validate_scenario(doc)
    canonical = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    scenario_hash = hashlib.sha256(canonical.encode()).hexdigest()
    writer = OutputWriter(Path(out_dir))
    kind = doc["kind"]
    if kind in ("linear_riemann", "linear_bv", "dimension_study"):
        summary = _run_linear(doc, writer)
    elif kind == "manakov":
        summary = _run_manakov(doc, writer)
    else:
        summary = _run_weyl(doc, writer)
    writer.write_text(
        "summary.json", json.dumps({"kind": kind, "results": summary}, indent=2, sort_keys=True) + "\n"
    )
    outputs = [
        (str(p.relative_to(writer.out_dir)), _sha256_file(p)) for p in writer.files
    ]
    manifest = RunManifest(
        scenario_hash=scenario_hash,
        version=__version__,
        determinism="fully deterministic: no randomness, no wall-clock inputs",
        outputs=sorted(outputs),
    )
    (writer.out_dir / "manifest.json").write_text(
        json.dumps(manifest.to_dict(), indent=2, sort_keys=True) + "\n"
    )
    return manifest


def _apply_override(doc: dict, dotted: str, value):
    parts = dotted.split(".")
    node = doc
    for p in parts[:-1]:
        node = node.setdefault(p, {})
    node[parts[-1]] = value


def _set_axis(doc: dict, axis: str, value):
    if axis == "time":
        doc["times"] = [value]
        if "weyl" in doc:
            doc["weyl"]["t"] = value
    elif axis == "N":
        doc["truncation"] = int(value)
    elif axis == "dt":
        doc.setdefault("solver", {})["dt"] = float(value)
    elif axis == "M":
        doc.setdefault("solver", {})["M"] = int(value)
        doc["grid_size"] = int(value)
    else:
        raise ScenarioError(f"unsupported sweep axis '{axis}'")


def _flatten_summary(summary) -> dict:
    row = {}
    for entry in summary:
        for key in ("gamma", "r_squared"):
            if key in entry:
                row[key] = entry[key]
        if "quantization" in entry:
            row["score"] = entry["quantization"]["score"]
            row["n_jumps"] = entry["quantization"]["n_jumps"]
        if "dimension" in entry:
            row["dimension"] = entry["dimension"]["slope"]
        if "smoothing" in entry:
            row["tail_gap_u"] = (
                entry["smoothing"]["tail_residual_u"] - entry["smoothing"]["tail_u"]
            )
    return row


def _sweep_one(args):
    doc, axis, value, out_dir = args
    variant = copy.deepcopy(doc)
    _set_axis(variant, axis, value)
    try:
        run_scenario(variant, out_dir)
        summary = json.loads((Path(out_dir) / "summary.json").read_text())["results"]
        row = _flatten_summary(summary)
        row["status"] = "ok"
    except Exception as err:  # per-value isolation: record and continue
        row = {"status": f"error: {type(err).__name__}: {err}"}
    return row


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get("TALBOT_WORKERS", "1")))
    except ValueError:
        return 1


def sweep(source, axis: str, values, out_dir, workers: int | None = None) -> Path:
    """Run a scenario template across one axis; one summary row per value."""
    if isinstance(source, (str, Path)):
        doc = json.loads(Path(source).read_text())
    else:
        doc = copy.deepcopy(source)
    validate_scenario(doc)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if workers is None:
        workers = default_workers()
    tasks = [
        (doc, axis, v, str(out_dir / f"value_{i}")) for i, v in enumerate(values)
    ]
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_one, tasks))
    else:
        rows = [_sweep_one(t) for t in tasks]
    keys = sorted({k for r in rows for k in r if k != "status"})
    header = ["value"] + keys + ["status"]
    lines = [",".join(header)]
    for v, row in zip(values, rows):
        vtxt = time_label(parse_time(v)) if axis == "time" and isinstance(v, dict) else fmt(v)
        cells = [vtxt]
        for k in keys:
            cells.append(fmt(row[k]) if k in row else "")
        cells.append('"%s"' % row["status"].replace('"', "'"))
        lines.append(",".join(cells))
    path = out_dir / "sweep.csv"
    path.write_text("\n".join(lines) + "\n")
    return path


def bundled_scenarios():
    base = resources.files("talbot") / "scenarios"
    return sorted(p.name for p in base.iterdir() if p.name.endswith(".json"))


def bundled_scenario_path(name: str) -> Path:
    base = resources.files("talbot") / "scenarios"
    return Path(str(base / name))
