"""Scenario files: deterministic inputs, pipeline runs and reproducible reports.

A scenario is a JSON document with a required ``"version"`` field; unknown
fields are rejected.  ``generate`` turns it into input files, ``run`` executes
the recovery pipeline plus optional probes and evaluates the configured checks.
Reports are canonical JSON; everything except the ``"timing"`` block is a
function of the scenario (and seed) alone.
"""

from __future__ import annotations

import copy
import csv
import time
from dataclasses import dataclass
from pathlib import Path

import jsonschema
import numpy as np
import scipy.sparse as sp

from . import __version__
from .filtration import (
    CoarseFiltration,
    amplify,
    explicit_filtration,
    filter_filtration,
    group_filtration,
    line_filtration,
    metric_filtration,
)
from .groups import cyclic_group, dihedral_group, symmetric_group
from .localization import ghost_profile, onl_probe
from .operators import SparseOperator, partial_translation
from .relations import Relation
from .rigidity import (
    IsometryData,
    PipelineConfig,
    closeness_level,
    embed_from_map,
    full_pipeline,
)
from .serialization import (
    dumps,
    filtration_from_dict,
    load_json,
    operator_from_dict,
    operator_to_dict,
    save_json,
)

__all__ = [
    "SCENARIO_VERSION",
    "EXIT_OK",
    "EXIT_CHECK",
    "EXIT_STAGE",
    "EXIT_IO",
    "ScenarioError",
    "Scenario",
    "load_scenario",
    "build_inputs",
    "generate",
    "run",
    "report_diff",
    "random_bounded_permutation",
    "perturbed_permutation",
]

SCENARIO_VERSION = 1
EXIT_OK, EXIT_CHECK, EXIT_STAGE, EXIT_IO = 0, 1, 2, 3


class ScenarioError(Exception):
    """Invalid scenario or missing input; maps to exit code 3."""


_SPACE = {
    "type": "object",
    "required": ["kind"],
    "properties": {
        "kind": {"enum": ["line", "points", "group", "filter", "explicit", "amplified", "file"]},
        "n": {"type": "integer", "minimum": 1},
        "radius": {"type": "number", "minimum": 0},
        "max_level": {"type": "integer", "minimum": 1},
        "points": {"type": "array"},
        "group": {"enum": ["cyclic", "dihedral", "symmetric"]},
        "S": {"type": "array", "items": {"type": "integer", "minimum": 0}},
        "base": {"type": "array", "items": {"type": "array", "items": {"type": "integer"}}},
        "relation": {"type": "object"},
        "of": {"type": "object"},
        "factor": {"type": "integer", "minimum": 1},
        "path": {"type": "string"},
    },
    "additionalProperties": False,
}

SCHEMA = {
    "type": "object",
    "required": ["version", "name", "seed", "spaces", "isometry"],
    "properties": {
        "version": {"const": SCENARIO_VERSION},
        "name": {"type": "string"},
        "seed": {"type": "integer", "minimum": 0, "maximum": 2 ** 64 - 1},
        "spaces": {
            "type": "object",
            "required": ["X", "Y"],
            "properties": {"X": _SPACE, "Y": _SPACE},
            "additionalProperties": False,
        },
        "isometry": {
            "type": "object",
            "required": ["kind"],
            "properties": {
                "kind": {"enum": ["permutation", "perturbed-permutation", "embedding-map", "matrix-file"]},
                "max_displacement": {"type": "integer", "minimum": 0},
                "theta": {"type": "number"},
                "band_radius": {"type": "integer", "minimum": 0},
                "map": {"type": "array", "items": {"type": "integer", "minimum": 0}},
                "scale": {"type": "integer", "minimum": 1},
                "path": {"type": "string"},
            },
            "additionalProperties": False,
        },
        "pipeline": {
            "type": "object",
            "properties": {
                "delta": {"type": "number", "exclusiveMinimum": 0},
                "eta": {"type": "number", "exclusiveMinimum": 0},
                "eps": {"type": "number", "exclusiveMinimum": 0},
                "K": {"type": "integer", "minimum": 0},
                "require_bijection": {"type": "boolean"},
                "bruteforce": {"type": "boolean"},
            },
            "additionalProperties": False,
        },
        "probes": {
            "type": "object",
            "properties": {
                "onl": {
                    "type": "object",
                    "required": ["e_level", "m", "num_samples"],
                    "properties": {
                        "space": {"enum": ["X", "Y"]},
                        "e_level": {"type": "integer", "minimum": 0},
                        "m": {"type": "number", "exclusiveMinimum": 0},
                        "num_samples": {"type": "integer", "minimum": 1},
                        "max_k": {"type": "integer", "minimum": 0},
                    },
                    "additionalProperties": False,
                },
                "ghost": {
                    "type": "object",
                    "required": ["step"],
                    "properties": {"step": {"type": "integer", "minimum": 1}},
                    "additionalProperties": False,
                },
            },
            "additionalProperties": False,
        },
        "checks": {
            "type": "object",
            "properties": {
                "h_equals_truth": {"type": "boolean"},
                "f_equals_truth": {"type": "boolean"},
                "locators_contain_truth": {"type": "boolean"},
                "max_closeness_gf": {"type": "integer", "minimum": 0},
                "max_closeness_h_truth": {"type": "integer", "minimum": 0},
                "forward_slack": {"type": "integer", "minimum": 0},
                "verdict": {"type": "string"},
                "max_onl_k": {"type": "integer", "minimum": 0},
            },
            "additionalProperties": False,
        },
    },
    "additionalProperties": False,
}


@dataclass(frozen=True)
class Scenario:
    data: dict
    base_dir: Path

    @property
    def name(self) -> str:
        return self.data["name"]

    @property
    def seed(self) -> int:
        return int(self.data["seed"])

    def with_seed(self, seed: int) -> "Scenario":
        d = copy.deepcopy(self.data)
        d["seed"] = int(seed)
        return Scenario(_validate(d), self.base_dir)

    def config(self) -> PipelineConfig:
        return PipelineConfig(**self.data.get("pipeline", {}))


def _validate(d: dict) -> dict:
    try:
        jsonschema.validate(d, SCHEMA)
    except jsonschema.ValidationError as err:
        where = "/".join(str(p) for p in err.absolute_path) or "<root>"
        raise ScenarioError(f"invalid scenario at {where}: {err.message}") from None
    return d


def load_scenario(path_or_dict, base_dir=None) -> Scenario:
    if isinstance(path_or_dict, dict):
        return Scenario(_validate(copy.deepcopy(path_or_dict)), Path(base_dir or "."))
    path = Path(path_or_dict)
    if not path.exists():
        raise ScenarioError(f"scenario file not found: {path}")
    try:
        data = load_json(path)
    except ValueError as err:
        raise ScenarioError(f"scenario file is not valid JSON: {err}") from None
    sc = Scenario(_validate(data), path.parent)
    for ref in _file_refs(sc.data):
        if not (sc.base_dir / ref).exists():
            raise ScenarioError(f"referenced file not found: {ref}")
    return sc


def _file_refs(d: dict):
    for key in ("X", "Y"):
        s = d["spaces"][key]
        while s.get("kind") == "amplified":
            s = s.get("of", {})
        if s.get("kind") == "file":
            yield s["path"]
    if d["isometry"]["kind"] == "matrix-file":
        yield d["isometry"]["path"]


def _need(spec: dict, *keys):
    missing = [k for k in keys if k not in spec]
    if missing:
        raise ScenarioError(f"space kind {spec['kind']!r} needs field(s) {missing}")


def build_space(spec: dict, base_dir: Path = Path(".")) -> CoarseFiltration:
    kind = spec["kind"]
    cap = spec.get("max_level", 64)
    if kind == "line":
        _need(spec, "n")
        return line_filtration(spec["n"], int(spec.get("radius", 1)), max_level=cap)
    if kind == "points":
        _need(spec, "points")
        return metric_filtration(spec["points"], spec.get("radius", 1.0), max_level=cap)
    if kind == "group":
        _need(spec, "group", "n", "S")
        maker = {"cyclic": cyclic_group, "dihedral": dihedral_group, "symmetric": symmetric_group}
        grp = maker[spec["group"]](spec["n"])
        try:
            return group_filtration(grp, spec["S"], max_level=cap)
        except ValueError as err:
            raise ScenarioError(f"group space: {err}") from None
    if kind == "filter":
        _need(spec, "n", "base")
        try:
            return filter_filtration(spec["n"], spec["base"], radius=int(spec.get("radius", 1)), max_level=cap)
        except ValueError as err:
            raise ScenarioError(f"filter space: {err}") from None
    if kind == "explicit":
        _need(spec, "relation")
        r = spec["relation"]
        return explicit_filtration(Relation.from_pairs(r["size"], r["pairs"]), max_level=cap)
    if kind == "amplified":
        _need(spec, "of", "factor")
        return amplify(build_space(spec["of"], base_dir), spec["factor"])
    if kind == "file":
        _need(spec, "path")
        return filtration_from_dict(load_json(base_dir / spec["path"]))
    raise ScenarioError(f"unknown space kind {kind!r}")


def random_bounded_permutation(n: int, max_displacement: int, rng: np.random.Generator) -> np.ndarray:
    """Shuffle within consecutive blocks of length ``max_displacement + 1``.

    The block grid is shifted by a random offset, so ``|sigma(x) - x| <= max_displacement``.
    """
    width = max_displacement + 1
    sigma = np.arange(n)
    offset = int(rng.integers(0, width))
    cuts = [0] + list(range(offset if offset else width, n, width)) + [n]
    for a, b in zip(cuts, cuts[1:]):
        if b > a:
            sigma[a:b] = a + rng.permutation(b - a)
    return sigma


def perturbed_permutation(sigma: np.ndarray, theta: float, band_radius: int,
                          rng: np.random.Generator) -> np.ndarray:
    """``exp(i theta H) P`` with ``H`` a random banded Hermitian matrix of norm 1."""
    n = len(sigma)
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    i, j = np.indices((n, n))
    z[np.abs(i - j) > band_radius] = 0.0
    h = (z + z.conj().T) / 2.0
    lam, vec = np.linalg.eigh(h)
    scale = np.max(np.abs(lam))
    if scale > 0:
        lam = lam / scale
    w = (vec * np.exp(1j * theta * lam)) @ vec.conj().T
    p = np.zeros((n, n))
    p[sigma, np.arange(n)] = 1.0
    return w @ p


def build_inputs(sc: Scenario):
    """Spaces, isometry and ground truth (``None`` when unknown) for a scenario."""
    d = sc.data
    X = build_space(d["spaces"]["X"], sc.base_dir)
    Y = build_space(d["spaces"]["Y"], sc.base_dir)
    rng = np.random.default_rng(sc.seed)
    iso_spec = d["isometry"]
    kind = iso_spec["kind"]
    truth = None
    if kind in ("permutation", "perturbed-permutation"):
        if X.size != Y.size:
            raise ScenarioError("permutation isometries need equally sized spaces")
        truth = random_bounded_permutation(X.size, iso_spec.get("max_displacement", 5), rng)
        if kind == "permutation":
            iso = embed_from_map(truth, X, Y)
        else:
            u = perturbed_permutation(truth, iso_spec.get("theta", 0.1), iso_spec.get("band_radius", 1), rng)
            iso = IsometryData(SparseOperator(sp.csr_array(u), X.size, Y.size), X, Y)
    elif kind == "embedding-map":
        if "map" in iso_spec:
            truth = np.array(iso_spec["map"], dtype=np.int64)
        else:
            truth = iso_spec.get("scale", 1) * np.arange(X.size)
        if len(truth) != X.size or truth.max() >= Y.size:
            raise ScenarioError("embedding map does not fit the spaces")
        try:
            iso = embed_from_map(truth, X, Y)
        except ValueError as err:
            raise ScenarioError(f"embedding map: {err}") from None
    elif kind == "matrix-file":
        u = operator_from_dict(load_json(sc.base_dir / iso_spec["path"]))
        try:
            iso = IsometryData(u, X, Y)
        except ValueError as err:
            raise ScenarioError(f"matrix file: {err}") from None
    else:
        raise ScenarioError(f"unknown isometry kind {kind!r}")
    return X, Y, iso, truth


def generate(sc: Scenario, out_dir) -> list[Path]:
    """Write ``X.json``, ``Y.json``, ``U.json`` (and ``truth.json``) into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    X, Y, iso, truth = build_inputs(sc)
    written = []
    for name, obj in (("X.json", X.to_dict()), ("Y.json", Y.to_dict()), ("U.json", operator_to_dict(iso.U))):
        save_json(obj, out / name)
        written.append(out / name)
    if truth is not None:
        save_json({"map": [int(v) for v in truth]}, out / "truth.json")
        written.append(out / "truth.json")
    save_json(sc.data, out / "scenario.json")
    written.append(out / "scenario.json")
    return written


def _evaluate_checks(checks: dict, res, truth, onl, target: CoarseFiltration) -> dict:
    out = {}

    def put(name, passed, value):
        out[name] = {"passed": bool(passed), "value": value}

    for name, want in checks.items():
        if name in ("h_equals_truth", "f_equals_truth", "locators_contain_truth",
                    "max_closeness_h_truth") and truth is None:
            put(name, False, "no ground truth available")
            continue
        if not res.ok and name != "max_onl_k":
            put(name, False, f"pipeline failed at {res.failed_stage}")
            continue
        if name == "h_equals_truth":
            got = res.h is not None and np.array_equal(res.h, truth)
            put(name, got == want, got)
        elif name == "f_equals_truth":
            got = np.array_equal(res.f, truth)
            put(name, got == want, got)
        elif name == "locators_contain_truth":
            got = all(int(truth[x]) in res.locators.Y_of[x] for x in range(len(truth)))
            put(name, got == want, got)
        elif name == "max_closeness_gf":
            lv = res.closeness_gf.level if res.closeness_gf.contained else None
            put(name, lv is not None and lv <= want, lv)
        elif name == "max_closeness_h_truth":
            m = res.h if res.h is not None else res.f
            cert = closeness_level(m, truth, target)
            lv = cert.level if cert.contained else None
            put(name, lv is not None and lv <= want, lv)
        elif name == "forward_slack":
            tab = res.distortion_f.forward
            ok = all(v is not None and v <= k + want for k, v in enumerate(tab))
            put(name, ok, list(tab))
        elif name == "verdict":
            put(name, res.verdict == want, res.verdict)
        elif name == "max_onl_k":
            if onl is None:
                put(name, False, "no onl probe configured")
            else:
                put(name, onl.k is not None and onl.k <= want, onl.k)
    return out


def run(sc: Scenario, out_dir=None, *, strict: bool = False) -> tuple[dict, int]:
    """Execute a scenario; returns ``(report, exit_code)``.

    Exit codes: 0 all checks pass, 1 a check failed, 2 a pipeline stage failed,
    3 the scenario or an input file is unusable.  With ``strict`` an
    inconclusive pipeline verdict also counts as a failed check.
    """
    t0 = time.perf_counter()
    report = {
        "artifact_version": __version__,
        "report_schema": 1,
        "scenario": sc.data,
        "seed": sc.seed,
    }
    try:
        X, Y, iso, truth = build_inputs(sc)
        cfg = sc.config()
    except (ScenarioError, OSError, ValueError, KeyError) as err:
        report.update(error=str(err), exit_code=EXIT_IO, checks={}, verdict="error",
                      timing={"total_seconds": time.perf_counter() - t0})
        return report, EXIT_IO
    t1 = time.perf_counter()
    res = full_pipeline(iso, cfg)
    t2 = time.perf_counter()
    report["pipeline"] = res.to_dict()
    report["ground_truth"] = None if truth is None else [int(v) for v in truth]

    probes = sc.data.get("probes", {})
    onl = None
    if "onl" in probes:
        p = probes["onl"]
        space = X if p.get("space", "X") == "X" else Y
        onl = onl_probe(space, p["e_level"], p["m"], p["num_samples"], seed=sc.seed,
                        max_k=p.get("max_k"))
        report["onl"] = onl.to_dict()
    ghost = None
    if "ghost" in probes:
        step = probes["ghost"]["step"]
        a = iso.phi(partial_translation(X.generator))
        exhaustion = [range(min(s, Y.size)) for s in range(step, Y.size + step, step)]
        ghost = ghost_profile(a, exhaustion)
        report["ghost"] = {"sizes": [len(s) for s in ghost.exhaustion], "eps": list(ghost.eps)}

    checks = _evaluate_checks(sc.data.get("checks", {}), res, truth, onl, Y)
    if strict and res.ok:
        checks["strict_verdict"] = {
            "passed": res.verdict in ("coarse_equivalence", "coarse_embedding"),
            "value": res.verdict,
        }
    report["checks"] = checks
    if not res.ok:
        code = EXIT_STAGE
        report["failed_stage"] = res.failed_stage
    elif all(c["passed"] for c in checks.values()):
        code = EXIT_OK
    else:
        code = EXIT_CHECK
    report["verdict"] = "pass" if code == EXIT_OK else "fail"
    report["exit_code"] = code
    report["timing"] = {
        "build_seconds": t1 - t0,
        "pipeline_seconds": t2 - t1,
        "total_seconds": time.perf_counter() - t0,
    }
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        save_json(report, out / "report.json")
        _write_csvs(out, res, ghost)
    return report, code


def _write_csvs(out: Path, res, ghost):
    rows = []
    for name, rep in (("f", res.distortion_f), ("g", res.distortion_g)):
        if rep is None:
            continue
        for side, tab in (("forward", rep.forward), ("backward", rep.backward)):
            for k, v in enumerate(tab):
                rows.append([name, side, k, "" if v is None else v])
    with open(out / "distortion.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["map", "direction", "k", "level"])
        w.writerows(rows)
    if ghost is not None:
        with open(out / "ghost.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["set_size", "eps"])
            for s, e in zip(ghost.exhaustion, ghost.eps):
                w.writerow([len(s), repr(e)])


_IGNORED = {"timing"}


def report_diff(a: dict, b: dict) -> list[dict]:
    """Field-level differences between two reports, ignoring ``timing``.

    Raises ``ValueError`` when the reports have different schema versions.
    """
    for key in ("report_schema", "artifact_version"):
        if key not in a or key not in b:
            raise ValueError(f"not a report: missing {key!r}")
    if a["report_schema"] != b["report_schema"] or \
            str(a["artifact_version"]).split(".")[0] != str(b["artifact_version"]).split(".")[0]:
        raise ValueError("reports use different schema versions")
    diffs: list[dict] = []
    _diff(a, b, "", diffs)
    return diffs


def _diff(a, b, path, out):
    if isinstance(a, dict) and isinstance(b, dict):
        for k in sorted(set(a) | set(b)):
            if not path and k in _IGNORED:
                continue
            p = f"{path}/{k}"
            if k not in a or k not in b:
                out.append({"path": p, "a": a.get(k), "b": b.get(k)})
            else:
                _diff(a[k], b[k], p, out)
    elif isinstance(a, list) and isinstance(b, list) and len(a) == len(b):
        for i, (x, y) in enumerate(zip(a, b)):
            _diff(x, y, f"{path}/{i}", out)
    elif a != b:
        out.append({"path": path, "a": a, "b": b})


def canonical(report: dict) -> str:
    """Report text without timing, for byte comparisons."""
    return dumps({k: v for k, v in report.items() if k not in _IGNORED})
