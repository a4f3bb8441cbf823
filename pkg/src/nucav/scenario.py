"""Scenario files: schema validation, presets, hashing, level-scheme export.

A scenario is one JSON document describing cavity, coupling, hyperfine,
geometry and scan. Presets expand to explicit values (the xi scale factor
is applied to kappa, kappa_r, detuning_slope and N g^2) before hashing, so
the hash embedded in every output identifies the physics, not the spelling.
"""

import hashlib
import json
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .cavity import CavityParams, CouplingParams
from .ensemble import FE57_33T, HyperfineConfig
from .errors import NucavError, ScenarioError
from .geometry import ExperimentGeometry, build_frame
from .linear_response import EffectiveLevelSystem, canonical_geometries

PRESETS = ("unmagnetized", "magnetized-a", "magnetized-b", "magnetized-c", "magnetized-d",
           "empty-cavity-g2")

_SCAN_AXES = ("detuning", "angle", "tau")
_ENGINES = ("linear", "quantum")


def list_presets() -> tuple[str, ...]:
    return PRESETS


def load_preset(name: str) -> dict:
    if name not in PRESETS:
        raise ScenarioError("preset", f"unknown preset {name!r}; available: {', '.join(PRESETS)}")
    text = resources.files("nucav.presets").joinpath(f"{name}.json").read_text()
    return json.loads(text)


def _require(doc: dict, field: str, path: str, types, default=None, required=False):
    if field not in doc:
        if required:
            raise ScenarioError(path, "missing required field")
        return default
    value = doc[field]
    if types is not None and not isinstance(value, types):
        raise ScenarioError(path, f"expected {types}, got {type(value).__name__}")
    return value


def _as_number(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(path, f"expected a number, got {value!r}")
    return float(value)


def _parse_vector(value, path: str) -> np.ndarray:
    """A 3-vector: three reals, or three [re, im] pairs."""
    if not isinstance(value, list) or len(value) != 3:
        raise ScenarioError(path, "expected a list of three components")
    out = np.zeros(3, dtype=complex)
    for i, comp in enumerate(value):
        if isinstance(comp, list):
            if len(comp) != 2:
                raise ScenarioError(f"{path}[{i}]", "complex component must be [re, im]")
            out[i] = _as_number(comp[0], f"{path}[{i}][0]") + 1j * _as_number(comp[1], f"{path}[{i}][1]")
        else:
            out[i] = _as_number(comp, f"{path}[{i}]")
    return out


def _vector_to_json(vec) -> list:
    vec = np.asarray(vec, dtype=complex)
    if np.max(np.abs(vec.imag)) == 0.0:
        return [float(c) for c in vec.real]
    return [[float(c.real), float(c.imag)] for c in vec]


def expand(doc: dict) -> dict:
    """Resolve presets and apply the xi scale; returns the explicit document."""
    if not isinstance(doc, dict):
        raise ScenarioError("scenario", "top level must be a JSON object")
    out = json.loads(json.dumps(doc))  # deep copy, JSON types only

    cav = _require(out, "cavity", "cavity", dict, required=True)
    xi = _as_number(cav.get("xi", 1.0), "cavity.xi")
    if xi <= 0:
        raise ScenarioError("cavity.xi", "scale factor must be positive")
    for key in ("kappa", "kappa_r"):
        cav[key] = _as_number(_require(cav, key, f"cavity.{key}", None, required=True),
                              f"cavity.{key}") * xi
    cav["kappa_t"] = _as_number(cav.get("kappa_t", 0.0), "cavity.kappa_t") * xi
    cav["detuning_slope"] = _as_number(cav.get("detuning_slope", 0.0), "cavity.detuning_slope") * xi
    cav["phi0_mrad"] = _as_number(cav.get("phi0_mrad", 2.96), "cavity.phi0_mrad")
    cav["xi"] = 1.0

    cpl = _require(out, "coupling", "coupling", dict, required=True)
    if "ng2" in cpl:
        cpl["ng2"] = _as_number(cpl["ng2"], "coupling.ng2") * xi
    elif "g" in cpl and "n" in cpl:
        n = _as_number(cpl["n"], "coupling.n")
        g = _as_number(cpl["g"], "coupling.g")
        cpl.clear()
        cpl["ng2"] = n * g * g * xi
        cpl["n"] = n
    else:
        raise ScenarioError("coupling", "provide either ng2 or both n and g")

    hf = out.get("hyperfine", "off")
    if hf == "Fe57@33T":
        out["hyperfine"] = dict(FE57_33T)
    elif hf == "off":
        out["hyperfine"] = {"delta_g": 0.0, "delta_e": 0.0}
    elif isinstance(hf, dict):
        out["hyperfine"] = {
            "delta_g": _as_number(hf.get("delta_g", 0.0), "hyperfine.delta_g"),
            "delta_e": _as_number(hf.get("delta_e", 0.0), "hyperfine.delta_e"),
        }
    else:
        raise ScenarioError("hyperfine", f"expected 'off', 'Fe57@33T' or an object, got {hf!r}")

    geo = _require(out, "geometry", "geometry", (str, dict), required=True)
    if isinstance(geo, str):
        if geo not in ("a", "b", "c", "d"):
            raise ScenarioError("geometry", f"unknown named geometry {geo!r}")
        frame = canonical_geometries()[geo]
        out["geometry"] = {
            "surface_normal": _vector_to_json(frame.a1.real),
            "propagation": _vector_to_json(frame.k.real),
            "a_in": _vector_to_json(frame.a_in),
            "a_out": _vector_to_json(frame.a_out),
            "b_axis": _vector_to_json(frame.b_axis),
            "name": geo,
        }

    scan = _require(out, "scan", "scan", dict, required=True)
    scan.setdefault("axis", "detuning")
    if scan["axis"] not in _SCAN_AXES:
        raise ScenarioError("scan.axis", f"must be one of {_SCAN_AXES}")
    scan["from"] = _as_number(_require(scan, "from", "scan.from", None, required=True), "scan.from")
    scan["to"] = _as_number(_require(scan, "to", "scan.to", None, required=True), "scan.to")
    points = scan.get("points", 2001)
    if isinstance(points, bool) or not isinstance(points, int) or points < 1:
        raise ScenarioError("scan.points", "must be a positive integer")
    scan["points"] = points
    scan["couple_delta_c"] = bool(scan.get("couple_delta_c", False))
    if "delta" in scan:
        scan["delta"] = _as_number(scan["delta"], "scan.delta")

    out.setdefault("engine", "linear")
    if out["engine"] not in _ENGINES:
        raise ScenarioError("engine", f"must be one of {_ENGINES}")
    if "quantum" in out:
        q = _require(out, "quantum", "quantum", dict, required=True)
        q["n_nuclei"] = q.get("n_nuclei", 1)
        q["n_ph"] = q.get("n_ph", 2)
        q["a_in"] = _as_number(q.get("a_in", 0.05), "quantum.a_in")
        q["delta"] = _as_number(q.get("delta", 0.0), "quantum.delta")
    return out


def scenario_hash(expanded: dict) -> str:
    canonical = json.dumps(expanded, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()[:12]


@dataclass(frozen=True)
class Scenario:
    """Validated scenario with typed physics objects and a stable hash."""

    geometry: ExperimentGeometry
    cavity: CavityParams
    coupling: CouplingParams
    hyperfine: HyperfineConfig
    scan: dict
    engine: str
    quantum: dict | None
    expanded: dict
    hash: str


def _check_unit_vector(vec, path: str):
    n = float(np.sqrt(np.real(np.vdot(vec, vec))))
    if abs(n - 1.0) > 1e-6:
        raise ScenarioError(
            path, f"must be a unit vector (norm {n:.9g}); divide each component by {n:.9g}"
        )


def scenario_from_dict(doc: dict) -> Scenario:
    expanded = expand(doc)
    geo = expanded["geometry"]
    for key in ("surface_normal", "propagation", "a_in", "a_out"):
        if key not in geo:
            raise ScenarioError(f"geometry.{key}", "missing required field")
    a_in = _parse_vector(geo["a_in"], "geometry.a_in")
    a_out = _parse_vector(geo["a_out"], "geometry.a_out")
    _check_unit_vector(a_in, "geometry.a_in")
    _check_unit_vector(a_out, "geometry.a_out")
    b_axis = None
    if geo.get("b_axis") is not None:
        b_axis = _parse_vector(geo["b_axis"], "geometry.b_axis")
        _check_unit_vector(b_axis, "geometry.b_axis")
    try:
        geometry = build_frame(
            _parse_vector(geo["surface_normal"], "geometry.surface_normal"),
            _parse_vector(geo["propagation"], "geometry.propagation"),
            a_in=a_in, a_out=a_out, b_axis=b_axis,
        )
    except NucavError as exc:
        raise ScenarioError("geometry", str(exc)) from exc

    cav_doc = expanded["cavity"]
    try:
        cavity = CavityParams(
            kappa=cav_doc["kappa"], kappa_r=cav_doc["kappa_r"], kappa_t=cav_doc["kappa_t"],
            detuning_slope=cav_doc["detuning_slope"], phi0_mrad=cav_doc["phi0_mrad"],
            xi=cav_doc["xi"],
        )
        cavity.validate()
    except NucavError as exc:
        raise ScenarioError("cavity", str(exc)) from exc

    hf_doc = expanded["hyperfine"]
    magnetized = hf_doc["delta_g"] != 0.0 or hf_doc["delta_e"] != 0.0
    if magnetized and b_axis is None:
        raise ScenarioError("geometry.b_axis", "required for a magnetized scenario")
    try:
        hyperfine = HyperfineConfig(
            delta_g=hf_doc["delta_g"], delta_e=hf_doc["delta_e"],
            axis=b_axis if magnetized else None,
        )
    except NucavError as exc:
        raise ScenarioError("hyperfine", str(exc)) from exc

    cpl = expanded["coupling"]
    try:
        coupling = CouplingParams.from_ng2(cpl["ng2"], n_total=cpl.get("n", 2.0))
    except NucavError as exc:
        raise ScenarioError("coupling", str(exc)) from exc

    quantum = expanded.get("quantum")
    if expanded["engine"] == "quantum" and quantum is None:
        raise ScenarioError("quantum", "engine 'quantum' requires a quantum section")
    return Scenario(
        geometry=geometry, cavity=cavity, coupling=coupling, hyperfine=hyperfine,
        scan=expanded["scan"], engine=expanded["engine"], quantum=quantum,
        expanded=expanded, hash=scenario_hash(expanded),
    )


def load_scenario(path) -> Scenario:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ScenarioError("scenario", f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ScenarioError("scenario", f"invalid JSON in {path}: {exc}") from exc
    return scenario_from_dict(doc)


def collect_validation_failures(doc: dict) -> list[str]:
    """All named validation failures of a scenario document (empty = valid)."""
    failures = []
    try:
        scenario_from_dict(doc)
    except ScenarioError as exc:
        failures.append(str(exc))
    except NucavError as exc:
        failures.append(f"scenario: {exc}")
    if failures:
        # re-run the piecewise checks so several problems are reported at once
        try:
            expanded = expand(doc)
        except NucavError:
            return failures
        cav = expanded.get("cavity", {})
        if cav.get("kappa", 1.0) < cav.get("kappa_r", 0.0) + cav.get("kappa_t", 0.0):
            msg = "cavity: kappa < kappa_r + kappa_t violates energy conservation"
            if msg not in failures:
                failures.append(msg)
        for key in ("a_in", "a_out", "b_axis"):
            value = expanded.get("geometry", {}).get(key)
            if value is None:
                continue
            try:
                _check_unit_vector(_parse_vector(value, f"geometry.{key}"), f"geometry.{key}")
            except ScenarioError as exc:
                if str(exc) not in failures:
                    failures.append(str(exc))
    return failures


# -- level-scheme file format ------------------------------------------------


def _complex_pair(value: complex) -> list[float]:
    return [float(np.real(value)), float(np.imag(value))]


def _participating_states(system: EffectiveLevelSystem) -> set[int]:
    """Driven states plus everything reachable from them through couplings."""
    n = len(system.energies)
    reachable = {mu for mu in range(n) if system.drive[mu] != 0.0}
    grew = True
    while grew:
        grew = False
        for mu in list(reachable):
            for nu in range(n):
                if nu not in reachable and system.coupling[mu, nu] != 0.0:
                    reachable.add(nu)
                    grew = True
    return reachable


def export_level_scheme(system: EffectiveLevelSystem, scenario_id: str) -> str:
    """Structured text (JSON) dump of the effective level system.

    Contains everything needed to regenerate the spectrum at the same
    cavity detuning, plus an adjacency summary of the level scheme the
    probe actually sees (driven states and their coupling partners).
    Exact zeros in the coupling matrix stay exact through the decimal
    round trip.
    """
    active = _participating_states(system)
    coupled = [
        [mu + 1, nu + 1]
        for mu in sorted(active)
        for nu in sorted(active)
        if nu > mu and system.coupling[mu, nu] != 0.0
    ]
    doc = {
        "scenario": scenario_id,
        "units": "gamma",
        "energies": [float(e) for e in system.energies],
        "drive": [_complex_pair(b) for b in system.drive],
        "coupling": [[_complex_pair(w) for w in row] for row in system.coupling],
        "detection": [_complex_pair(d) for d in system.detection],
        "delta_ls": float(system.delta_ls),
        "zeta_s": float(system.zeta_s),
        "gamma": float(system.gamma),
        "r_el": _complex_pair(system.r_el),
        "kappa": float(system.kappa),
        "kappa_r": float(system.kappa_r),
        "delta_c": float(system.delta_c),
        "a_in": _complex_pair(system.a_in),
        "pol_overlap": _complex_pair(system.pol_overlap),
        "adjacency": {
            "driven": [mu + 1 for mu in range(len(system.energies)) if system.drive[mu] != 0.0],
            "coupled_pairs": coupled,
        },
    }
    return json.dumps(doc, indent=1, sort_keys=True)


def _pair_to_complex(pair) -> complex:
    return complex(pair[0], pair[1])


def import_level_scheme(text: str) -> EffectiveLevelSystem:
    """Rebuild the effective system from an exported level scheme."""
    doc = json.loads(text)
    a_in = _pair_to_complex(doc["a_in"])
    drive = np.array([_pair_to_complex(p) for p in doc["drive"]])
    z = doc["kappa"] + 1j * doc["delta_c"]
    omega = np.sqrt(2.0 * doc["kappa_r"]) * a_in / z
    return EffectiveLevelSystem(
        energies=np.array(doc["energies"], dtype=float),
        drive=drive,
        coupling=np.array([[_pair_to_complex(p) for p in row] for row in doc["coupling"]]),
        detection=np.array([_pair_to_complex(p) for p in doc["detection"]]),
        delta_ls=doc["delta_ls"],
        zeta_s=doc["zeta_s"],
        gamma=doc["gamma"],
        r_el=_pair_to_complex(doc["r_el"]),
        kappa=doc["kappa"],
        kappa_r=doc["kappa_r"],
        delta_c=doc["delta_c"],
        a_in=a_in,
        pol_overlap=_pair_to_complex(doc["pol_overlap"]),
        drive_unit=drive / omega if omega != 0 else np.zeros(len(drive), dtype=complex),
    )
