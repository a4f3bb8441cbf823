"""Command-line front end: run | rocking | levelscheme | g2 | validate.

Exit codes: 0 ok, 2 input error, 3 solver degeneracy, 4 resource cap.
Every output embeds the scenario hash and the gamma unit convention.
"""

import argparse
import json
import sys

import numpy as np

from . import master_equation as mq
from .errors import (
    AmbiguousSteadyStateError,
    DegenerateSpectrumError,
    NucavError,
    ResourceCapError,
    ScenarioError,
)
from .linear_response import build_effective_system, scan_angle, scan_detuning
from .scenario import (
    Scenario,
    export_level_scheme,
    list_presets,
    load_preset,
    scenario_from_dict,
)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_DEGENERATE = 3
EXIT_RESOURCE = 4


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def write_spectrum_csv(path, scenario_id: str, abscissa, reflectance) -> None:
    lines = [f"# scenario={scenario_id} units=gamma", "abscissa,re_R,im_R,abs2_R"]
    for x, r in zip(abscissa, reflectance):
        abs2 = r.real * r.real + r.imag * r.imag
        lines.append(f"{_fmt(x)},{_fmt(r.real)},{_fmt(r.imag)},{_fmt(abs2)}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def write_g2_csv(path, scenario_id: str, taus, values) -> None:
    lines = [f"# scenario={scenario_id} units=gamma", "tau,g2"]
    for tau, val in zip(taus, values):
        lines.append(f"{_fmt(tau)},{_fmt(val)}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def write_meta(path, scenario_id: str, metadata: dict) -> None:
    doc = {"scenario": scenario_id, "units": "gamma"}
    doc.update(metadata)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(doc, sort_keys=True, indent=1) + "\n")


def write_svg(path, scenario_id: str, x, y, xlabel: str, ylabel: str) -> None:
    """Single-polyline plot; a convenience view, not a contract."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    good = np.isfinite(y)
    width, height, margin = 640.0, 400.0, 50.0
    x0, x1 = float(x.min()), float(x.max())
    y0, y1 = float(y[good].min()) if good.any() else 0.0, float(y[good].max()) if good.any() else 1.0
    xs = 1.0 if x1 == x0 else (width - 2 * margin) / (x1 - x0)
    ys = 1.0 if y1 == y0 else (height - 2 * margin) / (y1 - y0)
    pts = " ".join(
        f"{margin + (a - x0) * xs:.2f},{height - margin - (b - y0) * ys:.2f}"
        for a, b in zip(x[good], y[good])
    )
    svg = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0f}" height="{height:.0f}">\n'
        f"<!-- scenario={scenario_id} units=gamma -->\n"
        f'<rect width="100%" height="100%" fill="white"/>\n'
        f'<line x1="{margin}" y1="{height - margin}" x2="{width - margin}" y2="{height - margin}" stroke="black"/>\n'
        f'<line x1="{margin}" y1="{margin}" x2="{margin}" y2="{height - margin}" stroke="black"/>\n'
        f'<text x="{width / 2:.0f}" y="{height - 10:.0f}" text-anchor="middle" font-size="12">{xlabel}</text>\n'
        f'<text x="15" y="{height / 2:.0f}" font-size="12" transform="rotate(-90 15 {height / 2:.0f})" '
        f'text-anchor="middle">{ylabel}</text>\n'
        f'<text x="{margin}" y="{height - margin + 15:.0f}" font-size="10">{_fmt(x0)}</text>\n'
        f'<text x="{width - margin:.0f}" y="{height - margin + 15:.0f}" font-size="10" text-anchor="end">{_fmt(x1)}</text>\n'
        f'<text x="{margin - 5}" y="{height - margin:.0f}" font-size="10" text-anchor="end">{_fmt(y0)}</text>\n'
        f'<text x="{margin - 5}" y="{margin + 4:.0f}" font-size="10" text-anchor="end">{_fmt(y1)}</text>\n'
        f'<polyline fill="none" stroke="steelblue" stroke-width="1.2" points="{pts}"/>\n'
        "</svg>\n"
    )
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(svg)


def _load_document(args) -> dict:
    if args.preset and args.scenario:
        raise ScenarioError("scenario", "give either a scenario file or --preset, not both")
    if args.preset:
        return load_preset(args.preset)
    if not args.scenario:
        raise ScenarioError("scenario", "a scenario file or --preset is required")
    try:
        with open(args.scenario, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ScenarioError("scenario", f"cannot read {args.scenario}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ScenarioError("scenario", f"invalid JSON: {exc}") from exc


def _apply_overrides(doc: dict, args) -> dict:
    scan = doc.setdefault("scan", {})
    if getattr(args, "start", None) is not None:
        scan["from"] = args.start
    if getattr(args, "stop", None) is not None:
        scan["to"] = args.stop
    if getattr(args, "points", None) is not None:
        scan["points"] = args.points
    if getattr(args, "couple", False):
        scan["couple_delta_c"] = True
    if getattr(args, "engine", None):
        doc["engine"] = args.engine
    return doc


def _scan_grid(scenario: Scenario) -> np.ndarray:
    scan = scenario.scan
    return np.linspace(scan["from"], scan["to"], scan["points"])


def _quantum_config(scenario: Scenario, delta: float = 0.0) -> mq.QuantumConfig:
    q = scenario.quantum or {}
    n_nuclei = int(q.get("n_nuclei", 1))
    ng2 = scenario.coupling.ng2
    g = np.sqrt(ng2 / n_nuclei) if n_nuclei else 0.0
    return mq.QuantumConfig(
        cavity=scenario.cavity,
        geometry=scenario.geometry,
        hyperfine=scenario.hyperfine,
        n_nuclei=n_nuclei,
        n_ph=int(q.get("n_ph", 2)),
        g=complex(g),
        a_in=q.get("a_in", 0.05),
        delta=delta,
        dim_cap=int(q.get("dim_cap", mq.DEFAULT_DIM_CAP)),
    )


def cmd_run(args) -> int:
    scenario = scenario_from_dict(_apply_overrides(_load_document(args), args))
    if scenario.scan["axis"] != "detuning":
        raise ScenarioError("scan.axis", "run expects a detuning scan")
    grid = _scan_grid(scenario)
    if scenario.engine == "quantum":
        cfg = _quantum_config(scenario)
        reflectance = mq.quantum_spectrum(cfg, grid)
        metadata = {"axis": "detuning_gamma", "engine": "quantum",
                    "n_nuclei": cfg.n_nuclei, "n_ph": cfg.n_ph, "failed_points": []}
    else:
        spectrum = scan_detuning(
            scenario.geometry, scenario.cavity, scenario.coupling, scenario.hyperfine,
            grid, couple_delta_c=scenario.scan["couple_delta_c"],
        )
        reflectance = spectrum.reflectance
        metadata = dict(spectrum.metadata)
        metadata["engine"] = "linear"
    out = args.out or "spectrum.csv"
    write_spectrum_csv(out, scenario.hash, grid, reflectance)
    write_meta(str(out) + ".meta.json", scenario.hash, metadata)
    if args.svg:
        abs2 = reflectance.real ** 2 + reflectance.imag ** 2
        write_svg(str(out) + ".svg", scenario.hash, grid, abs2, "detuning (gamma)", "|R|^2")
    failed = metadata.get("failed_points", [])
    if failed:
        print(f"solver degeneracy at detuning(s) {failed}", file=sys.stderr)
        return EXIT_DEGENERATE
    print(f"wrote {out} (scenario {scenario.hash}, {len(grid)} points)")
    return EXIT_OK


def cmd_rocking(args) -> int:
    scenario = scenario_from_dict(_apply_overrides(_load_document(args), args))
    scan = scenario.scan
    if scan["axis"] == "angle":
        grid = np.linspace(scan["from"], scan["to"], scan["points"])
    else:
        phi0 = scenario.cavity.phi0_mrad
        grid = np.linspace(phi0 - 0.2, phi0 + 0.2, scan["points"])
    delta = scan.get("delta", 1e3)
    spectrum = scan_angle(
        scenario.geometry, scenario.cavity, scenario.coupling, scenario.hyperfine,
        grid, delta=delta,
    )
    out = args.out or "rocking.csv"
    write_spectrum_csv(out, scenario.hash, grid, spectrum.reflectance)
    write_meta(str(out) + ".meta.json", scenario.hash, spectrum.metadata)
    if args.svg:
        write_svg(str(out) + ".svg", scenario.hash, grid, spectrum.abs2, "angle (mrad)", "|R|^2")
    failed = spectrum.metadata.get("failed_points", [])
    if failed:
        print(f"solver degeneracy at angle(s) {failed}", file=sys.stderr)
        return EXIT_DEGENERATE
    print(f"wrote {out} (minimum at {spectrum.metadata['minimum_angle_mrad']} mrad)")
    return EXIT_OK


def cmd_levelscheme(args) -> int:
    scenario = scenario_from_dict(_apply_overrides(_load_document(args), args))
    if scenario.engine != "linear":
        raise ScenarioError("engine", "levelscheme export requires the linear engine")
    system = build_effective_system(
        scenario.geometry, scenario.cavity, scenario.coupling, scenario.hyperfine, delta_c=0.0
    )
    out = args.out or "levelscheme.json"
    with open(out, "w", encoding="utf-8") as fh:
        fh.write(export_level_scheme(system, scenario.hash) + "\n")
    print(f"wrote {out} (scenario {scenario.hash})")
    return EXIT_OK


def cmd_g2(args) -> int:
    scenario = scenario_from_dict(_apply_overrides(_load_document(args), args))
    if scenario.engine != "quantum" or scenario.quantum is None:
        raise ScenarioError("quantum", "g2 requires engine 'quantum' and a quantum section")
    if scenario.scan["axis"] != "tau":
        raise ScenarioError("scan.axis", "g2 expects a tau scan")
    taus = _scan_grid(scenario)
    if taus[0] < 0:
        raise ScenarioError("scan.from", "tau must be nonnegative")
    delta = scenario.quantum.get("delta", 0.0)
    cfg = _quantum_config(scenario, delta=delta)
    model = mq.QuantumModel(cfg)
    liouvillian = model.liouvillian()
    rho_ss = mq.steady_state(liouvillian)
    values = mq.g2(liouvillian, rho_ss, taus, cfg, model)

    # truncation-convergence indicator: same correlation one Fock level lower
    indicator = None
    if cfg.n_ph >= 2:
        try:
            alt = mq.QuantumConfig(
                cavity=cfg.cavity, geometry=cfg.geometry, hyperfine=cfg.hyperfine,
                n_nuclei=cfg.n_nuclei, n_ph=cfg.n_ph - 1, g=cfg.g, a_in=cfg.a_in,
                delta=cfg.delta, delta_c=cfg.delta_c, dim_cap=cfg.dim_cap,
            )
            alt_model = mq.QuantumModel(alt)
            alt_l = alt_model.liouvillian()
            alt_values = mq.g2(alt_l, mq.steady_state(alt_l), taus, alt, alt_model)
            indicator = float(np.max(np.abs(values - alt_values)))
        except NucavError:
            indicator = None

    out = args.out or "g2.csv"
    write_g2_csv(out, scenario.hash, taus, values)
    write_meta(str(out) + ".meta.json", scenario.hash, {
        "axis": "tau_inverse_gamma",
        "n_ph": cfg.n_ph,
        "truncation_convergence": indicator,
        "mean_occupation": mq.mean_mode_occupation(rho_ss, model),
    })
    if args.svg:
        write_svg(str(out) + ".svg", scenario.hash, taus, values, "tau (1/gamma)", "g2")
    print(f"wrote {out} ({len(taus)} tau points)")
    return EXIT_OK


def cmd_validate(args) -> int:
    from .scenario import collect_validation_failures

    doc = _load_document(args)
    failures = collect_validation_failures(doc)
    if failures:
        for failure in failures:
            print(f"FAIL {failure}")
        return EXIT_INPUT
    scenario = scenario_from_dict(doc)
    print(f"ok (scenario {scenario.hash})")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nucav",
        description="Reflectance spectra and quantum observables of nuclei in x-ray cavities",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, handler, blurb in (
        ("run", cmd_run, "detuning spectrum"),
        ("rocking", cmd_rocking, "rocking curve over incidence angle"),
        ("levelscheme", cmd_levelscheme, "export the effective level system"),
        ("g2", cmd_g2, "photon correlation function (quantum engine)"),
        ("validate", cmd_validate, "check a scenario file"),
    ):
        p = sub.add_parser(name, help=blurb)
        p.add_argument("scenario", nargs="?", help="scenario JSON file")
        p.add_argument("--preset", choices=list_presets(), help="built-in scenario")
        p.add_argument("--out", help="output file path")
        p.add_argument("--svg", action="store_true", help="also write a line plot")
        p.add_argument("--points", type=int, help="override scan point count")
        p.add_argument("--from", dest="start", type=float, help="override scan start")
        p.add_argument("--to", dest="stop", type=float, help="override scan end")
        p.add_argument("--couple-cavity-detuning", dest="couple", action="store_true",
                       help="tie the cavity detuning to the probe detuning")
        p.add_argument("--engine", choices=("linear", "quantum"), help="override engine")
        p.set_defaults(handler=handler)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ResourceCapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (DegenerateSpectrumError, AmbiguousSteadyStateError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except NucavError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    raise SystemExit(main())
