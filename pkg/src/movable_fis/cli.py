"""Command-line harness: ``table1``, ``fig3``, ``sweep`` and ``validate``.

Exit codes: 0 success, 1 invariant/verification failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import stats
from .channel import (
    SCENE_FIELDS,
    Scene,
    scene_from_dict,
)
from .checks import random_scene, run_invariant_suite, theta_check
from .mover import (
    FrequencyBand,
    grid_search_frequency,
    harmonic_frequencies,
    is_degenerate,
    optimal_frequency,
    power_cap,
    power_vs_frequency,
)
from .reflection import (
    Design,
    bdfis_matrix,
    bdris_optimal,
    dfis_matrix,
    dris_optimal,
    fis_design,
    theta_entries_from_dict,
)
from .stats import ChannelSampler, FisMode, SamplerKind, Scenario

log = logging.getLogger("movable_fis")

EXIT_OK, EXIT_INVARIANT, EXIT_CONFIG = 0, 1, 2

EXPERIMENT_FIELDS = (
    "seed",
    "trials",
    "n_elements",
    "chi",
    "band_min_hz",
    "band_max_hz",
    "grid_points",
    "sampler",
)

DEFAULT_SCENE = {
    "num_elements": 64,
    "element_spacing_m": 0.05,
    "tx": {"distance_m": 20.0, "angle_rad": math.pi / 6},
    "rx": {"distance_m": 10.0, "angle_rad": math.pi / 6},
    "wavelength_m": 0.05,
    "chi": 0.2,
    "tx_polarization": "vertical",
    "rx_polarization": "vertical",
    "transmit_power_w": 1.0,
}
DEFAULTS = {
    "seed": stats.DEFAULT_SEED,
    "trials": stats.DEFAULT_TRIALS,
    "n_elements": [64],
    "band_min_hz": 1e9,
    "band_max_hz": 30e9,
    "grid_points": 10_001,
    "sampler": "both",
}


class ConfigError(Exception):
    pass


# Config -------------------------------------------------------------------


def parse_chi(value) -> list[float]:
    """Accept a number, a list, ``"a,b,c"`` or a grid ``"lo:hi:points[:log|lin]"``."""
    if isinstance(value, (int, float)):
        return [float(value)]
    if isinstance(value, list):
        return [float(x) for x in value]
    text = str(value).strip()
    try:
        if ":" in text:
            parts = text.split(":")
            if len(parts) not in (3, 4):
                raise ValueError
            lo, hi, points = float(parts[0]), float(parts[1]), int(parts[2])
            scale = parts[3] if len(parts) == 4 else "log"
            if scale == "log":
                if lo <= 0:
                    raise ConfigError(f"chi grid {text!r}: log spacing needs lo > 0")
                return list(stats.log_chi_grid(lo, hi, points))
            if scale == "lin":
                return list(np.linspace(lo, hi, points))
            raise ValueError
        return [float(x) for x in text.split(",")]
    except ValueError:
        raise ConfigError(f"invalid chi value {text!r}; use a number, a list or lo:hi:points:log") from None


def parse_n(value) -> list[int]:
    values = value if isinstance(value, list) else [value]
    if isinstance(value, str):
        values = value.split(",")
    try:
        out = [int(v) for v in values]
    except (TypeError, ValueError):
        raise ConfigError(f"invalid n_elements {value!r}") from None
    for n in out:
        if n < 2 or n % 2:
            raise ConfigError(f"n_elements must be even and >= 2, got {n}")
    return out


def load_config(args) -> tuple[dict | None, dict]:
    """Return ``(scene_dict or None, experiment settings)`` with CLI overrides applied."""
    raw = {}
    if args.config:
        path = Path(args.config)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        try:
            raw = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
        if not isinstance(raw, dict):
            raise ConfigError(f"{path}: top level must be a JSON object")
        unknown = set(raw) - set(SCENE_FIELDS) - set(EXPERIMENT_FIELDS)
        if unknown:
            raise ConfigError(f"{path}: unknown field(s) {sorted(unknown)}")

    scene = {k: raw[k] for k in SCENE_FIELDS if k in raw} or None
    exp = dict(DEFAULTS)
    exp.update({k: raw[k] for k in EXPERIMENT_FIELDS if k in raw})
    for name in ("seed", "trials", "n_elements", "chi", "band_min_hz", "band_max_hz", "grid_points", "sampler"):
        value = getattr(args, name, None)
        if value is not None:
            exp[name] = value

    exp["n_elements"] = parse_n(exp["n_elements"])
    if "chi" in exp:
        exp["chi"] = parse_chi(exp["chi"])
    try:
        exp["seed"] = int(exp["seed"])
        exp["trials"] = int(exp["trials"])
        exp["band"] = FrequencyBand(float(exp["band_min_hz"]), float(exp["band_max_hz"]), int(exp["grid_points"]))
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    if not 0 <= exp["seed"] < 2**64:
        raise ConfigError(f"seed must be an unsigned 64-bit integer, got {exp['seed']}")
    if exp["trials"] < 100:
        raise ConfigError(f"trials must be >= 100, got {exp['trials']}")
    if exp["sampler"] not in ("iid_phase", "geometric", "both"):
        raise ConfigError(f"sampler must be iid_phase, geometric or both, got {exp['sampler']!r}")
    return scene, exp


def build_scene(scene_dict: dict | None, *, n: int | None = None, chi: float | None = None) -> Scene:
    data = dict(DEFAULT_SCENE)
    if scene_dict is not None:
        data = dict(scene_dict)
    if n is not None:
        data["num_elements"] = n
    if chi is not None:
        data["chi"] = chi
    try:
        return scene_from_dict(data)
    except (ValueError, TypeError, KeyError) as exc:
        raise ConfigError(f"scene: {exc}") from None


# Output ------------------------------------------------------------------


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.12g}"
    return str(value)


def write_csv(rows: list[dict], columns: list[str], out: str | None) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row.get(c)) for c in columns])
    _emit(buf.getvalue(), out)


def _emit(text: str, out: str | None) -> None:
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, newline="\n")


def _dump_thetas(thetas, path: str | None) -> None:
    if path:
        Path(path).write_text(json.dumps([t.to_dict() for t in thetas], indent=1) + "\n")


# Commands -------------------------------------------------------------------

TABLE1_COLUMNS = [
    "architecture",
    "scenario",
    "sampler",
    "N",
    "chi",
    "closed_form",
    "mc_mean",
    "mc_stderr",
    "relative_gap",
    "z_score",
    "fixed_frequency_mean",
    "verify_frequency_hz",
    "verify_power",
]


def _fis_verification(scene: Scene, design: Design, scenario: Scenario, band: FrequencyBand):
    """Power at the best in-band harmonic (grid search when none is in band)."""
    theta = fis_design(design, scenario is Scenario.SAME_POL, scene.array.num_elements)
    if is_degenerate(scene.tx_link, scene.rx_link):
        choice = optimal_frequency(
            scene.array, scene.tx_link, scene.rx_link,
            polarization=scene.polarization, theta=theta, default_band=band,
        )
        return choice, True
    harmonics = harmonic_frequencies(
        scene.array, scene.tx_link, scene.rx_link, band, polarization=scene.polarization, theta=theta
    )
    if harmonics:
        return max(harmonics, key=lambda c: c.achieved_power), True
    return grid_search_frequency(scene, theta, band), False


def cmd_table1(args) -> int:
    scene_dict, exp = load_config(args)
    chis = exp.get("chi", [0.2])
    for chi in chis:
        if not 0 <= chi <= 1:
            raise ConfigError(f"chi must lie in [0, 1], got {chi}")
    samplers = ["iid_phase", "geometric"] if exp["sampler"] == "both" else [exp["sampler"]]
    rows, failures = [], []
    for n in exp["n_elements"]:
        for chi in chis:
            for scenario in Scenario:
                for design in (Design.DRIS, Design.BDRIS, Design.DFIS, Design.BDFIS):
                    closed = stats.closed_form_mean(design, scenario, n, chi)
                    verify = None
                    if design.is_fixed:
                        base = build_scene(scene_dict, n=n, chi=chi)
                        sc = replace(base, polarization=scenario.polarization(chi))
                        choice, aligned = _fis_verification(sc, design, scenario, exp["band"])
                        verify = choice
                        expected = closed * sc.transmit_power
                        if aligned and abs(choice.achieved_power - expected) > 1e-9 * max(expected, n**2):
                            failures.append(f"{design.value}/{scenario.value}/N={n}/chi={chi}")
                    for kind in samplers:
                        sampler = ChannelSampler(SamplerKind(kind), exp["seed"])
                        est = stats.mc_mean_power(design, scenario, n, chi, exp["trials"], sampler)
                        row = {
                            "architecture": design.value,
                            "scenario": scenario.value,
                            "sampler": kind,
                            "N": n,
                            "chi": chi,
                            "closed_form": closed,
                            "mc_mean": est.mean,
                            "mc_stderr": est.standard_error,
                            "relative_gap": abs(est.mean - closed) / closed if closed > 0 else None,
                            "z_score": None if design.is_fixed else est.z_score(closed),
                        }
                        if design.is_fixed:
                            fixed = stats.mc_mean_power(
                                design, scenario, n, chi, exp["trials"], sampler,
                                fis_mode=FisMode.FIXED_FREQUENCY,
                            )
                            row["fixed_frequency_mean"] = fixed.mean
                            row["verify_frequency_hz"] = verify.frequency_hz
                            row["verify_power"] = verify.achieved_power
                        rows.append(row)
    write_csv(rows, TABLE1_COLUMNS, args.out)
    if failures:
        log.error("FIS verification failed for %s", ", ".join(failures))
        return EXIT_INVARIANT
    return EXIT_OK


def cmd_fig3(args) -> int:
    _, exp = load_config(args)
    chis = np.asarray(exp.get("chi", list(stats.log_chi_grid())), dtype=float)
    if np.any(chis <= 0) or np.any(chis > 1):
        raise ConfigError("fig3 chi grid must lie in (0, 1]")
    chis = np.sort(chis)
    curve = stats.gain_curve(chis)
    opp = Scenario.OPPOSITE_POL
    ok = True
    for d in (Design.BDRIS, Design.BDFIS):
        if len(chis) > 1 and not np.all(np.diff(curve.gains[d]) < 0):
            log.error("G_%s is not strictly decreasing in chi", d.value)
            ok = False
    for i, chi in enumerate(chis):
        base = stats.leading_coefficient(Design.DRIS, opp, chi)
        for d in stats.GAIN_DESIGNS:
            ratio = stats.leading_coefficient(d, opp, chi) / base
            if abs(ratio - curve.gains[d][i]) > 1e-12 * ratio:
                log.error("G_%s at chi=%g disagrees with the leading-term ratio", d.value, chi)
                ok = False
    if not ok:
        return EXIT_INVARIANT
    rows = [
        {"chi": chi, **{f"G_{d.value}": curve.gains[d][i] for d in stats.GAIN_DESIGNS}}
        for i, chi in enumerate(chis)
    ]
    write_csv(rows, ["chi", "G_BDRIS", "G_DFIS", "G_BDFIS"], args.out)
    return EXIT_OK


def cmd_sweep(args) -> int:
    scene_dict, exp = load_config(args)
    n = exp["n_elements"][0] if args.n_elements is not None else None
    chi = exp["chi"][0] if "chi" in exp else None
    scene = build_scene(scene_dict, n=n, chi=chi)
    band = exp["band"]
    n = scene.array.num_elements
    thetas = [dfis_matrix(n), bdfis_matrix(n)]
    _dump_thetas(thetas, args.dump_theta)
    freqs = band.grid()
    degenerate = is_degenerate(scene.tx_link, scene.rx_link)
    harmonics = [] if degenerate else harmonic_frequencies(scene.array, scene.tx_link, scene.rx_link, band)
    rows, ok = [], True
    for theta in thetas:
        powers = power_vs_frequency(scene, theta, freqs)
        marks = power_vs_frequency(scene, theta, [h.frequency_hz for h in harmonics]) if harmonics else []
        rows += [{"architecture": theta.origin.value, "frequency_hz": f, "power_w": p, "marker": "grid"}
                 for f, p in zip(freqs, powers)]
        rows += [{"architecture": theta.origin.value, "frequency_hz": h.frequency_hz, "power_w": p,
                  "marker": "harmonic"} for h, p in zip(harmonics, marks)]
        scale = power_cap(scene, theta.architecture)
        if scale == 0 or powers.max() <= 1e-12 * scale:
            continue
        if degenerate:
            aligned = optimal_frequency(
                scene.array, scene.tx_link, scene.rx_link,
                polarization=scene.polarization, theta=theta, default_band=band,
            ).achieved_power
            if np.max(np.abs(powers - aligned)) > 1e-9 * aligned:
                log.error("%s: degenerate geometry but the curve is not flat", theta.origin.value)
                ok = False
        elif harmonics:
            peak = freqs[int(np.argmax(powers))]
            if min(abs(peak - h.frequency_hz) for h in harmonics) > band.step * (1 + 1e-9):
                log.error("%s: peak at %.6g Hz is not within one grid step of a harmonic", theta.origin.value, peak)
                ok = False
            if powers.max() > max(marks) * (1 + 1e-9):
                log.error("%s: grid power exceeds the aligned value", theta.origin.value)
                ok = False
        else:
            log.warning("no harmonic of f* lies in the band; peak not verified")
    write_csv(rows, ["architecture", "frequency_hz", "power_w", "marker"], args.out)
    return EXIT_OK if ok else EXIT_INVARIANT


def cmd_validate(args) -> int:
    _, exp = load_config(args)
    n = exp["n_elements"][0] if args.n_elements is not None else 16
    checks = run_invariant_suite(seed=exp["seed"], n=n)
    if args.theta:
        path = Path(args.theta)
        try:
            data = json.loads(path.read_text())
            items = data if isinstance(data, list) else [data]
            for i, item in enumerate(items):
                mat, arch, origin = theta_entries_from_dict(item)
                checks.append(theta_check(mat, arch, f"theta[{i}]:{origin.value}"))
        except (OSError, ValueError, KeyError, TypeError) as exc:
            raise ConfigError(f"{path}: {exc}") from None
    if args.dump_theta:
        h_r, h_t = random_scene(np.random.default_rng(exp["seed"]), n).channels()
        _dump_thetas([dris_optimal(h_r, h_t), bdris_optimal(h_r, h_t), dfis_matrix(n), bdfis_matrix(n)],
                     args.dump_theta)
    passed = all(c.passed for c in checks)
    report = {"passed": passed, "seed": exp["seed"], "N": n, "checks": [c.to_dict() for c in checks]}
    _emit(json.dumps(report, indent=2) + "\n", args.out)
    for c in checks:
        if not c.passed:
            log.error("FAILED %s: residual %.3g > %.3g", c.name, c.residual, c.threshold)
    return EXIT_OK if passed else EXIT_INVARIANT


# Entry point ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="scene/experiment JSON file")
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("--seed", type=int)
    common.add_argument("--trials", type=int)
    common.add_argument("--n-elements", dest="n_elements", help="even integer or comma list")
    common.add_argument("--chi", help="number, comma list, or lo:hi:points:log")
    common.add_argument("--band-min-hz", dest="band_min_hz", type=float)
    common.add_argument("--band-max-hz", dest="band_max_hz", type=float)
    common.add_argument("--grid-points", dest="grid_points", type=int)
    common.add_argument("--dump-theta", dest="dump_theta", help="write reflection matrices as JSON")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(
        prog="movable-fis",
        description="Dual-polarized RIS/FIS received-power experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("table1", parents=[common], help="received-power scaling table")
    p.add_argument("--sampler", choices=["iid_phase", "geometric", "both"])
    p.set_defaults(func=cmd_table1)
    p = sub.add_parser("fig3", parents=[common], help="gain over D-RIS versus chi")
    p.set_defaults(func=cmd_fig3)
    p = sub.add_parser("sweep", parents=[common], help="received power versus frequency")
    p.set_defaults(func=cmd_sweep)
    p = sub.add_parser("validate", parents=[common], help="run the invariant suite")
    p.add_argument("--theta", help="extra reflection matrix JSON to check")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s: %(message)s",
    )
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
