"""Command-line interface: ``pairgen design|jsa|sweep|raman``.

Exit codes: 0 success, 1 numerical failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import itertools
import json
import sys
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from .config import RunConfig, apply_override, load_config, parse_vary
from .errors import ConfigError, NoPhasematchError, NumericalError, PairgenError
from .jsa import pair_probability_closed_form
from .modes import solve_neff
from .pipeline import Design, design_source, experiment_config, run_jsa, run_noise
from .plotting import plot_jsi, plot_noise_peaks, plot_noise_spectra

__all__ = ["main", "build_parser"]

MAX_CSV_SIDE = 512


def _schema(name):
    text = resources.files("pairgen").joinpath(f"schemas/{name}.schema.json").read_text(encoding="utf-8")
    return json.loads(text)


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, float) and not np.isfinite(obj):
        return None
    return obj


def write_json(path: Path, data: dict, schema: str) -> Path:
    data = _clean(data)
    jsonschema.validate(data, _schema(schema))
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def write_csv(path: Path, header, rows) -> Path:
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return path


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


class _Run:
    """Bookkeeping for one command: output directory and manifest."""

    def __init__(self, command, args, run: RunConfig):
        self.command = command
        self.out = Path(args.out)
        self.out.mkdir(parents=True, exist_ok=True)
        self.run = run
        self.threads = args.threads
        self.config_path = args.config
        self.started = datetime.now(timezone.utc).isoformat()
        self.outputs: list[str] = []

    def path(self, name) -> Path:
        self.outputs.append(name)
        return self.out / name

    def finish(self):
        manifest = {
            "command": self.command,
            "config_hash": self.run.config_hash(),
            "tool_version": __version__,
            "started": self.started,
            "finished": datetime.now(timezone.utc).isoformat(),
            "threads": self.threads,
            "outputs": sorted(self.outputs),
            "config_path": str(self.config_path) if self.config_path else None,
        }
        write_json(self.out / "manifest.json", manifest, "manifest")


def _design_report(run: RunConfig, design: Design) -> dict:
    rep = design.report()
    rep["nbar"] = run.chi.nbar
    rep["chi3"] = run.chi.chi3
    return rep


def _neff_rows(run: RunConfig, design: Design, points=41):
    """n_eff of both modes over +-5 % of their centre frequencies (guided points only)."""
    rows = []
    for role, mode, w0 in (
        ("seed", run.seed_mode, run.seed.omega0),
        ("pump", run.pump_mode, run.pump.omega0),
    ):
        for w in np.linspace(0.95 * w0, 1.05 * w0, points):
            try:
                n = solve_neff(design.fiber, mode, w)
            except NumericalError:
                continue
            rows.append((role, mode.label, w / (2 * np.pi) * 1e-12, n))
    return rows


def cmd_design(args, run: RunConfig) -> int:
    r = _Run("design", args, run)
    design = design_source(run)
    write_json(r.path("design.json"), _design_report(run, design), "design")
    write_csv(r.path("neff_curves.csv"), ["role", "mode", "frequency_THz", "n_eff"], _neff_rows(run, design))
    r.finish()
    rep = design.report()
    print(f"diameter {rep['diameter_um']:.5f} um, A = {rep['A_um2']:.3f} um^2, gamma = {rep['gamma']:.4g}")
    return 0


def _metrics(run, design, grid, metrics, stride):
    info = grid.info
    return {
        "eta2": grid.eta2,
        "eta2_closed_form": design.eta2_closed_form,
        "K": metrics.schmidt_number if metrics else None,
        "g2": metrics.g2 if metrics else None,
        "bandwidth_THz": metrics.bandwidth_thz if metrics else None,
        "A_um2": design.area.um2,
        "diameter_um": design.fiber.diameter * 1e6,
        "grid_points": run.grid.points,
        "half_span_THz": run.grid.half_span / (2 * np.pi) * 1e-12,
        "seed_integral": info.get("seed_integral"),
        "seed_integral_check": info.get("seed_integral_check"),
        "frozen_factors": run.frozen_factors,
        "nbar": run.chi.nbar,
        "pump_orientation": info.get("pump_orientation"),
        "csv_stride": stride,
    }


def cmd_jsa(args, run: RunConfig) -> int:
    if args.frozen_factors:
        run = run.replace(frozen_factors=True)
    r = _Run("jsa", args, run)
    grid, metrics, design = run_jsa(run, threads=args.threads)
    ws = run.seed.omega0
    stride = max(1, int(np.ceil(run.grid.points / args.csv_max_side)))
    idx = np.arange(0, run.grid.points, stride)
    f1 = (grid.omega1 - ws) / (2 * np.pi) * 1e-12
    f2 = (grid.omega2 - ws) / (2 * np.pi) * 1e-12
    amp = grid.amplitude
    rows = (
        (f1[i], f2[j], amp[i, j].real, amp[i, j].imag, abs(amp[i, j]) ** 2)
        for i in idx
        for j in idx
    )
    write_csv(r.path("jsa.csv"), ["omega1_THz", "omega2_THz", "re", "im", "abs2"], rows)
    write_json(r.path("metrics.json"), _metrics(run, design, grid, metrics, stride), "metrics")
    if metrics is not None:
        plot_jsi(grid, ws, r.path("jsi.png"))
    r.finish()
    if metrics:
        print(
            f"eta^2 = {grid.eta2:.4g} (closed form {design.eta2_closed_form:.4g}), K = {metrics.schmidt_number:.2f}, "
            f"g2 = {metrics.g2:.5f}, bandwidth = {metrics.bandwidth_thz:.3f} THz"
        )
    else:
        print("no pairs generated (zero seed or pump power)")
    return 0


def cmd_sweep(args, run: RunConfig) -> int:
    if not args.vary:
        raise ConfigError("sweep: give at least one --vary key=v1,v2,...")
    axes = [parse_vary(v) for v in args.vary]
    keys = [k for k, _ in axes]
    if len(set(keys)) != len(keys):
        raise ConfigError("sweep: each --vary key may appear once")
    # validate every value before any expensive work
    combos = []
    for values in itertools.product(*[vals for _, vals in axes]):
        cfg = run
        si = []
        for key, val in zip(keys, values):
            cfg, v = apply_override(cfg, key, val)
            si.append(v)
        combos.append((values, si, cfg))
    r = _Run("sweep", args, run)
    design = design_source(run)
    rows = []
    for values, si, cfg in combos:
        closed = pair_probability_closed_form(
            design.gamma, cfg.length, cfg.seed.duration, cfg.pump.duration,
            design.seed.beta2 * cfg.beta2_scale, cfg.pump.power, cfg.seed.power,
        )
        grid, metrics, _ = run_jsa(cfg, design, threads=args.threads)
        rows.append(
            list(values)
            + si
            + [
                grid.eta2,
                closed,
                metrics.schmidt_number if metrics else "",
                metrics.g2 if metrics else "",
                metrics.bandwidth_thz if metrics else "",
            ]
        )
        print(", ".join(f"{k}={v}" for k, v in zip(keys, values)), f"-> eta^2 = {grid.eta2:.4g}",
              f"K = {metrics.schmidt_number:.2f}" if metrics else "")
    header = keys + [f"{k}_SI" for k in keys] + ["eta2", "eta2_closed_form", "K", "g2", "bandwidth_THz"]
    write_csv(r.path("sweep.csv"), header, rows)
    r.finish()
    return 0


def cmd_raman(args, run: RunConfig) -> int:
    r = _Run("raman", args, run)
    ns = run_noise(run)
    rows = []
    for rep in ns.sweep:
        for i, d in enumerate(rep.detuning):
            rows.append((
                rep.power_s, d * 1e-12,
                rep.pair_density_sfwm[i], rep.pair_density_sstpdc[i],
                rep.raman_density_sfwm[i], rep.raman_density_stokes[i],
                rep.snr_sfwm[i], rep.snr_sstpdc[i], rep.fom,
            ))
    header = ["P_s_W", "Delta_THz", "sfwm_signal", "sstpdc_signal", "raman_sfwm", "raman_sstpdc", "snr_sfwm", "snr_sstpdc", "fom"]
    write_csv(r.path("noise_sweep.csv"), header, rows)
    sst, sfwm, fom = ns.peaks
    write_csv(
        r.path("noise_peaks.csv"),
        ["P_s_W", "sstpdc_peak", "sfwm_peak", "fom"],
        zip(ns.seed_powers, sst, sfwm, fom),
    )
    sp = ns.spectrum
    write_csv(
        r.path("noise_spectrum.csv"),
        ["Delta_THz", "sstpdc_signal", "raman_sstpdc_stokes", "raman_sstpdc_antistokes", "sfwm_signal", "raman_sfwm"],
        zip(sp.detuning * 1e-12, sp.pair_density_sstpdc, sp.raman_density_stokes, sp.raman_density_antistokes,
            sp.pair_density_sfwm, sp.raman_density_sfwm),
    )
    summary = ns.summary()
    write_json(r.path("noise_summary.json"), summary, "noise_summary")
    plot_noise_peaks(ns.seed_powers, sst, sfwm, fom, r.path("noise_fom.png"))
    plot_noise_spectra(sp, r.path("noise_spectra.png"))
    r.finish()
    print(
        f"suppression ratio {summary['suppression_ratio']:.3f}, area gain {summary['area_gain_factor']:.2f}, "
        f"FOM {summary['fom']:.4g} (from densities {summary['fom_exact']:.4g})"
    )
    return 0


COMMANDS = {"design": cmd_design, "jsa": cmd_jsa, "sweep": cmd_sweep, "raman": cmd_raman}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pairgen", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"pairgen {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    helps = {
        "design": "solve the phasematching diameter and report mode/coupling parameters",
        "jsa": "compute the joint spectral amplitude and pair metrics",
        "sweep": "recompute pair metrics while varying one or more parameters",
        "raman": "compare pair densities with Raman noise across seed power",
    }
    for name, text in helps.items():
        sp = sub.add_parser(name, help=text)
        sp.add_argument("--config", type=Path, default=None, help="TOML config (merged over defaults)")
        sp.add_argument("--out", type=Path, default=Path("."), help="output directory (created if missing)")
        sp.add_argument("--threads", type=int, default=1, help="worker threads for grid evaluation")
        if name == "jsa":
            sp.add_argument("--frozen-factors", action="store_true", help="freeze 1/A and group velocities at band centres")
            sp.add_argument("--csv-max-side", type=int, default=MAX_CSV_SIDE, help="thin jsa.csv to at most this many points per axis")
        if name == "sweep":
            sp.add_argument("--vary", action="append", default=[], metavar="KEY=V1,V2",
                            help="tau_p, tau_s, L, beta2_scale, P_p or P_s with unit-suffixed values")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads < 1:
        parser.error("--threads must be >= 1")
    try:
        run = load_config(args.config)
        return COMMANDS[args.command](args, run)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NoPhasematchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 1
    except PairgenError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
