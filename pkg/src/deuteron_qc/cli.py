"""Command-line driver: ``deuteron-qc <command> [flags]``.

Configuration precedence is flags > JSON config file > defaults.  The config
file (``--config`` or the ``DEUTERON_QC_CONFIG`` environment variable) is a
JSON object whose keys are :class:`RunConfig` field names.

Exit codes: 0 success, 2 configuration/domain error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import importlib.resources
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractViolation, DomainError, NumericError
from .extrapolation import Order, fit_continuum, table_rows
from .hamiltonian import build_matrix, exact_ground_energy, matrix_to_csv, pauli_to_csv, qubit_hamiltonian
from .mitigation import DEFAULT_SCALES, calibrate_readout, zne_extrapolate, zne_series_terms
from .ansatz import ansatz_circuit, decompose_cry, param_count
from .simulator import NoiseModel
from .vqe import (
    Backend,
    GridAxis,
    default_grid,
    landscape_csv,
    minimize_simplex,
    refine_minimum,
    scan_landscape,
)

CONFIG_ENV = "DEUTERON_QC_CONFIG"
COMMANDS = ("hamiltonian", "exact", "scan", "vqe", "zne", "extrapolate", "table1")
FORMATS = ("text", "csv", "json")

# reference values for the delta columns: {block: {N: {column: value}}}
REFERENCE_TABLE = {
    "exact": {
        2: {"E_N": -1.749, "LO": -2.39, "NLO": -2.19},
        3: {"E_N": -2.046, "LO": -2.33, "NLO": -2.20, "N2LO": -2.21},
    },
    "quantum": {
        2: {"E_N": -1.74, "LO": -2.38, "NLO": -2.18},
        3: {"E_N": -2.08, "LO": -2.35, "NLO": -2.21, "N2LO": -2.28},
    },
}
REFERENCE_UNCERTAINTY = {
    2: {"E_N": 0.03, "LO": 0.04, "NLO": 0.03},
    3: {"E_N": 0.03, "LO": 0.02, "NLO": 0.03, "N2LO": 0.03},
}


class ConfigError(DomainError):
    pass


@dataclass
class RunConfig:
    basis_size: int = 2
    mode: str = "exact"
    shots: int = 8192
    master_seed: int = 7
    cnot_epsilon: float = 0.02
    readout_e0: float = 0.0
    readout_e1: float = 0.0
    # None: 41 points for scan, 13 per axis for vqe
    grid_points: int | None = None
    rounds: int = 3
    scales: list[int] = field(default_factory=lambda: list(DEFAULT_SCALES))
    iterations: int = 10
    format: str = "text"
    workers: int = field(default_factory=lambda: os.cpu_count() or 1)
    params: list[float] | None = None
    energies: dict[str, float] | None = None
    order: str | None = None

    def validate(self) -> RunConfig:
        if self.basis_size < 1:
            raise ConfigError("basis size must be ≥ 1")
        if self.mode not in ("exact", "sampled", "noisy", "noisy+zne"):
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.format not in FORMATS:
            raise ConfigError(f"unknown format {self.format!r}")
        if self.mode == "sampled" and self.shots < 1:
            raise ConfigError("sampled mode needs shots ≥ 1")
        if self.shots < 0:
            raise ConfigError("shots must be ≥ 0 (0 = exact outcome distribution)")
        if self.mode.startswith("noisy") and not (
            self.cnot_epsilon > 0 or self.readout_e0 > 0 or self.readout_e1 > 0
        ):
            raise ConfigError("noisy modes need --eps > 0 or readout errors")
        if not 0 <= self.cnot_epsilon <= 1:
            raise ConfigError("--eps must lie in [0, 1]")
        if self.grid_points is not None and self.grid_points < 1:
            raise ConfigError("--grid-points must be ≥ 1")
        if self.rounds < 1 or self.iterations < 1 or self.workers < 1:
            raise ConfigError("--rounds, --iterations and --workers must be ≥ 1")
        return self

    def noise(self) -> NoiseModel:
        if self.readout_e0 > 0 or self.readout_e1 > 0:
            return NoiseModel.with_readout(
                self.basis_size, self.readout_e0, self.readout_e1, self.cnot_epsilon
            )
        return NoiseModel(self.cnot_epsilon)

    def backend(self, mode: str | None = None) -> Backend:
        mode = mode or self.mode
        shots = self.shots or None
        if mode == "exact":
            return Backend("exact")
        if mode == "sampled":
            return Backend("sampled", shots=shots, noise=dataclasses.replace(self.noise(), cnot_epsilon=0.0))
        return Backend(
            mode, shots=shots, noise=self.noise(), scales=tuple(self.scales), iterations=self.iterations
        )


_FLAG_FIELDS = {
    "n": "basis_size",
    "mode": "mode",
    "shots": "shots",
    "seed": "master_seed",
    "eps": "cnot_epsilon",
    "readout_e0": "readout_e0",
    "readout_e1": "readout_e1",
    "grid_points": "grid_points",
    "rounds": "rounds",
    "scales": "scales",
    "iterations": "iterations",
    "format": "format",
    "workers": "workers",
    "params": "params",
    "energies": "energies",
    "order": "order",
}


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _energy_map(text: str) -> dict[str, float]:
    out = {}
    try:
        for item in text.split(","):
            n, e = item.split(":")
            out[n.strip()] = float(e)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected N:E pairs like '1:-0.436,2:-1.749', got {text!r}")
    return out


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, help="basis size N (number of qubits)")
    common.add_argument("--mode", choices=["exact", "sampled", "noisy", "noisy+zne"])
    common.add_argument("--shots", type=int, help="shots per Pauli term (0: exact distribution)")
    common.add_argument("--seed", type=int, help="master seed")
    common.add_argument("--eps", type=float, help="white-noise strength per CNOT")
    common.add_argument("--readout-e0", type=float, help="p(read 1 | prepared 0)")
    common.add_argument("--readout-e1", type=float, help="p(read 0 | prepared 1)")
    common.add_argument("--grid-points", type=int, help="grid points per parameter axis")
    common.add_argument("--rounds", type=int, help="grid refinement rounds")
    common.add_argument("--scales", type=_int_list, help="ZNE CNOT scales, e.g. 1,3,5,7")
    common.add_argument("--iterations", type=int, help="ZNE repetitions per scale")
    common.add_argument("--format", choices=FORMATS)
    common.add_argument("--out", help="write output to this file instead of stdout")
    common.add_argument("--workers", type=int, help="worker threads")
    common.add_argument("--config", help=f"JSON config file (default: ${CONFIG_ENV})")

    parser = argparse.ArgumentParser(prog="deuteron-qc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("hamiltonian", parents=[common], help="matrix and qubit Hamiltonian")
    sub.add_parser("exact", parents=[common], help="exact ground energies for N = 1..n")
    sub.add_parser("scan", parents=[common], help="energy landscape with per-term columns")
    sub.add_parser("vqe", parents=[common], help="grid-refinement VQE with spline minimum")
    p = sub.add_parser("zne", parents=[common], help="zero-noise extrapolation series")
    p.add_argument("--params", type=_float_list, help="ansatz angles (default: exact optimum)")
    p = sub.add_parser("extrapolate", parents=[common], help="infinite-basis extrapolation")
    p.add_argument("--energies", type=_energy_map, help="N:E pairs (default: exact energies)")
    p.add_argument("--order", choices=[o.name for o in Order], help="single order (default: all)")
    sub.add_parser("table1", parents=[common], help="exact and simulated-quantum extrapolation table")
    return parser


def load_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    path = args.config or os.environ.get(CONFIG_ENV)
    if path:
        try:
            with open(path) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path!r}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
        names = {f.name for f in dataclasses.fields(RunConfig)}
        unknown = set(data) - names
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg = dataclasses.replace(cfg, **data)
    for flag, name in _FLAG_FIELDS.items():
        value = getattr(args, flag, None)
        if value is not None:
            setattr(cfg, name, value)
    return cfg.validate()


# ---------------------------------------------------------------- commands


def _fmt(x: float, digits: int = 6) -> str:
    return f"{x:.{digits}f}"


def _config_json(cfg: RunConfig) -> dict:
    out = dataclasses.asdict(cfg)
    out.pop("workers")
    return out


def cmd_hamiltonian(cfg: RunConfig) -> tuple[str, dict]:
    N = cfg.basis_size
    h = build_matrix(N)
    ham = qubit_hamiltonian(N)
    payload = {
        "command": "hamiltonian",
        "basis_size": N,
        "matrix": h.tolist(),
        "pauli": [{"string": t.string.ops, "coefficient": t.coefficient.real} for t in ham],
        "exact_ground_energy": exact_ground_energy(N),
    }
    if cfg.format == "csv":
        text = "# matrix\n" + matrix_to_csv(h) + "# pauli\n" + pauli_to_csv(ham)
        return text, payload
    lines = [f"H_{N} matrix (MeV):"]
    lines += ["  " + "  ".join(f"{v:11.6f}" for v in row) for row in h]
    if N == 1:
        lines.append(f"H_1 = {ham.coefficient('Z').real:.6f} (Z0 - I)")
    lines.append(f"H_{N} qubit form (MeV):")
    for t in ham:
        lines.append(f"  {t.coefficient.real:+.6f} {t.string.label}")
    lines.append("pauli text:")
    lines += ["  " + line for line in ham.to_text().splitlines()]
    return "\n".join(lines) + "\n", payload


def cmd_exact(cfg: RunConfig) -> tuple[str, dict]:
    energies = [(n, exact_ground_energy(n)) for n in range(1, cfg.basis_size + 1)]
    payload = {"command": "exact", "energies": [{"N": n, "energy": e} for n, e in energies]}
    if cfg.format == "csv":
        return "N,energy_mev\n" + "".join(f"{n},{e!r}\n" for n, e in energies), payload
    return "".join(f"E_{n} = {e:.6f} MeV\n" for n, e in energies), payload


def _check_ansatz_size(N: int):
    try:
        param_count(N)
    except DomainError:
        raise ConfigError("VQE commands support --n 2 or --n 3") from None


def _scan_grid(cfg: RunConfig, num_params: int) -> tuple[GridAxis, ...]:
    points = cfg.grid_points or (41 if num_params == 1 else 13)
    return default_grid(num_params, points)


def cmd_scan(cfg: RunConfig) -> tuple[str, dict]:
    _check_ansatz_size(cfg.basis_size)
    ham = qubit_hamiltonian(cfg.basis_size)
    grid = _scan_grid(cfg, param_count(cfg.basis_size))
    samples = scan_landscape(ham, grid, cfg.backend(), cfg.master_seed, cfg.workers)
    payload = {
        "command": "scan",
        "config": _config_json(cfg),
        "samples": [
            {
                "params": list(s.params),
                "mean": s.energy.mean,
                "std_error": s.energy.std_error,
                "terms": {k: {"mean": v.mean, "std_error": v.std_error} for k, v in s.terms.items()},
            }
            for s in samples
        ],
    }
    if cfg.format == "csv":
        return landscape_csv(samples), payload
    best = min(samples, key=lambda s: s.energy.mean)
    lines = [f"{len(samples)} samples ({cfg.mode}); lowest sample:"]
    lines.append(
        "  params = (" + ", ".join(f"{p:.6f}" for p in best.params) + ")"
        + f"  E = {best.energy.mean:.6f} ± {best.energy.std_error:.6f} MeV"
    )
    return "\n".join(lines) + "\n", payload


def _run_vqe(cfg: RunConfig, N: int, mode: str | None = None):
    ham = qubit_hamiltonian(N)
    grid = default_grid(param_count(N), cfg.grid_points or 13)
    return refine_minimum(ham, cfg.backend(mode), grid, cfg.rounds, cfg.master_seed, workers=cfg.workers)


def cmd_vqe(cfg: RunConfig) -> tuple[str, dict]:
    _check_ansatz_size(cfg.basis_size)
    res = _run_vqe(cfg, cfg.basis_size)
    exact = exact_ground_energy(cfg.basis_size)
    payload = {"command": "vqe", "basis_size": cfg.basis_size, "config": _config_json(cfg)}
    payload.update(res.to_json())
    payload["exact_energy"] = exact
    if cfg.format == "csv":
        return landscape_csv(res.landscape, term_columns=False), payload
    text = (
        f"N = {cfg.basis_size}, mode = {res.method}, seed = {res.seed}\n"
        f"best params = ({', '.join(f'{p:.6f}' for p in res.best_params)})\n"
        f"E_min = {res.best_energy:.4f} ± {res.uncertainty:.4f} MeV"
        f"  (exact {exact:.4f}, delta {res.best_energy - exact:+.4f})\n"
    )
    return text, payload


def cmd_zne(cfg: RunConfig) -> tuple[str, dict]:
    _check_ansatz_size(cfg.basis_size)
    N = cfg.basis_size
    ham = qubit_hamiltonian(N)
    if cfg.params is not None:
        params = tuple(cfg.params)
        if len(params) != param_count(N):
            raise ConfigError(f"--params needs {param_count(N)} angle(s) for N = {N}")
    else:
        params, _ = minimize_simplex(ham, x0=[0.5] * param_count(N))
    # runs at any epsilon, including 0, independently of --mode
    noise = cfg.noise()
    calibration = calibrate_readout(noise, N, None, cfg.master_seed) if noise.has_readout_error else None
    terms = [(i, t) for i, t in enumerate(ham) if not t.string.is_identity()]
    identity = sum(t.coefficient.real for t in ham if t.string.is_identity())
    series = zne_series_terms(
        decompose_cry(ansatz_circuit(params)),
        [t.string for _, t in terms],
        noise,
        tuple(cfg.scales),
        cfg.shots or None,
        cfg.iterations,
        cfg.master_seed,
        calibration,
        key=(0, 0),
        term_indices=[i for i, _ in terms],
    )
    fits = [zne_extrapolate(s) for s in series]
    scales = series[0].scales
    energy_r = [
        identity + sum(t.coefficient.real * s.estimates[j].mean for (_, t), s in zip(terms, series))
        for j in range(len(scales))
    ]
    energy_r_err = [
        math.sqrt(sum((t.coefficient.real * s.estimates[j].std_error) ** 2 for (_, t), s in zip(terms, series)))
        for j in range(len(scales))
    ]
    energy0 = identity + sum(t.coefficient.real * f.intercept for (_, t), f in zip(terms, fits))
    energy0_err = math.sqrt(sum((t.coefficient.real * f.intercept_std_error) ** 2 for (_, t), f in zip(terms, fits)))
    payload = {
        "command": "zne",
        "config": _config_json(cfg),
        "params": list(params),
        "series": [
            {
                "term": t.string.ops,
                "coefficient": t.coefficient.real,
                "points": [
                    {"r": r, "mean": e.mean, "std_error": e.std_error}
                    for r, e in zip(s.scales, s.estimates)
                ],
                "intercept": f.intercept,
                "intercept_std_error": f.intercept_std_error,
                "slope": f.slope,
                "slope_std_error": f.slope_std_error,
            }
            for (_, t), s, f in zip(terms, series, fits)
        ],
        "energy": {
            "points": [
                {"r": r, "mean": m, "std_error": e} for r, m, e in zip(scales, energy_r, energy_r_err)
            ],
            "intercept": energy0,
            "intercept_std_error": energy0_err,
            "exact": exact_ground_energy(N),
        },
    }
    if cfg.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["term", "r", "mean", "std_error"])
        for (_, t), s, f in zip(terms, series, fits):
            for r, e in zip(s.scales, s.estimates):
                w.writerow([t.string.ops, r, repr(e.mean), repr(e.std_error)])
            w.writerow([t.string.ops, 0, repr(f.intercept), repr(f.intercept_std_error)])
        for r, m, e in zip(scales, energy_r, energy_r_err):
            w.writerow(["H", r, repr(m), repr(e)])
        w.writerow(["H", 0, repr(energy0), repr(energy0_err)])
        return buf.getvalue(), payload
    lines = [f"params = ({', '.join(f'{p:.6f}' for p in params)}), eps = {cfg.cnot_epsilon}"]
    header = "term   " + "".join(f"{'r=' + str(r):>12}" for r in scales) + f"{'r=0 (fit)':>14}"
    lines.append(header)
    for (_, t), s, f in zip(terms, series, fits):
        lines.append(
            f"{t.string.ops:<7}" + "".join(f"{e.mean:12.5f}" for e in s.estimates) + f"{f.intercept:14.5f}"
        )
    lines.append(f"{'H':<7}" + "".join(f"{m:12.5f}" for m in energy_r) + f"{energy0:14.5f}")
    lines.append(f"mitigated energy {energy0:.4f} ± {energy0_err:.4f} MeV (exact {exact_ground_energy(N):.4f})")
    return "\n".join(lines) + "\n", payload


def cmd_extrapolate(cfg: RunConfig) -> tuple[str, dict]:
    if cfg.energies:
        energies = {int(n): float(e) for n, e in cfg.energies.items()}
    else:
        energies = {n: exact_ground_energy(n) for n in range(1, max(cfg.basis_size, 2) + 1)}
    orders = [Order.parse(cfg.order)] if cfg.order else [o for o in Order if len(energies) >= o.num_params]
    fits = [fit_continuum(energies, o) for o in orders]
    payload = {"command": "extrapolate", "fits": [f.to_json() for f in fits]}
    if cfg.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["order", "E_infinity", "k", "gamma", "w2", "residual"])
        for f in fits:
            w.writerow([f.order.name, repr(f.E_infinity), repr(f.k), repr(f.gamma), "" if f.w2 is None else repr(f.w2), repr(f.residual)])
        return buf.getvalue(), payload
    lines = [f"inputs: " + ", ".join(f"E_{n} = {e:.4f}" for n, e in sorted(energies.items()))]
    for f in fits:
        w2 = "" if f.w2 is None else f", w2 = {f.w2:.4f} fm^3"
        lines.append(
            f"{f.order.name:>4} {f.order.value:<12} E_inf = {f.E_infinity:.3f} MeV"
            f"  (k = {f.k:.5f} fm^-1, gamma = {f.gamma:.4f}{w2})"
        )
    return "\n".join(lines) + "\n", payload


def _table_block(energies, uncertainties, block):
    rows = []
    for row in table_rows(energies, uncertainties, strict=False):
        ref = REFERENCE_TABLE[block][row.N]
        cells = {"E_N": (row.E_N, row.E_N_uncertainty)}
        for order, fit in row.fits.items():
            cells[order.name] = (None, None) if fit is None else (fit.E_infinity, fit.uncertainty)
        rows.append(
            {
                "N": row.N,
                "cells": {
                    name: {
                        "value": v,
                        "uncertainty": u,
                        "reference": ref.get(name),
                        "reference_uncertainty": REFERENCE_UNCERTAINTY[row.N].get(name) if block == "quantum" else 0.0,
                        "delta": v - ref[name] if v is not None and name in ref else None,
                    }
                    for name, (v, u) in cells.items()
                },
            }
        )
    return rows


def cmd_table1(cfg: RunConfig) -> tuple[str, dict]:
    exact = {n: exact_ground_energy(n) for n in (1, 2, 3)}
    v2 = _run_vqe(cfg, 2, "sampled")
    v3 = _run_vqe(cfg, 3, "noisy+zne")
    quantum = {1: exact[1], 2: v2.best_energy, 3: v3.best_energy}
    quantum_unc = {1: 0.0, 2: v2.uncertainty, 3: v3.uncertainty}
    blocks = {"exact": _table_block(exact, None, "exact"), "quantum": _table_block(quantum, quantum_unc, "quantum")}
    payload = {"command": "table1", "config": _config_json(cfg), "E_1": exact[1], "blocks": blocks}
    columns = ["E_N", "LO", "NLO", "N2LO"]
    if cfg.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["block", "N", "column", "value", "uncertainty", "reference", "delta"])
        for block, rows in blocks.items():
            for row in rows:
                for name in columns:
                    if name in row["cells"]:
                        c = row["cells"][name]
                        w.writerow([block, row["N"], name, "" if c["value"] is None else repr(c["value"]),
                                    "" if c["uncertainty"] is None else repr(c["uncertainty"]),
                                    c["reference"], "" if c["delta"] is None else repr(c["delta"])])
        return buf.getvalue(), payload
    lines = [f"E_1 = {exact[1]:.3f} MeV"]
    for block, title in (("exact", "E from exact diagonalization"), ("quantum", "E from simulated quantum computing")):
        lines.append(title)
        lines.append(f"{'N':>2} " + "".join(f"{name:>30}" for name in ["E_N", "O(e^-2kL)", "O(kLe^-4kL)", "O(e^-4kL)"]))
        for row in blocks[block]:
            cells = []
            for name in columns:
                c = row["cells"].get(name)
                if c is None:
                    cells.append(f"{'':>30}")
                    continue
                if c["value"] is None:
                    cells.append(f"{'no solution':>30}")
                    continue
                val = f"{c['value']:.3f}"
                if block == "quantum":
                    val += f"({c['uncertainty']:.3f})"
                val += f" [{c['reference']:+.2f}, {c['delta']:+.3f}]"
                cells.append(f"{val:>30}")
            lines.append(f"{row['N']:>2} " + "".join(cells))
    lines.append("cells: value [reference, delta]; deuteron ground state -2.22 MeV")
    return "\n".join(lines) + "\n", payload


HANDLERS = {
    "hamiltonian": cmd_hamiltonian,
    "exact": cmd_exact,
    "scan": cmd_scan,
    "vqe": cmd_vqe,
    "zne": cmd_zne,
    "extrapolate": cmd_extrapolate,
    "table1": cmd_table1,
}


def output_schema(command: str) -> dict:
    """JSON schema of ``<command> --format json`` output (shipped as package data)."""
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}")
    text = importlib.resources.files(__package__).joinpath(f"schemas/{command}.schema.json").read_text()
    return json.loads(text)


def _to_builtin(obj):
    if isinstance(obj, dict):
        return {str(k): _to_builtin(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_to_builtin(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def run_command(cfg: RunConfig, command: str) -> str:
    text, payload = HANDLERS[command](cfg)
    if cfg.format == "json":
        return json.dumps(_to_builtin(payload), indent=2, sort_keys=True) + "\n"
    return text


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args)
        out = run_command(cfg, args.command)
    except (ConfigError, DomainError, ContractViolation) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
