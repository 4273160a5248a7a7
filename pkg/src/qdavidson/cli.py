"""Config-driven experiment runner.

    qdavidson run --config run.yaml --out results/ --seed 7
    qdavidson compare results_qd/report.json results_ql/report.json --out depth.csv

A run writes ``convergence.csv``, ``report.json`` (fully determined by the
config and seed), ``timing.json`` (wall time, kept out of the report so the
report is reproducible byte for byte) and ``config.resolved.yaml``.

Exit codes: 0 converged (or a QLanczos run that ended on linear
dependence), 2 iteration cap or stall, 1 error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from .algorithms import (CONVERGED, LINEAR_DEPENDENCE, QDavidsonConfig,
                         run_classical_davidson, run_qdavidson, run_qlanczos)
from .fermion import build_qubit_hamiltonian, read_fcidump
from .models import HeisenbergSpec, build_heisenberg, neel_bitstring
from .pauli import ORACLE_MAX_QUBITS, PauliSum
from .statevector import exact_diagonalize, sector_indices

log = logging.getLogger(__name__)

ALGORITHMS = ("qdavidson", "qlanczos", "classical_davidson")
CONVERGENCE_COLUMNS = ("iteration", "root", "energy", "abs_delta_e", "residue_norm",
                       "basis_size", "max_depth")
COMPARE_COLUMNS = ("method", "iteration", "max_depth", "best_abs_delta_e")
EXIT_OK, EXIT_ERROR, EXIT_CAP = 0, 1, 2

_MODEL_KEYS = {"heisenberg": {"kind", "n_spins", "range", "convention", "couplings"},
               "fcidump": {"kind", "path", "active_space"}}
_ALGO_KEYS = {"name", "dtau", "epsilon_resid", "epsilon_lindep", "n_roots", "max_iterations",
              "initial_states", "pool", "n_steps", "mapping_mode", "epsilon"}
_TOP_KEYS = {"model", "algorithm", "estimator", "output", "seed", "oracle"}


class ConfigError(ValueError):
    """Invalid run configuration; the message names the offending field."""


@dataclass
class RunConfig:
    model: dict
    algorithm: dict
    estimator: dict = field(default_factory=lambda: {"estimator": "exact"})
    output: dict = field(default_factory=dict)
    seed: int = 0
    oracle: dict = field(default_factory=dict)
    base_dir: Path = field(default_factory=Path.cwd)

    @classmethod
    def from_dict(cls, raw: Any, base_dir: Path | str = ".") -> RunConfig:
        if not isinstance(raw, dict):
            raise ConfigError("config: expected a mapping at the top level")
        unknown = set(raw) - _TOP_KEYS
        if unknown:
            raise ConfigError(f"config: unknown fields {sorted(unknown)}")
        for name in ("model", "algorithm"):
            if name not in raw:
                raise ConfigError(f"{name}: missing required block")
            if not isinstance(raw[name], dict):
                raise ConfigError(f"{name}: expected a mapping")
        base_dir = Path(base_dir).resolve()
        model = dict(raw["model"])
        kind = model.get("kind")
        if kind not in _MODEL_KEYS:
            raise ConfigError(f"model.kind: expected one of {sorted(_MODEL_KEYS)}, got {kind!r}")
        extra = set(model) - _MODEL_KEYS[kind]
        if extra:
            raise ConfigError(f"model: unknown fields {sorted(extra)} for kind {kind!r}")
        if kind == "heisenberg" and "n_spins" not in model:
            raise ConfigError("model.n_spins: missing")
        if kind == "fcidump":
            if "path" not in model:
                raise ConfigError("model.path: missing")
            path = (base_dir / model["path"]).resolve()
            if not path.is_file():
                raise ConfigError(f"model.path: file not found: {path}")
            model["path"] = str(path)
        algo = dict(raw["algorithm"])
        if algo.get("name") not in ALGORITHMS:
            raise ConfigError(f"algorithm.name: expected one of {ALGORITHMS}, got {algo.get('name')!r}")
        extra = set(algo) - _ALGO_KEYS
        if extra:
            raise ConfigError(f"algorithm: unknown fields {sorted(extra)}")
        estimator = dict(raw.get("estimator") or {"estimator": "exact"})
        seed = raw.get("seed", 0)
        if not isinstance(seed, int) or isinstance(seed, bool):
            raise ConfigError(f"seed: expected an integer, got {seed!r}")
        oracle = dict(raw.get("oracle") or {})
        if oracle.get("match", "lowest") not in ("lowest", "nearest"):
            raise ConfigError(f"oracle.match: expected 'lowest' or 'nearest', got {oracle['match']!r}")
        return cls(model, algo, estimator, dict(raw.get("output") or {}), seed, oracle, base_dir)

    def with_seed(self, seed: int | None) -> RunConfig:
        if seed is None:
            return self
        return RunConfig(self.model, self.algorithm, self.estimator, self.output, seed,
                         self.oracle, self.base_dir)

    def to_dict(self) -> dict:
        return {"model": self.model, "algorithm": self.algorithm, "estimator": self.estimator,
                "output": self.output, "seed": self.seed, "oracle": self.oracle}


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text())
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"config: not valid YAML: {exc}") from exc
    return RunConfig.from_dict(raw, path.parent)


@dataclass
class RunReport:
    """Everything a run produced except wall time."""

    config: dict
    method: str
    model: str
    n_qubits: int
    status: str
    records: list[dict]
    final_energies: list[float]
    reference_energies: list[float] | None
    shots: int
    notice: str = ""

    def to_dict(self) -> dict:
        return {"config": self.config, "method": self.method, "model": self.model,
                "n_qubits": self.n_qubits, "status": self.status, "records": self.records,
                "final_energies": self.final_energies, "reference_energies": self.reference_energies,
                "shots": self.shots, "notice": self.notice}

    @classmethod
    def from_dict(cls, d: dict) -> RunReport:
        return cls(**d)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @property
    def exit_code(self) -> int:
        return EXIT_OK if self.status in (CONVERGED, LINEAR_DEPENDENCE) else EXIT_CAP


def build_model(model: dict) -> tuple[PauliSum, str, dict]:
    """Hamiltonian, a model label, and defaults (initial states, pool, sector)."""
    if model["kind"] == "heisenberg":
        couplings = {tuple(int(i) for i in str(k).split(",")): float(v)
                     for k, v in (model.get("couplings") or {}).items()}
        spec = HeisenbergSpec(int(model["n_spins"]), model.get("range", "short"),
                              model.get("convention", "pauli"), couplings)
        label = f"heisenberg:{spec.n_spins}:{spec.range}:{spec.convention}"
        if couplings:
            label += ":" + ";".join(f"{i},{j}={c!r}" for (i, j), c in sorted(couplings.items()))
        return build_heisenberg(spec), label, {"initial_states": [neel_bitstring(spec.n_spins)],
                                               "pool": "odd_y", "match": "lowest"}
    f = read_fcidump(model["path"])
    h = build_qubit_hamiltonian(f)
    pool = {"kind": "excitations", "n_electrons": f.n_electrons, "ms2": f.ms2}
    return h, f"fcidump:{Path(model['path']).name}", {
        "initial_states": [f.hf_bitstring()], "pool": pool, "match": "nearest"}


def _algorithm_config(algo: dict, defaults: dict, estimator: dict, seed: int) -> QDavidsonConfig:
    est = dict(estimator)
    if est.get("estimator", est.get("mode", "exact")) != "exact":
        est["seed"] = seed
    kwargs = {k: algo[k] for k in ("dtau", "epsilon_resid", "epsilon_lindep", "n_roots",
                                   "max_iterations", "n_steps", "mapping_mode") if k in algo}
    try:
        return QDavidsonConfig(initial_states=tuple(algo.get("initial_states", defaults["initial_states"])),
                               pool_spec=algo.get("pool", defaults["pool"]), estimator_spec=est, **kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"algorithm: {exc}") from exc


def _sector(h: PauliSum, states) -> np.ndarray | None:
    """Basis indices sharing the particle number of every initial bitstring."""
    if not all(isinstance(s, str) for s in states):
        return None
    counts = {s.count("1") for s in states}
    if len(counts) != 1:
        return None
    return sector_indices(h.n_qubits, counts.pop())


def reference_energies(h: PauliSum, sector: np.ndarray | None) -> list[float] | None:
    if h.n_qubits > ORACLE_MAX_QUBITS:
        return None
    return [float(v) for v in exact_diagonalize(h, sector).values]


def abs_deltas(energies, reference, match: str) -> list[float | None]:
    """``|E_I - E_ref|`` matching by index (``lowest``) or to the closest level (``nearest``)."""
    if reference is None:
        return [None] * len(energies)
    ref = np.asarray(reference)
    if match == "nearest":
        return [float(np.min(np.abs(ref - e))) for e in energies]
    return [float(abs(e - ref[i])) if i < len(ref) else None for i, e in enumerate(energies)]


def execute(cfg: RunConfig) -> RunReport:
    h, label, defaults = build_model(cfg.model)
    algo = cfg.algorithm
    name = algo["name"]
    match = cfg.oracle.get("match", defaults["match"])
    qcfg = _algorithm_config(algo, defaults, cfg.estimator, cfg.seed)
    n_roots = qcfg.n_roots
    sector = _sector(h, qcfg.initial_states) if cfg.model["kind"] == "fcidump" else None
    reference = reference_energies(h, sector)
    notice = "" if reference is not None else \
        f"ED oracle omitted: {h.n_qubits} qubits exceeds the ceiling of {ORACLE_MAX_QUBITS}"
    shots = 0
    if name == "classical_davidson":
        dense = h.to_dense()
        if sector is not None:
            dense = dense[np.ix_(sector, sector)]
        result = run_classical_davidson(dense, n_roots, epsilon=algo.get("epsilon", 1e-6),
                                        max_iterations=algo.get("max_iterations", 200), seed=cfg.seed)
        records, status = result.records, result.status
    else:
        driver = run_qdavidson if name == "qdavidson" else run_qlanczos
        result = driver(h, qcfg)
        records, status, shots = result.records, result.status, result.shots
    rows = []
    for rec in records:
        d = rec.to_dict()
        energies = list(d["ritz_values"][:n_roots])
        d["ritz_values"] = [float(v) for v in d["ritz_values"]]
        d["residue_norms"] = [float(v) for v in d["residue_norms"]]
        d["abs_delta_e"] = abs_deltas(energies, reference, match)
        rows.append(d)
    final = rows[-1]["ritz_values"][:n_roots] if rows else []
    return RunReport(cfg.to_dict(), name, label, h.n_qubits, status, rows, final,
                     reference[:max(n_roots, 8)] if reference is not None else None, int(shots), notice)


def _fmt(value) -> str:
    return "" if value is None else format(value, ".17g")


def convergence_csv(report: RunReport) -> str:
    """One row per (iteration, root), built only from the report's own fields."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CONVERGENCE_COLUMNS)
    for rec in report.records:
        for root, energy in enumerate(rec["ritz_values"][:len(rec["residue_norms"])]):
            delta = rec["abs_delta_e"][root] if root < len(rec["abs_delta_e"]) else None
            writer.writerow([rec["iteration"], root, _fmt(energy), _fmt(delta),
                             _fmt(rec["residue_norms"][root]), rec["basis_size"], rec["max_depth"]])
    return buf.getvalue()


def run(config_path: str | Path, out: str | Path | None = None, seed: int | None = None) -> RunReport:
    """Execute one configured run and write its output files."""
    cfg = load_config(config_path).with_seed(seed)
    out_dir = Path(out or cfg.output.get("directory") or "results")
    if out is None and not out_dir.is_absolute():
        out_dir = cfg.base_dir / out_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    report = execute(cfg)
    wall = time.perf_counter() - start
    if report.notice:
        log.warning(report.notice)
    formats = set(cfg.output.get("formats", ["csv", "json"]))
    (out_dir / "config.resolved.yaml").write_text(yaml.safe_dump(cfg.to_dict(), sort_keys=True))
    if "json" in formats:
        (out_dir / "report.json").write_text(report.to_json())
    if "csv" in formats:
        (out_dir / "convergence.csv").write_text(convergence_csv(report))
    (out_dir / "timing.json").write_text(json.dumps({"wall_time_s": wall}, indent=2) + "\n")
    return report


def _comparison_rows(report: RunReport) -> list[tuple]:
    """Per iteration: depth and the best ground-root ``|Delta E|`` reached so far."""
    rows = []
    best = None
    for rec in report.records:
        delta = rec["abs_delta_e"][0] if rec["abs_delta_e"] else None
        if delta is not None:
            best = delta if best is None else min(best, delta)
        depth = None if report.method == "classical_davidson" else rec["max_depth"]
        rows.append((report.method, rec["iteration"], depth, best))
    return rows


def compare(report_a: RunReport | dict, report_b: RunReport | dict) -> list[tuple]:
    """Depth-versus-accuracy rows for two runs of the same model."""
    a, b = (r if isinstance(r, RunReport) else RunReport.from_dict(r) for r in (report_a, report_b))
    if a.model != b.model:
        raise ValueError(f"reports are for different models: {a.model} vs {b.model}")
    return _comparison_rows(a) + _comparison_rows(b)


def comparison_csv(rows: list[tuple]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COMPARE_COLUMNS)
    for method, iteration, depth, best in rows:
        writer.writerow([method, iteration, "" if depth is None else depth, _fmt(best)])
    return buf.getvalue()


def depth_at_matched_accuracy(qdavidson: RunReport, qlanczos: RunReport,
                              qlanczos_iteration: int = 8) -> tuple[int, int | None, float]:
    """QLanczos depth at ``qlanczos_iteration`` and the smallest QDavidson depth matching its accuracy.

    When QLanczos stops earlier its last record is used.  Returns
    ``(qlanczos_depth, qdavidson_depth, target)``; the QDavidson depth is
    ``None`` if that accuracy is never reached.
    """
    ql = _comparison_rows(qlanczos)
    picked = [row for row in ql if row[1] <= qlanczos_iteration][-1]
    target = picked[3]
    qd_depth = next((row[2] for row in _comparison_rows(qdavidson)
                     if row[3] is not None and row[3] <= target), None)
    return picked[2], qd_depth, target


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="qdavidson", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="execute a configured run")
    p_run.add_argument("--config", required=True, type=Path)
    p_run.add_argument("--out", type=Path)
    p_run.add_argument("--seed", type=int, help="overrides the config seed")
    p_cmp = sub.add_parser("compare", help="depth-versus-accuracy table for two reports")
    p_cmp.add_argument("report_a", type=Path)
    p_cmp.add_argument("report_b", type=Path)
    p_cmp.add_argument("--out", type=Path, help="CSV path (default: stdout)")
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "run":
            report = run(args.config, args.out, args.seed)
            print(f"{report.method} on {report.model}: {report.status} after "
                  f"{report.records[-1]['iteration']} iterations")
            return report.exit_code
        reports = [RunReport.from_dict(json.loads(p.read_text())) for p in (args.report_a, args.report_b)]
        text = comparison_csv(compare(*reports))
        if args.out:
            args.out.write_text(text)
        else:
            sys.stdout.write(text)
        return EXIT_OK
    except (ConfigError, ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
