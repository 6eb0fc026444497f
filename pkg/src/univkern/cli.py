"""Command-line front end.

``univkern classify|probe|report CONFIG [--out DIR] [--seed N] [--grid N] [--quiet]``

Each run writes ``<name>-<command>.json`` (keys sorted, no timestamps) and,
for curve probes, ``<name>-<action>.csv`` with columns
``basis_size,target_name,sup_error``. Exit status: 0 when every configured
check passes, 2 when a check fails, 1 on error (a partial report carrying an
``error`` object is still written once the config has parsed).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from .classify import check_pollard, classify_all, muntz_gap_analysis
from .config import RunConfig, parse_config
from .errors import ProbeError, UnivKernError
from .families import build_index_support
from .kernels import (
    Polynomial,
    TranslationInvariant,
    WeightedPolynomial,
    describe,
    sequence_values,
)
from .measures import SignedMeasure
from .probe import (
    DensenessProbeConfig,
    MeasurePair,
    ProbeReport,
    denseness_probe,
    exponential_completeness_probe,
    mmd_injectivity_probe,
    muntz_probe,
    plateaus,
    witness_gap_measure,
    witness_pair,
    witness_residuals,
)
from .tristate import Tri

OUT_ENV = "UNIVKERN_OUT"
DEFAULT_OUT = "univkern-out"
SCHEMA_VERSION = 1
EXIT_OK, EXIT_ERROR, EXIT_FAIL = 0, 1, 2

_verdict_schema = {
    "type": "object",
    "required": ["status", "rule_id", "citation", "explanation"],
    "properties": {
        "status": {"enum": ["yes", "no", "unknown"]},
        "rule_id": {"type": ["string", "null"]},
        "citation": {"type": "string"},
        "explanation": {"type": "string"},
    },
}
_number = {"type": ["number", "string"]}  # non-finite values are written as strings

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["schema_version", "name", "command", "seed", "config", "kernel", "probes",
                 "checks", "status", "exit_code"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "name": {"type": "string"},
        "command": {"enum": ["classify", "probe", "report"]},
        "seed": {"type": "integer"},
        "config": {"type": "object"},
        "kernel": {"type": "object"},
        "verdicts": {
            "type": "object",
            "required": ["universal", "characteristic", "c0_universal"],
            "additionalProperties": _verdict_schema,
        },
        "diagnostics": {"type": "object"},
        "probes": {
            "type": "object",
            "additionalProperties": {
                "type": "object",
                "required": ["kind", "curves", "table", "residuals", "flags", "metadata"],
                "properties": {
                    "curves": {"type": "object", "additionalProperties": {
                        "type": "array", "items": {
                            "type": "object",
                            "required": ["basis_size", "error", "sup_error"],
                            "properties": {"basis_size": {"type": "integer"},
                                           "error": _number, "sup_error": _number}}}},
                    "table": {"type": "array", "items": {"type": "object"}},
                    "residuals": {"type": "object", "additionalProperties": _number},
                    "flags": {"type": "object", "additionalProperties": {"type": "boolean"}},
                },
            },
        },
        "checks": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["action", "check", "expected", "observed", "passed"],
                "properties": {"action": {"type": "string"}, "check": {"type": "string"},
                               "passed": {"type": "boolean"}},
            },
        },
        "status": {"enum": ["pass", "fail", "error"]},
        "exit_code": {"enum": [EXIT_OK, EXIT_ERROR, EXIT_FAIL]},
        "error": {
            "type": "object",
            "required": ["type", "module", "message"],
            "properties": {"type": {"type": "string"}, "module": {"type": "string"},
                           "message": {"type": "string"}},
        },
    },
}


def jsonable(obj):
    """Convert numpy scalars, tri-states and non-finite floats to plain JSON values."""
    if isinstance(obj, Tri):
        return obj.value
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isfinite(x):
            return x
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    return obj


def dumps_report(report: dict) -> str:
    return json.dumps(jsonable(report), sort_keys=True, indent=2, allow_nan=False) + "\n"


# --------------------------------------------------------------------------
# actions


class _Run:
    def __init__(self, cfg: RunConfig, command: str, grid: int | None):
        self.cfg = cfg
        self.grid = grid
        self.kernel = cfg.build_kernel()
        self.report = {
            "schema_version": SCHEMA_VERSION, "name": cfg.name, "command": command,
            "seed": cfg.seed, "config": cfg.to_dict(), "kernel": describe(self.kernel),
            "probes": {}, "checks": [],
        }
        self.csv: dict[str, str] = {}

    def check(self, action, name, expected, observed, passed):
        self.report["checks"].append({"action": action, "check": name, "expected": expected,
                                      "observed": observed, "passed": bool(passed)})

    def _sec(self, action):
        sec = dict(self.cfg.section(action))
        if self.grid is not None and "grid" in sec and action != "probe-witness":
            sec["grid"] = self.grid
        return sec

    def _curve_checks(self, action: str, sec: dict, rep: ProbeReport):
        tol = sec["tolerance"]
        for t, what in sec.get("expect", {}).items():
            errs = rep.errors(t)
            ok = errs[-1] <= tol if what == "converged" else plateaus(errs, tol)
            self.check(action, f"{t}:{what}", what, errs[-1], ok)
        for t, floor in sec.get("min_error", {}).items():
            lowest = min(p.error for p in rep.curves[t])
            self.check(action, f"{t}:min_error", floor, lowest, lowest >= floor)
        for t, ref in sec.get("reference", {}).items():
            final = rep.final_error(t)
            rel = abs(final - ref) / abs(ref)
            self.check(action, f"{t}:reference", ref, final, rel <= sec["reference_rtol"])
        self.report["probes"][action] = rep.to_dict()
        if self.cfg.output.get("csv", True):
            self.csv[action] = rep.to_csv()

    def classify(self):
        verdicts = classify_all(self.kernel)
        self.report["verdicts"] = {k: v.to_dict() for k, v in verdicts.items()}
        diag = {}
        K = self.kernel
        if isinstance(K, WeightedPolynomial):
            diag["pollard"] = check_pollard(K.weight).to_dict()
        if isinstance(K, (Polynomial, WeightedPolynomial)):
            diag["muntz"] = muntz_gap_analysis(K.coeffs, 1000).to_dict()
        if diag:
            self.report["diagnostics"] = diag
        for key, want in self.cfg.expect.items():
            got = verdicts[key].status.value
            self.check("classify", key, want, got, got == want)

    def probe_dense(self):
        sec = self._sec("probe-dense")
        rep = denseness_probe(DensenessProbeConfig(
            self.kernel, tuple(sec["interval"]), tuple(sec["targets"]),
            tuple(sec["center_counts"]), sec["grid"], sec["ridge"], sec["tolerance"]))
        self._curve_checks("probe-dense", sec, rep)

    def probe_witness(self):
        sec = self._sec("probe-witness")
        K = self.kernel
        if not isinstance(K, TranslationInvariant):
            raise ProbeError("probe-witness needs a translation-invariant kernel")
        mu = witness_gap_measure(K.spectral, tuple(sec["gap"]), sec["truncation"], sec["grid"],
                                 sec["bump_nodes"])
        res = witness_residuals(K, mu, sec["samples"], sec["test_points"], sec["x_range"],
                                seed=self.cfg.seed)
        rep = mmd_injectivity_probe(K, [witness_pair(mu)], sec["mmd_tol"], sec["tv_min"])
        rep.kind = "witness"
        rep.residuals = res
        rep.metadata.update(gap=sec["gap"], truncation=sec["truncation"], grid_size=sec["grid"])
        row = rep.table[0]
        for name, value, tol in (("total_mass", res["total_mass"], sec["mass_tol"]),
                                 ("max_fourier_on_support", res["max_fourier_on_support"],
                                  sec["fourier_tol"]),
                                 ("max_embed", res["max_embed"], sec["embed_tol"]),
                                 ("mmd2", row["mmd2"], sec["mmd_tol"])):
            self.check("probe-witness", name, f"<= {tol!r}", value, value <= tol)
        tv = row["total_variation"]
        self.check("probe-witness", "total_variation", f">= {sec['tv_min']!r}", tv,
                   tv >= sec["tv_min"])
        self.report["probes"]["probe-witness"] = rep.to_dict()

    def probe_mmd(self):
        sec = self._sec("probe-mmd")
        pairs = [MeasurePair(p["name"], SignedMeasure.from_atoms(p["p"]),
                             SignedMeasure.from_atoms(p["q"])) for p in sec["pairs"]]
        rep = mmd_injectivity_probe(self.kernel, pairs, sec["tolerance"], sec["tv_threshold"])
        for name, ok in rep.flags.items():
            self.check("probe-mmd", name, True, ok, ok)
        self.report["probes"]["probe-mmd"] = rep.to_dict()

    def _lambdas(self, sec):
        if "lambdas" in sec:
            return np.asarray(sec["lambdas"])
        if "sequence" in sec:
            params = {"exponent": sec.get("exponent", 0.5), "step": sec.get("step", 1.0)}
            return sequence_values(sec["sequence"], params, sec["n_terms"])
        K = self.kernel
        if isinstance(K, TranslationInvariant) and K.spectral.density is None:
            return K.spectral.cosine_nodes[0][: sec["n_terms"]]
        raise ProbeError("probe-exp needs lambdas, a sequence, or an atomic spectral measure")

    def probe_exp(self):
        sec = self._sec("probe-exp")
        rep = exponential_completeness_probe(self._lambdas(sec), sec["radius"], sec["targets"],
                                             sec["grid"], sec["ridge"], sec["tolerance"],
                                             sec.get("counts"))
        self._curve_checks("probe-exp", sec, rep)

    def probe_muntz(self):
        sec = self._sec("probe-muntz")
        K = self.kernel
        if "support" in sec:
            support = build_index_support(sec["support"], "probe-muntz.support")
        elif isinstance(K, (Polynomial, WeightedPolynomial)):
            support = K.coeffs.support
        else:
            support = build_index_support({}, "probe-muntz.support")
        rep = muntz_probe(support, sec["horizon"], sec["targets"], sec["ridge"], sec["grid"],
                          sec["tolerance"], sec.get("horizons"))
        self._curve_checks("probe-muntz", sec, rep)


def _actions_for(command: str, cfg: RunConfig) -> list[str]:
    if command == "classify":
        return ["classify"]
    if command == "probe":
        return [a for a in cfg.actions if a != "classify"]
    return list(cfg.actions)


def run(cfg: RunConfig, command: str = "report", grid: int | None = None) -> tuple[int, dict,
                                                                                  dict[str, str]]:
    """Execute ``cfg``; return exit status, report document and CSV texts by action."""
    try:
        r = _Run(cfg, command, grid)
    except UnivKernError as e:
        return EXIT_ERROR, _error_only(cfg, command, e), {}
    try:
        for action in _actions_for(command, cfg):
            getattr(r, action.replace("-", "_"))()
    except UnivKernError as e:
        r.report["error"] = _error_dict(e)
        r.report["status"], r.report["exit_code"] = "error", EXIT_ERROR
        return EXIT_ERROR, r.report, r.csv
    ok = all(c["passed"] for c in r.report["checks"])
    code = EXIT_OK if ok else EXIT_FAIL
    r.report["status"], r.report["exit_code"] = ("pass" if ok else "fail"), code
    return code, r.report, r.csv


def _error_dict(e: Exception) -> dict:
    return {"type": type(e).__name__, "module": getattr(e, "module", "univkern"),
            "message": str(e)}


def _error_only(cfg, command, e):
    return {"schema_version": SCHEMA_VERSION, "name": cfg.name, "command": command,
            "seed": cfg.seed, "config": cfg.to_dict(), "kernel": {}, "probes": {},
            "checks": [], "status": "error", "exit_code": EXIT_ERROR, "error": _error_dict(e)}


def write_outputs(out_dir: Path, report: dict, csvs: dict[str, str]) -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    name = report["name"]
    paths = [out_dir / f"{name}-{report['command']}.json"]
    paths[0].write_text(dumps_report(report))
    for action, text in sorted(csvs.items()):
        p = out_dir / f"{name}-{action}.csv"
        p.write_text(text)
        paths.append(p)
    return paths


def _summary(report: dict) -> str:
    lines = [f"{report['name']} [{report['command']}] {report['kernel'].get('label', '')}"]
    for key, v in report.get("verdicts", {}).items():
        lines.append(f"  {key:15s} {v['status']:8s} {v['rule_id'] or '-'}")
    for c in report["checks"]:
        mark = "ok  " if c["passed"] else "FAIL"
        lines.append(f"  {mark} {c['action']}: {c['check']} observed={jsonable(c['observed'])}")
    if "error" in report:
        e = report["error"]
        lines.append(f"  error [{e['module']}] {e['type']}: {e['message']}")
    lines.append(f"  status {report['status']} (exit {report['exit_code']})")
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="univkern",
                                description="Classify kernels and probe their density properties.")
    sub = p.add_subparsers(dest="command", required=True)
    helps = {"classify": "verdict triple only", "probe": "probe actions only",
             "report": "every action in the config"}
    for name, h in helps.items():
        s = sub.add_parser(name, help=h)
        s.add_argument("config", type=Path)
        s.add_argument("--out", type=Path, default=None,
                       help=f"output directory (default: ${OUT_ENV}, [output].dir, "
                            f"then ./{DEFAULT_OUT})")
        s.add_argument("--seed", type=int, default=None, help="override the config seed")
        s.add_argument("--grid", type=int, default=None,
                       help="override evaluation grid sizes of curve probes")
        s.add_argument("--quiet", action="store_true", help="suppress the text summary")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = parse_config(args.config.read_text())
    except (OSError, UnivKernError) as e:
        module = getattr(e, "module", "cli")
        print(f"univkern: [{module}] {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_ERROR
    if args.seed is not None:
        cfg = RunConfig(cfg.name, args.seed, cfg.actions, cfg.kernel, cfg.expect, cfg.sections,
                        cfg.output)
    if args.grid is not None and args.grid < 3:
        print("univkern: [cli] --grid needs at least 3 points", file=sys.stderr)
        return EXIT_ERROR
    code, report, csvs = run(cfg, args.command, args.grid)
    out = args.out or Path(os.environ.get(OUT_ENV) or cfg.output.get("dir") or DEFAULT_OUT)
    paths = write_outputs(out, report, csvs)
    if not args.quiet:
        print(_summary(report))
        for p in paths:
            print(f"  wrote {p}")
    if code == EXIT_ERROR:
        e = report["error"]
        print(f"univkern: [{e['module']}] {e['type']}: {e['message']}", file=sys.stderr)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
