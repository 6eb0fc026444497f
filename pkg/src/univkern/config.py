"""TOML run configurations: one kernel, an ordered list of actions.

A minimal file::

    name = "gaussian"
    actions = ["classify"]

    [kernel]
    family = "gaussian-ti"

Every action has its own optional section (``[probe-dense]`` and so on)
whose defaults are filled by :func:`parse_config`. Unknown keys anywhere
are rejected with the dotted path of the offending field.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import tomli
import tomli_w

from .errors import InvalidValue, ParseError, ProbeError
from .families import SUPPORT_FIELDS, build_kernel, validate_kernel_section
from .probe import (
    BUMP_NODES,
    DEFAULT_GRID,
    DEFAULT_RIDGE,
    WITNESS_GRID,
    WITNESS_TRUNCATION,
    parse_target,
)
from .schema import Field, validate
from .tristate import Tri

#: seed used when a config does not set one; it only drives sampled test points
DEFAULT_SEED = 20240611

ACTIONS = ("classify", "probe-dense", "probe-witness", "probe-mmd", "probe-exp", "probe-muntz")
CURVE_EXPECTATIONS = ("converged", "plateau")
VERDICT_KEYS = ("universal", "characteristic", "c0_universal")

_pos = dict(check=lambda v: v > 0, why="must be > 0")
_nonneg = dict(check=lambda v: v >= 0, why="must be >= 0")
_grid = dict(check=lambda v: v >= 3, why="needs at least 3 points")


def _increasing(v):
    return len(v) > 0 and v[0] >= 1 and all(b > a for a, b in zip(v, v[1:]))


def _interval(v):
    return len(v) == 2 and v[0] < v[1]


def _curve_fields(targets, grid=DEFAULT_GRID, tolerance=1e-3):
    """Fields shared by every curve-producing probe."""
    return {
        "targets": Field("strs", list(targets), check=lambda v: len(v) > 0,
                         why="needs at least one target"),
        "grid": Field("int", grid, **_grid),
        "ridge": Field("float", DEFAULT_RIDGE, **_nonneg),
        "tolerance": Field("float", tolerance, **_pos),
        # target -> "converged" | "plateau"
        "expect": Field("table", None),
        # target -> lower bound every recorded error must respect
        "min_error": Field("table", None),
        # target -> oracle floor the final error must match within reference_rtol
        "reference": Field("table", None),
        "reference_rtol": Field("float", 0.05, **_pos),
    }


SECTION_FIELDS: dict[str, dict[str, Field]] = {
    "probe-dense": {
        "interval": Field("floats", [-1.0, 1.0], check=_interval, why="needs [a, b] with a < b"),
        "center_counts": Field("ints", [5, 9, 17, 25], check=_increasing,
                               why="must be positive and strictly increasing"),
        **_curve_fields(["sin:3"]),
    },
    "probe-witness": {
        "gap": Field("floats", [0.25, 0.75],
                     check=lambda v: len(v) == 2 and v[0] < v[1], why="needs [a, b] with a < b"),
        "truncation": Field("float", WITNESS_TRUNCATION, **_pos),
        "grid": Field("int", WITNESS_GRID, **_grid),
        "bump_nodes": Field("int", BUMP_NODES, **_grid),
        "samples": Field("int", 100, **_pos),
        "test_points": Field("int", 41, **_pos),
        "x_range": Field("float", 5.0, **_pos),
        "mass_tol": Field("float", 1e-8, **_pos),
        "fourier_tol": Field("float", 1e-6, **_pos),
        "embed_tol": Field("float", 1e-6, **_pos),
        "mmd_tol": Field("float", 1e-8, **_pos),
        "tv_min": Field("float", 0.1, **_pos),
    },
    "probe-mmd": {
        "pairs": Field("any", []),
        "tolerance": Field("float", 1e-8, **_pos),
        "tv_threshold": Field("float", 0.1, **_pos),
    },
    "probe-exp": {
        "lambdas": Field("floats", None),
        "sequence": Field("str", None, choices=("n-over-log", "power-law", "linear")),
        "n_terms": Field("int", 60, **_pos),
        "exponent": Field("float", None, **_pos),
        "step": Field("float", None, **_pos),
        "radius": Field("float", 1.0, **_pos),
        "counts": Field("ints", None, check=_increasing,
                        why="must be positive and strictly increasing"),
        **_curve_fields(["monomial:2"], tolerance=1e-2),
    },
    "probe-muntz": {
        "support": Field("table", None),
        "horizon": Field("int", 64, **_pos),
        "horizons": Field("ints", None, check=_increasing,
                          why="must be positive and strictly increasing"),
        **_curve_fields(["monomial:1"], tolerance=1e-2),
    },
}

PAIR_FIELDS = {
    "name": Field("str"),
    "p": Field("pairs"),
    "q": Field("pairs"),
}

TOP_FIELDS = {
    "name": Field("str", "run"),
    "seed": Field("int", DEFAULT_SEED),
    "actions": Field("strs", check=lambda v: len(v) > 0, why="needs at least one action"),
    "kernel": Field("table"),
    "expect": Field("table", None),
    "output": Field("table", None),
    **{a: Field("table", None) for a in SECTION_FIELDS},
}

_tri = tuple(t.value for t in Tri)
EXPECT_FIELDS = {k: Field("str", None, choices=_tri) for k in VERDICT_KEYS}
OUTPUT_FIELDS = {
    "dir": Field("str", None),
    "csv": Field("bool", True),
}


@dataclass(frozen=True)
class RunConfig:
    name: str
    seed: int
    actions: tuple[str, ...]
    kernel: dict
    expect: dict = field(default_factory=dict)
    sections: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)

    def build_kernel(self):
        return build_kernel(self.kernel)

    def section(self, action: str) -> dict:
        return self.sections.get(action, {})

    def to_dict(self) -> dict:
        """Plain TOML-ready form; re-parsing it yields an equal config."""
        out = {"name": self.name, "seed": self.seed, "actions": list(self.actions),
               "kernel": self.kernel}
        if self.expect:
            out["expect"] = self.expect
        if self.output:
            out["output"] = self.output
        out.update(self.sections)
        return out


def _check_curve_tables(sec: dict, path: str) -> None:
    targets = set(sec["targets"])
    for key in ("expect", "min_error", "reference"):
        table = sec.get(key, {})
        for t, v in table.items():
            p = f"{path}.{key}.{t}"
            if t not in targets:
                raise InvalidValue(p, "not one of the configured targets")
            if key == "expect":
                if v not in CURVE_EXPECTATIONS:
                    raise InvalidValue(p, f"must be one of {list(CURVE_EXPECTATIONS)}")
            elif isinstance(v, bool) or not isinstance(v, (int, float)):
                raise InvalidValue(p, "expected a number")
        if table:
            sec[key] = {t: (v if key == "expect" else float(v)) for t, v in table.items()}


def _validate_section(action: str, data: dict) -> dict:
    path = action
    sec = validate(data, SECTION_FIELDS[action], path)
    if "targets" in sec:
        for i, t in enumerate(sec["targets"]):
            try:
                parse_target(t)
            except ProbeError as e:
                raise InvalidValue(f"{path}.targets[{i}]", str(e)) from None
        _check_curve_tables(sec, path)
    if action == "probe-mmd":
        if not isinstance(sec["pairs"], list):
            raise InvalidValue(f"{path}.pairs", "expected a list of tables")
        sec["pairs"] = [validate(p, PAIR_FIELDS, f"{path}.pairs[{i}]")
                        for i, p in enumerate(sec["pairs"])]
    if action == "probe-exp":
        if "lambdas" in sec and "sequence" in sec:
            raise InvalidValue(f"{path}.lambdas", "give either lambdas or sequence, not both")
    if action == "probe-muntz" and "support" in sec:
        sec["support"] = validate(sec["support"], SUPPORT_FIELDS, f"{path}.support")
    return sec


def validate_config(data: dict) -> RunConfig:
    top = validate(data, TOP_FIELDS, "config")
    for i, a in enumerate(top["actions"]):
        if a not in ACTIONS:
            raise InvalidValue(f"config.actions[{i}]", f"unknown action {a!r}; "
                                                       f"known: {', '.join(ACTIONS)}")
    if len(set(top["actions"])) != len(top["actions"]):
        raise InvalidValue("config.actions", "actions must be distinct")
    kernel = validate_kernel_section(top["kernel"])
    # build once so family-level errors surface at parse time
    build_kernel(kernel)
    sections = {}
    for a in SECTION_FIELDS:
        if a in top or a in top["actions"]:
            sections[a] = _validate_section(a, top.get(a, {}))
    expect = validate(top.get("expect", {}), EXPECT_FIELDS, "expect")
    output = validate(top.get("output", {}), OUTPUT_FIELDS, "output")
    return RunConfig(top["name"], top["seed"], tuple(top["actions"]), kernel, expect, sections,
                     output)


_LOCATION = re.compile(r"\(at line (\d+), column (\d+)\)")


def parse_config(text: str) -> RunConfig:
    """Parse and validate a TOML run configuration."""
    try:
        data = tomli.loads(text)
    except tomli.TOMLDecodeError as e:
        msg = str(e)
        m = _LOCATION.search(msg)
        if m:
            raise ParseError(msg[:m.start()].strip(), int(m.group(1)), int(m.group(2))) from None
        if "(at end of document)" in msg:
            lines = text.split("\n")
            raise ParseError(msg.replace("(at end of document)", "").strip(), len(lines),
                             len(lines[-1]) + 1) from None
        raise ParseError(msg) from None
    return validate_config(data)


def dump_config(cfg: RunConfig) -> str:
    return tomli_w.dumps(cfg.to_dict())
