"""Dataset ingestion, run configuration, and result persistence.

Results are exchanged as plain CSV with the fixed header

    method,param_b,shift,trial,coverage,width,tau,level

so downstream tooling (plotting, notebooks) can consume them with no shared
code.  Floats are serialized with 17 significant digits, which round-trips
float64 exactly; rows are sorted by (method, shift, trial) so identical
reports always produce identical bytes.  A failed trial is kept as a row
whose method label carries a ``#error`` suffix and whose numeric fields are
NaN.

Configs are strict JSON: unknown keys are fatal at any nesting level, so a
typo fails fast instead of silently running a long sweep with defaults.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .calibration import CoverageReport, CoverageRow
from .synth import GeneratedDataset

RESULT_HEADER = ("method", "param_b", "shift", "trial", "coverage", "width", "tau", "level")
SRM_HEADER = ("b", "lambda", "m", "trial", "emp_risk", "srm_objective", "test_l2")


class ConfigError(ValueError):
    """Invalid or malformed run configuration."""


class DataFormatError(ValueError):
    """Malformed dataset file."""


# ---------------------------------------------------------------------------
# Datasets


@dataclass(frozen=True)
class CsvSchema:
    """Column layout of a dataset file.

    ``features`` are the covariate columns in order (conventionally
    x0..x{d-1}); ``label``, ``score`` and ``group`` are optional single
    columns.  A file must provide features or precomputed scores.
    """

    features: tuple[str, ...] = ()
    label: str | None = None
    score: str | None = None
    group: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "features", tuple(self.features))
        if not self.features and self.score is None:
            raise ConfigError("schema needs feature columns or a score column")
        cols = self.columns()
        if len(set(cols)) != len(cols):
            raise ConfigError(f"duplicate column names in schema: {cols}")

    @classmethod
    def with_features(cls, d: int, **kwargs) -> "CsvSchema":
        return cls(features=tuple(f"x{i}" for i in range(d)), **kwargs)

    def columns(self) -> tuple[str, ...]:
        extra = [c for c in (self.label, self.score, self.group) if c is not None]
        return self.features + tuple(extra)


def read_dataset(path: str, schema: CsvSchema, source: str = "P") -> GeneratedDataset:
    """Parse a CSV file against a schema, with cell-level diagnostics."""
    if not os.path.exists(path):
        raise DataFormatError(f"{path}: file not found")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataFormatError(f"{path}: empty file") from None
        expected = set(schema.columns())
        if set(header) != expected:
            raise DataFormatError(
                f"{path}: header {header} does not match schema columns {sorted(expected)}"
            )
        index = {name: header.index(name) for name in header}

        def cell(row_values, row_num, name, caster=float):
            raw = row_values[index[name]]
            try:
                return caster(raw)
            except ValueError:
                raise DataFormatError(
                    f"{path}: row {row_num}, column {name!r}: cannot parse {raw!r}"
                ) from None

        feats, labels, scores, groups = [], [], [], []
        for row_num, values in enumerate(reader, start=1):
            if len(values) != len(header):
                raise DataFormatError(
                    f"{path}: row {row_num} has {len(values)} cells, header has {len(header)}"
                )
            feats.append([cell(values, row_num, c) for c in schema.features])
            if schema.label is not None:
                labels.append(cell(values, row_num, schema.label))
            if schema.score is not None:
                scores.append(cell(values, row_num, schema.score))
            if schema.group is not None:
                groups.append(cell(values, row_num, schema.group, caster=int))

    n = len(feats)
    return GeneratedDataset(
        x=np.asarray(feats, dtype=np.float64).reshape(n, len(schema.features)),
        y=np.asarray(labels, dtype=np.float64) if schema.label is not None else None,
        scores=np.asarray(scores, dtype=np.float64) if schema.score is not None else None,
        group=np.asarray(groups, dtype=np.int64) if schema.group is not None else None,
        source=source,
        seed=0,
        spec=None,
    )


def schema_for(dataset: GeneratedDataset) -> CsvSchema:
    """Schema matching the columns a dataset actually carries."""
    return CsvSchema(
        features=tuple(f"x{i}" for i in range(dataset.x.shape[1])),
        label="y" if dataset.y is not None else None,
        score="score" if dataset.scores is not None else None,
        group="group" if dataset.group is not None else None,
    )


def write_dataset(dataset: GeneratedDataset, path: str) -> GeneratedDataset:
    """Export a dataset as CSV readable by :func:`read_dataset`.

    Floats use 17 significant digits, so a write/read round trip is
    bit-exact.  Returns the dataset for chaining.
    """
    schema = schema_for(dataset)
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(",".join(schema.columns()) + "\n")
        for i in range(dataset.n):
            cells = [f"{v:.17g}" for v in dataset.x[i]]
            if dataset.y is not None:
                cells.append(f"{dataset.y[i]:.17g}")
            if dataset.scores is not None:
                cells.append(f"{dataset.scores[i]:.17g}")
            if dataset.group is not None:
                cells.append(str(int(dataset.group[i])))
            fh.write(",".join(cells) + "\n")
    return dataset


# ---------------------------------------------------------------------------
# Result persistence


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.17g}"


def _row_key(row: CoverageRow):
    return (row.method, row.shift, row.trial)


def write_results(report: CoverageReport, path: str) -> None:
    """Write a coverage report as deterministic, sorted CSV."""
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)
    try:
        with open(path, "w", newline="") as fh:
            fh.write(",".join(RESULT_HEADER) + "\n")
            for row in sorted(report.rows, key=_row_key):
                method = row.method if row.error is None else f"{row.method}#error"
                fh.write(
                    ",".join(
                        (
                            method,
                            _fmt(row.param_b),
                            _fmt(row.shift),
                            _fmt(row.trial),
                            _fmt(row.coverage),
                            _fmt(row.width),
                            _fmt(row.tau),
                            _fmt(row.level),
                        )
                    )
                    + "\n"
                )
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc}") from exc


@dataclass(frozen=True)
class SrmRow:
    """One (clip level, penalty, sample size, trial) cell of an SRM sweep."""

    b: float
    lam: float
    m: int
    trial: int
    emp_risk: float
    srm_objective: float
    test_l2: float


def write_srm_results(rows, path: str) -> None:
    """Write SRM sweep rows as deterministic, sorted CSV."""
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)
    ordered = sorted(rows, key=lambda r: (r.b, r.lam, r.m, r.trial))
    with open(path, "w", newline="") as fh:
        fh.write(",".join(SRM_HEADER) + "\n")
        for r in ordered:
            fields = (r.b, r.lam, r.m, r.trial, r.emp_risk, r.srm_objective, r.test_l2)
            fh.write(",".join(_fmt(v) for v in fields) + "\n")


def read_srm_results(path: str) -> list[SrmRow]:
    """Read back an SRM sweep CSV written by :func:`write_srm_results`."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != SRM_HEADER:
            raise DataFormatError(f"{path}: unexpected header {header}")
        return [
            SrmRow(
                b=float(v[0]),
                lam=float(v[1]),
                m=int(v[2]),
                trial=int(v[3]),
                emp_risk=float(v[4]),
                srm_objective=float(v[5]),
                test_l2=float(v[6]),
            )
            for v in reader
        ]


def read_results(path: str) -> CoverageReport:
    """Read back a results CSV written by :func:`write_results`."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != RESULT_HEADER:
            raise DataFormatError(f"{path}: unexpected header {header}")
        rows = []
        for values in reader:
            rec = dict(zip(RESULT_HEADER, values))
            method = rec["method"]
            error = None
            if method.endswith("#error"):
                method = method[: -len("#error")]
                error = "failed"
            rows.append(
                CoverageRow(
                    method=method,
                    param_b=float(rec["param_b"]) if rec["param_b"] else None,
                    shift=float(rec["shift"]),
                    trial=int(rec["trial"]),
                    coverage=float(rec["coverage"]),
                    tau=float(rec["tau"]),
                    level=float(rec["level"]),
                    width=float(rec["width"]) if rec["width"] else None,
                    error=error,
                )
            )
    return CoverageReport(rows=tuple(rows))


# ---------------------------------------------------------------------------
# Run configuration


def _check_keys(section: dict, path: str, allowed: set[str], required: set[str] = frozenset()):
    if not isinstance(section, dict):
        raise ConfigError(f"{path}: expected an object, got {type(section).__name__}")
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"{path}: unknown key(s) {sorted(unknown)}")
    missing = required - set(section)
    if missing:
        raise ConfigError(f"{path}: missing required key(s) {sorted(missing)}")


def _check_range(value, path, lo=None, hi=None, open_lo=False, open_hi=False):
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise ConfigError(f"{path}: expected a number, got {value!r}")
    v = float(value)
    if lo is not None and (v <= lo if open_lo else v < lo):
        raise ConfigError(f"{path}: value {v} below allowed range")
    if hi is not None and (v >= hi if open_hi else v > hi):
        raise ConfigError(f"{path}: value {v} above allowed range")
    return v


@dataclass(frozen=True)
class ShiftConfig:
    family: str
    d: int = 1
    grid: tuple[float, ...] = (0.0,)
    r: float | None = None
    theta: float | None = None

    def to_dict(self) -> dict:
        out = {"family": self.family, "d": self.d, "grid": list(self.grid)}
        if self.r is not None:
            out["r"] = self.r
        if self.theta is not None:
            out["theta"] = self.theta
        return out


@dataclass(frozen=True)
class SizeConfig:
    m_train: int = 600
    m_test: int = 600
    m_est: int = 600
    m_cal: int = 600
    n_eval: int = 2000

    def to_dict(self) -> dict:
        return {
            "m_train": self.m_train,
            "m_test": self.m_test,
            "m_est": self.m_est,
            "m_cal": self.m_cal,
            "n_eval": self.n_eval,
        }


@dataclass(frozen=True)
class MethodConfig:
    name: str
    b: float | None = None
    mode: str = "cwcp-expected"
    epsilon: float | None = None

    @property
    def label(self) -> str:
        if self.name == "cwcp":
            return f"cwcp-b{self.b:g}"
        return self.name

    def to_dict(self) -> dict:
        out: dict[str, Any] = {"name": self.name}
        if self.b is not None:
            out["b"] = self.b
        if self.name == "cwcp":
            out["mode"] = self.mode
        if self.epsilon is not None:
            out["epsilon"] = self.epsilon
        return out


@dataclass(frozen=True)
class NeedleDemoConfig:
    c: float | None = None  # enables the known-weights threshold demo
    m: int | None = None  # enables the ratio-overestimation demo
    n: int | None = None

    def to_dict(self) -> dict:
        out: dict[str, Any] = {}
        if self.c is not None:
            out["c"] = self.c
        if self.m is not None:
            out["m"] = self.m
            out["n"] = self.n
        return out


@dataclass(frozen=True)
class SrmConfig:
    b_grid: tuple[float, ...] = (2.5, 5.0, 10.0, 20.0)
    lambda_grid: tuple[float, ...] = (0.5,)
    m_grid: tuple[int, ...] = (50, 200, 800)
    mc_n: int = 4000
    restarts: int = 1

    def to_dict(self) -> dict:
        return {
            "b_grid": list(self.b_grid),
            "lambda_grid": list(self.lambda_grid),
            "m_grid": list(self.m_grid),
            "mc_n": self.mc_n,
            "restarts": self.restarts,
        }


@dataclass(frozen=True)
class FitConfig:
    family: str = "tilt"  # tilt | piecewise | needle
    b: float = 5.0
    train_csv: str | None = None
    test_csv: str | None = None
    schema: CsvSchema | None = None
    probs: tuple[float, ...] | None = None

    def to_dict(self) -> dict:
        out: dict[str, Any] = {"family": self.family, "b": self.b}
        if self.train_csv is not None:
            out["train_csv"] = self.train_csv
            out["test_csv"] = self.test_csv
            schema: dict[str, Any] = {"features": list(self.schema.features)}
            if self.schema.label is not None:
                schema["label"] = self.schema.label
            if self.schema.score is not None:
                schema["score"] = self.schema.score
            if self.schema.group is not None:
                schema["group"] = self.schema.group
            out["schema"] = schema
        if self.probs is not None:
            out["probs"] = list(self.probs)
        return out


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved description of one experiment run."""

    kind: str
    seed: int = 20250809
    out_dir: str = "results"
    trials: int = 30
    alpha: float = 0.2
    epsilon: float = 0.01
    delta: float = 0.1
    workers: int = 1
    shift: ShiftConfig = field(default_factory=lambda: ShiftConfig(family="gaussian", d=20))
    sizes: SizeConfig = field(default_factory=SizeConfig)
    methods: tuple[MethodConfig, ...] = ()
    needle: NeedleDemoConfig = field(default_factory=NeedleDemoConfig)
    srm: SrmConfig = field(default_factory=SrmConfig)
    fit: FitConfig = field(default_factory=FitConfig)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "seed": self.seed,
            "out_dir": self.out_dir,
            "trials": self.trials,
            "alpha": self.alpha,
            "epsilon": self.epsilon,
            "delta": self.delta,
            "workers": self.workers,
            "shift": self.shift.to_dict(),
            "sizes": self.sizes.to_dict(),
            "methods": [m.to_dict() for m in self.methods],
            "needle": self.needle.to_dict(),
            "srm": self.srm.to_dict(),
            "fit": self.fit.to_dict(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


KINDS = ("coverage-exp", "needle-demo", "srm-exp", "fit-ratio")


def _parse_shift(section: dict, path: str) -> ShiftConfig:
    _check_keys(section, path, {"family", "d", "grid", "r", "theta"}, {"family"})
    family = section["family"]
    if family not in ("gaussian", "needle", "powerlaw"):
        raise ConfigError(f"{path}.family: unknown family {family!r}")
    d = int(_check_range(section.get("d", 1), f"{path}.d", lo=1))
    grid = tuple(float(g) for g in section.get("grid", [0.0]))
    if not grid:
        raise ConfigError(f"{path}.grid: must be nonempty")
    r = theta = None
    if family == "needle":
        if "r" not in section or "theta" not in section:
            raise ConfigError(f"{path}: needle family requires r and theta")
        r = _check_range(section["r"], f"{path}.r", lo=0.0, hi=1.0, open_lo=True, open_hi=True)
        theta = _check_range(
            section["theta"], f"{path}.theta", lo=0.0, hi=1.0, open_lo=True, open_hi=True
        )
    return ShiftConfig(family=family, d=d, grid=grid, r=r, theta=theta)


def _parse_sizes(section: dict, path: str) -> SizeConfig:
    allowed = {"m_train", "m_test", "m_est", "m_cal", "n_eval"}
    _check_keys(section, path, allowed)
    defaults = SizeConfig()
    values = {}
    for key in allowed:
        raw = section.get(key, getattr(defaults, key))
        values[key] = int(_check_range(raw, f"{path}.{key}", lo=1))
    return SizeConfig(**values)


def _parse_method(section: dict, path: str) -> MethodConfig:
    _check_keys(section, path, {"name", "b", "mode", "epsilon"}, {"name"})
    name = section["name"]
    if name not in ("split", "wcp", "cwcp"):
        raise ConfigError(f"{path}.name: unknown method {name!r}")
    b = None
    if "b" in section:
        b = _check_range(section["b"], f"{path}.b", lo=1.0)
    if name == "cwcp" and b is None:
        raise ConfigError(f"{path}: cwcp requires a clip level b")
    mode = section.get("mode", "cwcp-expected")
    if mode in ("expected", "conditional"):
        mode = f"cwcp-{mode}"
    if mode not in ("cwcp-expected", "cwcp-conditional"):
        raise ConfigError(f"{path}.mode: unknown mode {section.get('mode')!r}")
    epsilon = None
    if "epsilon" in section:
        epsilon = _check_range(section["epsilon"], f"{path}.epsilon", lo=0.0)
    return MethodConfig(name=name, b=b, mode=mode, epsilon=epsilon)


def _parse_needle(section: dict, path: str) -> NeedleDemoConfig:
    _check_keys(section, path, {"c", "m", "n"})
    c = m = n = None
    if "c" in section:
        c = _check_range(section["c"], f"{path}.c", lo=0.0, open_lo=True)
    if "m" in section or "n" in section:
        m = int(_check_range(section.get("m", 50), f"{path}.m", lo=1))
        n = int(_check_range(section.get("n", m), f"{path}.n", lo=1))
    return NeedleDemoConfig(c=c, m=m, n=n)


def _parse_srm(section: dict, path: str) -> SrmConfig:
    _check_keys(section, path, {"b_grid", "lambda_grid", "m_grid", "mc_n", "restarts"})
    defaults = SrmConfig()
    b_grid = tuple(float(b) for b in section.get("b_grid", defaults.b_grid))
    lambda_grid = tuple(float(l) for l in section.get("lambda_grid", defaults.lambda_grid))
    m_grid = tuple(int(m) for m in section.get("m_grid", defaults.m_grid))
    if not b_grid or list(b_grid) != sorted(b_grid):
        raise ConfigError(f"{path}.b_grid: must be nonempty and ascending")
    if not lambda_grid or any(l < 0 for l in lambda_grid):
        raise ConfigError(f"{path}.lambda_grid: must be nonempty and nonnegative")
    if not m_grid or any(m < 1 for m in m_grid):
        raise ConfigError(f"{path}.m_grid: must be nonempty positive integers")
    mc_n = int(_check_range(section.get("mc_n", defaults.mc_n), f"{path}.mc_n", lo=1))
    restarts = int(_check_range(section.get("restarts", defaults.restarts), f"{path}.restarts", lo=0))
    return SrmConfig(b_grid=b_grid, lambda_grid=lambda_grid, m_grid=m_grid, mc_n=mc_n, restarts=restarts)


def _parse_schema(section: dict, path: str) -> CsvSchema:
    _check_keys(section, path, {"features", "label", "score", "group"})
    return CsvSchema(
        features=tuple(section.get("features", ())),
        label=section.get("label"),
        score=section.get("score"),
        group=section.get("group"),
    )


def _parse_fit(section: dict, path: str) -> FitConfig:
    allowed = {"family", "b", "train_csv", "test_csv", "schema", "probs"}
    _check_keys(section, path, allowed)
    family = section.get("family", "tilt")
    if family not in ("tilt", "piecewise", "needle"):
        raise ConfigError(f"{path}.family: unknown ratio family {family!r}")
    b = _check_range(section.get("b", 5.0), f"{path}.b", lo=1.0)
    train_csv = section.get("train_csv")
    test_csv = section.get("test_csv")
    schema = None
    if (train_csv is None) != (test_csv is None):
        raise ConfigError(f"{path}: train_csv and test_csv must be given together")
    if train_csv is not None:
        if "schema" not in section:
            raise ConfigError(f"{path}: CSV inputs require a schema")
        schema = _parse_schema(section["schema"], f"{path}.schema")
        for key, value in (("train_csv", train_csv), ("test_csv", test_csv)):
            if not os.path.exists(value):
                raise ConfigError(f"{path}.{key}: file {value!r} does not exist")
    probs = None
    if "probs" in section:
        probs = tuple(float(p) for p in section["probs"])
        if any(p < 0 for p in probs) or abs(sum(probs) - 1.0) > 1e-9:
            raise ConfigError(f"{path}.probs: must be nonnegative and sum to 1")
    return FitConfig(
        family=family, b=b, train_csv=train_csv, test_csv=test_csv, schema=schema, probs=probs
    )


def parse_config(raw: dict) -> RunConfig:
    """Validate a raw JSON object into a RunConfig (strict: typos are fatal)."""
    top_allowed = {
        "kind",
        "seed",
        "out_dir",
        "trials",
        "alpha",
        "epsilon",
        "delta",
        "workers",
        "shift",
        "sizes",
        "methods",
        "needle",
        "srm",
        "fit",
    }
    _check_keys(raw, "config", top_allowed, {"kind"})
    kind = raw["kind"]
    if kind not in KINDS:
        raise ConfigError(f"config.kind: unknown kind {kind!r}; expected one of {KINDS}")
    defaults = RunConfig(kind=kind)
    seed = int(_check_range(raw.get("seed", defaults.seed), "config.seed", lo=0))
    trials = int(_check_range(raw.get("trials", defaults.trials), "config.trials", lo=1))
    alpha = _check_range(
        raw.get("alpha", defaults.alpha), "config.alpha", lo=0.0, hi=1.0, open_lo=True, open_hi=True
    )
    epsilon = _check_range(raw.get("epsilon", defaults.epsilon), "config.epsilon", lo=0.0)
    delta = _check_range(
        raw.get("delta", defaults.delta), "config.delta", lo=0.0, hi=1.0, open_lo=True, open_hi=True
    )
    workers = int(_check_range(raw.get("workers", defaults.workers), "config.workers", lo=1))
    shift = _parse_shift(raw.get("shift", defaults.shift.to_dict()), "config.shift")
    sizes = _parse_sizes(raw.get("sizes", {}), "config.sizes")
    methods_raw = raw.get("methods", [])
    if not isinstance(methods_raw, list):
        raise ConfigError("config.methods: expected a list")
    methods = tuple(
        _parse_method(m, f"config.methods[{i}]") for i, m in enumerate(methods_raw)
    )
    needle = _parse_needle(raw.get("needle", {}), "config.needle")
    srm = _parse_srm(raw.get("srm", {}), "config.srm")
    fit = _parse_fit(raw.get("fit", {}), "config.fit")
    out_dir = raw.get("out_dir", defaults.out_dir)
    if not isinstance(out_dir, str):
        raise ConfigError("config.out_dir: expected a string")
    return RunConfig(
        kind=kind,
        seed=seed,
        out_dir=out_dir,
        trials=trials,
        alpha=alpha,
        epsilon=epsilon,
        delta=delta,
        workers=workers,
        shift=shift,
        sizes=sizes,
        methods=methods,
        needle=needle,
        srm=srm,
        fit=fit,
    )


def load_config(path: str) -> RunConfig:
    """Load and validate a JSON run configuration."""
    if not os.path.exists(path):
        raise ConfigError(f"config file {path!r} does not exist")
    with open(path) as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    return parse_config(raw)
