"""File formats: snapshot CSV, result-table CSV, metadata sidecar, config.

Snapshot files carry one snapshot per row under a single header line::

    # field=complex p=3
    1.0,0.0,0.5,-0.5,0.0,1.0

Complex files have 2p numeric columns (real, imaginary alternating); real
files have p columns. Result tables use the fixed header

    experiment,quantizer,n,bits,median,quantile25,quantile75,success_frac,failures,seed

with floats written by ``repr`` so a round trip preserves every bit.
Experiment configuration files are flat ``key = value`` text with ``#``
comments; list values are comma separated.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import time

import numpy as np

from ._version import __version__
from .exceptions import ConfigError, SnapshotParseError
from .experiments import ExperimentConfig, ResultRow, ResultTable, preset
from .quantizers import SnapshotBatch

RESULT_HEADER = (
    "experiment,quantizer,n,bits,median,quantile25,quantile75,success_frac,failures,seed"
)


# ---------------------------------------------------------------------------
# snapshot files


def ingest_snapshots(path: str) -> SnapshotBatch:
    """Read an analog snapshot file; columns of the result are snapshots."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        parts = header.split()
        if (
            len(parts) != 3
            or parts[0] != "#"
            or not parts[1].startswith("field=")
            or not parts[2].startswith("p=")
        ):
            raise SnapshotParseError(
                f"bad header {header!r}; expected '# field=<real|complex> p=<p>'"
            )
        field = parts[1][len("field=") :]
        if field not in ("real", "complex"):
            raise SnapshotParseError(f"unknown field {field!r} in header")
        try:
            p = int(parts[2][len("p=") :])
        except ValueError as exc:
            raise SnapshotParseError(f"bad sensor count in header {header!r}") from exc
        if p < 1:
            raise SnapshotParseError(f"sensor count must be positive, got {p}")
        want = 2 * p if field == "complex" else p
        rows = []
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            cells = line.split(",")
            if len(cells) != want:
                raise SnapshotParseError(
                    f"expected {want} columns, found {len(cells)}", row=lineno
                )
            try:
                rows.append([float(c) for c in cells])
            except ValueError as exc:
                raise SnapshotParseError(f"non-numeric value: {exc}", row=lineno) from exc
    if not rows:
        raise SnapshotParseError("snapshot file holds no data rows")
    arr = np.array(rows)
    if field == "complex":
        data = (arr[:, 0::2] + 1j * arr[:, 1::2]).T
    else:
        data = arr.T
    return SnapshotBatch(data, field, None, seed_info=path)


def write_snapshots(batch: SnapshotBatch, path: str) -> None:
    """Write an analog snapshot batch in the format ingest_snapshots reads."""
    data = batch.data
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# field={batch.field} p={batch.p}\n")
        for k in range(batch.n):
            col = data[:, k]
            if batch.field == "complex":
                cells = []
                for z in col:
                    cells.append(repr(float(np.real(z))))
                    cells.append(repr(float(np.imag(z))))
            else:
                cells = [repr(float(v)) for v in np.real(col)]
            fh.write(",".join(cells) + "\n")


def write_covariance(est, path: str) -> None:
    """Debug dump of a covariance estimate: row-major, 're,im' per entry."""
    m = np.asarray(est.matrix if hasattr(est, "matrix") else est)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# covariance p={m.shape[0]}\n")
        for row in m:
            cells = []
            for z in row:
                cells.append(repr(float(np.real(z))))
                cells.append(repr(float(np.imag(z))))
            fh.write(",".join(cells) + "\n")


def read_covariance(path: str) -> np.ndarray:
    """Read back a matrix written by :func:`write_covariance`."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline()
        if not header.startswith("# covariance"):
            raise SnapshotParseError(f"bad covariance header {header!r}")
        rows = []
        for line in fh:
            vals = [float(v) for v in line.strip().split(",")]
            rows.append([complex(re, im) for re, im in zip(vals[0::2], vals[1::2])])
    return np.array(rows)


# ---------------------------------------------------------------------------
# result tables


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit_results(table: ResultTable, path: str) -> None:
    """Write the result CSV with its fixed header and deterministic ordering.

    Rows are ordered by (quantizer, bits, n); a rerun with the same seed
    produces a byte-identical file.
    """
    rows = sorted(table.rows, key=lambda r: (r.quantizer, r.bits, r.n))
    buf = io.StringIO()
    buf.write(RESULT_HEADER + "\n")
    for r in rows:
        buf.write(
            ",".join(
                [
                    r.experiment,
                    r.quantizer,
                    str(r.n),
                    str(r.bits),
                    _fmt(r.median),
                    _fmt(r.quantile25),
                    _fmt(r.quantile75),
                    _fmt(r.success_frac),
                    str(r.failures),
                    str(r.seed),
                ]
            )
            + "\n"
        )
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(buf.getvalue())


def read_results(path: str) -> ResultTable:
    """Read back a result CSV written by :func:`emit_results`."""
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or ",".join(header) != RESULT_HEADER:
            raise ConfigError(f"unexpected result header in {path}")
        for rec in reader:
            rows.append(
                ResultRow(
                    experiment=rec[0],
                    quantizer=rec[1],
                    n=int(rec[2]),
                    bits=int(rec[3]),
                    median=float(rec[4]),
                    quantile25=float(rec[5]),
                    quantile75=float(rec[6]),
                    success_frac=float(rec[7]) if rec[7] else None,
                    failures=int(rec[8]),
                    seed=int(rec[9]),
                )
            )
    return ResultTable(rows=rows)


def write_metadata(table: ResultTable, path: str) -> None:
    """JSON sidecar: config echo, version, deviations, timestamp, extras."""
    meta = dict(table.metadata)
    meta.setdefault("version", __version__)
    meta["written_at"] = time.strftime("%Y-%m-%dT%H:%M:%S", time.gmtime())
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")


# ---------------------------------------------------------------------------
# configuration files

_INT_KEYS = {"p", "s", "trials", "seed", "workers"}
_FLOAT_KEYS = {"noise_nu", "lam", "success_threshold", "success_factor", "zeta_scale"}
_INT_LIST_KEYS = {"sample_grid", "bit_grid"}
_FLOAT_LIST_KEYS = {"betas", "epsilons"}
_STR_LIST_KEYS = {"quantizers"}
_STR_KEYS = {"experiment", "field", "noise_kind"}


def parse_config_text(text: str) -> dict:
    """Parse flat ``key = value`` lines into typed config fields."""
    out: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {stripped!r}")
        key, _, value = stripped.partition("=")
        key, value = key.strip(), value.strip()
        try:
            if key in _INT_KEYS:
                out[key] = int(value)
            elif key in _FLOAT_KEYS:
                out[key] = float(value)
            elif key in _INT_LIST_KEYS:
                out[key] = tuple(int(v) for v in value.split(",") if v.strip())
            elif key in _FLOAT_LIST_KEYS:
                out[key] = tuple(float(v) for v in value.split(",") if v.strip())
            elif key in _STR_LIST_KEYS:
                out[key] = tuple(v.strip() for v in value.split(",") if v.strip())
            elif key in _STR_KEYS:
                out[key] = value
            else:
                raise ConfigError(f"line {lineno}: unknown config key {key!r}")
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {exc}") from exc
    return out


def load_config(path: str, base: ExperimentConfig | None = None) -> ExperimentConfig:
    """Build a config from a file, overriding a preset when one is given."""
    with open(path, "r", encoding="utf-8") as fh:
        overrides = parse_config_text(fh.read())
    if base is None:
        name = overrides.get("experiment")
        if name is None:
            raise ConfigError("config file must set 'experiment' when no preset is given")
        if name in ("custom",):
            raise ConfigError("custom configs must still name one of the known experiments")
        base = preset(name)
    return dataclasses.replace(base, **overrides)


def config_to_text(cfg: ExperimentConfig) -> str:
    """Render a config as the flat key/value format load_config reads."""
    lines = []
    for f in dataclasses.fields(cfg):
        value = getattr(cfg, f.name)
        if isinstance(value, tuple):
            value = ",".join(_fmt(v) if isinstance(v, float) else str(v) for v in value)
        elif isinstance(value, float):
            value = _fmt(value)
        lines.append(f"{f.name} = {value}")
    return "\n".join(lines) + "\n"
