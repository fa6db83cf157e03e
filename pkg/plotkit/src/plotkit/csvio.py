"""Reader for sweep CSV files: '#' key=value metadata, six-field rows.

Deliberately independent of the package that writes these files; this
component consumes files, never code, so any schema drift surfaces here
as a parse error carrying the offending line number.
"""

from __future__ import annotations

from dataclasses import dataclass

EXPECTED_HEADER = "rho,trials,successes,success_rate,ci_low,ci_high"


class SchemaError(ValueError):
    """A sweep CSV that does not match the expected schema."""

    def __init__(self, path, lineno, message):
        self.path = str(path)
        self.lineno = lineno
        where = f"{path}:{lineno}" if lineno is not None else str(path)
        super().__init__(f"{where}: {message}")


@dataclass(frozen=True)
class SweepRow:
    rho: float
    trials: int
    successes: int
    success_rate: float
    ci_low: float
    ci_high: float


@dataclass(frozen=True)
class SweepTable:
    path: str
    rows: tuple
    metadata: dict


def read_sweep_csv(path) -> SweepTable:
    metadata: dict[str, str] = {}
    rows: list[SweepRow] = []
    header_seen = False
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    key, _, value = body.partition("=")
                    metadata[key.strip()] = value.strip()
                continue
            if not header_seen:
                if line != EXPECTED_HEADER:
                    raise SchemaError(path, lineno, f"expected header {EXPECTED_HEADER!r}")
                header_seen = True
                continue
            fields = line.split(",")
            if len(fields) != 6:
                raise SchemaError(path, lineno, "expected 6 fields")
            try:
                row = SweepRow(
                    rho=float(fields[0]),
                    trials=int(fields[1]),
                    successes=int(fields[2]),
                    success_rate=float(fields[3]),
                    ci_low=float(fields[4]),
                    ci_high=float(fields[5]),
                )
            except ValueError:
                raise SchemaError(path, lineno, "malformed numeric field") from None
            if row.trials < 1 or not 0 <= row.successes <= row.trials:
                raise SchemaError(path, lineno, "successes must lie in [0, trials]")
            rows.append(row)
    if not header_seen:
        raise SchemaError(path, None, f"missing header line {EXPECTED_HEADER!r}")
    return SweepTable(path=str(path), rows=tuple(rows), metadata=metadata)


def metadata_float(table: SweepTable, key: str):
    """A float metadata value, or None when the key is absent."""
    raw = table.metadata.get(key)
    if raw is None:
        return None
    try:
        return float(raw)
    except ValueError:
        raise ValueError(f"{table.path}: metadata {key}={raw!r} is not a number") from None


def metadata_float_list(table: SweepTable, key: str):
    """A comma-separated float list from metadata, or None when absent."""
    raw = table.metadata.get(key)
    if raw is None:
        return None
    try:
        return tuple(float(x) for x in raw.split(","))
    except ValueError:
        raise ValueError(f"{table.path}: metadata {key}={raw!r} is not a number list") from None
