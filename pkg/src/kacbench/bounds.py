"""Query-complexity exponents for t-round KAC as exact rationals.

Every bound is 2^(e n) up to polynomial factors, and ``e`` is stored as a
``Fraction``.  The five formula families are rational functions of t,
kept as coefficient lists so values and t -> infinity limits are exact.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from fractions import Fraction

SETTINGS = ("Classical", "Q1", "Q2")
KINDS = ("upper", "lower", "absent")
COLUMNS = ("t", "setting", "kind", "exponent_num", "exponent_den", "source")
FORMATS = ("csv", "json", "gnuplot")


@dataclass(frozen=True)
class BoundRecord:
    t: int
    setting: str
    kind: str
    exponent: Fraction | None
    source: str

    def __post_init__(self):
        if self.t < 1:
            raise ValueError("t must be >= 1")
        if self.kind not in KINDS:
            raise ValueError(f"unknown bound kind {self.kind!r}")
        if self.kind == "absent":
            if self.exponent is not None:
                raise ValueError("absent bounds carry no exponent")
        elif self.exponent is None or not 0 <= self.exponent <= 1:
            raise ValueError(f"exponent {self.exponent} outside [0, 1]")

    def row(self) -> dict:
        e = self.exponent
        return {
            "t": self.t,
            "setting": self.setting,
            "kind": self.kind,
            "exponent_num": None if e is None else e.numerator,
            "exponent_den": None if e is None else e.denominator,
            "source": self.source,
        }

    @classmethod
    def from_row(cls, row: dict) -> "BoundRecord":
        num, den = row["exponent_num"], row["exponent_den"]
        e = None if num in (None, "") else Fraction(int(num), int(den))
        return cls(int(row["t"]), row["setting"], row["kind"], e, row["source"])


@dataclass(frozen=True)
class Family:
    """Exponent num(t)/den(t) with polynomial coefficients, constant term first."""

    setting: str
    kind: str
    num: tuple[int, ...]
    den: tuple[int, ...]
    source: str

    @staticmethod
    def _poly(coeffs, t) -> Fraction:
        return sum((Fraction(c) * Fraction(t) ** i for i, c in enumerate(coeffs)), Fraction(0))

    def at(self, t: int) -> Fraction:
        return self._poly(self.num, t) / self._poly(self.den, t)

    def limit(self) -> Fraction:
        """Value as t -> infinity (families have equal degrees)."""
        if len(self.num) != len(self.den):
            raise ValueError("limit needs equal numerator and denominator degree")
        return Fraction(self.num[-1], self.den[-1])


FAMILIES = (
    Family("Classical", "upper", (0, 1), (1, 1), "classical candidate counting [bogdanov2012key]"),
    Family("Classical", "lower", (0, 1), (1, 1), "[chen2014tight]"),
    Family("Q1", "upper", (0, 1, 1), (2, 2, 1), "quantum-walk key recovery"),
    Family("Q1", "lower", (0, 1), (1, 2), "hybrid argument, non-adaptive Q1"),
    Family("Q2", "lower", (-1, 1), (0, 2), "oracle lifting of the Q1 bound"),
)

# Literature cells: concrete entries that are not instances of a formula family.
LITERATURE = (
    BoundRecord(1, "Q1", "upper", Fraction(1, 3), "[kuwakado2012security, bonnetain2019quantum]"),
    BoundRecord(1, "Q2", "upper", Fraction(0), "Simon's algorithm, O(n) [kuwakado2012security]"),
    BoundRecord(1, "Q2", "absent", None, "no lower bound listed"),
    BoundRecord(2, "Q2", "upper", Fraction(1, 2), "O(n 2^(n/2)) [cai2022quantum]"),
    BoundRecord(4, "Q2 (2 keys)", "upper", Fraction(1, 2), "O(n 2^(n/2)) [anand2024quantum]"),
    BoundRecord(4, "Q2 (2 keys)", "absent", None, "no lower bound listed"),
)


def family(setting: str, kind: str) -> Family:
    for f in FAMILIES:
        if f.setting == setting and f.kind == kind:
            return f
    raise KeyError(f"no formula family for {setting} {kind}")


def exponent_table(t_max: int, include_literature: bool = False) -> list[BoundRecord]:
    """Formula records for t = 1..t_max, optionally with literature cells."""
    if t_max < 1:
        raise ValueError("t_max must be >= 1")
    records = [BoundRecord(t, f.setting, f.kind, f.at(t), f.source)
               for t in range(1, t_max + 1) for f in FAMILIES]
    if include_literature:
        records += [r for r in LITERATURE if r.t <= t_max]
        records.sort(key=lambda r: r.t)
    return records


def emit_report(records, fmt: str = "csv") -> str:
    """Serialize records; column order and row order are stable."""
    if not records:
        raise ValueError("no records to emit")
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=COLUMNS, lineterminator="\n")
        w.writeheader()
        for r in records:
            w.writerow(r.row())
        return buf.getvalue()
    if fmt == "json":
        return json.dumps([r.row() for r in records], sort_keys=True, indent=2) + "\n"
    if fmt == "gnuplot":
        blocks = {}
        for r in records:
            if r.exponent is not None:
                blocks.setdefault((r.setting, r.kind), []).append(r)
        out = []
        for (setting, kind), rows in blocks.items():
            out.append(f"# {setting} {kind}")
            out.extend(f"{r.t} {float(r.exponent):.10g}" for r in sorted(rows, key=lambda r: r.t))
            out.append("\n")
        return "\n".join(out)
    raise ValueError(f"unknown report format {fmt!r}; choose from {', '.join(FORMATS)}")


def parse_report(text: str, fmt: str = "csv") -> list[BoundRecord]:
    if fmt == "csv":
        return [BoundRecord.from_row(r) for r in csv.DictReader(io.StringIO(text))]
    if fmt == "json":
        return [BoundRecord.from_row(r) for r in json.loads(text)]
    raise ValueError(f"cannot parse format {fmt!r}")
