"""Regenerate the two published bound tables and diff them against the
bundled transcriptions.

``n12``: twelve heterogeneous marginals, six closed-form bounds plus the LP
optimum for every ``k``. ``n11``: eleven identical marginals, the tight
bound, Chebyshev and SSS for seven values of ``p``. Each table also marks
the cells where a closed form is known to be tight; those marks are
compared as sets.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import closed
from .core import identical, validate_marginals
from .formats import load_dataset
from .lp import solve_exact

N12_ROWS = ("chebyshev", "ordered_chebyshev", "sss", "ordered_sss", "bp", "ordered_bp")
N11_ROWS = ("tight", "chebyshev", "sss")
TABLE_IDS = ("n12", "n11")


def half_unit(printed, default_digits: int) -> float:
    """Half a unit in the last printed decimal place."""
    text = printed if isinstance(printed, str) else repr(printed)
    digits = len(text.split(".")[1]) if "." in text else default_digits
    return 0.5 * 10.0 ** (-digits)


@dataclass(frozen=True)
class Cell:
    row: str
    key: str
    k: int
    computed: float
    printed: str
    tol: float

    @property
    def error(self) -> float:
        return abs(self.computed - float(self.printed))

    @property
    def ok(self) -> bool:
        return self.error <= self.tol


@dataclass(frozen=True)
class MarkDiff:
    """Tightness marks of one row: as printed versus as recomputed."""

    row: str
    key: str
    expected: tuple
    computed: tuple

    @property
    def ok(self) -> bool:
        return self.expected == self.computed


@dataclass
class TableDiff:
    name: str
    cells: list = field(default_factory=list)
    marks: list = field(default_factory=list)

    @property
    def mismatched_cells(self) -> list:
        return [c for c in self.cells if not c.ok]

    @property
    def mismatched_marks(self) -> list:
        return [m for m in self.marks if not m.ok]

    @property
    def ok(self) -> bool:
        return not self.mismatched_cells and not self.mismatched_marks

    def report_lines(self, digits: int = 6) -> list[str]:
        lines = [f"table {self.name}: {len(self.cells)} cells, {len(self.mismatched_cells)} mismatched; "
                 f"{len(self.marks)} mark rows, {len(self.mismatched_marks)} mismatched"]
        for c in self.mismatched_cells:
            where = f"{c.row}[p={c.key}]" if c.key else c.row
            lines.append(f"  cell {where} k={c.k}: computed {c.computed:.{digits}f}, printed {c.printed}, "
                         f"|diff| {c.error:.2e} > {c.tol:.1e}")
        for m in self.mismatched_marks:
            where = f"{m.row}[p={m.key}]" if m.key else m.row
            lines.append(f"  marks {where}: printed {list(m.expected)}, computed {list(m.computed)}")
        return lines


def regenerate_n12(with_lp: bool = True) -> dict:
    """Bound rows for the bundled twelve-marginal instance, keyed by row name.

    The ``tight`` row comes from the full 4096-column LP and is only
    present when ``with_lp`` is set.
    """
    data = load_dataset("n12")
    p = validate_marginals(data["p"])
    ks = data["k"]
    rows = {name: [float(closed.UPPER_METHODS[name](p, k).value) for k in ks] for name in N12_ROWS}
    if with_lp:
        rows["tight"] = [solve_exact(p, None, k, "max").value for k in ks]
    return rows


def n12_marks(rows: dict, tol: float = 5e-5) -> dict:
    """Cells where a bound row equals the LP optimum and the optimum is below 1."""
    ks = load_dataset("n12")["k"]
    tight = rows["tight"]
    marks = {}
    for name in N12_ROWS:
        hit = [k for k, v, t in zip(ks, rows[name], tight) if t < 1 - tol and abs(v - t) <= tol]
        if hit:
            marks[name] = hit
    return marks


def regenerate_n11() -> dict:
    """``{p_key: {row: [values for k = 1..n]}}`` for the identical table."""
    data = load_dataset("n11")
    n = data["n"]
    out = {}
    for key in data["cells"]:
        pv = identical(n, float(key))
        out[key] = {
            "tight": [float(closed.identical_tight(n, k, float(key)).value) for k in data["k"]],
            "chebyshev": [float(closed.chebyshev(pv, k, 0).value) for k in data["k"]],
            "sss": [float(closed.sss(pv, k).value) for k in data["k"]],
        }
    return out


def n11_marks() -> dict:
    data = load_dataset("n11")
    n = data["n"]
    out = {}
    for key in data["cells"]:
        flags = [closed.tight_instance_check(n, k, float(key)) for k in data["k"]]
        out[key] = {
            "chebyshev": [k for k, f in zip(data["k"], flags) if f.chebyshev],
            "sss": [k for k, f in zip(data["k"], flags) if f.sss],
        }
    return out


def diff_table(name: str, tolerance: float | None = None, with_lp: bool = True) -> TableDiff:
    """Compare a regenerated table with its transcription.

    ``tolerance=None`` allows half a unit in the last printed place of each
    cell; a number replaces that with one absolute tolerance.
    """
    if name not in TABLE_IDS:
        raise ValueError(f"unknown table {name!r}; choose from {TABLE_IDS}")
    data = load_dataset(name)
    diff = TableDiff(name)
    if name == "n12":
        rows = regenerate_n12(with_lp)
        digits = data["digits"]
        for row, values in rows.items():
            for k, v, printed in zip(data["k"], values, data["rows"][row]):
                tol = tolerance if tolerance is not None else 0.5 * 10.0 ** (-digits)
                diff.cells.append(Cell(row, "", k, v, str(printed), tol))
        if with_lp:
            got = n12_marks(rows)
            for row in N12_ROWS:
                diff.marks.append(MarkDiff(row, "", tuple(data["underlined"].get(row, [])), tuple(got.get(row, []))))
        return diff
    rows = regenerate_n11()
    for key, by_row in rows.items():
        for row in N11_ROWS:
            for k, v, printed in zip(data["k"], by_row[row], data["cells"][key][row]):
                tol = tolerance if tolerance is not None else half_unit(printed, 5)
                diff.cells.append(Cell(row, key, k, v, printed, tol))
    got = n11_marks()
    for key, expected in data["underlined"].items():
        for row in ("chebyshev", "sss"):
            diff.marks.append(MarkDiff(row, key, tuple(expected.get(row, [])), tuple(got[key][row])))
    return diff
