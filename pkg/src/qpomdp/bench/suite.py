"""Benchmark specifications, the generator dispatcher and the suite harness."""
import csv
import io
import time
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence

from ..model import Pomdp, ResourceLimitError
from ..objective import ObjectiveSpec
from . import classic, navigation, rocksample

FAMILIES = ("shuttle", "cheese", "grid", "rocksample", "hallway", "maze")

# objective kind -> (regions, avoid) over the area letters A-D
NAV_OBJECTIVES = {
    "liveness": ((("goal", ("D",)),), ()),
    "sequencing": ((("first", ("A",)), ("second", ("B",)), ("third", ("D",))), ("C",)),
    "coverage": ((("a", ("A",)), ("b", ("B",)), ("c", ("C",))), ()),
    "recurrence": ((("a", ("A",)), ("c", ("C",))), ()),
    "recurrence_avoid": ((("a", ("A",)), ("d", ("D",))), ("B", "C")),
}


# The published sizes are reproduced when the automaton reads the label of
# the state being left (exactly for every maze row).
TABLE_READS = "left"


@dataclass(frozen=True)
class BenchSpec:
    family: str
    variant: str = ""
    objective: Optional[str] = None
    expected_states: Optional[int] = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.family in ("hallway", "maze"):
            if self.objective not in NAV_OBJECTIVES:
                raise ValueError(f"{self.family} needs an objective from {sorted(NAV_OBJECTIVES)}")
        elif self.objective is not None:
            raise ValueError(f"{self.family} has a fixed priority objective")
        _model(self)  # validates the variant without keeping the model

    @property
    def name(self) -> str:
        parts = [self.family, self.variant] + ([self.objective] if self.objective else [])
        return "/".join(p for p in parts if p)


def _model(spec: BenchSpec) -> Pomdp:
    f, v = spec.family, spec.variant
    try:
        if f == "shuttle":
            return classic.shuttle(v)
        if f == "cheese":
            size, variant = v.split("-")
            return classic.cheese(size, variant)
        if f == "grid":
            n = int(v.split("x")[0])
            if not 3 <= n <= 12:
                raise ValueError
            return classic.grid(n)
        if f == "rocksample":
            k, c = v.split("-c")
            k = int(k.removeprefix("k"))
            c = int(c)
            if c < 1:
                raise ValueError
            return rocksample.rocksample(k, c)
        if f == "hallway":
            return navigation.hallway(int(v))
        return navigation.maze(v)
    except (KeyError, ValueError, IndexError):
        raise ValueError(f"bad variant {v!r} for family {f}") from None


def generate(spec: BenchSpec):
    """Model, its labeling (or None) and the objective (None = priorities as given)."""
    model = _model(spec)
    objective = None
    if spec.objective is not None:
        regions, avoid = NAV_OBJECTIVES[spec.objective]
        objective = ObjectiveSpec(spec.objective, regions, avoid)
    return model, model.labels, objective


def table_specs() -> List[BenchSpec]:
    """Every row of the published results table, with its stated model size."""
    specs = [BenchSpec("shuttle", v, expected_states=n)
             for v, n in (("small", 11), ("medium", 13), ("large", 15))]
    for size, n in (("small", 11), ("large", 23)):
        specs += [BenchSpec("cheese", f"{size}-{v}", expected_states=n)
                  for v in ("easy", "medium", "hard")]
    specs += [BenchSpec("grid", f"{n}x{n}", expected_states=2 * n * n + 1) for n in range(4, 9)]
    specs += [BenchSpec("rocksample", f"k2-c{c}", expected_states=n) for c, n in ((3, 1025), (4, 1281))]
    specs += [BenchSpec("rocksample", f"k3-c{c}", expected_states=n) for c, n in ((3, 3137), (4, 3921))]
    published = {
        "1": (120, 276, 453, 185, 180), "2": (184, 436, 709, 281, 276),
        "A": (169, 371, 573, 267, 263), "B": (154, 380, 641, 254, 258),
        "C": (110, 267, 439, 200, 116),
    }
    for variant, sizes in published.items():
        family = "hallway" if variant in "12" else "maze"
        for kind, n in zip(NAV_OBJECTIVES, sizes):
            specs.append(BenchSpec(family, variant, kind, expected_states=n))
    return specs


# "after the reduction" column of the published table
PUBLISHED_REDUCED = {
    "rocksample/k2-c3": 1025, "rocksample/k2-c4": 1281,
    "rocksample/k3-c3": 3137, "rocksample/k3-c4": 3921,
}


@dataclass
class BenchResult:
    spec: BenchSpec
    time_ms: float
    states: int
    states_after_reduction: int
    reduction: str
    verdict: str
    verified: bool
    product_states: int = 0
    max_support: int = 0


def run_one(spec: BenchSpec, cap: Optional[int] = None) -> BenchResult:
    from ..solve import solve
    model, _, objective = generate(spec)
    t0 = time.perf_counter()
    try:
        result = solve(model, objective, cap, reads=TABLE_READS)
    except ResourceLimitError:
        return BenchResult(spec, (time.perf_counter() - t0) * 1000, 0, 0, "-", "ResourceLimit", False)
    ms = (time.perf_counter() - t0) * 1000
    verified = result.certificate is not None and result.certificate.verdict
    return BenchResult(spec, ms, result.model.n_states, result.analyzed.n_states, result.reduction,
                       result.verdict, verified, result.product.n_states(),
                       result.product.max_support())


def select(selection: Optional[Sequence[str]] = None) -> List[BenchSpec]:
    """Table rows whose name starts with one of ``selection`` (all if None)."""
    specs = table_specs()
    if selection is None:
        return specs
    return [s for s in specs if any(s.name.startswith(p) for p in selection)]


def run_suite(selection: Optional[Sequence[str]] = None, budget: Optional[float] = None,
              cap: Optional[int] = None) -> List[BenchResult]:
    """Run the selected rows in table order; stop starting new rows once
    ``budget`` seconds have elapsed."""
    results = []
    t0 = time.perf_counter()
    for spec in select(selection):
        if budget is not None and time.perf_counter() - t0 > budget:
            break
        results.append(run_one(spec, cap))
    return results


COLUMNS = ("family", "variant", "time_ms", "states", "states_after_reduction", "verdict", "verified")


def _row(r: BenchResult):
    variant = r.spec.variant + (f"/{r.spec.objective}" if r.spec.objective else "")
    return (r.spec.family, variant, f"{r.time_ms:.1f}", r.states, r.states_after_reduction,
            r.verdict, "yes" if r.verified else "no")


def to_csv(results: Iterable[BenchResult]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(COLUMNS)
    for r in results:
        writer.writerow(_row(r))
    return out.getvalue()


def to_text(results: Iterable[BenchResult]) -> str:
    rows = [COLUMNS] + [tuple(str(x) for x in _row(r)) for r in results]
    widths = [max(len(row[i]) for row in rows) for i in range(len(COLUMNS))]
    return "\n".join("  ".join(x.ljust(w) for x, w in zip(row, widths)).rstrip() for row in rows) + "\n"
