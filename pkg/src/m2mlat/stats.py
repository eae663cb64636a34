"""Order-statistics summaries and box-plot reductions for latency samples.

Quantiles use linear interpolation between order statistics (rank
``h = (n - 1) * p``), and the standard deviation is the population form
(divide by n). Both are pinned so that reports are bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigInvalid, EmptySample, TooFewSamples


@dataclass(frozen=True)
class SummaryStats:
    """Summary block used by every report surface.

    ``frac_over`` maps a threshold in ns to the fraction of samples
    strictly greater than it.
    """

    n: int
    min_ns: int
    max_ns: int
    mean_ns: float
    std_ns: float
    median_ns: float
    q1_ns: float
    q3_ns: float
    iqr_ns: float
    frac_over: dict[int, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.n < 1:
            raise ConfigInvalid("stats require n >= 1")
        if not (
            self.min_ns <= self.q1_ns <= self.median_ns <= self.q3_ns <= self.max_ns
        ):
            raise ConfigInvalid("quantiles out of order")
        if self.std_ns < 0:
            raise ConfigInvalid("std must be non-negative")
        for t, f in self.frac_over.items():
            if not 0.0 <= f <= 1.0:
                raise ConfigInvalid(f"frac_over[{t}] out of [0, 1]: {f}")


def summarize(
    samples: Iterable[int], thresholds: Sequence[int] = ()
) -> SummaryStats:
    """Summarize integer-ns samples; permutation invariant bit-exactly.

    The input is sorted before any floating-point reduction so that
    reorderings of the same sample set cannot change summation order.
    """
    arr = np.sort(np.asarray(list(samples), dtype=np.int64))
    if arr.size == 0:
        raise EmptySample("summarize requires at least one sample")
    q1, median, q3 = (
        float(q) for q in np.quantile(arr, [0.25, 0.5, 0.75], method="linear")
    )
    n = int(arr.size)
    return SummaryStats(
        n=n,
        min_ns=int(arr[0]),
        max_ns=int(arr[-1]),
        mean_ns=float(arr.mean()),
        std_ns=float(arr.std(ddof=0)),
        median_ns=median,
        q1_ns=q1,
        q3_ns=q3,
        iqr_ns=q3 - q1,
        frac_over={
            int(t): float(np.count_nonzero(arr > int(t)) / n) for t in thresholds
        },
    )


@dataclass(frozen=True)
class BoxplotData:
    """Tukey box-plot reduction: whiskers reach the furthest sample within
    1.5 * IQR of the quartiles; points beyond are outliers."""

    q1_ns: float
    median_ns: float
    q3_ns: float
    whisker_lo_ns: int
    whisker_hi_ns: int
    outliers_ns: tuple[int, ...]


def boxplot_data(samples: Iterable[int]) -> BoxplotData:
    arr = np.asarray(list(samples), dtype=np.int64)
    if arr.size < 5:
        raise TooFewSamples(f"box plot requires n >= 5, got {arr.size}")
    q1, median, q3 = (
        float(q) for q in np.quantile(arr, [0.25, 0.5, 0.75], method="linear")
    )
    iqr = q3 - q1
    lo_fence = q1 - 1.5 * iqr
    hi_fence = q3 + 1.5 * iqr
    inside = arr[(arr >= lo_fence) & (arr <= hi_fence)]
    outliers = arr[(arr < lo_fence) | (arr > hi_fence)]
    return BoxplotData(
        q1_ns=q1,
        median_ns=median,
        q3_ns=q3,
        whisker_lo_ns=int(inside.min()),
        whisker_hi_ns=int(inside.max()),
        outliers_ns=tuple(int(x) for x in np.sort(outliers)),
    )


def stats_csv(stats: SummaryStats) -> str:
    """Machine-readable one-row CSV rendering of a stats block."""
    cols = [
        "n",
        "min_ns",
        "max_ns",
        "mean_ns",
        "std_ns",
        "median_ns",
        "q1_ns",
        "q3_ns",
        "iqr_ns",
    ]
    row = [
        str(stats.n),
        str(stats.min_ns),
        str(stats.max_ns),
        repr(stats.mean_ns),
        repr(stats.std_ns),
        repr(stats.median_ns),
        repr(stats.q1_ns),
        repr(stats.q3_ns),
        repr(stats.iqr_ns),
    ]
    for t in sorted(stats.frac_over):
        cols.append(f"frac_over_{t}ns")
        row.append(repr(stats.frac_over[t]))
    return ",".join(cols) + "\n" + ",".join(row) + "\n"


def boxplot_csv(bp: BoxplotData) -> str:
    header = "q1_ns,median_ns,q3_ns,whisker_lo_ns,whisker_hi_ns,outliers_ns\n"
    outliers = ";".join(str(x) for x in bp.outliers_ns)
    row = (
        f"{bp.q1_ns!r},{bp.median_ns!r},{bp.q3_ns!r},"
        f"{bp.whisker_lo_ns},{bp.whisker_hi_ns},{outliers}\n"
    )
    return header + row
