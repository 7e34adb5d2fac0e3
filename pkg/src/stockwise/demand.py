"""Demand distributions for single products and joint discrete demand.

Continuous families: :class:`Uniform`, :class:`Exponential`,
:class:`TruncatedNormal`, :class:`PiecewiseEmpirical`.
Discrete families: :class:`Poisson`, :class:`Geometric`, :class:`TableDemand`.

All support is nonnegative and validated at construction. Every object is
immutable, so instances may be shared freely between threads.
"""

from __future__ import annotations

import abc
import csv
import math
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np
from scipy import special, stats

from .exceptions import DomainError, EmptySample, NegativeDemand, UnboundedQuantile

# Tail mass beyond which infinite discrete families are considered exhausted.
TAIL_MASS = 1e-12
# Tolerance on total probability for table and joint pmfs.
MASS_TOL = 1e-12


def _as_output(values, scalar):
    if scalar:
        return float(values)
    return values


def _check_level(q: float) -> None:
    if not (0.0 < q <= 1.0) or math.isnan(q):
        raise DomainError(f"quantile level must lie in (0, 1], got {q!r}")


class ContinuousDemand(abc.ABC):
    """A demand distribution with a density on ``[0, inf)``."""

    is_discrete = False

    @property
    @abc.abstractmethod
    def support_max(self) -> float:
        """Upper end of the support (``inf`` when unbounded)."""

    @abc.abstractmethod
    def _pdf(self, x: np.ndarray) -> np.ndarray: ...

    @abc.abstractmethod
    def _cdf(self, x: np.ndarray) -> np.ndarray: ...

    @abc.abstractmethod
    def _ppf(self, q: np.ndarray) -> np.ndarray:
        """Generalized inverse of the cdf for levels in (0, 1)."""

    @abc.abstractmethod
    def _cdf_integral(self, n: np.ndarray) -> np.ndarray:
        """Closed form of the integral of the cdf over ``[0, n]``."""

    @property
    def support_min(self) -> float:
        return float(self._ppf(np.array([0.0]))[0])

    @property
    def bounded(self) -> bool:
        return math.isfinite(self.support_max)

    def pdf(self, x):
        arr = np.asarray(x, dtype=float)
        out = np.where(arr < 0, 0.0, self._pdf(np.maximum(arr, 0.0)))
        return _as_output(out, arr.ndim == 0)

    def cdf(self, x):
        arr = np.asarray(x, dtype=float)
        out = np.where(arr < 0, 0.0, self._cdf(np.maximum(arr, 0.0)))
        return _as_output(np.clip(out, 0.0, 1.0), arr.ndim == 0)

    def cdf_integral(self, n):
        """Return the integral of the cdf from 0 to ``n`` (vectorised).

        Equivalent to ``E[(n - D)^+]``, the expected leftover stock when
        ``n`` units are ordered.
        """
        arr = np.asarray(n, dtype=float)
        out = np.where(arr <= 0, 0.0, self._cdf_integral(np.maximum(arr, 0.0)))
        return _as_output(out, arr.ndim == 0)

    def quantile(self, q: float) -> float:
        _check_level(q)
        if q == 1.0:
            if not self.bounded:
                raise UnboundedQuantile(
                    f"{self!r} has unbounded support; its 1-quantile is infinite"
                )
            # smallest x with F(x) = 1 (trailing flat segments excluded)
            return float(self._ppf(np.array([1.0]))[0])
        return float(self._ppf(np.array([q]))[0])

    def ppf(self, u: np.ndarray) -> np.ndarray:
        """Vectorised quantile for levels in [0, 1); used for sampling."""
        return self._ppf(np.asarray(u, dtype=float))

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return self.ppf(rng.random(size))


@dataclass(frozen=True)
class Uniform(ContinuousDemand):
    lo: float
    hi: float

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise DomainError("uniform bounds must be finite")
        if self.lo < 0:
            raise DomainError(f"uniform lower bound must be >= 0, got {self.lo}")
        if not self.hi > self.lo:
            raise DomainError(f"uniform requires hi > lo, got lo={self.lo}, hi={self.hi}")

    @property
    def support_max(self) -> float:
        return float(self.hi)

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def _pdf(self, x):
        return np.where((x >= self.lo) & (x <= self.hi), 1.0 / self.width, 0.0)

    def _cdf(self, x):
        return np.clip((x - self.lo) / self.width, 0.0, 1.0)

    def _ppf(self, q):
        return self.lo + q * self.width

    def _cdf_integral(self, n):
        inside = np.clip(n, self.lo, self.hi) - self.lo
        return inside**2 / (2.0 * self.width) + np.maximum(n - self.hi, 0.0)


@dataclass(frozen=True)
class Exponential(ContinuousDemand):
    rate: float

    def __post_init__(self):
        if not (self.rate > 0 and math.isfinite(self.rate)):
            raise DomainError(f"exponential rate must be positive, got {self.rate}")

    @property
    def support_max(self) -> float:
        return math.inf

    def _pdf(self, x):
        return self.rate * np.exp(-self.rate * x)

    def _cdf(self, x):
        return -np.expm1(-self.rate * x)

    def _ppf(self, q):
        return -np.log1p(-q) / self.rate

    def _cdf_integral(self, n):
        return n + np.expm1(-self.rate * n) / self.rate


@dataclass(frozen=True)
class TruncatedNormal(ContinuousDemand):
    """Normal(mean, stddev) conditioned on ``demand >= lo``."""

    mean: float
    stddev: float
    lo: float = 0.0

    def __post_init__(self):
        if not (self.stddev > 0 and math.isfinite(self.stddev)):
            raise DomainError(f"stddev must be positive, got {self.stddev}")
        if not math.isfinite(self.mean):
            raise DomainError("mean must be finite")
        if not (self.lo >= 0 and math.isfinite(self.lo)):
            raise DomainError(f"truncation point must be >= 0, got {self.lo}")
        if self._tail <= 0.0:
            raise DomainError("truncation point too far in the upper tail")

    @property
    def support_max(self) -> float:
        return math.inf

    @property
    def _alpha(self) -> float:
        return (self.lo - self.mean) / self.stddev

    @property
    def _tail(self) -> float:
        # P(Z >= alpha), the renormalising constant
        return float(special.ndtr(-self._alpha))

    def _pdf(self, x):
        z = (x - self.mean) / self.stddev
        dens = np.exp(-0.5 * z * z) / math.sqrt(2 * math.pi) / (self.stddev * self._tail)
        return np.where(x >= self.lo, dens, 0.0)

    def _cdf(self, x):
        a, tail = self._alpha, self._tail
        z = (np.maximum(x, self.lo) - self.mean) / self.stddev
        left = (special.ndtr(z) - special.ndtr(a)) / tail
        right = (tail - special.ndtr(-z)) / tail
        return np.where(z < 0, left, right)

    def _ppf(self, q):
        a, tail = self._alpha, self._tail
        q = np.asarray(q, dtype=float)
        lower = special.ndtr(a) + q * tail
        upper = tail * (1.0 - q)
        with np.errstate(divide="ignore"):
            z = np.where(lower < 0.5, special.ndtri(lower), -special.ndtri(upper))
        return np.maximum(self.mean + self.stddev * z, self.lo)

    def _cdf_integral(self, n):
        a, tail = self._alpha, self._tail
        z = (np.maximum(n, self.lo) - self.mean) / self.stddev

        def antiderivative(t):
            # integral of Phi(t) dt is t Phi(t) + phi(t)
            return t * special.ndtr(t) + np.exp(-0.5 * t * t) / math.sqrt(2 * math.pi)

        span = self.stddev * (antiderivative(z) - antiderivative(a))
        return (span - (np.maximum(n, self.lo) - self.lo) * special.ndtr(a)) / tail


@dataclass(frozen=True)
class PiecewiseEmpirical(ContinuousDemand):
    """Piecewise-constant density: ``weights[i]`` of the mass spread evenly
    over ``[breakpoints[i], breakpoints[i + 1]]``. Weights are normalised."""

    breakpoints: tuple[float, ...]
    weights: tuple[float, ...]
    _cum: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        b = tuple(float(v) for v in self.breakpoints)
        w = tuple(float(v) for v in self.weights)
        object.__setattr__(self, "breakpoints", b)
        if len(b) < 2:
            raise DomainError("need at least two breakpoints")
        if len(w) != len(b) - 1:
            raise DomainError("need exactly one weight per interval")
        if b[0] < 0 or not all(math.isfinite(v) for v in b):
            raise DomainError("breakpoints must be finite and >= 0")
        if any(hi <= lo for lo, hi in zip(b, b[1:])):
            raise DomainError("breakpoints must be strictly increasing")
        if any(v < 0 or not math.isfinite(v) for v in w):
            raise DomainError("weights must be finite and >= 0")
        total = math.fsum(w)
        if total <= 0:
            raise DomainError("weights must not all be zero")
        w = tuple(v / total for v in w)
        object.__setattr__(self, "weights", w)
        cum = np.concatenate([[0.0], np.cumsum(w)])
        cum[-1] = 1.0
        object.__setattr__(self, "_cum", cum)

    @property
    def support_max(self) -> float:
        # last breakpoint carrying mass
        last = max(i for i, v in enumerate(self.weights) if v > 0)
        return self.breakpoints[last + 1]

    def _pdf(self, x):
        b = np.asarray(self.breakpoints)
        dens = np.asarray(self.weights) / np.diff(b)
        idx = np.clip(np.searchsorted(b, x, side="right") - 1, 0, len(dens) - 1)
        return np.where((x >= b[0]) & (x <= b[-1]), dens[idx], 0.0)

    def _cdf(self, x):
        return np.interp(x, self.breakpoints, self._cum)

    def _ppf(self, q):
        b = np.asarray(self.breakpoints)
        cum = self._cum
        q = np.asarray(q, dtype=float)
        # first breakpoint index whose cumulative mass reaches q
        i = np.clip(np.searchsorted(cum, q, side="left"), 1, len(b) - 1)
        lo_mass = cum[i - 1]
        seg_mass = cum[i] - lo_mass
        frac = np.where(seg_mass > 0, (q - lo_mass) / np.where(seg_mass > 0, seg_mass, 1.0), 0.0)
        return b[i - 1] + np.clip(frac, 0.0, 1.0) * (b[i] - b[i - 1])

    def _cdf_integral(self, n):
        b = np.asarray(self.breakpoints)
        cum = self._cum
        # trapezoid areas of the piecewise-linear cdf, accumulated per knot
        knot_area = np.concatenate([[0.0], np.cumsum(0.5 * (cum[1:] + cum[:-1]) * np.diff(b))])
        n = np.asarray(n, dtype=float)
        clipped = np.clip(n, b[0], b[-1])
        i = np.clip(np.searchsorted(b, clipped, side="right") - 1, 0, len(b) - 2)
        f_at = np.interp(clipped, b, cum)
        partial = knot_area[i] + 0.5 * (cum[i] + f_at) * (clipped - b[i])
        return partial + np.maximum(n - b[-1], 0.0)


class DiscreteDemand(abc.ABC):
    """A demand distribution on the nonnegative integers.

    The cdf is the running sum of the pmf, so quantiles, forward differences
    and expected-profit sums all see the same partial sums.
    """

    is_discrete = True

    @property
    @abc.abstractmethod
    def support_max(self) -> float:
        """Largest attainable demand (``inf`` for infinite families)."""

    @property
    @abc.abstractmethod
    def truncation_point(self) -> int:
        """Smallest ``N`` whose tail mass beyond ``N`` is negligible."""

    @abc.abstractmethod
    def pmf_array(self, upto: int) -> np.ndarray:
        """Masses of ``0, 1, ..., upto``."""

    @property
    def bounded(self) -> bool:
        return math.isfinite(self.support_max)

    def pmf(self, k) -> float:
        if k < 0 or k != int(k):
            return 0.0
        return float(self.pmf_array(int(k))[-1])

    def cdf_array(self, upto: int) -> np.ndarray:
        return np.minimum(np.cumsum(self.pmf_array(upto)), 1.0)

    def cdf(self, x) -> float:
        if x < 0:
            return 0.0
        return float(self.cdf_array(int(math.floor(x)))[-1])

    def quantile(self, q: float) -> int:
        _check_level(q)
        if q == 1.0 and not self.bounded:
            raise UnboundedQuantile(
                f"{self!r} has unbounded support; its 1-quantile is infinite"
            )
        upto = self.truncation_point
        while True:
            cdf = self.cdf_array(upto)
            idx = int(np.searchsorted(cdf, q, side="left"))
            if idx < len(cdf):
                return idx
            if self.bounded or cdf[-1] >= 1.0 or self.pmf_array(upto)[-1] == 0.0:
                # total mass is short of q only by rounding: the top of the support
                return int(np.flatnonzero(self.pmf_array(upto) > 0)[-1])
            upto *= 2

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        u = rng.random(size)
        cdf = self.cdf_array(self.truncation_point)
        return np.minimum(np.searchsorted(cdf, u, side="right"), len(cdf) - 1)


@dataclass(frozen=True)
class Poisson(DiscreteDemand):
    lam: float

    def __post_init__(self):
        if not (self.lam > 0 and math.isfinite(self.lam)):
            raise DomainError(f"poisson rate must be positive, got {self.lam}")

    @property
    def support_max(self) -> float:
        return math.inf

    @cached_property
    def truncation_point(self) -> int:
        n = int(stats.poisson.isf(TAIL_MASS, self.lam))
        while special.pdtrc(n, self.lam) > TAIL_MASS:
            n += 1
        return max(n, 1)

    def pmf_array(self, upto: int) -> np.ndarray:
        k = np.arange(upto + 1, dtype=float)
        return np.exp(special.xlogy(k, self.lam) - self.lam - special.gammaln(k + 1))


@dataclass(frozen=True)
class Geometric(DiscreteDemand):
    """Number of failures before the first success: ``P(k) = (1-p)^k p``."""

    p: float

    def __post_init__(self):
        if not (0 < self.p <= 1):
            raise DomainError(f"geometric p must lie in (0, 1], got {self.p}")

    @property
    def support_max(self) -> float:
        return 0.0 if self.p == 1 else math.inf

    @cached_property
    def truncation_point(self) -> int:
        if self.p == 1:
            return 0
        return max(int(math.ceil(math.log(TAIL_MASS) / math.log1p(-self.p))), 1)

    def pmf_array(self, upto: int) -> np.ndarray:
        k = np.arange(upto + 1, dtype=float)
        if self.p == 1:
            return (k == 0).astype(float)
        return self.p * np.exp(k * math.log1p(-self.p))


@dataclass(frozen=True)
class TableDemand(DiscreteDemand):
    """Finite pmf given as ``{demand: probability}``."""

    mass: Mapping[int, float]
    _dense: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.mass:
            raise DomainError("table pmf must have at least one entry")
        clean = {}
        for key, value in self.mass.items():
            k = int(key)
            if k != float(key) or k < 0:
                raise DomainError(f"table support must be nonnegative integers, got {key!r}")
            value = float(value)
            if value < 0 or not math.isfinite(value):
                raise DomainError(f"mass at {k} must be a finite nonnegative number")
            clean[k] = clean.get(k, 0.0) + value
        total = math.fsum(clean.values())
        if abs(total - 1.0) > MASS_TOL:
            raise DomainError(f"table masses sum to {total!r}, not 1")
        object.__setattr__(self, "mass", dict(sorted(clean.items())))
        dense = np.zeros(max(clean) + 1)
        for k, v in clean.items():
            dense[k] = v
        object.__setattr__(self, "_dense", dense)

    def __hash__(self):
        return hash(tuple(self.mass.items()))

    @property
    def support_max(self) -> float:
        return int(np.flatnonzero(self._dense > 0)[-1])

    @property
    def truncation_point(self) -> int:
        return len(self._dense) - 1

    def pmf_array(self, upto: int) -> np.ndarray:
        out = np.zeros(upto + 1)
        m = min(upto + 1, len(self._dense))
        out[:m] = self._dense[:m]
        return out


Demand = ContinuousDemand | DiscreteDemand


@dataclass(frozen=True)
class JointDiscreteDemand:
    """Joint pmf ``mass[i, j] = P(X = i, Y = j)`` on a finite grid."""

    mass: np.ndarray

    def __post_init__(self):
        arr = np.array(self.mass, dtype=float)
        if arr.ndim != 2 or arr.size == 0:
            raise DomainError("joint mass must be a non-empty 2-d array")
        if np.any(arr < 0) or not np.all(np.isfinite(arr)):
            raise DomainError("joint masses must be finite and nonnegative")
        total = math.fsum(arr.ravel())
        if abs(total - 1.0) > MASS_TOL:
            raise DomainError(f"joint masses sum to {total!r}, not 1")
        arr.setflags(write=False)
        object.__setattr__(self, "mass", arr)

    @classmethod
    def from_mapping(cls, mass: Mapping[tuple[int, int], float]) -> JointDiscreteDemand:
        if any(i < 0 or j < 0 for i, j in mass):
            raise DomainError("joint support must be nonnegative")
        shape = (max(i for i, _ in mass) + 1, max(j for _, j in mass) + 1)
        arr = np.zeros(shape)
        for (i, j), p in mass.items():
            arr[i, j] += p
        return cls(arr)

    @classmethod
    def independent(cls, x: TableDemand, y: TableDemand) -> JointDiscreteDemand:
        px = x.pmf_array(x.truncation_point)
        py = y.pmf_array(y.truncation_point)
        return cls(np.outer(px, py))


def cdf_at(d: Demand, x: float) -> float:
    """P(demand <= x)."""
    return float(d.cdf(x))


def quantile(d: Demand, q: float):
    """Generalized inverse ``inf{x : cdf(x) >= q}``.

    Raises :class:`DomainError` for ``q`` outside (0, 1] and
    :class:`UnboundedQuantile` for ``q = 1`` on unbounded support.
    """
    return d.quantile(q)


def fit_empirical(samples: Sequence[int]) -> TableDemand:
    """Empirical frequency table of observed demands."""
    samples = list(samples)
    if not samples:
        raise EmptySample("cannot fit a distribution to an empty sample")
    for s in samples:
        if s < 0:
            raise NegativeDemand(f"demand observations must be >= 0, got {s}")
        if int(s) != s:
            raise DomainError(f"demand observations must be integers, got {s}")
    counts = Counter(int(s) for s in samples)
    n = len(samples)
    return TableDemand({k: c / n for k, c in counts.items()})


def marginals(joint: JointDiscreteDemand) -> tuple[TableDemand, TableDemand]:
    rows = joint.mass.sum(axis=1)
    cols = joint.mass.sum(axis=0)
    return (
        TableDemand({i: p for i, p in enumerate(rows) if p > 0}),
        TableDemand({j: p for j, p in enumerate(cols) if p > 0}),
    )


class DemandHistoryError(DomainError):
    """Malformed demand-history CSV; ``row`` is the 1-based file row."""

    def __init__(self, message: str, row: int | None = None):
        super().__init__(message if row is None else f"row {row}: {message}")
        self.row = row


def read_demand_history(path) -> dict[str, list[int]]:
    """Read a demand-history CSV: header of product names, then one
    nonnegative integer observation per product per row."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DemandHistoryError("file is empty", row=1) from None
        names = [h.strip() for h in header]
        if not names or any(not n for n in names):
            raise DemandHistoryError("header contains an empty product name", row=1)
        if len(set(names)) != len(names):
            raise DemandHistoryError("duplicate product names in header", row=1)
        columns: dict[str, list[int]] = {n: [] for n in names}
        for row_no, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(names):
                raise DemandHistoryError(
                    f"expected {len(names)} cells, found {len(row)}", row=row_no
                )
            for name, cell in zip(names, row):
                text = cell.strip()
                if not text.isdigit():
                    raise DemandHistoryError(
                        f"column {name!r}: {cell!r} is not a nonnegative integer",
                        row=row_no,
                    )
                columns[name].append(int(text))
    if not any(columns.values()):
        raise DemandHistoryError("no observations after the header", row=2)
    return columns
