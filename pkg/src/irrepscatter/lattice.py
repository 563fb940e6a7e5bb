"""Coarse-grained position and momentum on a periodic lattice.

Positions ``|X;n>``, ``n = 0..d-1``, are grouped into ``d / w_x``
intervals of ``w_x`` sites; momenta, obtained with the DFT
``F|X;m> = d^{-1/2} sum_n exp(2 pi i m n / d) |X;n>``, into intervals of
``w_p`` sites.  ``p_agree`` is the probability that a position, momentum,
position measurement sequence returns the same position interval twice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._parallel import map_ordered
from .errors import CapExceeded, CertificationError, DimensionMismatch, InputError
from .linalg import as_matrix

D_CAP = 4096
DIRECT_CAP = 256


class NonDivisor(InputError):
    pass


@dataclass(frozen=True)
class LatticeConfig:
    d: int
    w_x: int
    w_p: int
    dx: float | None = None  # optional physical lattice spacing, annotation only

    def __post_init__(self):
        for name in ("d", "w_x", "w_p"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise InputError(f"{name} must be a positive integer, got {v!r}")
        if self.d % self.w_x or self.d % self.w_p:
            raise NonDivisor(f"w_x={self.w_x} and w_p={self.w_p} must both divide d={self.d}")

    @property
    def k_x(self) -> int:
        return self.d // self.w_x

    @property
    def k_p(self) -> int:
        return self.d // self.w_p

    @property
    def on_curve(self) -> bool:
        return self.w_x * self.w_p == self.d

    @property
    def length(self) -> float | None:
        return None if self.dx is None else self.dx * self.d

    def momentum_unit(self, hbar: float = 1.0) -> float | None:
        """``2 pi hbar / L``."""
        return None if self.dx is None else 2 * math.pi * hbar / self.length


def dft_matrix(d: int) -> np.ndarray:
    n = np.arange(d)
    return np.exp(2j * np.pi * np.outer(n, n) / d) / np.sqrt(d)


def _check_cap(d: int):
    if d > D_CAP:
        raise CapExceeded(f"d={d} exceeds the dense-matrix cap {D_CAP}")


def coarse_projections(cfg: LatticeConfig):
    """``(position projections, momentum projections)`` as dense matrices."""
    _check_cap(cfg.d)
    f = dft_matrix(cfg.d)
    xs, ps = [], []
    for nu in range(cfg.k_x):
        diag = np.zeros(cfg.d)
        diag[nu * cfg.w_x:(nu + 1) * cfg.w_x] = 1
        xs.append(np.diag(diag).astype(complex))
    for mu in range(cfg.k_p):
        fm = f[:, mu * cfg.w_p:(mu + 1) * cfg.w_p]
        ps.append(fm @ fm.conj().T)
    return xs, ps


def p_agree_state(rho, cfg: LatticeConfig) -> float:
    """``sum_{nu, mu} tr[(P_X,nu P_P,mu P_X,nu)^2 rho]``.

    Restricted to interval ``nu``, ``P_X P_P P_X = A A^H`` with ``A`` the
    ``w_x x w_p`` sub-block of the DFT, so only small blocks are formed.
    """
    rho = as_matrix(rho)
    if rho.shape[0] != cfg.d:
        raise DimensionMismatch(f"state has dimension {rho.shape[0]}, lattice has {cfg.d}")
    _check_cap(cfg.d)
    f = dft_matrix(cfg.d)
    total = 0.0
    for nu in range(cfg.k_x):
        rows = slice(nu * cfg.w_x, (nu + 1) * cfg.w_x)
        r = rho[rows, rows]
        for mu in range(cfg.k_p):
            a = f[rows, mu * cfg.w_p:(mu + 1) * cfg.w_p]
            b = a @ a.conj().T
            total += float(np.real(np.vdot((b @ b).conj().T, r)))
    return total


def p_agree_direct(cfg: LatticeConfig) -> float:
    """Brute-force state average ``p_agree(I/d)``."""
    _check_cap(cfg.d)
    return p_agree_state(np.eye(cfg.d) / cfg.d, cfg)


def _closed(d: int, a: int, b: int) -> float:
    n = np.arange(1, b)
    s = np.sum((b - n) * np.sin(np.pi * n * a / d) ** 2 / np.sin(np.pi * n / d) ** 2)
    return a / d + 2.0 * float(s) / (a * b * d)


def p_agree_closed(cfg: LatticeConfig, check: bool = True) -> float:
    """Closed form of the state-averaged agreement probability.

    ``w_x/d + 2/(w_x w_p d) sum_{n=1}^{w_p-1} (w_p-n) sin^2(pi n w_x/d)/sin^2(pi n/d)``;
    with ``check`` the form with ``w_x`` and ``w_p`` exchanged is
    evaluated too and must agree to 1e-12.
    """
    value = _closed(cfg.d, cfg.w_x, cfg.w_p)
    if check:
        other = _closed(cfg.d, cfg.w_p, cfg.w_x)
        if abs(value - other) > 1e-12:
            raise CertificationError(f"closed form and exchanged form differ: {value!r} vs {other!r}")
    return value


def on_curve_value(d: int, w_p: int) -> float:
    """Closed form on ``w_x w_p = d``, written without ``w_x``.

    ``1/w_p + (2/d^2) sum (w_p-n) sin^2(pi n/w_p)/sin^2(pi n/d)``; the
    expression makes sense for any ``w_p < d``, divisor or not.
    """
    n = np.arange(1, w_p)
    s = np.sum((w_p - n) * np.sin(np.pi * n / w_p) ** 2 / np.sin(np.pi * n / d) ** 2)
    return 1.0 / w_p + 2.0 * float(s) / d ** 2


@dataclass(frozen=True)
class Bounds:
    upper: float | None
    lower: float | None


def p_agree_bounds(d: int, w: int) -> Bounds:
    """Bounds on the diagonal ``w_x = w_p = w``.

    ``upper = w^2/d`` for ``w < sqrt(d)``;
    ``lower = 1 - (2/pi^2)(ln(w^2/d) + 3 pi^2/2)/(w^2/d)`` for ``w > sqrt(d)``
    provided ``floor(w^2/d) >= 2``, the condition under which the bound is
    derived.
    """
    if d % w:
        raise NonDivisor(f"w={w} does not divide d={d}")
    g = w * w / d
    upper = g if w * w < d else None
    lower = None
    if w * w > d and w * w // d >= 2:
        lower = 1 - (2 / math.pi ** 2) * (math.log(g) + 1.5 * math.pi ** 2) / g
    return Bounds(upper, lower)


def delta_sum(q: int, x: float) -> complex:
    n = np.arange(q)
    return complex(np.mean(np.exp(2j * np.pi * x * n / q)))


def delta_closed(q: int, x: float) -> complex:
    den = q * math.sin(math.pi * x / q)
    if abs(den) < 1e-12:
        return delta_sum(q, x)
    return complex(np.exp(1j * np.pi * x * (q - 1) / q) * math.sin(math.pi * x) / den)


def delta_fn(q: int, x: float) -> complex:
    """``(1/q) sum_{n<q} exp(2 pi i x n / q)``, cross-checked against the sine-ratio form."""
    if int(q) != q or q < 1:
        raise InputError("q must be a positive integer")
    s = delta_sum(q, x)
    c = delta_closed(q, x)
    if abs(s - c) > 1e-12:
        raise CertificationError(f"delta forms disagree: {s} vs {c}")
    return s


def divisors(d: int) -> list[int]:
    return [w for w in range(1, d + 1) if d % w == 0]


def divisor_pairs(d: int) -> list[tuple[int, int]]:
    ws = divisors(d)
    return [(a, b) for a in ws for b in ws]


def diagonal_grid(d: int) -> list[tuple[int, int]]:
    return [(w, w) for w in divisors(d)]


def curve_grid(d: int) -> list[tuple[int, int]]:
    return [(d // w, w) for w in divisors(d)]


@dataclass(frozen=True)
class ScanRow:
    d: int
    w_x: int
    w_p: int
    on_curve: bool
    closed: float
    direct: float | None
    upper: float | None
    lower: float | None

    FIELDS = ("d", "w_x", "w_p", "on_curve", "closed", "direct", "upper", "lower")

    def as_tuple(self):
        return tuple(getattr(self, f) for f in self.FIELDS)


def regime_scan(d: int, grid, direct: bool = False, workers: int | None = None) -> list[ScanRow]:
    """Closed form (and optionally brute force) over a grid of ``(w_x, w_p)``.

    The direct oracle is only evaluated for ``d <= 256``; bounds are
    reported on the diagonal ``w_x = w_p``.
    """
    cfgs = [LatticeConfig(d, a, b) for a, b in grid]
    use_direct = direct and d <= DIRECT_CAP

    def row(cfg):
        b = p_agree_bounds(d, cfg.w_x) if cfg.w_x == cfg.w_p else Bounds(None, None)
        return ScanRow(d, cfg.w_x, cfg.w_p, cfg.on_curve, p_agree_closed(cfg),
                       p_agree_direct(cfg) if use_direct else None, b.upper, b.lower)

    return map_ordered(row, cfgs, workers)
