"""Stationary scattering conditions as explicit complex linear systems.

The bare detector gives three equations in ``(t, r, e_q)``; the ring-cavity
detector gives five in ``(t, r, e_q, e_a, e_b)``.  The field value at the
coupling point is regularised as the mean of its two sides, i.e.
``phi_R(0) = (1 + t)/2`` and ``phi_L(0) = r/2``.

The systems are solved here by Gaussian elimination with partial pivoting,
independently of the closed forms in :mod:`wgdetect.model`, so that one can
check the other.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import BareParams, CavityParams, ScatterSolution, amplitudes

PIVOT_RTOL = 1e-14


class SingularSystem(ArithmeticError):
    pass


@dataclass(frozen=True)
class ComplexMatrixSystem:
    A: np.ndarray
    b: np.ndarray
    unknown_labels: tuple[str, ...]

    def __post_init__(self):
        n = len(self.unknown_labels)
        if n not in (3, 5):
            raise ValueError(f"system dimension must be 3 or 5, got {n}")
        if self.A.shape != (n, n) or self.b.shape != (n,):
            raise ValueError("A must be n x n and b length n")
        if not (np.all(np.isfinite(self.A)) and np.all(np.isfinite(self.b))):
            raise ValueError("non-finite system entries")

    @property
    def n(self) -> int:
        return len(self.unknown_labels)

    def permuted(self, order) -> "ComplexMatrixSystem":
        """Same system with its equations (rows) reordered."""
        order = list(order)
        return ComplexMatrixSystem(self.A[order], self.b[order], self.unknown_labels)


@dataclass(frozen=True)
class SolveDiagnostics:
    residual_norm: float
    pivot_min: float
    condition_estimate: float
    matrix_scale: float


def build_bare_system(p: BareParams) -> ComplexMatrixSystem:
    v, h = p.v_g, p.h
    A = np.array(
        [
            [-1j * v, 0, h],
            [0, -1j * v, h],
            [h / 2, h / 2, -(p.delta + 1j * p.gamma_q)],
        ],
        dtype=complex,
    )
    b = np.array([-1j * v, 0, -h / 2], dtype=complex)
    return ComplexMatrixSystem(A, b, ("t", "r", "e_q"))


def build_cavity_system(p: CavityParams) -> ComplexMatrixSystem:
    v, h, V, g = p.v_g, p.h, p.V, p.g
    cav = -(p.delta_c + 1j * p.gamma_c)
    A = np.array(
        [
            # t        r          e_q                         e_a  e_b
            [-1j * v, 0,         h,                          V,   0],
            [0,       -1j * v,   h,                          0,   V],
            [V / 2,   0,         g,                          cav, 0],
            [0,       V / 2,     g,                          0,   cav],
            [h / 2,   h / 2,     -(p.delta + 1j * p.gamma_q), g,   g],
        ],
        dtype=complex,
    )
    b = np.array([-1j * v, 0, -V / 2, 0, -h / 2], dtype=complex)
    return ComplexMatrixSystem(A, b, ("t", "r", "e_q", "e_a", "e_b"))


def build_system(p: BareParams) -> ComplexMatrixSystem:
    if isinstance(p, CavityParams):
        return build_cavity_system(p)
    return build_bare_system(p)


def gauss_solve(A: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, float, float]:
    """Solve ``A x = b``; return ``(x, min |pivot|, max |pivot|)``.

    Raises SingularSystem when a pivot is below ``PIVOT_RTOL`` times the
    largest entry of the original row it came from.
    """
    M = np.array(A, dtype=complex)
    y = np.array(b, dtype=complex)
    row_scale = np.abs(M).max(axis=1)
    with np.errstate(over="ignore", invalid="ignore"):
        return _eliminate(M, y, row_scale)


def _eliminate(M, y, row_scale):
    n = M.shape[0]
    pivots = []
    for k in range(n):
        mu = k + int(np.argmax(np.abs(M[k:, k])))
        if mu != k:
            M[[k, mu]] = M[[mu, k]]
            y[[k, mu]] = y[[mu, k]]
            row_scale[[k, mu]] = row_scale[[mu, k]]
        piv = M[k, k]
        if abs(piv) <= PIVOT_RTOL * row_scale[k]:
            raise SingularSystem(f"pivot {k} has magnitude {abs(piv):.3g}")
        pivots.append(abs(piv))
        factors = M[k + 1 :, k] / piv
        M[k + 1 :, k:] -= np.outer(factors, M[k, k:])
        y[k + 1 :] -= factors * y[k]

    x = np.zeros(n, dtype=complex)
    for k in range(n - 1, -1, -1):
        x[k] = (y[k] - M[k, k + 1 :] @ x[k + 1 :]) / M[k, k]
    return x, min(pivots), max(pivots)


def solve(sys: ComplexMatrixSystem) -> tuple[ScatterSolution, SolveDiagnostics]:
    x, pmin, pmax = gauss_solve(sys.A, sys.b)
    if not np.all(np.isfinite(x)):
        raise SingularSystem("elimination overflowed")
    residual = float(np.abs(sys.A @ x - sys.b).max())
    diag = SolveDiagnostics(
        residual_norm=residual,
        pivot_min=pmin,
        condition_estimate=pmax / pmin,
        matrix_scale=float(np.abs(sys.A).max()),
    )
    values = dict(zip(sys.unknown_labels, (complex(z) for z in x)))
    flavor = "bare" if sys.n == 3 else "cavity"
    return ScatterSolution(flavor=flavor, **values), diag


def oracle_amplitudes(p: BareParams) -> ScatterSolution:
    return solve(build_system(p))[0]


def relative_deviation(a: ScatterSolution, b: ScatterSolution) -> float:
    """Largest amplitude difference relative to the largest reference amplitude."""
    xa = np.array(a.as_tuple())
    xb = np.array(b.as_tuple())
    return float(np.abs(xa - xb).max() / np.abs(xb).max())


def random_params(rng: np.random.Generator, flavor: str) -> BareParams:
    """A random physical parameter draw (user-scale ranges, converted to angular)."""
    u = rng.uniform
    common = dict(
        delta=u(-3.0, 3.0),
        gamma_q=u(0.01, 2.0),
        h=u(0.0, 2.0),
    )
    if flavor == "bare":
        return BareParams.from_user(**common)
    return CavityParams.from_user(
        **common,
        delta_c=u(-3.0, 3.0),
        gamma_c=u(0.01, 2.0),
        V=u(0.0, 2.0),
        g=u(0.0, 2.0),
    )


@dataclass(frozen=True)
class EquivalenceSummary:
    draws: int
    max_deviation: float
    max_residual: float
    worst: BareParams | None


def equivalence_run(draws: int = 1000, seed: int = 0) -> EquivalenceSummary:
    """Compare closed forms against the oracle on ``draws`` bare and ``draws`` cavity draws."""
    rng = np.random.default_rng(seed)
    worst, worst_dev, worst_res = None, 0.0, 0.0
    for _ in range(draws):
        for flavor in ("bare", "cavity"):
            p = random_params(rng, flavor)
            ref, diag = solve(build_system(p))
            dev = relative_deviation(amplitudes(p), ref)
            worst_res = max(worst_res, diag.residual_norm / diag.matrix_scale)
            if dev >= worst_dev:
                worst, worst_dev = p, dev
    return EquivalenceSummary(draws, worst_dev, worst_res, worst)
