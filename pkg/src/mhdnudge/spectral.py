"""Periodic fields on the unit square, spectral transforms and calculus.

Fields live on the non-dimensional torus [0,1]^2 and are stored as full
(n, n) arrays of Fourier coefficients with the convention

    u(x) = sum_k c_k exp(2*pi*i k.x),   c_k = fft2(samples) / n**2,

so Parseval reads ||u||_L2^2 = sum |c_k|^2 and the gradient is
multiplication by 2*pi*i*k.  The zero mode is forcibly zero everywhere
(the governing equations assume zero space average).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

TWO_PI = 2.0 * np.pi


class GridMismatchError(ValueError):
    """Raised when two fields do not share the same grid."""


@dataclass(frozen=True)
class Grid:
    """Uniform n x n collocation grid on [0,1]^2, n even and >= 8."""

    n: int

    def __post_init__(self):
        if self.n < 8:
            raise ValueError(f"grid size must be >= 8, got {self.n}")
        if self.n % 2 != 0:
            raise ValueError(f"grid size must be even, got {self.n}")

    @property
    def cutoff(self) -> int:
        """Dealiasing cutoff: modes with max(|k1|,|k2|) > cutoff are dropped."""
        return self.n // 3

    @cached_property
    def k1(self) -> np.ndarray:
        k = np.fft.fftfreq(self.n, 1.0 / self.n)
        return np.broadcast_to(k[:, None], (self.n, self.n)).copy()

    @cached_property
    def k2(self) -> np.ndarray:
        k = np.fft.fftfreq(self.n, 1.0 / self.n)
        return np.broadcast_to(k[None, :], (self.n, self.n)).copy()

    @cached_property
    def ksq(self) -> np.ndarray:
        return self.k1 ** 2 + self.k2 ** 2

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        c = self.cutoff
        return (np.abs(self.k1) <= c) & (np.abs(self.k2) <= c)

    @cached_property
    def inv_ksq(self) -> np.ndarray:
        """1/|k|^2 with the zero mode mapped to 0 (used by the Leray projector)."""
        out = np.zeros_like(self.ksq)
        nz = self.ksq > 0
        out[nz] = 1.0 / self.ksq[nz]
        return out

    def points(self):
        x = np.arange(self.n) / self.n
        return np.meshgrid(x, x, indexing="ij")


@dataclass
class SpectralScalar:
    """Mean-zero real scalar field stored as Fourier coefficients."""

    grid: Grid
    coef: np.ndarray

    def __post_init__(self):
        if self.coef.shape != (self.grid.n, self.grid.n):
            raise GridMismatchError(
                f"coefficient array {self.coef.shape} does not match grid n={self.grid.n}"
            )
        self.coef = np.ascontiguousarray(self.coef, dtype=np.complex128)
        self.coef[0, 0] = 0.0

    def copy(self) -> "SpectralScalar":
        return SpectralScalar(self.grid, self.coef.copy())


@dataclass
class SpectralVectorField:
    """Two-component field; coef has shape (2, n, n)."""

    grid: Grid
    coef: np.ndarray
    divergence_free: bool = False

    def __post_init__(self):
        if self.coef.shape != (2, self.grid.n, self.grid.n):
            raise GridMismatchError(
                f"coefficient array {self.coef.shape} does not match grid n={self.grid.n}"
            )
        self.coef = np.ascontiguousarray(self.coef, dtype=np.complex128)
        self.coef[:, 0, 0] = 0.0
        if self.divergence_free:
            err = divergence_defect(self.grid, self.coef)
            norm = np.sqrt(np.sum(np.abs(self.coef) ** 2))
            if err > 1e-12 * max(norm, 1e-300):
                raise ValueError(
                    f"field flagged divergence-free has relative defect {err / max(norm, 1e-300):.3e}"
                )

    @property
    def components(self):
        return (
            SpectralScalar(self.grid, self.coef[0].copy()),
            SpectralScalar(self.grid, self.coef[1].copy()),
        )

    def copy(self) -> "SpectralVectorField":
        return SpectralVectorField(self.grid, self.coef.copy(), self.divergence_free)


def divergence_defect(grid: Grid, coef: np.ndarray) -> float:
    """max_k |k . c_k|, which is 0 for exactly divergence-free fields."""
    d = grid.k1 * coef[0] + grid.k2 * coef[1]
    return float(np.max(np.abs(d)))


# ---------------------------------------------------------------------------
# transforms


def forward_transform(samples: np.ndarray, grid: Grid):
    """Physical samples -> SpectralScalar.  Returns (field, removed_mean)."""
    samples = np.asarray(samples, dtype=np.float64)
    if samples.shape != (grid.n, grid.n):
        raise GridMismatchError(
            f"sample array {samples.shape} does not match grid n={grid.n}"
        )
    coef = np.fft.fft2(samples) / grid.n ** 2
    mean = float(coef[0, 0].real)
    coef[0, 0] = 0.0
    return SpectralScalar(grid, coef), mean


def inverse_transform(s: SpectralScalar) -> np.ndarray:
    return np.real(np.fft.ifft2(s.coef)) * s.grid.n ** 2


def forward_transform_vector(samples: np.ndarray, grid: Grid) -> SpectralVectorField:
    c0, _ = forward_transform(samples[0], grid)
    c1, _ = forward_transform(samples[1], grid)
    return SpectralVectorField(grid, np.stack([c0.coef, c1.coef]))


def inverse_transform_vector(u: SpectralVectorField) -> np.ndarray:
    return np.real(np.fft.ifft2(u.coef, axes=(-2, -1))) * u.grid.n ** 2


# ---------------------------------------------------------------------------
# calculus (exact per retained mode)


def gradient(s: SpectralScalar) -> SpectralVectorField:
    g = s.grid
    fac = TWO_PI * 1j
    coef = np.stack([fac * g.k1 * s.coef, fac * g.k2 * s.coef])
    return SpectralVectorField(g, coef)


def laplacian(s: SpectralScalar) -> SpectralScalar:
    g = s.grid
    return SpectralScalar(g, -4.0 * np.pi ** 2 * g.ksq * s.coef)


def laplacian_vector(u: SpectralVectorField) -> SpectralVectorField:
    g = u.grid
    return SpectralVectorField(g, -4.0 * np.pi ** 2 * g.ksq * u.coef)


def divergence(u: SpectralVectorField) -> SpectralScalar:
    g = u.grid
    fac = TWO_PI * 1j
    return SpectralScalar(g, fac * (g.k1 * u.coef[0] + g.k2 * u.coef[1]))


def leray_project_coef(grid: Grid, coef: np.ndarray) -> np.ndarray:
    """c -> c - k (k.c)/|k|^2 on raw (2,n,n) coefficients."""
    kd = (grid.k1 * coef[0] + grid.k2 * coef[1]) * grid.inv_ksq
    out = np.empty_like(coef)
    out[0] = coef[0] - grid.k1 * kd
    out[1] = coef[1] - grid.k2 * kd
    out[:, 0, 0] = 0.0
    return out


def leray_project(u: SpectralVectorField) -> SpectralVectorField:
    return SpectralVectorField(
        u.grid, leray_project_coef(u.grid, u.coef), divergence_free=True
    )


def dealias_coef(grid: Grid, coef: np.ndarray) -> np.ndarray:
    return coef * grid.dealias_mask


def dealias(u):
    if isinstance(u, SpectralScalar):
        return SpectralScalar(u.grid, dealias_coef(u.grid, u.coef))
    return SpectralVectorField(
        u.grid, dealias_coef(u.grid, u.coef), u.divergence_free
    )


# ---------------------------------------------------------------------------
# norms (Parseval)


def _coef(u) -> np.ndarray:
    return u.coef if hasattr(u, "coef") else u


def l2_norm(u) -> float:
    return float(np.sqrt(np.sum(np.abs(_coef(u)) ** 2)))


def h1_seminorm(u) -> float:
    c = _coef(u)
    g = u.grid
    return float(TWO_PI * np.sqrt(np.sum(g.ksq * np.abs(c) ** 2)))


def h2_seminorm(u) -> float:
    c = _coef(u)
    g = u.grid
    return float(4.0 * np.pi ** 2 * np.sqrt(np.sum(g.ksq ** 2 * np.abs(c) ** 2)))


def inner_product(u, v) -> float:
    cu, cv = _coef(u), _coef(v)
    if u.grid.n != v.grid.n:
        raise GridMismatchError("inner product of fields on different grids")
    return float(np.real(np.sum(np.conj(cu) * cv)))


def h1_inner_product(u, v) -> float:
    cu, cv = _coef(u), _coef(v)
    if u.grid.n != v.grid.n:
        raise GridMismatchError("inner product of fields on different grids")
    g = u.grid
    return float(4.0 * np.pi ** 2 * np.real(np.sum(g.ksq * np.conj(cu) * cv)))


# ---------------------------------------------------------------------------
# field construction


def random_divfree_field(
    grid: Grid, seed: int, energy_spectrum_decay: float = 2.0, k_max: int | None = None
) -> SpectralVectorField:
    """Deterministic random divergence-free field with |k|^-decay amplitudes.

    Energy lives on modes 0 < |k| <= k_max; everything above is exactly zero.
    """
    if k_max is None:
        k_max = grid.cutoff
    if k_max > grid.cutoff:
        raise ValueError(f"k_max={k_max} exceeds dealias cutoff {grid.cutoff}")
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal((2, grid.n, grid.n))
    coef = np.fft.fft2(noise, axes=(-2, -1)) / grid.n ** 2
    kmag = np.sqrt(grid.ksq)
    shaping = np.zeros_like(kmag)
    band = (kmag > 0) & (kmag <= k_max)
    shaping[band] = kmag[band] ** (-energy_spectrum_decay)
    coef *= shaping
    coef = leray_project_coef(grid, coef)
    return SpectralVectorField(grid, coef, divergence_free=True)


def random_scalar_field(
    grid: Grid, seed: int, energy_spectrum_decay: float = 1.0, k_max: int | None = None
) -> SpectralScalar:
    """Mean-zero random scalar with band-limited |k|^-decay spectrum."""
    if k_max is None:
        k_max = grid.cutoff
    if k_max > grid.cutoff:
        raise ValueError(f"k_max={k_max} exceeds dealias cutoff {grid.cutoff}")
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal((grid.n, grid.n))
    coef = np.fft.fft2(noise) / grid.n ** 2
    kmag = np.sqrt(grid.ksq)
    shaping = np.zeros_like(kmag)
    band = (kmag > 0) & (kmag <= k_max)
    shaping[band] = kmag[band] ** (-energy_spectrum_decay)
    coef *= shaping
    return SpectralScalar(grid, coef)


# ---------------------------------------------------------------------------
# snapshot file format: "mhdnudge-field v1, n=<n>" header, then CSV rows
# k1,k2,re_c1,im_c1,re_c2,im_c2.  repr() round-trips float64 exactly.


def save_field(path, u: SpectralVectorField) -> None:
    n = u.grid.n
    with open(path, "w") as fh:
        fh.write(f"mhdnudge-field v1, n={n}\n")
        ks = np.fft.fftfreq(n, 1.0 / n).astype(int)
        for i, k1 in enumerate(ks):
            for j, k2 in enumerate(ks):
                c1 = u.coef[0, i, j]
                c2 = u.coef[1, i, j]
                if c1 == 0 and c2 == 0:
                    continue
                fh.write(
                    f"{k1},{k2},{float(c1.real)!r},{float(c1.imag)!r},"
                    f"{float(c2.real)!r},{float(c2.imag)!r}\n"
                )


def load_field(path) -> SpectralVectorField:
    with open(path) as fh:
        header = fh.readline().strip()
        if not header.startswith("mhdnudge-field v1, n="):
            raise ValueError(f"not a mhdnudge field snapshot: {header!r}")
        n = int(header.split("n=")[1])
        grid = Grid(n)
        coef = np.zeros((2, n, n), dtype=np.complex128)
        for line in fh:
            line = line.strip()
            if not line:
                continue
            k1s, k2s, a, b, c, d = line.split(",")
            i = int(k1s) % n
            j = int(k2s) % n
            coef[0, i, j] = complex(float(a), float(b))
            coef[1, i, j] = complex(float(c), float(d))
    return SpectralVectorField(grid, coef)
