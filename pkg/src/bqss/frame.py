"""Frequency lattice, physical parameters, and moving-frame Fourier symbols.

The moving frame follows the background shear, so the only time dependence
left in the linear operators sits in the symbols ``p`` and ``p_h`` evaluated
at the shifted wavenumber ``eta - k*t``.  Everything downstream (zero-mode
propagators, multipliers, the simulator) consumes these symbols.

Conventions: x and z live on [0, 2*pi) with integer wavenumbers; y lives on
[0, Ly) with wavenumbers eta = 2*pi*n/Ly.  Spectral arrays are indexed
(k, eta, l) in numpy FFT ordering and hold the coefficients of
sum c * exp(i*(k*x + eta*y + l*z)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, RemapOutOfBand


@dataclass(frozen=True)
class PhysParams:
    """Viscosity, stratification and rotation parameters plus derived constants.

    nu : viscosity (= inverse Reynolds number); nu = 0 is allowed for
         inviscid/dispersive runs, the multiplier machinery requires nu > 0.
    alpha : buoyancy (Brunt-Vaisala) frequency; alpha = 0 only for the
            shear-only control runs.
    beta : rotation parameter.
    """

    nu: float
    alpha: float
    beta: float

    def __post_init__(self):
        if self.nu < 0:
            raise ConfigError(f"nu must be >= 0, got {self.nu}")
        if self.alpha < 0:
            raise ConfigError(f"alpha must be >= 0, got {self.alpha}")

    @property
    def b_beta(self):
        """Bradshaw-Richardson number beta*(beta - 1)."""
        return self.beta * (self.beta - 1.0)

    @property
    def q(self):
        """Dispersive strength |b_beta - alpha^2| / alpha (needs alpha > 0)."""
        if self.alpha <= 0:
            raise ConfigError("q is undefined for alpha = 0")
        return abs(self.b_beta - self.alpha**2) / self.alpha

    @property
    def lambda_ed(self):
        """Enhanced-dissipation rate coefficient; defined only for b_beta > 1/4."""
        bb = self.b_beta
        if bb <= 0.25:
            raise ConfigError(f"lambda_ed requires b_beta > 1/4, got b_beta = {bb}")
        s = math.sqrt(bb)
        return (2.0 * s - 1.0) / (2.0 * s + 1.0) / 16.0

    @property
    def c_alpha(self):
        """Lower bound exp(-alpha*pi/sqrt(b_beta)) of the buoyancy ghost weight."""
        bb = self.b_beta
        if bb <= 0:
            raise ConfigError(f"c_alpha requires b_beta > 0, got b_beta = {bb}")
        return math.exp(-self.alpha * math.pi / math.sqrt(bb))

    @property
    def mu(self):
        """Curvature ratio b_beta / alpha^2 of the zero-mode phase function."""
        if self.alpha <= 0:
            raise ConfigError("mu is undefined for alpha = 0")
        return self.b_beta / self.alpha**2


@dataclass(frozen=True)
class Frequency:
    """A single lattice point (k, eta, l)."""

    k: int
    eta: float
    l: int


@dataclass(frozen=True)
class Lattice:
    """Discrete frequency lattice for the periodic box T x [0, Ly) x T.

    Mode counts must be even; modes run over {-n/2, ..., n/2 - 1} in FFT
    ordering.  The continuous eta of the unbounded y-domain is truncated to
    the periodic band eta = 2*pi*n/Ly, valid until the sheared solution
    wraps around the box.
    """

    nx: int
    ny: int
    nz: int
    Ly: float = 8.0 * math.pi

    def __post_init__(self):
        for name, n in (("nx", self.nx), ("ny", self.ny), ("nz", self.nz)):
            if n <= 0 or n % 2 != 0:
                raise ConfigError(f"{name} must be a positive even integer, got {n}")
        if self.Ly < 2.0 * math.pi:
            raise ConfigError(f"Ly must be >= 2*pi, got {self.Ly}")
        object.__setattr__(self, "k_modes", np.fft.fftfreq(self.nx, 1.0 / self.nx).astype(int))
        object.__setattr__(self, "l_modes", np.fft.fftfreq(self.nz, 1.0 / self.nz).astype(int))
        object.__setattr__(
            self, "eta_modes",
            2.0 * math.pi / self.Ly * np.fft.fftfreq(self.ny, 1.0 / self.ny),
        )

    @property
    def shape(self):
        return (self.nx, self.ny, self.nz)

    @property
    def delta_eta(self):
        return 2.0 * math.pi / self.Ly

    def grids(self):
        """Broadcastable (k, eta, l) arrays over the full lattice."""
        return (
            self.k_modes[:, None, None].astype(float),
            self.eta_modes[None, :, None],
            self.l_modes[None, None, :].astype(float),
        )

    def p(self, t):
        """Table of p(t, k, eta, l) over the lattice."""
        k, eta, l = self.grids()
        return k**2 + (eta - k * t) ** 2 + l**2

    def ph(self, t):
        """Table of p_h(t, k, eta) over the lattice."""
        k, eta, _ = self.grids()
        return np.broadcast_to(k**2 + (eta - k * t) ** 2, self.shape).copy()

    def dt_p(self, t):
        """Table of the symbol time derivative -2k(eta - kt)."""
        k, eta, _ = self.grids()
        return np.broadcast_to(-2.0 * k * (eta - k * t), self.shape).copy()


def symbol_p(t, f):
    """Symbol of the moving-frame (minus) Laplacian: k^2 + (eta-kt)^2 + l^2."""
    return f.k**2 + (f.eta - f.k * t) ** 2 + f.l**2


def symbol_ph(t, f):
    """Horizontal symbol k^2 + (eta-kt)^2."""
    return f.k**2 + (f.eta - f.k * t) ** 2


def dt_p(t, f):
    """Common time derivative of symbol_p and symbol_ph: -2k(eta - kt)."""
    return -2.0 * f.k * (f.eta - f.k * t)


MOVING_TO_LAB = "moving_to_lab"
LAB_TO_MOVING = "lab_to_moving"

# Relative mass threshold below which out-of-band coefficients are dropped
# silently instead of raising.
_REMAP_TOL = 1e-12


def frame_remap(field, lattice, t, direction, interpolate=False):
    """Remap spectral coefficients between the moving and the lab frame.

    The moving-frame coefficient at (k, eta, l) equals the lab coefficient at
    (k, eta - k*t, l), so remapping is a per-k shift along the eta axis.  When
    k*t*Ly/(2*pi) is integral for every k the shift is an exact slot move;
    otherwise a band-limited interpolation (phase twist of the y-samples) is
    used if requested, and a ValueError is raised if not.

    Raises RemapOutOfBand when coefficients carrying more than a 1e-12
    fraction of the field norm would leave the resolved eta band.
    """
    if direction not in (MOVING_TO_LAB, LAB_TO_MOVING):
        raise ValueError(f"unknown remap direction {direction!r}")
    field = np.asarray(field)
    if field.shape != lattice.shape:
        raise ValueError(f"field shape {field.shape} != lattice shape {lattice.shape}")
    sign = -1.0 if direction == MOVING_TO_LAB else 1.0
    ny = lattice.ny
    scale = np.max(np.abs(field))
    tol = _REMAP_TOL * scale if scale > 0 else np.inf

    # Slot shift in eta units per k-row: mass at eta moves to eta + sign*k*t.
    shifts = np.asarray(lattice.k_modes, dtype=float) * t / lattice.delta_eta
    shifts_int = np.rint(shifts).astype(int)
    aligned = np.max(np.abs(shifts - shifts_int)) < 1e-9 or t == 0.0
    if not aligned and not interpolate:
        raise ValueError(
            "remap time is not lattice-aligned (k*t*Ly/(2*pi) not integral); "
            "pass interpolate=True for band-limited interpolation"
        )

    out = np.empty_like(field)
    n_idx = np.fft.fftfreq(ny, 1.0 / ny).astype(int)
    half = ny // 2
    for i, k in enumerate(lattice.k_modes):
        sl = field[i]
        if k == 0 or t == 0.0:
            out[i] = sl
            continue
        if aligned:
            s = int(sign) * shifts_int[i]
            target = n_idx + s
            keep = (target >= -half) & (target <= half - 1)
            if np.any(np.abs(sl[~keep]) > tol):
                raise RemapOutOfBand(
                    f"k={k}: shift of {s} slots pushes spectral mass outside |eta| band"
                )
            shifted = np.zeros_like(sl)
            src = n_idx[keep]
            dst = target[keep]
            shifted[np.mod(dst, ny)] = sl[np.mod(src, ny)]
            out[i] = shifted
        else:
            # Phase twist in y space: exact where the shifted frequency stays
            # in band.  Guard the band edge against aliasing wrap-around.
            s = sign * shifts[i]
            guard = int(math.ceil(abs(s)))
            if guard >= half:
                raise RemapOutOfBand(f"k={k}: shift {s:.3f} slots exceeds the eta band")
            edge = (n_idx >= half - guard) | (n_idx < -half + guard)
            if np.any(np.abs(sl[edge]) > tol):
                raise RemapOutOfBand(
                    f"k={k}: band-edge mass would alias under fractional shift {s:.3f}"
                )
            y = np.arange(ny) * (lattice.Ly / ny)
            twist = np.exp(1j * sign * k * t * y).reshape((ny,) + (1,) * (sl.ndim - 1))
            phys = np.fft.ifft(sl, axis=0)
            out[i] = np.fft.fft(phys * twist, axis=0)
    return out
