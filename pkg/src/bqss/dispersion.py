"""Stationary-phase machinery and the dispersive zero-mode semigroup.

The simple-zero modes ride a semigroup whose per-slot symbol is
exp(-nu*(eta^2+l^2)*t - i*t*omega) with omega = sqrt((b_beta*l^2 +
alpha^2*eta^2)/(eta^2+l^2)).  Its physical-space decay rate (qt)^(-1/3) comes
from the stationary point xi0 of the second derivative of the rescaled phase;
this module evaluates the Littlewood-Paley ring integrals behind that
estimate and fits measured decay exponents.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import (
    InsufficientSamples,
    NonzeroMeanInZ,
    QuadratureNoConvergence,
)

T_OSCILLATION_CAP = 1e3  # beyond this the ring integrands oscillate impractically
_QUAD_TOL = 1e-9


@dataclass(frozen=True)
class PhaseContext:
    """Rescaled phase of one Littlewood-Paley ring integral.

    y and t enter only through the ray parameter y*l/t; mu = b_beta/alpha^2
    fixes the curvature profile and the stationary point xi0 of phi''.
    """

    y: float
    l: int
    t: float
    params: object

    def __post_init__(self):
        if self.l == 0:
            raise ValueError("phase context needs l != 0")
        if self.t <= 0:
            raise ValueError("phase context needs t > 0")

    @property
    def mu(self):
        return self.params.mu

    @property
    def xi0(self):
        mu = self.mu
        if mu < 0:
            raise ValueError("xi0 defined only for mu >= 0")
        return math.sqrt((math.sqrt(mu**2 + 3.0 * mu) - mu) / 3.0)

    @property
    def ray(self):
        return self.y * self.l / self.t


def phase(xi, ctx):
    """phi(xi) = (y l / t) xi - sqrt((b_beta + alpha^2 xi^2)/(1 + xi^2))."""
    xi = np.asarray(xi, dtype=float)
    bb = ctx.params.b_beta
    a2 = ctx.params.alpha**2
    return ctx.ray * xi - np.sqrt((bb + a2 * xi**2) / (1.0 + xi**2))


def phase_dd(xi, ctx):
    """Second derivative of the phase, zero exactly at +-xi0 (and identically
    zero in the degenerate case b_beta = alpha^2)."""
    xi = np.asarray(xi, dtype=float)
    bb = ctx.params.b_beta
    a2 = ctx.params.alpha**2
    num = -3.0 * a2 * xi**4 - 2.0 * bb * xi**2 + bb
    den = (1.0 + xi**2) ** 2.5 * (bb + a2 * xi**2) ** 1.5
    return (bb - a2) * num / den


def _smooth_step(x):
    """C-infinity transition 0 -> 1 on [0, 1] built from exp(-1/x)."""
    x = np.asarray(x, dtype=float)
    def expm(u):
        out = np.zeros_like(u)
        pos = u > 0
        out[pos] = np.exp(-1.0 / u[pos])
        return out
    a = expm(x)
    b = expm(1.0 - x)
    return a / (a + b)


def lp_bump(xi):
    """Smooth even bump: 1 on [-3/2, 3/2], supported in [-2, 2]."""
    xi = np.abs(np.asarray(xi, dtype=float))
    out = np.zeros_like(xi)
    out[xi <= 1.5] = 1.0
    mid = (xi > 1.5) & (xi < 2.0)
    out[mid] = _smooth_step((2.0 - xi[mid]) / 0.5)
    return out


def lp_ring(xi):
    """Ring function bump(xi) - bump(2 xi); partition of unity over dyadic j."""
    return lp_bump(xi) - lp_bump(2.0 * np.asarray(xi, dtype=float))


def resonant_j0(ctx):
    """Ring index where the ring first covers xi0 (real-valued; may be negative)."""
    return math.log2(ctx.xi0 * abs(ctx.l)) - 2.0


def oscillatory_integral(ctx, ring_j):
    """I(t, alpha, beta, l, j) = integral of exp(i t phi(xi)) ring(2^-j |l| xi) dxi.

    Adaptive quadrature with forced subdivision at +-xi0 and the ring edges.
    """
    if ctx.t > T_OSCILLATION_CAP:
        raise ValueError(
            f"t = {ctx.t} exceeds the oscillation cap {T_OSCILLATION_CAP}")
    scale = 2.0**ring_j / abs(ctx.l)
    lo, hi = 0.75 * scale, 2.0 * scale
    inner = [x for x in (ctx.xi0, ctx.xi0 * 0.5, ctx.xi0 * 2.0) if lo < x < hi]

    def ring_arg(xi):
        return lp_ring(xi / scale)

    def segment(a, b):
        pts = sorted({x for x in inner if a < x < b})
        with warnings.catch_warnings():
            warnings.simplefilter("error", integrate.IntegrationWarning)
            try:
                val, _ = integrate.quad(
                    lambda xi: np.exp(1j * ctx.t * phase(xi, ctx)) * ring_arg(xi),
                    a, b, points=pts or None, limit=600,
                    epsabs=_QUAD_TOL, epsrel=1e-10, complex_func=True)
            except integrate.IntegrationWarning as exc:
                raise QuadratureNoConvergence(str(exc)) from exc
        return val

    pos = segment(lo, hi)
    neg = segment(-hi, -lo)
    return pos + neg


def dispersion_relation(params, eta, l):
    """omega(eta, l) = sqrt((b_beta l^2 + alpha^2 eta^2)/(eta^2 + l^2)); 0 at origin."""
    eta = np.asarray(eta, dtype=float)
    l = np.asarray(l, dtype=float)
    p0 = eta**2 + l**2
    with np.errstate(divide="ignore", invalid="ignore"):
        w = np.sqrt((params.b_beta * l**2 + params.alpha**2 * eta**2) / p0)
    return np.where(p0 > 0, w, 0.0)


def semigroup_apply(field, eta_modes, l_modes, t, params):
    """Apply the zero-mode semigroup to a 2-D spectral field over (eta, l).

    Frequency-wise multiplication by exp(-nu p0 t - i t omega).  The l = 0
    slice must vanish (no z-mean); per-slot modulus is preserved exactly when
    nu = 0.
    """
    field = np.asarray(field)
    eta = np.asarray(eta_modes, dtype=float)[:, None]
    l = np.asarray(l_modes, dtype=float)[None, :]
    scale = np.abs(field).max()
    mean_z = np.abs(field[:, np.asarray(l_modes) == 0])
    if mean_z.size and scale > 0 and mean_z.max() > 1e-12 * scale:
        raise NonzeroMeanInZ("input field has a nontrivial l = 0 slice")
    p0 = eta**2 + l**2
    w = dispersion_relation(params, eta, l)
    return field * np.exp(-params.nu * p0 * t - 1j * t * w)


def pad_spectral_2d(coeffs, factor=4):
    """Zero-pad normalized 2-D coefficients for fine physical-space sampling."""
    ny, nz = coeffs.shape
    big = np.zeros((factor * ny, factor * nz), dtype=complex)
    iy = np.fft.fftfreq(ny, 1.0 / ny).astype(int)
    iz = np.fft.fftfreq(nz, 1.0 / nz).astype(int)
    big[np.ix_(iy, iz)] = coeffs[np.ix_(np.arange(ny), np.arange(nz))]
    return big


def sup_norm_physical(coeffs, factor=4):
    """Sup norm of the trig polynomial with the given normalized coefficients.

    Oversamples by zero-padded inverse FFT so the maximum does not fall
    between collocation points.
    """
    big = pad_spectral_2d(coeffs, factor)
    phys = np.fft.ifft2(big) * big.size
    return float(np.abs(phys).max())


def w31_norm(coeffs, eta_modes, l_modes, Ly, factor=4):
    """Discrete W^{3,1} norm: sum of L1 norms of derivatives up to order 3."""
    eta = np.asarray(eta_modes, dtype=float)[:, None]
    l = np.asarray(l_modes, dtype=float)[None, :]
    total = 0.0
    cell = (Ly / (factor * coeffs.shape[0])) * (2.0 * math.pi / (factor * coeffs.shape[1]))
    for a1 in range(4):
        for a2 in range(4 - a1):
            d = coeffs * (1j * eta) ** a1 * (1j * l) ** a2
            big = pad_spectral_2d(d, factor)
            phys = np.fft.ifft2(big) * big.size
            total += np.abs(phys).sum() * cell
    return float(total)


def gaussian_packet(ny, nz, Ly, l0=1, width=1.0):
    """Gaussian in y times a single +-l0 mode in z, as normalized coefficients.

    Returns (coeffs, eta_modes, l_modes); the packet is centered at Ly/2 and
    normalized to unit W^{3,1} norm.
    """
    y = np.arange(ny) * (Ly / ny)
    z = np.arange(nz) * (2.0 * math.pi / nz)
    phys = np.exp(-((y[:, None] - Ly / 2.0) ** 2) / (2.0 * width**2)) * np.cos(l0 * z[None, :])
    coeffs = np.fft.fft2(phys) / phys.size
    eta_modes = 2.0 * math.pi / Ly * np.fft.fftfreq(ny, 1.0 / ny)
    l_modes = np.fft.fftfreq(nz, 1.0 / nz).astype(int)
    coeffs /= w31_norm(coeffs, eta_modes, l_modes, Ly)
    return coeffs, eta_modes, l_modes


def decay_fit(series, window):
    """Least squares of log(value) against log(t) inside the window.

    Returns (exponent, constant, r_squared), i.e. value ~= constant * t^exponent.
    """
    t_lo, t_hi = window
    pts = [(t, v) for t, v in series if t_lo <= t <= t_hi]
    if len(pts) < 8:
        raise InsufficientSamples(
            f"need >= 8 samples in [{t_lo}, {t_hi}], got {len(pts)}")
    t = np.array([p[0] for p in pts])
    v = np.array([p[1] for p in pts])
    if np.any(v <= 0) or np.any(t <= 0):
        raise ValueError("decay_fit needs positive times and values")
    x, yv = np.log(t), np.log(v)
    slope, intercept = np.polyfit(x, yv, 1)
    resid = yv - (slope * x + intercept)
    ss_tot = np.sum((yv - yv.mean()) ** 2)
    r2 = 1.0 - np.sum(resid**2) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(math.exp(intercept)), float(r2)
