"""Closed-form dynamics of the streamwise-averaged (k = 0) modes.

Simple-zero modes (l != 0) evolve by a time-independent 3x3 generator per
frequency slot whose fundamental matrix is known in closed form; double-zero
modes (l = 0) reduce to heat flow plus an exact buoyancy rotation.  An RK4
integrator over the assembled generator serves as the independent oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DegenerateFrequency, SingularSymbol

_COND_LIMIT = 1e12


def h_dispersion(params, eta, l):
    """Dispersion numerator sqrt(alpha^2 eta^2 + b_beta l^2), principal branch.

    Real and nonnegative when b_beta >= 0; purely imaginary when the argument
    goes negative (exploratory b_beta < 0 runs).
    """
    val = params.alpha**2 * eta**2 + params.b_beta * l**2
    if val >= 0:
        return math.sqrt(val)
    return 1j * math.sqrt(-val)


def dispersion_omega(params, eta, l):
    """Oscillation frequency h / |eta, l| of the simple-zero rotation."""
    r2 = eta**2 + l**2
    if r2 == 0:
        raise DegenerateFrequency("omega undefined at eta = l = 0")
    return h_dispersion(params, eta, l) / math.sqrt(r2)


def eigenvalues(params, eta, l):
    """Spectrum of the k = 0 generator at one slot: heat mode plus a conjugate pair."""
    if eta == 0 and l == 0:
        raise DegenerateFrequency("eigenvalues undefined at eta = l = 0")
    p0 = eta**2 + l**2
    lam1 = -params.nu * p0
    iw = 1j * dispersion_omega(params, eta, l)
    return (complex(lam1), lam1 + iw, lam1 - iw)


def zero_mode_matrix(params, eta, l):
    """Generator of (u1, u2, theta) at a simple-zero slot (the RK4 oracle's matrix)."""
    if l == 0:
        raise DegenerateFrequency("simple-zero generator needs l != 0")
    p0 = eta**2 + l**2
    nu, alpha, beta = params.nu, params.alpha, params.beta
    return np.array(
        [
            [-nu * p0, beta - 1.0, 0.0],
            [-beta * l**2 / p0, -nu * p0, alpha * eta * l / p0],
            [0.0, -alpha * eta / l, -nu * p0],
        ],
        dtype=complex,
    )


def _sinc(x):
    """sin(x)/x, complex-safe, series for small |x|."""
    x = np.asarray(x, dtype=complex)
    out = np.empty_like(x)
    small = np.abs(x) < 1e-5
    xs = x[small]
    out[small] = 1.0 - xs**2 / 6.0 + xs**4 / 120.0
    xl = x[~small]
    out[~small] = np.sin(xl) / xl
    return out


def _cosc(x):
    """(1 - cos(x))/x^2, complex-safe, series for small |x|."""
    x = np.asarray(x, dtype=complex)
    out = np.empty_like(x)
    small = np.abs(x) < 1e-4
    xs = x[small]
    out[small] = 0.5 - xs**2 / 24.0 + xs**4 / 720.0
    xl = x[~small]
    out[~small] = (1.0 - np.cos(xl)) / xl**2
    return out


def propagator_entries(params, eta, l, t):
    """The nine fundamental-matrix entries at simple-zero slots, vectorized.

    Written with sinc/cosc so the h -> 0 limit is taken smoothly instead of
    dividing e^{lambda_2 t} - e^{lambda_3 t} by a vanishing h; algebraically
    identical to the exponential form for h != 0, and valid for complex h.
    """
    eta = np.asarray(eta, dtype=float)
    l = np.asarray(l, dtype=float)
    if np.any(l == 0):
        raise DegenerateFrequency("simple-zero propagator needs l != 0")
    alpha, beta, nu = params.alpha, params.beta, params.nu
    bb = params.b_beta
    p0 = eta**2 + l**2
    hsq = alpha**2 * eta**2 + bb * l**2
    omega = np.sqrt(hsq.astype(complex)) / np.sqrt(p0)
    envelope = np.exp(-nu * p0 * t)
    c = np.cos(omega * t)
    sc = t * _sinc(omega * t)          # sin(omega t)/omega
    cc = t**2 * _cosc(omega * t)       # (1 - cos(omega t))/omega^2
    p11 = envelope * (1.0 - bb * l**2 / p0 * cc)
    p12 = envelope * (beta - 1.0) * sc
    p13 = envelope * alpha * (beta - 1.0) * eta * l / p0 * cc
    p21 = -envelope * beta * l**2 / p0 * sc
    p22 = envelope * c
    p23 = envelope * alpha * eta * l / p0 * sc
    p31 = envelope * alpha * beta * eta * l / p0 * cc
    p32 = -envelope * alpha * eta / l * sc
    p33 = envelope * (1.0 - alpha**2 * eta**2 / p0 * cc)
    return ((p11, p12, p13), (p21, p22, p23), (p31, p32, p33))


def simple_zero_propagator(params, eta, l, t):
    """3x3 matrix propagating (u1, u2, theta) at (eta, l), l != 0, over time t."""
    rows = propagator_entries(params, float(eta), float(l), float(t))
    return np.array([[complex(e) for e in row] for row in rows])


def double_zero_propagator(params, eta, t):
    """Map on (u1bar, u3bar, thetabar) at a double-zero slot: heat times rotation."""
    decay = math.exp(-params.nu * eta**2 * t)
    c = math.cos(params.alpha * t)
    s = math.sin(params.alpha * t)
    return decay * np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def default_oracle_dt(params, eta, l):
    """Step keeping the RK4 oracle error well under 1e-10 for desk-scale times."""
    lam_max = max(abs(lam) for lam in eigenvalues(params, eta, l))
    if lam_max == 0:
        return 1e-4
    return min(1e-4, 0.01 / lam_max)


def rk4_oracle(params, eta, l, t, dt, init):
    """Integrate v' = A v with classical RK4; brute-force check of the closed forms."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    nsteps = round(t / dt)
    if abs(nsteps * dt - t) > 1e-9 * max(1.0, abs(t)):
        raise ValueError(f"t/dt = {t / dt} is not integral")
    a = zero_mode_matrix(params, eta, l)
    v = np.asarray(init, dtype=complex)
    for _ in range(nsteps):
        k1 = a @ v
        k2 = a @ (v + 0.5 * dt * k1)
        k3 = a @ (v + 0.5 * dt * k2)
        k4 = a @ (v + dt * k3)
        v = v + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return v


def rk4_oracle_grid(params, etas, ls, t, dt, init):
    """Vectorized oracle over a batch of slots; init has shape (3, n)."""
    etas = np.asarray(etas, dtype=float)
    ls = np.asarray(ls, dtype=float)
    if np.any(ls == 0):
        raise DegenerateFrequency("simple-zero oracle needs l != 0")
    nsteps = round(t / dt)
    if abs(nsteps * dt - t) > 1e-9 * max(1.0, abs(t)):
        raise ValueError(f"t/dt = {t / dt} is not integral")
    p0 = etas**2 + ls**2
    mats = np.zeros((etas.size, 3, 3), dtype=complex)
    mats[:, 0, 0] = mats[:, 1, 1] = mats[:, 2, 2] = -params.nu * p0
    mats[:, 0, 1] = params.beta - 1.0
    mats[:, 1, 0] = -params.beta * ls**2 / p0
    mats[:, 1, 2] = params.alpha * etas * ls / p0
    mats[:, 2, 1] = -params.alpha * etas / ls
    v = np.asarray(init, dtype=complex).T[:, :, None]  # (n, 3, 1)
    for _ in range(nsteps):
        k1 = mats @ v
        k2 = mats @ (v + 0.5 * dt * k1)
        k3 = mats @ (v + 0.5 * dt * k2)
        k4 = mats @ (v + dt * k3)
        v = v + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return v[:, :, 0].T


def beta_weight(params):
    """Signed factor beta/sqrt(b_beta).

    Equals sqrt(beta/(beta-1)) on the beta > 1 branch; carries the sign needed
    for beta < 0 so the coupling identities hold on all of b_beta > 0.
    """
    bb = params.b_beta
    if bb <= 0:
        raise ConfigError(f"beta_weight requires b_beta > 0, got {bb}")
    return params.beta / math.sqrt(bb)


@dataclass
class ZeroModeState:
    """Spectral k = 0 data on the (eta, l) lattice.

    The l = 0 column is the double-zero part (u2 must vanish there); the rest
    is the simple-zero part, where incompressibility ties u3 to u2.
    """

    eta: np.ndarray  # (ny,)
    l: np.ndarray    # (nz,)
    u1: np.ndarray   # (ny, nz) complex
    u2: np.ndarray
    u3: np.ndarray
    theta: np.ndarray

    def grids(self):
        return self.eta[:, None], self.l[None, :].astype(float)

    def simple_mask(self):
        return np.broadcast_to(self.l[None, :] != 0, self.u1.shape)

    def incompressibility_residual(self):
        """Max |eta*u2 + l*u3| over simple-zero slots plus max |u2| on l = 0."""
        eta, l = self.grids()
        res = np.abs(eta * self.u2 + l * self.u3)
        simple = self.simple_mask()
        r1 = float(res[simple].max()) if simple.any() else 0.0
        r2 = float(np.abs(self.u2[~simple]).max()) if (~simple).any() else 0.0
        return max(r1, r2)


@dataclass
class CombinedQuantities:
    """Dispersive combinations of the non-dispersive simple-zero unknowns.

    V02/V03 pair with u2/u3 in a rotation system; Lambda0 rides the pure heat
    flow.  Symbols are stored so the transform can be inverted slot-wise.
    """

    V02: np.ndarray
    V03: np.ndarray
    Lambda0: np.ndarray
    g1: np.ndarray
    g2: np.ndarray
    g1p: np.ndarray
    g2p: np.ndarray
    g3: np.ndarray
    g4: np.ndarray
    omega: np.ndarray
    simple: np.ndarray  # mask of l != 0 slots


def combined_symbols(params, eta, l):
    """Per-slot symbols of the combining operators on simple-zero slots.

    Uses the real convention for the dispersion operator (symbol omega > 0),
    which is the one under which the combined unknowns satisfy the stated
    rotation/heat systems; l = 0 slots are returned as zeros.
    """
    bb = params.b_beta
    if bb <= 0:
        raise ConfigError(f"combined quantities require b_beta > 0, got {bb}")
    eta = np.asarray(eta, dtype=float)
    l = np.asarray(l, dtype=float)
    p0 = eta**2 + l**2
    eta = np.broadcast_to(eta, p0.shape)
    l = np.broadcast_to(l, p0.shape)
    simple = l != 0
    alpha = params.alpha
    w = beta_weight(params)
    omega = np.zeros_like(p0)
    g = {k: np.zeros_like(p0) for k in ("g1", "g2", "g1p", "g2p", "g3", "g4")}
    p0s = p0[simple]
    es, ls = eta[simple], l[simple]
    om = np.sqrt((bb * ls**2 + alpha**2 * es**2) / p0s)
    omega[simple] = om
    g["g1"][simple] = -params.beta * ls**2 / (om * p0s)
    g["g2"][simple] = alpha * es * ls / (om * p0s)
    g["g1p"][simple] = params.beta * es * ls / (om * p0s)
    g["g2p"][simple] = -alpha * es**2 / (om * p0s)
    g["g3"][simple] = alpha * w * es * ls / p0s
    g["g4"][simple] = math.sqrt(bb) * ls**2 / p0s
    return omega, g


def combined_quantities(state, params):
    """Build (V02, V03, Lambda0) from a simple-zero state by symbol multiplication."""
    simple = state.simple_mask()
    for name in ("u1", "u2", "u3", "theta"):
        col = getattr(state, name)[~simple]
        if col.size and np.abs(col).max() > 1e-12 * max(1.0, _state_scale(state)):
            raise DegenerateFrequency(
                "combined quantities need simple-zero input; l = 0 slots are nonzero"
            )
    eta2d, l2d = state.grids()
    omega, g = combined_symbols(params, eta2d, l2d)
    det = g["g1"] * g["g4"] - g["g2"] * g["g3"]
    if np.any(np.abs(det[simple]) == 0):
        raise SingularSymbol("combining symbol matrix singular on a simple-zero slot")
    v02 = g["g1"] * state.u1 + g["g2"] * state.theta
    v03 = g["g1p"] * state.u1 + g["g2p"] * state.theta
    lam0 = g["g3"] * state.u1 + g["g4"] * state.theta
    return CombinedQuantities(
        V02=v02, V03=v03, Lambda0=lam0, omega=omega, simple=simple, **g
    )


def invert_combined(cq, params):
    """Recover (u1, theta) from (V02, Lambda0) by inverting the 2x2 symbol matrix."""
    if params.b_beta <= 0:
        raise ConfigError("invert_combined requires b_beta > 0")
    det = cq.g1 * cq.g4 - cq.g2 * cq.g3
    simple = cq.simple
    norms = np.abs(cq.g1) + np.abs(cq.g2) + np.abs(cq.g3) + np.abs(cq.g4)
    with np.errstate(divide="ignore", invalid="ignore"):
        cond_proxy = norms**2 / np.abs(det)
    if np.any(cond_proxy[simple] > _COND_LIMIT):
        raise SingularSymbol("combining symbol matrix numerically singular")
    u1 = np.zeros_like(cq.V02)
    theta = np.zeros_like(cq.V02)
    u1[simple] = (cq.g4[simple] * cq.V02[simple] - cq.g2[simple] * cq.Lambda0[simple]) / det[simple]
    theta[simple] = (-cq.g3[simple] * cq.V02[simple] + cq.g1[simple] * cq.Lambda0[simple]) / det[simple]
    return u1, theta


def _state_scale(state):
    return max(
        float(np.abs(f).max()) for f in (state.u1, state.u2, state.u3, state.theta)
    ) or 1.0


def evolve_zero_state(state, params, t):
    """Propagate a full k = 0 state by the closed forms (both mode families)."""
    eta2d, l2d = state.grids()
    simple = state.simple_mask()
    out = ZeroModeState(
        eta=state.eta, l=state.l,
        u1=np.zeros_like(state.u1), u2=np.zeros_like(state.u2),
        u3=np.zeros_like(state.u3), theta=np.zeros_like(state.theta),
    )
    if simple.any():
        es = np.broadcast_to(eta2d, state.u1.shape)[simple]
        ls = np.broadcast_to(l2d, state.u1.shape)[simple]
        rows = propagator_entries(params, es, ls, t)
        u1, u2, th = state.u1[simple], state.u2[simple], state.theta[simple]
        out.u1[simple] = rows[0][0] * u1 + rows[0][1] * u2 + rows[0][2] * th
        out.u2[simple] = rows[1][0] * u1 + rows[1][1] * u2 + rows[1][2] * th
        out.theta[simple] = rows[2][0] * u1 + rows[2][1] * u2 + rows[2][2] * th
        out.u3[simple] = -es / ls * out.u2[simple]
    # double-zero column: heat on u1, u3/theta rotation, u2 identically zero
    col = np.where(state.l == 0)[0]
    for j in col:
        decay = np.exp(-params.nu * state.eta**2 * t)
        c, s = math.cos(params.alpha * t), math.sin(params.alpha * t)
        out.u1[:, j] = decay * state.u1[:, j]
        out.u2[:, j] = 0.0
        out.u3[:, j] = decay * (c * state.u3[:, j] - s * state.theta[:, j])
        out.theta[:, j] = decay * (s * state.u3[:, j] + c * state.theta[:, j])
    return out
