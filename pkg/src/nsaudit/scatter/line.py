"""Cauchy singular-integral operators on sampled line functions.

T f = (1/(2*pi*i)) p.v. integral f(s)/(s - x) ds is realized as (i/2) times
the Hilbert transform, applied as a spectral multiplier on the FFT of the
samples.  The multiplier is chosen unitary with square -1 (the zero and
Nyquist bins are assigned to the upper/lower side respectively), so the
operator algebra T T = I/4 and the one-sided combinations T+- = T +- I/2
hold to roundoff by construction, independent of quadrature error.
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..errors import DecayError

DECAY_REL_TOL = 1e-3


class LineFunction:
    """Uniform complex samples on s in [-S, S), m points (power of two, >= 64)."""

    def __init__(self, half_width: float, values: np.ndarray, check_decay: bool = True):
        values = np.asarray(values, dtype=complex)
        m = len(values)
        if m < 64 or (m & (m - 1)) != 0:
            raise ValueError(f"line grid needs a power-of-two m >= 64, got {m}")
        if not (half_width > 0):
            raise ValueError("half width must be positive")
        self.half_width = float(half_width)
        self.values = values
        self.decay_ok = self._decay_ok() if check_decay else True

    @property
    def m(self) -> int:
        return len(self.values)

    @property
    def ds(self) -> float:
        return 2.0 * self.half_width / self.m

    @property
    def s(self) -> np.ndarray:
        return -self.half_width + self.ds * np.arange(self.m)

    def _decay_ok(self) -> bool:
        mx = np.max(np.abs(self.values))
        if mx == 0.0:
            return True
        edge = max(abs(self.values[0]), abs(self.values[-1]))
        return bool(edge < DECAY_REL_TOL * mx)

    @classmethod
    def sample(cls, fn: Callable, half_width: float, m: int, **kw) -> "LineFunction":
        s = -half_width + (2.0 * half_width / m) * np.arange(m)
        return cls(half_width, fn(s), **kw)


def hilbert_multiplier(m: int) -> np.ndarray:
    """Unitary Hilbert symbol: -i on nonnegative bins, +i on negative ones."""
    freq = np.fft.fftfreq(m)
    return np.where(freq >= 0, -1j, 1j)


def _apply_T(values: np.ndarray, axis: int = -1) -> np.ndarray:
    m = values.shape[axis]
    sym = hilbert_multiplier(m)
    shape = [1] * values.ndim
    shape[axis] = m
    spec = np.fft.fft(values, axis=axis) * sym.reshape(shape)
    return 0.5j * np.fft.ifft(spec, axis=axis)


def apply_T_lines(values: np.ndarray, axis: int = 0) -> np.ndarray:
    """T applied along one axis of a stacked array (no decay policing)."""
    return _apply_T(values, axis=axis)


def cauchy_project(f: LineFunction, side: str = "principal") -> LineFunction:
    """T, T+ or T- of a sampled line function.

    side "principal" is T; "plus" and "minus" are T + f/2 and T - f/2 (the
    operator relations of the Riemann problem are the defining contract).
    """
    if side not in ("plus", "minus", "principal"):
        raise ValueError(f"side must be plus|minus|principal, got '{side}'")
    if not f.decay_ok:
        raise DecayError(
            "line function does not decay at the window edges; the windowed "
            "transform would corrupt boundary values"
        )
    tf = _apply_T(f.values)
    if side == "plus":
        tf = tf + 0.5 * f.values
    elif side == "minus":
        tf = tf - 0.5 * f.values
    return LineFunction(f.half_width, tf, check_decay=False)


# ---------------------------------------------------------------------------
# self-test battery

def default_battery(half_width: float = 64.0, m: int = 4096):
    """Gaussian, Lorentzian, and compact-bump test functions."""

    def bump(s):
        out = np.zeros_like(s, dtype=float)
        a = half_width / 4.0
        inside = np.abs(s) < a
        out[inside] = np.exp(-1.0 / (1.0 - (s[inside] / a) ** 2))
        return out

    return {
        "gaussian": LineFunction.sample(lambda s: np.exp(-(s**2) / 8.0), half_width, m),
        "lorentzian": LineFunction.sample(lambda s: 1.0 / (1.0 + s**2), half_width, m),
        "bump": LineFunction.sample(bump, half_width, m),
    }


def jump_test_pairs(half_width: float = 8192.0, m: int = 131072):
    """Rational Riemann problems with residue-derived boundary values.

    Each entry is (name, Phi_plus, Phi_minus) sampled on the line; the poles
    come in conjugate pairs so Phi+- decay like 1/x^2 and the window bias
    stays below the verification tolerance.
    """
    s = -half_width + (2.0 * half_width / m) * np.arange(m)
    pairs = []
    for name, (b1, b2) in (("poles_1_2", (1.0, 2.0)), ("poles_1.5_3", (1.5, 3.0))):
        plus = -0.5 / ((s + 1j * b1) * (s + 1j * b2))
        minus = -0.5 / ((s - 1j * b1) * (s - 1j * b2))
        pairs.append((name, LineFunction(half_width, plus, check_decay=False),
                      LineFunction(half_width, minus, check_decay=False)))
    return pairs


_IDENTITY_NAMES = ("TT=I/4", "TT+=T+/2", "TT-=-T-/2", "T+=T+I/2", "T-=T-I/2")


def plemelj_selftest(battery=None, identity_tol: float = 1e-8,
                     jump_tol: float = 1e-7) -> dict:
    """Checks the five operator identities and the jump reconstruction.

    Returns a report dict with per-identity, per-function errors; raises
    AssertionError naming the identity and function on the first failure.
    """
    if battery is None:
        battery = default_battery()
    report = {"identities": {}, "jump": {}, "pass": True}
    for fname, f in battery.items():
        base = np.max(np.abs(f.values))
        scale = base if base > 0 else 1.0
        T = lambda v: _apply_T(v)
        v = f.values
        errs = {
            "TT=I/4": np.max(np.abs(T(T(v)) - v / 4)),
            "TT+=T+/2": np.max(np.abs(T(T(v) + v / 2) - 0.5 * (T(v) + v / 2))),
            "TT-=-T-/2": np.max(np.abs(T(T(v) - v / 2) + 0.5 * (T(v) - v / 2))),
            "T+=T+I/2": np.max(np.abs(
                cauchy_project(f, "plus").values - (T(v) + v / 2))),
            "T-=T-I/2": np.max(np.abs(
                cauchy_project(f, "minus").values - (T(v) - v / 2))),
        }
        for ident in _IDENTITY_NAMES:
            rel = errs[ident] / scale
            report["identities"][(ident, fname)] = rel
            if rel > identity_tol:
                report["pass"] = False
                raise AssertionError(
                    f"Plemelj identity '{ident}' failed on '{fname}': {rel:.3e}"
                )
    for name, phi_p, phi_m in jump_test_pairs():
        jump = LineFunction(phi_p.half_width, phi_p.values - phi_m.values,
                            check_decay=False)
        rec_p = cauchy_project(jump, "plus").values
        rec_m = cauchy_project(jump, "minus").values
        err = max(np.max(np.abs(rec_p - phi_p.values)),
                  np.max(np.abs(rec_m - phi_m.values)))
        report["jump"][name] = err
        if err > jump_tol:
            report["pass"] = False
            raise AssertionError(
                f"jump reconstruction failed on '{name}': {err:.3e}"
            )
    return report
