"""Error metrics, exponential-rate fitting, and sufficiency thresholds.

The threshold calculator implements the per-theorem sufficient conditions
on the gain mu and the observation resolution h as exact formulas in the
Grashof number G.  The analysis constants they contain are not pinned by
theory; defaults below are declared placeholders, overridable and always
reported alongside any computed threshold.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dynamics import ElsasserParams, Trajectory
from .spectral import SpectralVectorField, h1_seminorm, l2_norm

NORM_FLOOR = 1e-14

THM_ALL = "thm-all"
THM_FIRST = "thm-first"
THM_V = "thm-v"
THM_H1_ALL = "thm-h1-all"
THM_H1_FIRST = "thm-h1-first"
THM_H1_V = "thm-h1-v"
THM_T2_FIRST = "thm-t2-first"
THEOREM_IDS = (THM_ALL, THM_FIRST, THM_V, THM_H1_ALL, THM_H1_FIRST,
               THM_H1_V, THM_T2_FIRST)

_H1_IDS = (THM_H1_ALL, THM_H1_FIRST, THM_H1_V)


class ClockMismatchError(ValueError):
    pass


# ---------------------------------------------------------------------------
# error series


@dataclass
class ErrorSeries:
    times: np.ndarray
    l2_eta: np.ndarray
    l2_zeta: np.ndarray
    h1_eta: np.ndarray
    h1_zeta: np.ndarray
    fitted_rates: dict = field(default_factory=dict)

    def __post_init__(self):
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("sample times must be strictly increasing")

    def l2_total(self) -> np.ndarray:
        return np.sqrt(self.l2_eta ** 2 + self.l2_zeta ** 2)

    def h1_total(self) -> np.ndarray:
        return np.sqrt(self.h1_eta ** 2 + self.h1_zeta ** 2)

    def save_csv(self, path):
        with open(path, "w") as fh:
            fh.write("t,l2_eta,l2_zeta,h1_eta,h1_zeta\n")
            for i in range(len(self.times)):
                row = (self.times[i], self.l2_eta[i], self.l2_zeta[i],
                       self.h1_eta[i], self.h1_zeta[i])
                fh.write(",".join(repr(float(x)) for x in row) + "\n")

    @classmethod
    def load_csv(cls, path):
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        return cls(data[:, 0], data[:, 1], data[:, 2], data[:, 3], data[:, 4])


def error_norms(reference, assimilated):
    """One (l2_eta, l2_zeta, h1_eta, h1_zeta) record from two states."""
    if reference.t != assimilated.t:
        raise ClockMismatchError(
            f"states at different times: {reference.t} vs {assimilated.t}")
    grid = reference.v.grid
    eta = SpectralVectorField(grid, reference.v.coef - assimilated.v.coef)
    zeta = SpectralVectorField(grid, reference.w.coef - assimilated.w.coef)
    return l2_norm(eta), l2_norm(zeta), h1_seminorm(eta), h1_seminorm(zeta)


# ---------------------------------------------------------------------------
# rate fitting


def fit_exponential_rate(times: np.ndarray, values: np.ndarray,
                         window: float = 0.5):
    """Least-squares slope of ln(values) over the trailing `window` fraction.

    Returns (rate, r_squared) with rate = -slope, so positive means decay.
    """
    if not 0 < window <= 1:
        raise ValueError("window must lie in (0, 1]")
    n = len(times)
    start = int(np.floor(n * (1.0 - window)))
    t = np.asarray(times[start:], dtype=float)
    v = np.maximum(np.asarray(values[start:], dtype=float), NORM_FLOOR)
    if len(t) < 10:
        raise ValueError(f"rate fit needs >= 10 samples in window, got {len(t)}")
    y = np.log(v)
    slope, intercept = np.polyfit(t, y, 1)
    pred = slope * t + intercept
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return float(-slope), float(r2)


def onset_time(times: np.ndarray, values: np.ndarray) -> float:
    """Time at which decay begins: the location of the series maximum."""
    return float(times[int(np.argmax(values))])


def decay_window_fit(times: np.ndarray, values: np.ndarray,
                     drop: float = 1e-6, floor: float = NORM_FLOOR):
    """Log-linear fit over the decaying segment from the peak down to
    peak*drop (or to the floor, whichever is higher).

    Returns a dict with the achieved decay magnitude (in orders of ten),
    the fitted rate and R^2 over the segment, and whether the requested
    drop was reached.
    """
    values = np.maximum(np.asarray(values, dtype=float), floor)
    i0 = int(np.argmax(values))
    peak = values[i0]
    target = max(peak * drop, floor)
    below = np.nonzero(values[i0:] <= target)[0]
    reached = len(below) > 0
    i1 = i0 + int(below[0]) if reached else len(values) - 1
    seg_t = times[i0:i1 + 1]
    seg_v = values[i0:i1 + 1]
    if len(seg_t) >= 3:
        y = np.log(seg_v)
        slope, intercept = np.polyfit(seg_t, y, 1)
        pred = slope * seg_t + intercept
        ss_tot = float(np.sum((y - y.mean()) ** 2))
        r2 = 1.0 if ss_tot == 0 else 1.0 - float(np.sum((y - pred) ** 2)) / ss_tot
        rate = -float(slope)
    else:
        rate, r2 = 0.0, 0.0
    terminal = values[-1]
    return {
        "peak": float(peak),
        "terminal": float(terminal),
        "orders_of_decay": float(np.log10(peak / max(terminal, floor))),
        "reached_drop": bool(reached),
        "rate": rate,
        "r_squared": r2,
        "onset_time": float(times[i0]),
    }


# ---------------------------------------------------------------------------
# analysis constants and theorem thresholds


@dataclass(frozen=True)
class AnalysisConstants:
    """Unquantified analysis constants with declared defaults.

    c_L is the Ladyzhenskaya constant; c_B/c_T the Brezis-Gallouet-type
    constants; c_M the H2 a-priori constant.  Derived entries (c, C and the
    two log-offset constants) follow their stated definitions unless
    overridden.
    """

    c_L: float = (2.0 * np.pi) ** -0.5
    c_B: float = 1.0
    c_T: float = 1.0
    c_M: float = 1.0
    c: float | None = None
    C: float | None = None
    c_tilde_first: float | None = None
    c_tilde_t2: float | None = None

    def resolved(self) -> dict:
        c = self.c if self.c is not None else max(self.c_L / 4.0, 1.5 * self.c_B)
        C = self.C if self.C is not None else (81.0 / 4.0) * self.c_L ** 8
        ct2 = (self.c_tilde_t2 if self.c_tilde_t2 is not None else
               np.log(250.0 * (self.c_B + self.c_T) ** 2
                      * (20.0 * np.pi ** 2 + self.c_M)) / 8.0)
        ct1 = self.c_tilde_first if self.c_tilde_first is not None else ct2
        return {"c_L": self.c_L, "c_B": self.c_B, "c_T": self.c_T,
                "c_M": self.c_M, "c": c, "C": C,
                "c_tilde_first": ct1, "c_tilde_t2": ct2}


@dataclass
class TheoremThresholds:
    theorem_id: str
    G: float
    mu_min: float
    h_max: float
    constants_used: dict

    def __post_init__(self):
        if self.mu_min < 0 or self.h_max <= 0:
            raise ValueError("thresholds must be positive")


def theorem_thresholds(theorem_id: str, G: float, params: ElsasserParams,
                       constants: AnalysisConstants | None = None,
                       c1: float | None = None, c2: float | None = None,
                       c3: float | None = None,
                       mu_margin: float = 0.0) -> TheoremThresholds:
    """Sufficient (mu_min, h_max) per theorem; h_max is evaluated at the
    chosen gain mu = mu_min * (1 + mu_margin)."""
    if theorem_id not in THEOREM_IDS:
        raise ValueError(f"unknown theorem id {theorem_id!r}")
    if G < 0:
        raise ValueError("G must be nonnegative")
    constants = constants or AnalysisConstants()
    k = constants.resolved()
    nub = params.nu_bar
    used = dict(k)
    used["G"] = G
    if theorem_id == THM_T2_FIRST:
        if c2 is None or c3 is None:
            raise ValueError("type-2 thresholds need interpolant constants c2, c3")
        used["c2"], used["c3"] = c2, c3
    else:
        if c1 is None:
            raise ValueError("type-1 thresholds need interpolant constant c1")
        used["c1"] = c1

    if G == 0.0:
        return TheoremThresholds(theorem_id, G, 0.0, np.inf, used)

    if theorem_id in (THM_ALL, THM_H1_ALL):
        mu_min = np.pi ** 2 * (k["c_L"] ** 4 + nub ** 4) * G ** 2 / nub
    elif theorem_id in (THM_FIRST, THM_H1_FIRST):
        mu_min = (32.0 * np.pi ** 2 * k["c"] ** 2 * nub
                  * (k["c_tilde_first"] + 2.0 * np.log(G) + k["C"] * G ** 4)
                  * G ** 2)
    elif theorem_id in (THM_V, THM_H1_V):
        mu_min = (np.pi ** 2 * k["c_L"] ** 4 * G ** 2
                  * (4.0 + nub ** 2 * G ** 2) ** 2 / (16.0 * nub))
    else:  # THM_T2_FIRST
        mu_min = (2000.0 * (k["c_B"] + k["c_T"]) ** 2
                  * (20.0 * np.pi ** 2 + k["c_M"]) * G ** 2
                  * (1.0 + G ** 2) ** 3 * np.exp(2.0 * k["C"] * G ** 4)
                  * (k["c_tilde_t2"] + np.log(1.0 + G) + k["C"] * G ** 4))
    mu_min = float(max(mu_min, 0.0))
    mu = mu_min * (1.0 + mu_margin)
    if mu <= 0:
        h_max = np.inf
    elif theorem_id == THM_T2_FIRST:
        h_max = float(np.sqrt(nub / (2.0 * mu * max(c2 ** 2, c3))))
    elif theorem_id in _H1_IDS:
        h_max = float((2.0 * np.sqrt(2.0) * c1) ** -1 * nub ** 0.5 * mu ** -0.5)
    else:
        h_max = float(c1 ** -1 * nub ** 0.5 * mu ** -0.5)
    return TheoremThresholds(theorem_id, G, mu_min, h_max, used)


# ---------------------------------------------------------------------------
# Gronwall-condition and a-priori-bound checks


def _window_integrals(times: np.ndarray, values: np.ndarray, T: float):
    """Sliding-window integrals of a sampled function over [t, t+T]."""
    times = np.asarray(times, float)
    values = np.asarray(values, float)
    dt = np.diff(times)
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (values[1:] + values[:-1]) * dt)])

    def integral_at(t):
        return np.interp(t, times, cum)

    out = []
    starts = []
    for i, t0 in enumerate(times):
        t1 = t0 + T
        if t1 > times[-1] + 1e-12:
            break
        # require enough samples inside the window for the quadrature
        n_inside = np.searchsorted(times, t1 + 1e-12) - i
        out.append(integral_at(t1) - cum[i])
        starts.append((t0, n_inside))
    return np.array(out), starts


def gronwall_condition_check(times: np.ndarray, psi: np.ndarray, T: float):
    """Empirical proxies for the generalized-Gronwall hypotheses.

    Windowed averages over length T; the liminf proxy is the minimum window
    average of psi, the limsup proxy the maximum window average of
    psi^- = max(0, -psi).
    """
    times = np.asarray(times, float)
    if times[-1] - times[0] < 3.0 * T:
        raise ValueError("run must span at least 3 window lengths")
    ints, _ = _window_integrals(times, np.asarray(psi, float), T)
    neg_ints, _ = _window_integrals(times, np.maximum(0.0, -np.asarray(psi, float)), T)
    min_avg = float(np.min(ints) / T)
    max_neg_avg = float(np.max(neg_ints) / T)
    return {
        "T": T,
        "min_window_average": min_avg,
        "max_window_average_negative_part": max_neg_avg,
        "liminf_condition": min_avg > 0.0,
        "limsup_condition": bool(np.isfinite(max_neg_avg)),
    }


def check_int_bound(traj: Trajectory, G: float, params: ElsasserParams,
                    T: float | None = None, min_samples_per_window: int = 8):
    """Verify the time-averaged enstrophy bound

        int_t^{t+T} (|grad v|^2 + |grad w|^2) <= (1 + T pi^2 nub) nub G^2

    over every window start, via trapezoidal quadrature.  Returns the worst
    margin (bound - integral); pass means worst margin >= -1e-10.
    """
    nub = params.nu_bar
    if T is None:
        T = 1.0 / (np.pi ** 2 * nub)
    H = traj.enstrophy()
    ints, starts = _window_integrals(traj.times, H, T)
    if len(ints) == 0 or min(n for _, n in starts) < min_samples_per_window:
        raise ValueError(
            f"need >= {min_samples_per_window} samples per window of length {T:.3g}")
    bound = (1.0 + T * np.pi ** 2 * nub) * nub * G ** 2
    margins = bound - ints
    worst = float(np.min(margins))
    return {
        "T": T,
        "bound": float(bound),
        "worst_margin": worst,
        "worst_window_start": float(starts[int(np.argmin(margins))][0]),
        "passed": worst >= -1e-10,
    }
