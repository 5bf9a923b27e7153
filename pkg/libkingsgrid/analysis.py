"""Norms, Bessel reference values and log-log regression shared by the decay and evolution experiments."""

import math
from dataclasses import dataclass
from typing import Any, Sequence, Tuple
import numpy as np
from scipy import stats, integrate
from libkingsgrid.logs import start_logger
from libkingsgrid.exceptions import FitError

logger = start_logger(__name__)
'''Not in docs. helper functions'''


def check_positive(values: Any, name: str = 'values'):
    """Check that every entry is a finite positive number"""
    values = np.asarray(values, dtype=float)
    if np.any(~np.isfinite(values)) or np.any(values <= 0):
        logger.error('Oops! An error Occurred ⚠️')
        raise FitError("All {} must be finite and positive.".format(name))


def check_increasing(values: Any, name: str = 't'):
    """Check strictly increasing order"""
    if np.any(np.diff(np.asarray(values, dtype=float)) <= 0):
        logger.error('Oops! An error Occurred ⚠️')
        raise FitError("{} must be strictly increasing.".format(name))


def check_inputs_length(*args):
    """Check if inputs have any length difference"""
    lengths = [len(arr) for arr in args]
    if not all(length == lengths[0] for length in lengths):
        logger.error('Oops! An error Occurred ⚠️')
        raise FitError("Mismatched data lengths. Please ensure that all data is of same length.")


def japanese_bracket(t: Any) -> Any:
    """⟨t⟩ = sqrt(1 + t²)"""
    return np.sqrt(1.0 + np.square(t))


def geometric_ladder(start: float, stop: float, ratio: float = 2.0) -> np.ndarray:
    """start, start·ratio, ... up to and including stop"""
    count = int(math.floor(math.log(stop / start) / math.log(ratio) + 1e-9)) + 1
    return start * ratio**np.arange(count)


"""Bessel reference"""


def bessel_jn_table(order: int, x: float) -> np.ndarray:
    """J_0(x) .. J_order(x) by Miller's downward recurrence, normalised with J_0 + 2ΣJ_2k = 1"""
    x = float(x)
    order = int(order)
    if x == 0.0:
        table = np.zeros(order + 1)
        table[0] = 1.0
        return table
    start = order + int(abs(x)) + 20 + int(10 * math.sqrt(order + abs(x)))
    start += start % 2
    table = np.zeros(start + 2)
    table[start] = 1e-300
    for n in range(start, 0, -1):
        table[n - 1] = 2.0 * n / x * table[n] - table[n + 1]
        if abs(table[n - 1]) > 1e250:
            table[n - 1:] *= 1e-250
    norm = table[0] + 2.0 * table[2::2].sum()
    return (table / norm)[:order + 1]


def bessel_jn(n: int, x: float) -> float:
    """J_n(x) for any integer n and real x"""
    n = int(n)
    sign = 1.0
    if n < 0:
        n = -n
        sign *= (-1.0)**n
    if x < 0:
        x = -x
        sign *= (-1.0)**n
    return sign * float(bessel_jn_table(n, x)[n])


def chain_kernel_reference(n: int, t: float) -> complex:
    """e^{−2it}·iⁿ·J_n(2t), the nearest-neighbour chain kernel in closed form"""
    return complex(np.exp(-2j * t) * 1j**(int(n) % 4) * bessel_jn(n, 2.0 * t))


"""Norms"""


def lp_norm(values: Any, r: float, axes: Any = None) -> Any:
    """ℓ^r norm over the given axes, r = inf giving the sup norm"""
    magnitude = np.abs(values)
    if math.isinf(r):
        return np.max(magnitude, axis=axes)
    return np.sum(magnitude**r, axis=axes)**(1.0 / r)


def mixed_norm(times: Sequence[float], spatial_norms: Sequence[float], q: float) -> float:
    """L^q in time of a sampled ℓ^r trace, composite trapezoid; q = inf giving the max"""
    spatial_norms = np.asarray(spatial_norms, dtype=float)
    if math.isinf(q):
        return float(spatial_norms.max())
    return float(integrate.trapezoid(spatial_norms**q, np.asarray(times, dtype=float))**(1.0 / q))


def running_mixed_norm(times: Sequence[float], spatial_norms: Sequence[float], q: float) -> np.ndarray:
    """L^q norm over [t_0, t_k] for every recorded k"""
    spatial_norms = np.asarray(spatial_norms, dtype=float)
    if math.isinf(q):
        return np.maximum.accumulate(spatial_norms)
    integral = integrate.cumulative_trapezoid(spatial_norms**q, np.asarray(times, dtype=float), initial=0.0)
    return integral**(1.0 / q)


"""Regression"""


@dataclass(frozen=True)
class LogLogLine:
    slope: float
    intercept: float
    stderr: float
    residuals: np.ndarray


def log_log_regression(x: Sequence[float], y: Sequence[float]) -> LogLogLine:
    """Least-squares line through (log x, log y); stderr is the standard error of the slope"""
    check_inputs_length(x, y)
    check_positive(x, 'abscissae')
    check_positive(y, 'magnitudes')
    log_x, log_y = np.log(np.asarray(x, dtype=float)), np.log(np.asarray(y, dtype=float))
    if len(log_x) == 2:
        slope = (log_y[1] - log_y[0]) / (log_x[1] - log_x[0])
        intercept = log_y[0] - slope * log_x[0]
        return LogLogLine(float(slope), float(intercept), 0.0, np.zeros(2))
    fit = stats.linregress(log_x, log_y)
    residuals = log_y - (fit.intercept + fit.slope * log_x)
    return LogLogLine(float(fit.slope), float(fit.intercept), float(fit.stderr), residuals)


def trend_slope(x: Sequence[float], y: Sequence[float]) -> float:
    return log_log_regression(x, y).slope
