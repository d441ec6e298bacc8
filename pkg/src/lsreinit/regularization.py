"""Modal smoothness indicator and LDG / FV sub-cell blending."""

from dataclasses import dataclass

import numpy as np

from .basis import apply_along
from .hamiltonian import rhs_fv, rhs_ldg


@dataclass(frozen=True)
class IndicatorConfig:
    s_low: float
    s_up: float
    n_modes: int = 2

    def __post_init__(self):
        if not self.s_low < self.s_up:
            raise ValueError(f"need s_low < s_up, got s_low={self.s_low}, s_up={self.s_up}")
        if self.n_modes not in (1, 2):
            raise ValueError(f"n_modes must be 1 or 2, got {self.n_modes}")


@dataclass
class RegularizationState:
    indicator: np.ndarray    # (K,) log10 scale, -inf when the high modes vanish
    alpha: np.ndarray        # (K,) 0 = pure LDG, 1 = pure FV


def modal_indicator(ref, phi, n_modes):
    """Per-element log10 energy ratio of the highest modes, maximised over all tensor lines.

    The zeroth modal coefficient of every line is shifted by +1 first.
    Mode 0 itself is never a candidate (its ratio is identically one).
    """
    N = ref.N
    if N < 1:
        raise ValueError("the modal indicator needs N >= 1")
    if not 1 <= n_modes <= N:
        raise ValueError(f"n_modes must lie in [1, N={N}], got {n_modes}")
    d = phi.ndim - 1
    K = phi.shape[0]
    lo = max(N - n_modes, 1)
    best = np.zeros(K)
    for m in range(d):
        c = apply_along(ref.Vinv, phi, 1 + m)
        c = np.moveaxis(c, 1 + m, -1).reshape(K, -1, N + 1).copy()
        c[..., 0] += 1.0
        e = c * c
        total = np.cumsum(e, axis=-1)
        num = e[..., lo:]
        den = total[..., lo:]
        ratio = np.divide(num, den, out=np.zeros_like(num), where=den > 0)
        best = np.maximum(best, ratio.reshape(K, -1).max(axis=1))
    with np.errstate(divide="ignore"):
        return np.log10(best)


def blend_factor(S, s_low, s_up):
    if not s_low < s_up:
        raise ValueError(f"need s_low < s_up, got {s_low}, {s_up}")
    S = np.asarray(S, dtype=float)
    a = np.clip((S - s_low) / (s_up - s_low), 0.0, 1.0)
    return np.where(np.isneginf(S), 0.0, a)


def evaluate_state(space, field, cfg):
    S = modal_indicator(space.ref, field.phi, cfg.n_modes)
    return RegularizationState(S, blend_factor(S, cfg.s_low, cfg.s_up))


def regularized_rhs(space, field, state, elems=None):
    """Blend ``(1 - alpha) * rhs_ldg + alpha * R rhs_fv`` element by element.

    Each scheme is only evaluated on the elements whose blend factor needs it.
    """
    K = space.n_elements
    sel = np.ones(K, dtype=bool) if elems is None else np.isin(np.arange(K), elems)
    alpha = state.alpha
    need_ldg = np.flatnonzero(sel & (alpha < 1.0))
    need_fv = np.flatnonzero(sel & (alpha > 0.0))
    out = np.zeros(space.tensor_shape)
    shape = (-1,) + (1,) * space.dim
    if need_ldg.size:
        r = rhs_ldg(space, field, need_ldg)[need_ldg]
        out[need_ldg] += (1.0 - alpha[need_ldg]).reshape(shape) * r
    if need_fv.size:
        r = rhs_fv(space, field, need_fv)[need_fv]
        out[need_fv] += alpha[need_fv].reshape(shape) * r
    return out
