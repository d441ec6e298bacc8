"""Pseudo-time stepping of the reinitialization equation."""

from dataclasses import dataclass, field as dc_field

import numpy as np

from .field import band_mask
from .hamiltonian import rhs_fv, rhs_ldg
from .regularization import evaluate_state, regularized_rhs

RK3_A = (0.0, -5.0 / 9.0, -153.0 / 128.0)
RK3_B = (1.0 / 3.0, 15.0 / 16.0, 8.0 / 15.0)

SCHEMES = ("ldg", "fv", "regularized")


class DivergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class TimeConfig:
    cfl: float = 0.5
    integrator: str = "rk3"
    xi_tol: float = 1e-12
    n_stall: int = 100
    max_iter: int = 10000
    degree_scaling: bool = True

    def __post_init__(self):
        if not 0 < self.cfl <= 1:
            raise ValueError(f"CFL must lie in (0, 1], got {self.cfl}")
        if self.integrator not in ("euler", "rk3"):
            raise ValueError(f"unknown integrator {self.integrator!r}")
        if not self.xi_tol > 0:
            raise ValueError(f"xi_tol must be positive, got {self.xi_tol}")
        if self.n_stall < 1:
            raise ValueError(f"n_stall must be >= 1, got {self.n_stall}")
        if self.max_iter < 0:
            raise ValueError(f"max_iter must be >= 0, got {self.max_iter}")


@dataclass
class RunReport:
    iterations: int
    final_residual: float
    cause: str                 # tolerance | stall | max-iter
    history: list = dc_field(default_factory=list)
    dt: float = float("nan")
    alpha: np.ndarray = None   # last blend factors, regularized runs only


def compute_dt(space, field, cfg):
    if not field.signs_frozen:
        raise ValueError("signs must be frozen before computing the time step")
    act = np.flatnonzero(field.active)
    if act.size == 0:
        raise ValueError("no active elements: nothing to reinitialize")
    lam = float(np.abs(field.sign_nodes).max())
    if lam == 0.0:
        lam = 1.0
    dt = cfg.cfl * space.metrics.dx[act].min() / lam
    if cfg.degree_scaling:
        dt /= 2 * space.N + 1
    return dt


def _clip(field, elems=None):
    if field.cutoff is not None:
        c = field.cutoff
        if elems is None:
            field.set_values(np.clip(field.phi, -c, c))
        else:
            field.set_values(np.clip(field.phi[elems], -c, c), elems)


def euler_step(field, dt, rhs, elems=None):
    """``phi <- phi + dt * rhs(field)`` followed by the cut-off.

    With *elems* only those elements are updated.
    """
    if elems is None:
        field.set_values(field.phi + dt * rhs(field))
    else:
        field.set_values(field.phi[elems] + dt * rhs(field)[elems], elems)
    _clip(field, elems)
    return field


def rk3_step(field, dt, rhs, elems=None):
    """Williamson's low-storage three-stage scheme followed by the cut-off."""
    sel = slice(None) if elems is None else elems
    phi = field.phi[sel].copy()
    k = np.zeros_like(phi)
    for a, b in zip(RK3_A, RK3_B):
        k = a * k + dt * rhs(field)[sel]
        phi = phi + b * k
        field.set_values(phi.copy(), elems)
    _clip(field, elems)
    return field


def reinitialize(space, field, cfg, scheme="ldg", indicator=None, sink=None, callback=None):
    """Advance *field* in pseudo time until one of the termination criteria fires.

    ``sink`` is an optional text stream receiving ``iteration,residual`` rows.
    ``callback(it, field, residual)`` is invoked after every step.
    """
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}, expected one of {SCHEMES}")
    if scheme == "regularized" and indicator is None:
        raise ValueError("the regularized scheme needs an indicator configuration")
    if not field.signs_frozen:
        raise ValueError("freeze the smoothed sign before reinitializing")
    field.active = band_mask(space, field.phi, field.cutoff)
    dt = compute_dt(space, field, cfg)
    step = rk3_step if cfg.integrator == "rk3" else euler_step
    K = space.n_elements
    state = None

    if sink is not None:
        sink.write("iteration,residual\n")
    history = []
    prev = np.inf
    stall = 0
    cause = "max-iter"
    res = float("nan")
    for it in range(1, cfg.max_iter + 1):
        act = np.flatnonzero(field.active)
        if scheme == "ldg":
            rhs = lambda f: rhs_ldg(space, f, act)
        elif scheme == "fv":
            rhs = lambda f: rhs_fv(space, f, act)
        else:
            state = evaluate_state(space, field, indicator)
            rhs = lambda f: regularized_rhs(space, f, state, act)
        old = field.phi[act].copy()
        step(field, dt, rhs, act)
        new = field.phi[act]
        if not np.isfinite(new).all():
            raise DivergenceError(f"non-finite level set at iteration {it}")
        res = float(np.abs(new - old).max()) if act.size else 0.0
        history.append(res)
        if sink is not None:
            sink.write(f"{it},{res:.17g}\n")
        if callback is not None:
            callback(it, field, res)
        if res <= cfg.xi_tol:
            cause = "tolerance"
            break
        # consecutive steps without a decrease of the residual
        stall = 0 if res < prev else stall + 1
        prev = res
        if stall >= cfg.n_stall:
            cause = "stall"
            break
        field.active = band_mask(space, field.phi, field.cutoff)
    if state is None and scheme == "regularized":
        state = evaluate_state(space, field, indicator)
    return RunReport(len(history), res, cause, history, dt,
                     None if state is None else state.alpha.reshape(K))
