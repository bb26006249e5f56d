"""Pure numpy versions of the upwind level-set steps in ``_hj.pyx``."""
import numpy as np


def hj_step_1d(phi, vel, lam):
    p = np.pad(phi, 1, mode="edge")
    dm = phi - p[:-2]
    dp = p[2:] - phi
    L = np.where(vel > 0, vel * dm[:, None], vel * dp[:, None])
    return phi - lam * L.max(axis=1)


def hj_step_2d(phi, vel, lam):
    p = np.pad(phi, 1, mode="edge")
    dxm = (phi - p[:-2, 1:-1])[..., None]
    dxp = (p[2:, 1:-1] - phi)[..., None]
    dym = (phi - p[1:-1, :-2])[..., None]
    dyp = (p[1:-1, 2:] - phi)[..., None]
    vx = vel[..., 0]
    vy = vel[..., 1]
    L = np.where(vx > 0, vx * dxm, vx * dxp) + np.where(vy > 0, vy * dym, vy * dyp)
    return phi - lam * L.max(axis=-1)
