"""Per-electrode phosphene kernels: a Gaussian blob plus an optional streak."""
import math

import numpy as np

from .._accel import USE_NUMBA, njit


def streak_points(cx, cy, ox, oy, decay_px, n_steps):
    """Deposit centres and peak weights for one electrode (numpy helper)."""
    xs = [cx]
    ys = [cy]
    ws = [1.0]
    dx, dy = ox - cx, oy - cy
    dist = math.hypot(dx, dy)
    if decay_px > 0 and n_steps > 0 and dist > 0:
        ux, uy = dx / dist, dy / dist
        for t in range(1, n_steps + 1):
            xs.append(cx + t * ux)
            ys.append(cy + t * uy)
            ws.append(math.exp(-t / decay_px))
    return np.array(xs), np.array(ys), np.array(ws)


def electrode_basis_np(centers, origin, sigma, decay_px, n_steps, height, width):
    n = centers.shape[0]
    out = np.empty((n, height, width))
    px = np.arange(width, dtype=np.float64)
    py = np.arange(height, dtype=np.float64)
    inv = 1.0 / (2.0 * sigma * sigma)
    for e in range(n):
        xs, ys, ws = streak_points(centers[e, 0], centers[e, 1], origin[0], origin[1], decay_px, n_steps)
        gx = np.exp(-((px[None, :] - xs[:, None]) ** 2) * inv)
        gy = np.exp(-((py[None, :] - ys[:, None]) ** 2) * inv)
        out[e] = (gy * ws[:, None]).T @ gx
    return out


@njit
def electrode_basis_nb(centers, origin, sigma, decay_px, n_steps, height, width):
    n = centers.shape[0]
    out = np.zeros((n, height, width))
    inv = 1.0 / (2.0 * sigma * sigma)
    gx = np.empty(width)
    gy = np.empty(height)
    for e in range(n):
        cx = centers[e, 0]
        cy = centers[e, 1]
        dx = origin[0] - cx
        dy = origin[1] - cy
        dist = math.sqrt(dx * dx + dy * dy)
        steps = n_steps if (decay_px > 0.0 and dist > 0.0) else 0
        ux = dx / dist if dist > 0.0 else 0.0
        uy = dy / dist if dist > 0.0 else 0.0
        for t in range(steps + 1):
            x0 = cx + t * ux
            y0 = cy + t * uy
            w = 1.0 if t == 0 else math.exp(-t / decay_px)
            for i in range(width):
                d = i - x0
                gx[i] = math.exp(-d * d * inv)
            for j in range(height):
                d = j - y0
                gy[j] = w * math.exp(-d * d * inv)
            for j in range(height):
                g = gy[j]
                for i in range(width):
                    out[e, j, i] += g * gx[i]
    return out


electrode_basis = electrode_basis_nb if USE_NUMBA else electrode_basis_np
