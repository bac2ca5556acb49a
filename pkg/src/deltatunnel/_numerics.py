"""Small numerical helpers shared across modules."""

from __future__ import annotations

import numpy as np

from .errors import StencilError, ValidationError


def simpson_weights(grid) -> np.ndarray:
    """Composite Simpson weights for a uniform grid with an odd number of points."""
    grid = np.asarray(grid, dtype=float)
    n = grid.size
    if n < 3 or n % 2 == 0:
        raise ValidationError(f"Simpson's rule needs an odd number (>= 3) of points, got {n}")
    h = (grid[-1] - grid[0]) / (n - 1)
    if not np.allclose(np.diff(grid), h, rtol=1e-9, atol=0):
        raise ValidationError("Simpson's rule here needs a uniform grid")
    w = np.full(n, 2.0)
    w[1::2] = 4.0
    w[0] = w[-1] = 1.0
    return w * h / 3


def odd_grid(lo, hi, n) -> np.ndarray:
    """Uniform grid on [lo, hi] with at least ``n`` points, rounded up to an odd count."""
    n = int(n)
    n += 1 - n % 2
    return np.linspace(lo, hi, max(n, 3))


def central_phase_derivative(phase_at, x, h, max_step=np.pi / 2):
    """Second-order central difference of an (unwrapped) phase.

    ``phase_at`` maps an array of abscissae to wrapped phases.  The three
    stencil phases are unwrapped; an increment larger than ``max_step`` on
    either half means the stencil straddles a jump.
    """
    ph = np.unwrap(phase_at(np.array([x - h, x, x + h])))
    steps = np.diff(ph)
    if np.any(np.abs(steps) > max_step):
        raise StencilError(
            f"phase changes by {np.max(np.abs(steps)):.3g} rad over one step at {x}; "
            "use a smaller step"
        )
    return (ph[2] - ph[0]) / (2 * h)


def richardson(estimate, h, floor=0.0):
    """Value at step ``h`` plus an error estimate from halving the step.

    For a second-order scheme the error at ``h`` is ``4/3`` of the change
    seen when halving; ``floor`` adds a round-off allowance.
    """
    coarse = estimate(h)
    fine = estimate(h / 2)
    return coarse, 4.0 / 3.0 * abs(fine - coarse) + floor
