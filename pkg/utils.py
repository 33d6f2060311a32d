import torch

CDTYPE = torch.complex128
RDTYPE = torch.float64


def as_frequency(omega):
    # float, list or tensor -> complex128 tensor, shape preserved
    if isinstance(omega, torch.Tensor) and omega.is_complex():
        return omega.to(CDTYPE)
    return torch.as_tensor(omega, dtype=RDTYPE).to(CDTYPE)


def as_real(values):
    return torch.as_tensor(values, dtype=RDTYPE)


def linear_grid(start: float, stop: float, steps: int):
    return torch.linspace(start, stop, steps, dtype=RDTYPE)


def log_grid(start: float, stop: float, steps: int):
    return torch.logspace(torch.log10(as_real(start)).item(), torch.log10(as_real(stop)).item(), steps, dtype=RDTYPE)


def centered_grid(center: float, halfwidth: float, steps: int):
    return linear_grid(center - halfwidth, center + halfwidth, steps)


def _crossing(x0, x1, y0, y1, level):
    # linear interpolation of where the curve passes through level
    return x0 + (level - y0) * (x1 - x0) / (y1 - y0)


def width_above(grid, values, level: float, index: int):
    """Full width of the contiguous region around `index` where values > level.

    Returns (width, clipped); clipped is True when the region runs into an
    end of the grid, in which case the width is a lower bound.
    """
    x = as_real(grid)
    y = as_real(values)
    n = y.shape[0]
    if y[index].item() <= level:
        return 0.0, False

    below = torch.nonzero(y <= level).flatten()
    left_below = below[below < index]
    right_below = below[below > index]
    lo = left_below[-1].item() + 1 if left_below.numel() else 0
    hi = right_below[0].item() - 1 if right_below.numel() else n - 1

    if lo == 0:
        left = x[0].item()
    else:
        left = _crossing(x[lo - 1].item(), x[lo].item(), y[lo - 1].item(), y[lo].item(), level)
    if hi == n - 1:
        right = x[-1].item()
    else:
        right = _crossing(x[hi].item(), x[hi + 1].item(), y[hi].item(), y[hi + 1].item(), level)
    return right - left, (lo == 0 or hi == n - 1)


def fwhm(grid, values):
    y = as_real(values)
    index = int(torch.argmax(y).item())
    width, _ = width_above(grid, y, y[index].item() / 2, index)
    return width


def relative_error(x, y, floor=None):
    # |x - y| / |y|, with an optional per-point floor on the denominator
    x = torch.as_tensor(x)
    y = torch.as_tensor(y)
    denom = torch.abs(y)
    if floor is not None:
        denom = torch.maximum(denom, torch.as_tensor(floor, dtype=denom.dtype))
    err = torch.abs(x - y) / denom
    return torch.where(torch.abs(x - y) == 0, torch.zeros_like(err), err)
