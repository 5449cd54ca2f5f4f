"""Differentiable sRGB -> CIELAB conversion and color statistics.

All functions are pure torch so gradients flow end to end. Inputs are
channel-major RGB tensors in [0, 1]; shapes ``(3, H, W)`` or ``(B, 3, H, W)``
are both accepted (the channel axis is ``-3``).

The sRGB -> XYZ matrix is the D65 2-degree observer matrix; the reference
white is defined as its exact row sums so that pure white maps to exactly
(100, 0, 0).
"""

from __future__ import annotations

from dataclasses import dataclass

import torch

# sRGB (D65) -> XYZ. Row sums double as the reference white.
_SRGB_TO_XYZ = (
    (0.4124564, 0.3575761, 0.1804375),
    (0.2126729, 0.7151522, 0.0721750),
    (0.0193339, 0.1191920, 0.9503041),
)

_GAMMA_KNEE = 0.04045
_DELTA = 6.0 / 29.0  # CIELAB f(t) branch point is _DELTA**3


@dataclass(frozen=True)
class LabTriple:
    """A single CIELAB color, used at reporting boundaries."""

    l: float
    a: float
    b: float

    @staticmethod
    def from_tensor(t: torch.Tensor) -> "LabTriple":
        v = t.detach().reshape(3).tolist()
        return LabTriple(float(v[0]), float(v[1]), float(v[2]))


def _matrix(dtype: torch.dtype, device: torch.device) -> torch.Tensor:
    return torch.tensor(_SRGB_TO_XYZ, dtype=dtype, device=device)


def srgb_to_linear(rgb: torch.Tensor) -> torch.Tensor:
    """Invert the sRGB transfer curve (piecewise gamma, knee at 0.04045)."""
    safe = torch.where(rgb > _GAMMA_KNEE, rgb, torch.full_like(rgb, _GAMMA_KNEE))
    gamma = ((safe + 0.055) / 1.055).pow(2.4)
    return torch.where(rgb > _GAMMA_KNEE, gamma, rgb / 12.92)


def rgb_to_xyz(rgb: torch.Tensor) -> torch.Tensor:
    lin = srgb_to_linear(rgb)
    m = _matrix(rgb.dtype, rgb.device)
    return torch.einsum("ij,...jhw->...ihw", m, lin)


def _lab_f(t: torch.Tensor) -> torch.Tensor:
    cube_knee = _DELTA**3
    safe = torch.where(t > cube_knee, t, torch.full_like(t, cube_knee))
    cube = safe.pow(1.0 / 3.0)
    lin = t / (3.0 * _DELTA * _DELTA) + 4.0 / 29.0
    return torch.where(t > cube_knee, cube, lin)


def rgb_to_lab(rgb: torch.Tensor) -> torch.Tensor:
    """Convert RGB in [0, 1] to CIELAB, shape preserved.

    Differentiable everywhere on the domain (the piecewise branches are
    selected with NaN-safe ``where`` guards).
    """
    xyz = rgb_to_xyz(rgb)
    white = _matrix(rgb.dtype, rgb.device).sum(dim=1)
    t = xyz / white.reshape((3, 1, 1))
    fx = _lab_f(t[..., 0, :, :])
    fy = _lab_f(t[..., 1, :, :])
    fz = _lab_f(t[..., 2, :, :])
    l = 116.0 * fy - 16.0
    a = 500.0 * (fx - fy)
    b = 200.0 * (fy - fz)
    return torch.stack((l, a, b), dim=-3)


def masked_lab_mean(image: torch.Tensor, weights: torch.Tensor) -> torch.Tensor:
    """Weighted mean LAB color of ``image`` under pixel ``weights``.

    ``weights`` is ``(H, W)`` or ``(1, H, W)``, nonnegative and not all zero.
    Returns a ``(3,)`` tensor (L, a, b) that stays in the autograd graph.
    """
    if weights.dim() == 3:
        weights = weights.squeeze(0)
    total = weights.sum()
    if float(total) <= 0.0:
        raise ValueError("masked_lab_mean: weights must not be all zero")
    lab = rgb_to_lab(image)
    return (lab * weights).sum(dim=(-2, -1)) / total


def delta_e(lab1: torch.Tensor, lab2: torch.Tensor) -> torch.Tensor:
    """CIE76 color difference: Euclidean distance in LAB."""
    d = lab1.reshape(3) - lab2.reshape(3)
    return torch.sqrt((d * d).sum())


def saturation_mean(image: torch.Tensor, weights: torch.Tensor) -> torch.Tensor:
    """Weighted mean of per-pixel saturation S = max_c - min_c."""
    if weights.dim() == 3:
        weights = weights.squeeze(0)
    total = weights.sum()
    if float(total) <= 0.0:
        raise ValueError("saturation_mean: weights must not be all zero")
    sat = image.amax(dim=-3) - image.amin(dim=-3)
    return (sat * weights).sum(dim=(-2, -1)) / total
