"""
certificate.py
──────────────
Size parameters for the constructive builders and the error certificates
they emit.

A certificate pairs a constructed network with its closed-form error bound
and the sup-norm error measured on a dense grid; it is only issued when
measured ≤ claimed.  Bounds whose constant is fitted empirically (the
"up to a constant" results) are flagged.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class BudgetError(ValueError):
    """A builder cannot meet its stated width/depth budget at these params."""


class CertificateError(ValueError):
    """Measured error exceeded the claimed bound."""


@dataclass(frozen=True)
class ApproxParams:
    """Width/depth/Taylor-order knobs (N, L, s) and the accuracy scale ε."""

    N: int
    L: int
    s: int = 1
    eps: float | None = None

    def __post_init__(self):
        if self.N < 1 or self.L < 1 or self.s < 1:
            raise ValueError("N, L, s must be positive integers")
        if self.eps is not None:
            if not (0.0 < self.eps < 1.0):
                raise ValueError("eps must lie in (0, 1)")
            if self.N ** -2 * self.L ** -2 > self.eps * (1 + 1e-12):
                raise ValueError("need N^-2 L^-2 <= eps")

    @property
    def eps_value(self) -> float:
        return self.eps if self.eps is not None else self.N ** -2 * self.L ** -2


@dataclass(frozen=True)
class ErrorCertificate:
    builder: str
    params: str
    claimed: float
    measured: float
    width: int
    depth: int
    fitted: bool = False
    grid: str = ""

    def __post_init__(self):
        if self.measured > self.claimed:
            raise CertificateError(
                f"{self.builder}: measured {self.measured:.3e} exceeds "
                f"claimed {self.claimed:.3e}"
            )

    def csv_row(self) -> dict:
        return {
            "builder": self.builder,
            "params": self.params,
            "claimed": repr(self.claimed),
            "measured": repr(self.measured),
            "width": self.width,
            "depth": self.depth,
        }


CERT_FIELDS = ["builder", "params", "claimed", "measured", "width", "depth"]


def check_budget(builder: str, net, max_width: int, max_depth: int) -> None:
    """Exact integer width/depth check against a lemma's stated budget."""
    if net.width > max_width or net.depth > max_depth:
        raise BudgetError(
            f"{builder}: size ({net.width}×{net.depth}) exceeds budget "
            f"({max_width}×{max_depth})"
        )


def measure_sup(net, reference, pts) -> float:
    """sup-norm error of net against a reference callable on grid points."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    approx = np.asarray(net(pts), dtype=float).reshape(pts.shape[0], -1)
    exact = np.asarray(reference(pts), dtype=float).reshape(pts.shape[0], -1)
    return float(np.max(np.abs(approx - exact)))
