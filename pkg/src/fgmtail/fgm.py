"""Farlie-Gumbel-Morgenstern dependence between two marginals.

The joint cdf is ``F(x) G(y) (1 + r Fbar(x) Gbar(y))`` with ``|r| <= 1``.
Joint tails and rectangle masses have closed forms; pairs are sampled exactly
by inverting the conditional copula.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np

from .distributions import ConfigurationError, DomainError, Marginal


@dataclass(frozen=True)
class JointTailTerms:
    survival: float
    x_strip: float  # P(X in (x, x+1], Y > y)
    y_strip: float  # P(X > x, Y in (y, y+1])


@dataclass(frozen=True)
class AsymptoticEstimate:
    """Value of a first- or second-order approximation with its breakdown.

    ``terms`` lists ``(name, value)`` pairs; the first entry is the
    first-order part, the rest are second-order correction groups.
    """

    first_order: float
    second_order_correction: float
    terms: tuple
    order: str = "second"
    stderr: float = 0.0

    @property
    def value(self) -> float:
        if self.order == "first":
            return self.first_order
        return self.first_order + self.second_order_correction

    def term(self, name: str) -> float:
        for k, v in self.terms:
            if k == name:
                return v
        raise KeyError(name)


@dataclass(frozen=True)
class FgmPair:
    r: float
    F: Marginal
    G: Marginal

    def __post_init__(self):
        if not -1.0 <= self.r <= 1.0:
            raise ConfigurationError(f"FGM parameter must satisfy |r| <= 1, got {self.r}")

    def to_dict(self) -> dict[str, Any]:
        return {"r": self.r, "F": self.F.to_dict(), "G": self.G.to_dict()}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "FgmPair":
        return cls(float(d["r"]), Marginal.from_dict(d["F"]), Marginal.from_dict(d["G"]))

    # -- closed-form probabilities ----------------------------------------
    def joint_cdf(self, x, y):
        Fx, Gy = self.F.cdf(x), self.G.cdf(y)
        return Fx * Gy * (1 + self.r * (1 - Fx) * (1 - Gy))

    def joint_tail(self, x, y):
        """``P(X > x, Y > y) = Fbar(x) Gbar(y) (1 + r F(x) G(y))``."""
        Fb, Gb = self.F.tail(x), self.G.tail(y)
        return Fb * Gb * (1 + self.r * (1 - Fb) * (1 - Gb))

    def joint_rect(self, x, y1, y2):
        """``P(X > x, Y in (y1, y2])``; ``y2`` may be ``inf``.

        Written as ``Fbar(x) G(y1, y2] (1 + r F(x) (1 - Gbar(y1) - Gbar(y2)))``
        so nothing cancels when the strip is thin.
        """
        y1a, y2a = np.asarray(y1, dtype=float), np.asarray(y2, dtype=float)
        if np.any(y1a >= y2a):
            raise DomainError("joint_rect needs y1 < y2")
        Fb = self.F.tail(x)
        G1 = self.G.tail(y1a)
        if np.all(np.isinf(y2a)):
            dG, G2 = G1, 0.0
        else:
            dG = self.G.local_mass(y1a, y2a - y1a)
            G2 = self.G.tail(y2a)
        return Fb * dG * (1 + self.r * (1 - Fb) * (1 - G1 - G2))

    def joint_rect_x(self, x1, x2, y):
        """``P(X in (x1, x2], Y > y)``."""
        return self.swapped().joint_rect(y, x1, x2)

    def swapped(self) -> "FgmPair":
        return FgmPair(self.r, self.G, self.F)

    def joint_tail_terms(self, x, y) -> JointTailTerms:
        return JointTailTerms(
            survival=float(self.joint_tail(x, y)),
            x_strip=float(self.joint_rect_x(x, x + 1.0, y)),
            y_strip=float(self.joint_rect(x, y, y + 1.0)),
        )

    # -- sampling ---------------------------------------------------------
    def sample_pair(self, u, w):
        """Map two independent uniforms to an FGM pair.

        ``v`` solves ``(1 + A) v - A v**2 = w`` with ``A = r (1 - 2u)``; the
        root is taken in the form ``2w / ((1+A) + sqrt((1+A)**2 - 4 A w))``,
        which is exact at ``A = 0`` and avoids cancellation near it.
        """
        u = np.asarray(u, dtype=float)
        v = conditional_copula_inverse(self.r, u, np.asarray(w, dtype=float))
        return self.F.quantile(u), self.G.quantile(v)

    # -- pairwise weighted-sum tail ---------------------------------------
    def pair_sum_tail_expansion(self, c: float, d: float, x: float) -> AsymptoticEstimate:
        """Second-order expansion of ``P(cX + dY > x)``.

        ``Fbar(x/c) + Gbar(x/d) + d (r mu_G2 + (1-r) mu_G) F(x/c, (x+1)/c]
        + c (r mu_F2 + (1-r) mu_F) G(x/d, (x+1)/d]``
        """
        if not (c > 0 and d > 0):
            raise DomainError("weights c, d must be positive")
        if not x > 0:
            raise DomainError("threshold must be positive")
        r, F, G = self.r, self.F, self.G
        tx, ty = float(F.tail(x / c)), float(G.tail(x / d))
        lx = float(F.local_mass(x / c, 1.0 / c))
        ly = float(G.local_mass(x / d, 1.0 / d))
        corr_x = d * (r * G.mean_of_square_dist() + (1 - r) * G.mean()) * lx
        corr_y = c * (r * F.mean_of_square_dist() + (1 - r) * F.mean()) * ly
        return AsymptoticEstimate(
            first_order=tx + ty,
            second_order_correction=corr_x + corr_y,
            terms=(("tail_x", tx), ("tail_y", ty), ("local_x", corr_x), ("local_y", corr_y)),
        )


def conditional_copula_inverse(r: float, u, w):
    A = r * (1.0 - 2.0 * u)
    onep = 1.0 + A
    return 2.0 * w / (onep + np.sqrt(onep * onep - 4.0 * A * w))


def kendall_tau(r: float) -> float:
    """Kendall's tau of the FGM copula, ``2r/9``."""
    return 2.0 * r / 9.0
