"""Wiener-type integrals: which condenser is sampled at each scale.

Infinity variants are parametrised by ``r >= 1`` and integrate
``(cap / r^(n-p))^(1/(p-1))`` against ``dr/r``; point variants, including
the inverted form of the square shell, are parametrised by ``rho in (0, 1]``
and integrate against ``drho/rho``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

from .condensers import DualWindow, ShellWindow
from .geometry import ValidationError

__all__ = ["VariantKind", "CriterionVariant", "CLI_VARIANTS"]

LN4 = math.log(4.0)
LN2 = math.log(2.0)


class VariantKind(enum.Enum):
    BALL_IN_UNION = "ball-in-union"          # (closed B_r, Omega ∪ B_2r)
    SQUARE_SHELL = "square-shell"            # [r, r^2] in B_{4^r} minus closed B_{r/2}
    EXP_SHELL = "exp-shell"                  # [r, 2^r] in B_{4^r} minus closed B_{r/2}
    SQUARE_SHELL_RN_OUTER = "square-shell-rn"  # outer set R^n minus closed B_{r/2}
    EXP_SHELL_RN_OUTER = "exp-shell-rn"
    LINEAR_SHELL = "linear-shell"            # [r, M r] in B_{N r} minus closed B_{r/2}
    TRANSFORMED_ORIGIN = "transformed-origin"  # weighted square shell of T(Omega) at 0
    CLASSIC_AT_POINT = "classic"             # (Omega^c ∩ closed B(x0, rho), B(x0, 2 rho))
    ORIGIN_BALL = "origin-ball"              # (Omega^c ∩ closed B_rho, B_2rho), unnormalised
    ORIGIN_HALF_SHELL = "origin-half-shell"  # (Omega^c ∩ [rho/2, rho], B_2rho)


INFINITY_KINDS = {
    VariantKind.BALL_IN_UNION, VariantKind.SQUARE_SHELL, VariantKind.EXP_SHELL,
    VariantKind.SQUARE_SHELL_RN_OUTER, VariantKind.EXP_SHELL_RN_OUTER,
    VariantKind.LINEAR_SHELL,
}
NON_CRITERION = {VariantKind.LINEAR_SHELL, VariantKind.ORIGIN_HALF_SHELL}

CLI_VARIANTS = {
    "thm11": VariantKind.BALL_IN_UNION,
    "thm13ii": VariantKind.SQUARE_SHELL,
    "thm13iii": VariantKind.EXP_SHELL,
    "classic": VariantKind.CLASSIC_AT_POINT,
}


@dataclass(frozen=True)
class CriterionVariant:
    kind: VariantKind = VariantKind.SQUARE_SHELL
    point: Optional[tuple] = None  # for CLASSIC_AT_POINT
    M: float = 2.0                 # for LINEAR_SHELL
    N: float = 4.0

    def __post_init__(self):
        if self.kind is VariantKind.LINEAR_SHELL and not (1 < self.M < self.N):
            raise ValidationError("linear shell needs 1 < M < N")
        if self.kind is VariantKind.CLASSIC_AT_POINT and self.point is None:
            raise ValidationError("classic variant needs a point")

    @property
    def at_infinity(self) -> bool:
        """Integrates over ``r -> infinity`` (otherwise over ``rho -> 0``)."""
        return self.kind in INFINITY_KINDS

    @property
    def about_infinity(self) -> bool:
        """Concerns regularity at infinity (possibly through the inverted frame)."""
        return self.at_infinity or self.kind is VariantKind.TRANSFORMED_ORIGIN

    @property
    def is_criterion(self) -> bool:
        """Divergence of the integral characterises regularity."""
        return self.kind not in NON_CRITERION

    @property
    def weighted(self) -> bool:
        """Sampled in the inverted frame with weight ``|x|^(2(p-n))``."""
        return self.kind is VariantKind.TRANSFORMED_ORIGIN

    @property
    def label(self) -> str:
        if self.kind is VariantKind.CLASSIC_AT_POINT:
            return f"classic at {tuple(float(v) for v in self.point)}"
        if self.kind is VariantKind.LINEAR_SHELL:
            return f"linear-shell M={self.M:g} N={self.N:g}"
        return self.kind.value

    def window(self, t: float):
        """Window at scale ``t`` (``r`` or ``rho``)."""
        if not t > 0:
            raise ValidationError("scale must be positive")
        lt = math.log(t)
        k = self.kind
        if k is VariantKind.BALL_IN_UNION:
            return DualWindow(lt)
        if k in (VariantKind.SQUARE_SHELL, VariantKind.SQUARE_SHELL_RN_OUTER):
            outer = t * LN4 if k is VariantKind.SQUARE_SHELL else math.inf
            return ShellWindow(lt, 2 * lt, lt - LN2, outer)
        if k in (VariantKind.EXP_SHELL, VariantKind.EXP_SHELL_RN_OUTER):
            outer = t * LN4 if k is VariantKind.EXP_SHELL else math.inf
            return ShellWindow(lt, max(lt, t * LN2), lt - LN2, outer)
        if k is VariantKind.LINEAR_SHELL:
            return ShellWindow(lt, lt + math.log(self.M), lt - LN2, lt + math.log(self.N))
        if k is VariantKind.TRANSFORMED_ORIGIN:
            # image of the square shell at r = 1/rho
            return ShellWindow(2 * lt, lt, -LN4 / t, lt + LN2)
        if k in (VariantKind.CLASSIC_AT_POINT, VariantKind.ORIGIN_BALL):
            return ShellWindow(-math.inf, lt, -math.inf, lt + LN2)
        return ShellWindow(lt - LN2, lt, -math.inf, lt + LN2)
