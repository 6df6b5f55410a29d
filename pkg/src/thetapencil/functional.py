"""Classes of densities modulo total derivatives, and closure checks.

Two densities represent the same local functional when they differ by a
total derivative; the Euler criterion decides that, and a witness is
attached whenever it exists in the ring.  The pencil operators descend to
this quotient because they commute with the total derivative, so cocycle
and coboundary questions are answered on any representative.
"""

from __future__ import annotations

from dataclasses import dataclass

from .algebra import ThetaPoly
from .coeff import CoeffExpr
from .operators import EvolutionaryOp, d1_op, d2_op, is_total_derivative


@dataclass(frozen=True)
class FunctionalClass:
    """A local functional, stored through a representative density."""

    rep: ThetaPoly
    bidegree: tuple[int, int] | None = None   # (d, p) when homogeneous

    @staticmethod
    def of(rep: ThetaPoly) -> "FunctionalClass":
        return FunctionalClass(rep, rep.is_homogeneous())

    def is_zero_class(self) -> bool:
        if self.rep.is_zero():
            return True
        ok, _ = is_total_derivative(self.rep)
        return ok


def class_equal(a: FunctionalClass, b: FunctionalClass) -> bool:
    """Equality in the quotient, by the Euler criterion on the difference."""
    if a.bidegree and b.bidegree and a.bidegree != b.bidegree:
        raise ValueError(f"bidegree mismatch: {a.bidegree} vs {b.bidegree}")
    diff = a.rep - b.rep
    if diff.is_zero():
        return True
    ok, _ = is_total_derivative(diff)
    return ok


def class_witness(a: FunctionalClass, b: FunctionalClass) -> ThetaPoly | None:
    """A density whose total derivative is a - b, when one exists."""
    diff = a.rep - b.rep
    if diff.is_zero():
        return ThetaPoly.zero()
    ok, w = is_total_derivative(diff)
    return w if ok else None


def induced_d(op: EvolutionaryOp, a: FunctionalClass) -> FunctionalClass:
    """The operator induced on the quotient (it commutes with d/dx)."""
    return FunctionalClass.of(op.apply(a.rep))


def verify_bh_cocycle(a: FunctionalClass, g: CoeffExpr | None = None) -> bool:
    """Closedness under both induced pencil differentials."""
    return induced_d(d1_op(g), a).is_zero_class() and \
        induced_d(d2_op(g), a).is_zero_class()


def verify_bh_coboundary(a: FunctionalClass, y: FunctionalClass,
                         g: CoeffExpr | None = None) -> bool:
    """Is a the d1 d2-image of y, as classes?"""
    if a.bidegree and y.bidegree:
        da, pa = a.bidegree
        dy, py = y.bidegree
        if (dy, py) != (da - 2, pa - 2):
            raise ValueError(f"bidegree mismatch: {a.bidegree} vs {y.bidegree}")
    image = d1_op(g).apply(d2_op(g).apply(y.rep))
    return class_equal(a, FunctionalClass.of(image))
