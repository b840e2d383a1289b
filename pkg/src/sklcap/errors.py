"""Exception hierarchy shared by every sklcap module."""


class SklcapError(Exception):
    """Base class for library errors."""


class DomainError(SklcapError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ShapeError(SklcapError, ValueError):
    """Array dimensions do not agree."""


class ValidationError(SklcapError, ValueError):
    """Input data violates a structural invariant (row sums, signs, schema)."""


class InfiniteDivergenceError(DomainError):
    """Some pairwise KL divergence between channel rows is infinite.

    ``pairs`` holds the offending ``(i, j)`` row-index pairs.
    """

    def __init__(self, pairs):
        self.pairs = [tuple(int(k) for k in p) for p in pairs]
        shown = ", ".join(f"({i},{j})" for i, j in self.pairs[:10])
        more = "" if len(self.pairs) <= 10 else f" and {len(self.pairs) - 10} more"
        super().__init__(
            f"non-absolutely-continuous channel rows: infinite KL divergence "
            f"for row pairs {shown}{more}"
        )
