"""Exception hierarchy shared by all sublinfrechet modules."""

from __future__ import annotations


class SublinFrechetError(Exception):
    """Base class for every error raised by sublinfrechet."""


class BadParam(SublinFrechetError, ValueError):
    pass


class BadStep(BadParam):
    """Subsampling step outside (0, length]."""


class NonSquare(BadParam):
    """A Fréchet tester was handed an oracle with n_cols != n_rows."""


class IndexOutOfRange(SublinFrechetError, IndexError):
    pass


class CoincidentVertices(SublinFrechetError, ValueError):
    """Two vertices coincide, so straightness is undefined."""


class NoZeros(SublinFrechetError, ValueError):
    pass


class NotZeroCorners(SublinFrechetError, ValueError):
    pass


class LengthMismatch(SublinFrechetError, ValueError):
    pass


class DegenerateRange(SublinFrechetError):
    """Interval sampling has nothing to sample from; callers scan exhaustively."""


class RecipeVerificationFailed(SublinFrechetError, RuntimeError):
    pass


class CurveFormatError(SublinFrechetError, ValueError):
    pass
