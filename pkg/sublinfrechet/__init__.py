from .freespace import Axis, CurveOracle, FreeSpaceOracle, MatrixOracle, ReducedOracle
from .geometry import Curve
from .testers import (
    Verdict,
    approx_frechet_tester,
    continuous_frechet_tester,
    frechet_tester1,
    frechet_tester2,
    hausdorff_tester,
    reduced_frechet_tester,
)

__all__ = [
    "Axis",
    "Curve",
    "CurveOracle",
    "FreeSpaceOracle",
    "MatrixOracle",
    "ReducedOracle",
    "Verdict",
    "approx_frechet_tester",
    "continuous_frechet_tester",
    "frechet_tester1",
    "frechet_tester2",
    "hausdorff_tester",
    "reduced_frechet_tester",
]
