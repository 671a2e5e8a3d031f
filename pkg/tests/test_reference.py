import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import band_matrix, binary_matrices, diagonal_matrix, matrix_from_zeros
from sublinfrechet import reference
from sublinfrechet.errors import BadParam, IndexOutOfRange, NoZeros, NotZeroCorners
from sublinfrechet.freespace import Axis, free_space_matrix
from sublinfrechet.geometry import Curve
from sublinfrechet.reference import CouplingPath, DiagonalRestrictedPath

small_curves = st.builds(
    lambda seed, n: Curve(np.random.default_rng(seed).uniform(-3, 3, size=(n, 2))),
    st.integers(0, 2**32 - 1),
    st.integers(1, 9),
)


def test_discrete_frechet_of_parallel_lines():
    P = Curve.from_points([(0, 0), (1, 0), (2, 0)])
    Q = Curve.from_points([(0, 1), (1, 1), (2, 1)])
    assert reference.discrete_frechet(P, Q) == 1.0
    assert reference.discrete_hausdorff(P, Q) == 1.0


def test_single_points():
    P = Curve.from_points([(0, 0)])
    Q = Curve.from_points([(3, 4)])
    assert reference.discrete_frechet(P, Q) == 5.0
    assert reference.discrete_hausdorff(P, Q) == 5.0


@settings(max_examples=60, deadline=None)
@given(P=small_curves, Q=small_curves, R=small_curves)
def test_distance_relations(P, Q, R):
    dF = reference.discrete_frechet
    assert reference.discrete_hausdorff(P, Q) <= dF(P, Q)
    assert dF(P, Q) == dF(Q, P)
    assert dF(P, R) <= dF(P, Q) + dF(Q, R) + 1e-9


@settings(max_examples=60, deadline=None)
@given(P=small_curves, Q=small_curves)
def test_free_space_coupling_matches_frechet_threshold(P, Q):
    d = reference.discrete_frechet(P, Q)
    assert reference.min_cost_coupling(free_space_matrix(P, Q, d)) == 0
    if d > 0:
        below = float(np.nextafter(d, 0.0))
        assert reference.min_cost_coupling(free_space_matrix(P, Q, below)) > 0


@settings(max_examples=60, deadline=None)
@given(P=small_curves, Q=small_curves)
def test_hausdorff_threshold_has_no_barriers(P, Q):
    d = reference.discrete_hausdorff(P, Q)
    assert reference.count_barriers(free_space_matrix(P, Q, d)) == (0, 0)


def test_all_ones_coupling_costs():
    M = np.ones((3, 3), dtype=np.uint8)
    assert reference.min_cost_coupling(M) == 3
    cost, path = reference.min_cost_diagonal_restricted_path(M)
    assert cost == 5
    assert path.steps == ((1, 1), (1, 2), (1, 3), (2, 3), (3, 3))


def test_diagonal_is_free():
    M = diagonal_matrix(6)
    assert reference.min_cost_coupling(M) == 0
    assert reference.min_cost_diagonal_restricted(M) == 0


@settings(max_examples=100, deadline=None)
@given(M=binary_matrices())
def test_traced_paths_realize_their_cost(M):
    cost, path = reference.min_cost_coupling_path(M)
    rcost, rpath = reference.min_cost_diagonal_restricted_path(M)
    assert path.cost(M) == cost
    assert rpath.cost(M) == rcost
    assert path.end == rpath.end == M.shape
    assert rpath.is_valid_for(M)
    assert cost <= rcost


def test_coupling_path_rejects_jumps():
    with pytest.raises(BadParam):
        CouplingPath(((1, 1), (1, 3)))
    with pytest.raises(BadParam):
        CouplingPath(((2, 1), (2, 2)))


def test_restricted_path_rejects_diagonal_through_a_one():
    M = matrix_from_zeros((2, 2), [(1, 1)])
    assert not DiagonalRestrictedPath(((1, 1), (2, 2))).is_valid_for(M)
    assert DiagonalRestrictedPath(((1, 1), (1, 2), (2, 2))).is_valid_for(M)


def test_locality_of_a_single_spread_column():
    M = matrix_from_zeros((1, 4), [(1, 1), (1, 4)])
    assert reference.exact_locality(M) == 1.5
    assert reference.is_t_local(M, 1.5)
    assert not reference.is_t_local(M, 1.4)


def test_diagonal_locality_stays_below_one():
    assert reference.exact_locality(diagonal_matrix(5)) == pytest.approx(2 / 3)


@pytest.mark.parametrize("width", [1, 2, 3])
def test_band_locality_equals_width(width):
    assert reference.exact_locality(band_matrix(10, width)) == pytest.approx(width)


def _pairwise_locality(M):
    best = 0.0
    for B in (M, M.T):
        zeros = [np.flatnonzero(line == 0) + 1 for line in B]
        live = [k for k, z in enumerate(zeros) if z.size]
        for a in live:
            for b in live:
                gap = max(zeros[b][-1] - zeros[a][0], zeros[a][-1] - zeros[b][0])
                best = max(best, gap / (2 + abs(a - b)))
    return best


def test_locality_of_a_matrix_wider_than_one_block(rng):
    M = band_matrix(300, 2)
    # scattered far zeros and a few empty slices on both axes
    M[rng.integers(0, 300, size=40), rng.integers(0, 300, size=40)] = 0
    M[[7, 150, 299], :] = 1
    M[:, [0, 260]] = 1
    assert reference.exact_locality(M) == pytest.approx(_pairwise_locality(M))


@settings(max_examples=60, deadline=None)
@given(M=binary_matrices(max_side=8))
def test_locality_matches_the_pairwise_definition(M):
    assert reference.exact_locality(M) == pytest.approx(_pairwise_locality(M))


def test_all_ones_locality():
    M = np.ones((3, 4), dtype=np.uint8)
    assert reference.exact_locality(M) == 0.0
    with pytest.raises(NoZeros):
        reference.exact_locality(M, strict=True)


def test_census_of_a_local_matrix():
    census = reference.locality_census(diagonal_matrix(4), 1.0)
    assert census.passes
    assert census.t_min == pytest.approx(0.6)


def test_census_reports_second_order_failures():
    M = diagonal_matrix(4)
    M[0, 3] = 0  # column 1 also touches row 4
    census = reference.locality_census(M, 1.0)
    assert census.t_min == 1.5
    assert census.pair_failures == []
    assert census.second_order_failures == [
        (Axis.COLUMNS, 1),
        (Axis.COLUMNS, 4),
        (Axis.ROWS, 1),
        (Axis.ROWS, 4),
    ]
    assert reference.greedy_strong_witness(M, 1.0) is None


def test_census_reports_pair_failures():
    M = matrix_from_zeros((2, 6), [(1, 1), (2, 6)])
    census = reference.locality_census(M, 1.0)
    assert [(f.axis, f.first, f.second) for f in census.pair_failures] == [(Axis.COLUMNS, 1, 2)]
    assert census.pair_failures[0].entries == ((1, 1), (2, 6))


def test_greedy_witness_drops_failing_slices():
    M = diagonal_matrix(7)
    M[3, 3] = 1
    M[3, 1] = 0
    M[3, 5] = 0
    census = reference.locality_census(M, 1.0)
    assert census.t_min == 2.0
    witness = reference.greedy_strong_witness(M, 1.0)
    assert witness.ignored_columns == {4}
    assert witness.ignored_rows == {2, 6}
    assert witness.zeta == pytest.approx(3 / 7)
    assert 4 not in witness.columns and 1 in witness.columns


def test_greedy_witness_of_a_local_matrix_ignores_nothing():
    witness = reference.greedy_strong_witness(diagonal_matrix(5), 1.0)
    assert witness.zeta == 0
    assert witness.columns == frozenset(range(1, 6))


def test_brute_permeability():
    M = matrix_from_zeros((4, 4), [(1, 3), (2, 3), (3, 1), (4, 1)])
    assert reference.brute_permeable(M, Axis.COLUMNS, 1, 2)
    assert reference.brute_permeable(M, Axis.COLUMNS, 3, 4)
    assert not reference.brute_permeable(M, Axis.COLUMNS, 1, 4)
    assert not reference.brute_permeable(M, Axis.COLUMNS, 2, 3)
    assert reference.brute_permeable(M, Axis.ROWS, 1, 1)
    assert not reference.brute_permeable(M, Axis.ROWS, 1, 3)
    with pytest.raises(IndexOutOfRange):
        reference.brute_permeable(M, Axis.COLUMNS, 3, 2)


def test_barriers():
    M = matrix_from_zeros((4, 4), [(1, 1), (4, 4)])
    assert reference.count_barriers(M) == (2, 2)
    assert reference.barrier_indices(M, Axis.COLUMNS) == [2, 3]
    assert reference.barrier_indices(M, Axis.ROWS) == [2, 3]


def test_layers_peel_from_the_bottom_left():
    M = matrix_from_zeros((3, 3), [(1, 1), (2, 1), (1, 2), (3, 3)])
    rect = ((1, 1), (3, 3))
    assert reference.layer_labels(M, rect) == {(1, 1): 1, (2, 1): 2, (1, 2): 2, (3, 3): 3}
    assert reference.layer_count(M, rect) == 3
    assert reference.min_cost_diagonal_restricted(M) == 2


def test_layers_need_zero_corners():
    M = matrix_from_zeros((3, 3), [(1, 1), (3, 3)])
    with pytest.raises(NotZeroCorners):
        reference.layer_labels(M, ((1, 1), (2, 2)))
    with pytest.raises(IndexOutOfRange):
        reference.layer_labels(M, ((3, 3), (1, 1)))


def test_render_puts_the_top_row_first():
    M = matrix_from_zeros((2, 2), [(1, 1)])
    assert reference.render(M) == "11\n01"
    assert reference.entries_zero(M, [(1, 1)])
    assert not reference.entries_zero(M, [(1, 1), (2, 2)])
