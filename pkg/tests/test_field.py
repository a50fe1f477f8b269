"""Field scalar and matrix arithmetic, checked against brute-force oracles."""

import itertools

import numpy as np
import pytest

from codedpid.field import (
    FieldElement,
    FieldMatrix,
    RankDeficientError,
    SingularMatrixError,
    all_square_submatrices_invertible,
    is_prime,
)

SMALL_PRIMES = (2, 3, 5, 7, 11, 13)


def brute_force_inverse(value: int, q: int) -> int:
    """Oracle: scan every candidate for v * c == 1 (mod q)."""
    for c in range(q):
        if (value * c) % q == 1:
            return c
    raise AssertionError(f"{value} has no inverse mod {q}")


def det3_oracle(m, q: int) -> int:
    """Oracle: 3x3 determinant by explicit permutation expansion."""
    a, b, c = m[0]
    d, e, f = m[1]
    g, h, i = m[2]
    return (a * e * i + b * f * g + c * d * h - c * e * g - b * d * i - a * f * h) % q


class TestPrimality:
    def test_small_values(self):
        expected = {2, 3, 5, 7, 11, 13, 17, 19, 23}
        for n in range(25):
            assert is_prime(n) == (n in expected)

    def test_rejects_nonprime_modulus(self):
        with pytest.raises(ValueError):
            FieldElement(1, 6)
        with pytest.raises(ValueError):
            FieldMatrix([[1]], 9)
        with pytest.raises(ValueError):
            FieldElement(1, 1)


class TestFieldElement:
    def test_inverse_matches_brute_force_all_small_fields(self):
        for q in SMALL_PRIMES:
            for v in range(1, q):
                assert int(FieldElement(v, q).inverse()) == brute_force_inverse(v, q)

    def test_arithmetic_exhaustive_f7(self):
        q = 7
        for a in range(q):
            for b in range(q):
                x, y = FieldElement(a, q), FieldElement(b, q)
                assert int(x + y) == (a + b) % q
                assert int(x - y) == (a - b) % q
                assert int(x * y) == (a * b) % q
        assert int(-FieldElement(3, q)) == 4

    def test_division_round_trip(self):
        q = 11
        for a in range(q):
            for b in range(1, q):
                x, y = FieldElement(a, q), FieldElement(b, q)
                assert (x / y) * y == x

    def test_int_operands_coerce(self):
        x = FieldElement(3, 5)
        assert x + 4 == FieldElement(2, 5)
        assert 4 + x == FieldElement(2, 5)
        assert 1 - x == FieldElement(3, 5)
        assert 2 * x == FieldElement(1, 5)
        assert x == 8  # 8 reduces to 3 mod 5

    def test_pow(self):
        x = FieldElement(2, 11)
        assert int(x**10) == 1
        assert int(x**0) == 1
        assert x**-1 == x.inverse()

    def test_zero_inverse_raises(self):
        with pytest.raises(ZeroDivisionError):
            FieldElement(0, 7).inverse()
        with pytest.raises(ZeroDivisionError):
            FieldElement(1, 7) / FieldElement(0, 7)

    def test_mixed_moduli_raise(self):
        with pytest.raises(ValueError):
            FieldElement(1, 5) + FieldElement(1, 7)
        with pytest.raises(ValueError):
            FieldElement(1, 5) * FieldElement(1, 7)

    def test_immutable_and_hashable(self):
        x = FieldElement(2, 5)
        with pytest.raises(AttributeError):
            x.value = 3
        assert len({FieldElement(2, 5), FieldElement(2, 5), FieldElement(7, 5)}) == 1

    def test_reduction_on_construction(self):
        assert int(FieldElement(-1, 7)) == 6
        assert int(FieldElement(15, 7)) == 1


# Frozen inverse tables, each independently recomputed by scanning all
# candidate matrices' products against the identity (see oracle test below).
INVERSE_GOLDENS = [
    # (matrix, modulus, inverse)
    ([[1, 1, 1], [1, 2, 3], [1, 4, 9]], 11, [[3, 3, 6], [8, 4, 10], [1, 4, 6]]),
    ([[1, 1, 1], [4, 5, 6], [5, 3, 3]], 11, [[4, 0, 6], [9, 10, 10], [10, 1, 6]]),
    ([[1, 1], [1, 2]], 5, [[2, 4], [4, 1]]),
    ([[1, 1], [2, 3]], 5, [[3, 4], [3, 1]]),
    ([[1, 1], [1, 3]], 5, [[4, 2], [2, 3]]),
]


class TestFieldMatrix:
    def test_inverse_goldens(self):
        for rows, q, expected in INVERSE_GOLDENS:
            m = FieldMatrix(rows, q)
            assert m.inverse().to_lists() == expected

    def test_goldens_are_actual_inverses(self):
        for rows, q, expected in INVERSE_GOLDENS:
            n = len(rows)
            product = FieldMatrix(rows, q) @ FieldMatrix(expected, q)
            assert product == FieldMatrix.identity(n, q)

    def test_inverse_random_matrices(self):
        rng = np.random.default_rng(42)
        for q in (5, 7, 11):
            for size in (1, 2, 3, 4, 5):
                found = 0
                while found < 5:
                    m = FieldMatrix(rng.integers(0, q, size=(size, size)), q)
                    if not m.is_invertible():
                        continue
                    found += 1
                    assert m @ m.inverse() == FieldMatrix.identity(size, q)
                    assert m.inverse() @ m == FieldMatrix.identity(size, q)

    def test_singular_raises(self):
        with pytest.raises(SingularMatrixError):
            FieldMatrix([[1, 2], [2, 4]], 5).inverse()
        with pytest.raises(SingularMatrixError):
            FieldMatrix([[0]], 7).inverse()

    def test_nonsquare_inverse_raises(self):
        with pytest.raises(ValueError, match="square"):
            FieldMatrix([[1, 2, 3], [4, 5, 6]], 7).inverse()

    def test_determinant_against_permutation_oracle(self):
        rng = np.random.default_rng(7)
        for q in (5, 11):
            for _ in range(100):
                rows = rng.integers(0, q, size=(3, 3)).tolist()
                m = FieldMatrix(rows, q)
                assert int(m.determinant()) == det3_oracle(rows, q)

    def test_determinant_detects_singularity(self):
        # det == 0 exactly when Gauss-Jordan inversion fails
        rng = np.random.default_rng(3)
        for _ in range(60):
            m = FieldMatrix(rng.integers(0, 5, size=(3, 3)), 5)
            if int(m.determinant()) == 0:
                with pytest.raises(SingularMatrixError):
                    m.inverse()
            else:
                m.inverse()

    def test_matmul_matches_numpy(self):
        rng = np.random.default_rng(12)
        a = rng.integers(0, 7, size=(3, 4))
        b = rng.integers(0, 7, size=(4, 2))
        got = FieldMatrix(a, 7) @ FieldMatrix(b, 7)
        assert got.to_lists() == ((a @ b) % 7).tolist()

    def test_mat_vec(self):
        m = FieldMatrix([[1, 2], [3, 4]], 5)
        assert m.mat_vec((1, 1)) == (3, 2)
        with pytest.raises(ValueError):
            m.mat_vec((1, 2, 3))

    def test_shape_checks(self):
        a = FieldMatrix([[1, 2]], 5)
        b = FieldMatrix([[1], [2]], 5)
        with pytest.raises(ValueError):
            a + b
        with pytest.raises(ValueError):
            a @ a
        with pytest.raises(ValueError):
            a + FieldMatrix([[1, 2]], 7)

    def test_add_sub_neg_scale(self):
        a = FieldMatrix([[1, 2], [3, 4]], 5)
        b = FieldMatrix([[4, 4], [4, 4]], 5)
        assert (a + b).to_lists() == [[0, 1], [2, 3]]
        assert (a - b).to_lists() == [[2, 3], [4, 0]]
        assert (-a).to_lists() == [[4, 3], [2, 1]]
        assert a.scale(2).to_lists() == [[2, 4], [1, 3]]

    def test_selection_and_views(self):
        m = FieldMatrix([[1, 2, 3], [4, 5, 6]], 7)
        assert m.select_columns((0, 2)).to_lists() == [[1, 3], [4, 6]]
        assert m.select_rows((1,)).to_lists() == [[4, 5, 6]]
        assert m.transpose().to_lists() == [[1, 4], [2, 5], [3, 6]]
        assert m.row_tuples() == ((1, 2, 3), (4, 5, 6))
        assert m.column_tuple(1) == (2, 5)
        assert int(m[1, 2]) == 6
        assert m.shape == (2, 3)

    def test_stack_below(self):
        a = FieldMatrix([[1, 2]], 5)
        b = FieldMatrix([[3, 4]], 5)
        assert a.stack_below(b).to_lists() == [[1, 2], [3, 4]]

    def test_immutability(self):
        m = FieldMatrix([[1]], 5)
        with pytest.raises(AttributeError):
            m.modulus = 7


class TestNullSpace:
    def test_golden_q5(self):
        h = FieldMatrix([[1, 1, 1], [1, 2, 3]], 5)
        assert h.null_space_basis().to_lists() == [[1, 3, 1]]

    def test_basis_is_orthogonal_and_full(self):
        rng = np.random.default_rng(5)
        for q in (5, 7, 11, 13):
            for n in range(2, min(q, 7)):
                for l in range(1, n):
                    # Vandermonde rows always have full row rank
                    h = FieldMatrix(
                        [[pow(p, i, q) for p in range(n)] for i in range(l)], q
                    )
                    basis = h.null_space_basis()
                    assert basis.shape == (n - l, n)
                    assert basis.rank() == n - l
                    prod = h @ basis.transpose()
                    assert prod == FieldMatrix.zeros(l, n - l, q)

    def test_canonical_form(self):
        # each basis row has a 1 in its own free column and 0 in the others,
        # with free columns taken in ascending order
        h = FieldMatrix([[1, 1, 1, 1, 1], [0, 1, 2, 3, 4]], 5)
        basis = h.null_space_basis()
        _, pivots = h._rref()
        free = [c for c in range(5) if c not in pivots]
        assert free == sorted(free)
        for i, fc in enumerate(free):
            for j, other in enumerate(free):
                assert int(basis[i, other]) == (1 if i == j else 0), (i, fc)

    def test_deterministic(self):
        h = FieldMatrix([[1, 1, 1, 1], [1, 2, 4, 3]], 7)
        assert h.null_space_basis() == h.null_space_basis()

    def test_rank_deficient_raises(self):
        with pytest.raises(RankDeficientError):
            FieldMatrix([[1, 2, 3], [2, 4, 6]], 7).null_space_basis()

    def test_rank(self):
        assert FieldMatrix([[1, 2], [2, 4]], 5).rank() == 1
        assert FieldMatrix([[1, 0], [0, 1]], 5).rank() == 2
        assert FieldMatrix.zeros(2, 3, 5).rank() == 0


class TestMinorEnumeration:
    def test_vandermonde_is_mds(self):
        h = FieldMatrix([[pow(p, i, 11) for p in range(1, 7)] for i in range(3)], 11)
        assert all_square_submatrices_invertible(h, 3)

    def test_detects_singular_minor(self):
        m = FieldMatrix([[1, 1, 2], [2, 2, 3]], 5)  # columns 0,1 proportional
        assert not all_square_submatrices_invertible(m, 2)

    def test_degenerate_and_errors(self):
        m = FieldMatrix([[1, 2], [3, 4]], 5)
        assert all_square_submatrices_invertible(m, 0)
        with pytest.raises(ValueError):
            all_square_submatrices_invertible(m, 3)

    def test_sampled_mode_agrees_on_mds_matrix(self):
        h = FieldMatrix([[pow(p, i, 13) for p in range(12)] for i in range(4)], 13)
        assert all_square_submatrices_invertible(h, 4, samples=50, seed=1)

    def test_exhaustive_matches_direct_combination_scan(self):
        rng = np.random.default_rng(9)
        for _ in range(20):
            m = FieldMatrix(rng.integers(0, 5, size=(2, 4)), 5)
            expected = all(
                int(m.select_columns(cols).determinant()) != 0
                for cols in itertools.combinations(range(4), 2)
            )
            assert all_square_submatrices_invertible(m, 2) == expected
