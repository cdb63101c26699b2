import numpy as np
import numpy.testing as npt
import pytest

from orbitscope.errors import (
    NonCommuting,
    NotCase1,
    NotDiagonalizable,
    NotInLayer,
    NotNilpotent,
    ZeroEigenvalue,
)
from orbitscope.families import E
from orbitscope.linalg import DilationAlgebra, mat_exp
from orbitscope.orbits import orbit_dim
from orbitscope.sections import (
    case1_sections,
    layer_index,
    normal_form,
    section_point,
)

D_PAIR = (np.diag([1.0, 1.0, 0.0]), E(2, 1))
CASE1A_PAIR = (np.eye(3), E(2, 1) + E(3, 2))
CASE1C_PAIR = (np.eye(3), E(2, 1) + E(3, 2) + 0.4 * E(3, 1))


class TestNormalForm:
    def test_d_pair_already_normal(self):
        fam = normal_form(*D_PAIR)
        eps = [b.epsilon for b in fam.blocks]
        assert eps == [(1,), ()]
        assert [b.eigenvalue for b in fam.blocks] == [1.0, 0.0]

    def test_full_jordan(self):
        fam = normal_form(np.eye(3), E(2, 1) + E(3, 2))
        assert [b.epsilon for b in fam.blocks] == [(1, 1)]

    def test_zero_nilpotent_degenerate(self):
        fam = normal_form(np.diag([2.0, 2.0]), np.zeros((2, 2)))
        assert fam.blocks[0].active == ()
        assert layer_index(fam, [1.0, 1.0]) is None

    def test_rejects_bad_inputs(self):
        with pytest.raises(NotNilpotent):
            normal_form(np.eye(2), np.eye(2))
        with pytest.raises(NonCommuting):
            normal_form(np.diag([1.0, 2.0, 3.0]), E(2, 1))
        with pytest.raises(NotDiagonalizable):
            normal_form(np.eye(2) + E(2, 1, 2), E(2, 1, 2))
        with pytest.raises(NotDiagonalizable):
            normal_form(np.array([[0.0, -1.0], [1.0, 0.0]]), np.zeros((2, 2)))

    def test_adapted_form_exact(self):
        rng = np.random.default_rng(0)
        P0 = rng.standard_normal((4, 4)) + 4 * np.eye(4)
        D = np.diag([1.0, 1.0, 1.0, 3.0])
        N = E(2, 1, 4) + E(3, 2, 4)
        A = np.linalg.solve(P0, D @ P0)
        X = np.linalg.solve(P0, N @ P0)
        fam = normal_form(A, X)
        Xa = fam.basis_inv @ X @ fam.basis
        sub = np.diag(Xa, -1)
        assert set(np.round(sub, 9)) <= {0.0, 1.0}


class TestLayerIndex:
    def test_d_type_examples(self):
        fam = normal_form(*D_PAIR)
        li = layer_index(fam, [1.0, 5.0, 7.0])
        assert li.b == 2 and li.eigenvalue == 1.0
        assert layer_index(fam, [0.0, 5.0, 7.0]) is None

    def test_case1a_deeper_layer(self):
        fam = normal_form(*CASE1A_PAIR)
        li = layer_index(fam, [0.0, 1.0, 0.0])
        assert li.b == 3

    def test_invariance_under_group(self):
        rng = np.random.default_rng(1)
        for A, X in (D_PAIR, CASE1A_PAIR, CASE1C_PAIR):
            fam = normal_form(A, X)
            for _ in range(100):
                v = rng.standard_normal(3)
                li = layer_index(fam, v)
                s, t = rng.uniform(-2, 2, 2)
                w = mat_exp(s * A + t * X) @ v
                lj = layer_index(fam, w)
                if li is None:
                    assert lj is None
                else:
                    assert (lj.block, lj.b) == (li.block, li.b)

    def test_partition_of_o2(self):
        # every orbit-dim-2 point of the diag+nilpotent family lies in a layer
        A, X = np.diag([1.0, 1.0, 2.0, 2.0]), E(2, 1, 4) + E(4, 3, 4)
        alg = DilationAlgebra([A.T, X.T])  # orbit machinery acts by transposes
        fam = normal_form(A, X)
        rng = np.random.default_rng(2)
        hits = 0
        for _ in range(300):
            v = rng.standard_normal(4)
            if orbit_dim(alg, v) == 2:
                assert layer_index(fam, v) is not None
                hits += 1
        assert hits > 250


class TestSectionPoint:
    def test_idempotent_on_section(self):
        fam = normal_form(*D_PAIR)
        sp = section_point(fam, [1.0, 0.0, 7.0])
        npt.assert_allclose(sp.representative, [1.0, 0.0, 7.0], atol=1e-12)
        assert sp.witness == (0.0, 0.0) or np.allclose(sp.witness, 0.0, atol=1e-12)

    def test_d_type_example(self):
        fam = normal_form(*D_PAIR)
        sp = section_point(fam, [1.0, 5.0, 7.0])
        npt.assert_allclose(sp.representative, [1.0, 0.0, 7.0], atol=1e-10)
        npt.assert_allclose(sp.witness, (0.0, -5.0), atol=1e-12)
        assert sp.sign == 1

    def test_d_type_scaled_example(self):
        A, X = D_PAIR
        fam = normal_form(A, X)
        sp = section_point(fam, [2.0, 5.0, 7.0])
        npt.assert_allclose(sp.witness, (-np.log(2.0), -2.5), atol=1e-12)
        npt.assert_allclose(sp.representative[:2], [1.0, 0.0], atol=1e-10)
        # verify the witness against the exponential oracle
        v = np.array([2.0, 5.0, 7.0])
        s, t = sp.witness
        npt.assert_allclose(mat_exp(s * A + t * X) @ v, sp.representative, atol=1e-10)

    @pytest.mark.parametrize("pair", [D_PAIR, CASE1A_PAIR, CASE1C_PAIR])
    def test_canonical_on_orbits(self, pair):
        A, X = pair
        fam = normal_form(A, X)
        rng = np.random.default_rng(3)
        count = 0
        for _ in range(300):
            v = rng.standard_normal(3)
            if layer_index(fam, v) is None:
                continue
            s, t = rng.uniform(-3, 3, 2)
            w = mat_exp(s * A + t * X) @ v
            p0 = section_point(fam, v)
            p1 = section_point(fam, w)
            err = np.linalg.norm(p1.representative - p0.representative)
            assert err <= 1e-8 * (1.0 + np.linalg.norm(p0.representative))
            count += 1
        assert count > 250

    def test_zero_eigenvalue_rejected(self):
        A = np.diag([0.0, 0.0, 1.0])
        X = E(2, 1)
        fam = normal_form(A, X)
        with pytest.raises(ZeroEigenvalue):
            section_point(fam, [1.0, 5.0, 7.0])

    def test_not_in_layer(self):
        fam = normal_form(*D_PAIR)
        with pytest.raises(NotInLayer):
            section_point(fam, [0.0, 5.0, 7.0])


class TestCase1Sections:
    def test_only_omega2(self):
        om2, om3 = case1_sections(np.eye(3), E(2, 1))
        assert om2.nonempty and not om3.nonempty
        npt.assert_allclose(om2.omega_functional, [1.0, 0.0, 0.0])
        assert "v_2 = 0" in om2.describe()

    def test_both_layers(self):
        om2, om3 = case1_sections(np.eye(3), E(2, 1) + E(3, 2))
        assert om2.nonempty and om3.nonempty
        npt.assert_allclose(om3.omega_functional, [0.0, 1.0, 0.0])

    def test_only_omega3(self):
        om2, om3 = case1_sections(np.eye(3), E(3, 2))
        assert not om2.nonempty and om3.nonempty

    def test_rejects_non_case1(self):
        with pytest.raises(NotCase1):
            case1_sections(np.diag([1.0, 1.0, 2.0]), E(2, 1))
        with pytest.raises(NotCase1):
            case1_sections(np.zeros((3, 3)), E(2, 1))

    def test_section_property_numerically(self):
        # points on Sigma_2 stay fixed; orbit mates map onto Sigma_2
        A, X = np.eye(3), E(2, 1)
        fam = normal_form(A, X)
        rng = np.random.default_rng(4)
        for _ in range(50):
            v = np.array([np.sign(rng.standard_normal()), 0.0, rng.standard_normal()])
            sp = section_point(fam, v)
            npt.assert_allclose(sp.representative, v, atol=1e-10)
