import numpy as np
import numpy.testing as npt

from orbitscope.families import case0, family_b, family_d, family_e
from orbitscope.linalg import DilationAlgebra, mat_exp
from orbitscope.orbits import (
    GroupElement,
    SampleSpec,
    coadjoint_orbit_dim,
    dual_act,
    is_admissible,
    orbit_dim,
    stabilizer_dim,
    stratify,
)


def fd_orbit_rank(alg, xi, h=1e-5, ambiguous_band=(1e-7, 1e-3)):
    """Finite-difference rank of t -> dual_act(t, xi); None when a singular
    value sits in the ambiguous band (tol-flagged boundary)."""
    cols = []
    for j in range(alg.d):
        e = np.zeros(alg.d)
        e[j] = h
        fwd = dual_act(GroupElement(alg, e), xi)
        bwd = dual_act(GroupElement(alg, -e), xi)
        cols.append((fwd - bwd) / (2 * h))
    J = np.column_stack(cols)
    s = np.linalg.svd(J, compute_uv=False)
    top = max(s[0], 1.0)
    if any(ambiguous_band[0] < sv / top < ambiguous_band[1] for sv in s):
        return None
    return int(np.sum(s / top >= ambiguous_band[1]))


class TestDualAct:
    def test_identity_fixes(self):
        alg = family_d()
        g = GroupElement(alg, np.zeros(3))
        xi = np.array([1.0, -2.0, 3.0])
        npt.assert_allclose(dual_act(g, xi), xi, atol=1e-14)

    def test_diagonal_closed_form(self):
        alpha, s = 0.6, 1.1
        alg = DilationAlgebra([np.diag([1.0, 0.0, alpha])])
        g = GroupElement(alg, [s])
        xi = np.array([2.0, -1.0, 0.5])
        expected = np.array([np.exp(-s) * 2.0, -1.0, np.exp(-alpha * s) * 0.5])
        npt.assert_allclose(dual_act(g, xi), expected, rtol=1e-12)

    def test_matches_exp_invert_transpose_oracle(self):
        rng = np.random.default_rng(1)
        alg = family_b(1.0, -1.0)
        for _ in range(50):
            t = rng.uniform(-2, 2, 2)
            xi = rng.standard_normal(3)
            g = GroupElement(alg, t)
            h = mat_exp(alg.element(t))
            oracle = np.linalg.inv(h).T @ xi
            npt.assert_allclose(dual_act(g, xi), oracle, atol=1e-10)

    def test_action_property(self):
        rng = np.random.default_rng(2)
        alg = family_d()
        for _ in range(20):
            t1, t2 = rng.uniform(-1, 1, (2, 3))
            xi = rng.standard_normal(3)
            lhs = dual_act(GroupElement(alg, t1 + t2), xi)
            rhs = dual_act(GroupElement(alg, t1), dual_act(GroupElement(alg, t2), xi))
            npt.assert_allclose(lhs, rhs, atol=1e-9)

    def test_group_element_caches_consistent(self):
        g = GroupElement(family_d(), [0.3, -0.7, 1.1])
        npt.assert_allclose(g.h @ mat_exp(-g.alg.element(g.params)), np.eye(3), atol=1e-12)
        npt.assert_allclose(g.h_inv_T, np.linalg.inv(g.h).T, atol=1e-12)


class TestOrbitDim:
    def test_origin_fixed(self, golden_families):
        for alg in golden_families.values():
            assert orbit_dim(alg, np.zeros(alg.n)) == 0

    def test_case_e_generic(self):
        assert orbit_dim(family_e(), [1.0, 1.0, 1.0]) == 3

    def test_case_b_axis_point(self):
        assert orbit_dim(family_b(1.0, 1.0), [1.0, 0.0, 0.0]) == 1

    def test_matches_finite_difference(self, golden_families):
        rng = np.random.default_rng(3)
        checked = 0
        for alg in golden_families.values():
            for _ in range(20):
                xi = rng.standard_normal(alg.n)
                fd = fd_orbit_rank(alg, xi)
                if fd is None:
                    continue
                assert orbit_dim(alg, xi) == fd
                checked += 1
        assert checked > 100


class TestStabilizerAndCoadjoint:
    def test_origin(self, golden_families):
        for alg in golden_families.values():
            assert stabilizer_dim(alg, np.zeros(alg.n)) == alg.d
            assert coadjoint_orbit_dim(alg, np.zeros(alg.n)) == 0

    def test_free_point_case_b(self):
        assert stabilizer_dim(family_b(1.0, 1.0), [1.0, 1.0, 1.0]) == 0

    def test_rank_nullity_and_doubling(self, golden_families):
        rng = np.random.default_rng(4)
        for alg in golden_families.values():
            for _ in range(25):
                xi = rng.standard_normal(alg.n)
                od = orbit_dim(alg, xi)
                assert od + stabilizer_dim(alg, xi) == alg.d
                assert coadjoint_orbit_dim(alg, xi) == 2 * od
                assert coadjoint_orbit_dim(alg, xi) % 2 == 0

    def test_orbit_dim_invariance_under_action(self, golden_families):
        # 1000 random (g, xi) pairs across the families
        rng = np.random.default_rng(5)
        for alg in golden_families.values():
            for _ in range(80):
                xi = rng.standard_normal(alg.n)
                g = GroupElement(alg, rng.uniform(-1.5, 1.5, alg.d))
                assert orbit_dim(alg, dual_act(g, xi)) == orbit_dim(alg, xi)


class TestAdmissibility:
    def test_case_e_admissible(self):
        v = is_admissible(family_e())
        assert v.status == "admissible"

    def test_traceless_not_admissible(self):
        v = is_admissible(DilationAlgebra([np.diag([1.0, -1.0])]))
        assert v.status == "not_admissible"
        assert any("det" in r for r in v.reasons)

    def test_rotation_violates_hypotheses(self, golden_families):
        v = is_admissible(golden_families["case3b"])
        assert v.status == "hypotheses_violated"

    def test_ae_freeness_fraction(self):
        # admissible positive-spectrum families: top stratum fraction > 0.99
        rng = np.random.default_rng(6)
        for alg in (family_b(1.0, 1.0), family_d(), family_e()):
            hits = sum(orbit_dim(alg, rng.standard_normal(alg.n)) == alg.d
                       for _ in range(1000))
            assert hits / 1000 > 0.99


class TestStratify:
    def test_case_d_census(self):
        rep = stratify(family_d(), SampleSpec(count=256, seed=11))
        assert rep.d_max == 3
        assert rep.top_conull
        # the plane killing the nilpotent column drops the dimension
        assert orbit_dim(family_d(), [1.0, 0.0, 1.0]) < 3

    def test_nilpotent_case0_capped(self):
        rep = stratify(case0(), SampleSpec(count=256, seed=12))
        assert rep.d_max <= 2
        assert all(dim <= 2 for _, dim in rep.probes)

    def test_scalar_family(self):
        rep = stratify(DilationAlgebra([np.eye(2)]), SampleSpec(count=128, seed=13))
        assert set(rep.census) == {1}

    def test_report_json_shape(self):
        rep = stratify(family_e(), SampleSpec(count=64, seed=14))
        doc = rep.to_json()
        assert doc["group_dim"] == 3 and doc["n_probes"] == 64

    def test_grid_sampling_deterministic(self):
        spec = SampleSpec(kind="grid", count=27, extent=2.0)
        pts = spec.points(3)
        assert pts.shape == (27, 3)
        npt.assert_allclose(pts, spec.points(3))
        rep = stratify(family_e(), spec)
        assert rep.d_max == 3
