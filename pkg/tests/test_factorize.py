import math

import numpy as np
import pytest
from scipy.special import erf

from isospec import (
    Deformation,
    Grid,
    GridFunction,
    HarmonicOscillator,
    MorsePotential,
    NoSuchBoundStateError,
    SingularCError,
    UseMissingStateError,
    bosonic_feasibility,
    composite_ladder,
    count_nodes,
    cumulative_integral,
    deform_chain,
    eigenvector_overlap,
    inner_product,
    lowest_eigenpairs,
    assemble,
    paper_c_map,
    validity_interval,
)

SQRT_PI = math.sqrt(math.pi)


def cosine(vals_a, vals_b, grid):
    return eigenvector_overlap(GridFunction(grid, vals_a),
                               GridFunction(grid, vals_b))


class TestDeformationFunction:
    def test_oscillator_value_at_origin(self, oscillator):
        # oracle: f(0) = pi^{-1/2} / (1 + 1/2) with the Gaussian CDF at 0
        d = Deformation.from_eigenstate(oscillator.eigenstate(0), 1.0)
        f = d.deformation_function()
        mid = np.argmin(np.abs(f.grid.points))
        assert f.values[mid] == pytest.approx(2.0 / (3.0 * SQRT_PI), abs=1e-6)

    def test_vanishes_for_huge_parameter(self, oscillator):
        d = Deformation.from_eigenstate(oscillator.eigenstate(0), 1e9)
        assert np.max(np.abs(d.deformation_function().values)) <= 1e-9

    def test_scaling_invariance(self, oscillator):
        s = oscillator.eigenstate(0)
        lam = 3.0
        ref = Deformation.from_eigenstate(s, 2.0)
        alt = Deformation.from_samples(
            oscillator.potential(s.grid),
            GridFunction(s.grid, lam * s.wavefunction.values),
            GridFunction(s.grid, lam * s.derivative.values),
            s.energy, 0, lam**2 * 2.0)
        assert np.max(np.abs(ref.deformation_function().values
                             - alt.deformation_function().values)) <= 1e-10
        assert np.max(np.abs(ref.deformed_potential().values
                             - alt.deformed_potential().values)) <= 1e-10

    def test_singular_parameter_rejected(self, oscillator):
        with pytest.raises(SingularCError):
            Deformation.from_eigenstate(oscillator.eigenstate(0), -0.5)
        # closed interval: the endpoints degenerate too
        with pytest.raises(SingularCError):
            Deformation.from_eigenstate(oscillator.eigenstate(0), 0.0)
        with pytest.raises(SingularCError):
            Deformation.from_eigenstate(oscillator.eigenstate(0), -1.0)


class TestDeformedPotential:
    def test_morse_closed_form(self):
        # oracle: direct evaluation of the closed-form family member,
        # with the antiderivative of psi0^2 known exactly; the cached
        # trapezoid integral limits accuracy, so compare on a fine grid
        pot = MorsePotential()
        g = Grid(-4.0, 14.0, 128001)
        d = Deformation.from_eigenstate(pot.eigenstate(0, g), 5.0,
                                        c_scale="paper")
        x = g.points
        u2 = np.exp(-4 * x - 2 * np.exp(-x))
        big_g = np.exp(-2 * np.exp(-x)) * (3 + 6 * np.exp(-x)
                                           + 6 * np.exp(-2 * x)
                                           + 4 * np.exp(-3 * x))
        den = 5.0 + big_g
        numer = (-4 + 2 * np.exp(-x)) * u2 * den - 8 * u2**2
        oracle = (4 - 5 * np.exp(-x) + np.exp(-2 * x)) - 16 * numer / den**2
        assert np.max(np.abs(d.deformed_potential().values - oracle)) <= 1e-8

    def test_large_parameter_recovers_base(self, oscillator):
        s = oscillator.eigenstate(0)
        d = Deformation.from_eigenstate(s, 1e6)
        base = oscillator.potential(s.grid).values - s.energy
        assert np.max(np.abs(d.deformed_potential().values - base)) <= 1e-6

    def test_well_translation_identity(self, well):
        seed = well.eigenstate(1)
        a = Deformation.from_eigenstate(seed, 1.0, c_scale="paper")
        b = Deformation.from_eigenstate(seed, 1.0 + 2 * well.L, c_scale="paper")
        va, vb = a.deformed_potential().values, b.deformed_potential().values
        half = (seed.grid.n_points - 1) // 2
        # member c evaluated at x + L/2 equals member c + 2L at x
        assert np.max(np.abs(va[half:] - vb[:seed.grid.n_points - half])) <= 1e-8


class TestValidityInterval:
    def test_normalized_interval(self, oscillator, well, cprs, morse):
        for pot in (oscillator, well, cprs, morse):
            kmax = min(pot.bound_count or 4, 4)
            for k in range(kmax):
                s = pot.eigenstate(k)
                v = validity_interval(s)
                assert v.c_min == pytest.approx(-1.0, abs=1e-6)
                assert v.c_max == 0.0

    def test_brute_force_scan_agrees(self, well):
        s = well.eigenstate(2)
        i = cumulative_integral(
            GridFunction(s.grid, s.wavefunction.values**2)).values
        v = validity_interval(s)
        for c in np.linspace(-1.4, 0.4, 37):
            if min(abs(c), abs(c + 1)) < 1e-6:
                continue
            brute = (c + i).min() <= 0.0 <= (c + i).max()
            assert brute == v.contains(c)

    def test_paper_scale_maps(self, morse, well, cprs, oscillator):
        assert paper_c_map(morse, 0).interval((-1.0, 0.0)) == (-3.0, 0.0)
        assert paper_c_map(well, 1).interval((-1.0, 0.0)) == (-4 * well.L, 0.0)
        assert paper_c_map(cprs, 0).interval((-1.0, 0.0)) == (-SQRT_PI, SQRT_PI)
        assert paper_c_map(oscillator, 0).interval((-1.0, 0.0)) == \
            (-SQRT_PI / 2, SQRT_PI / 2)

    def test_paper_scale_only_for_printed_configs(self):
        with pytest.raises(ValueError):
            paper_c_map(MorsePotential(A=3.5), 0)


class TestMissingState:
    def test_norm_constant_and_quadrature(self, oscillator):
        # oracle: int psi^2 / (c + I)^2 = 1/c - 1/(c+1) via the antiderivative
        d = Deformation.from_eigenstate(oscillator.eigenstate(0), 1.0)
        raw = d.psi / d.denominator
        quad = inner_product(GridFunction(d.grid, raw), GridFunction(d.grid, raw))
        assert quad == pytest.approx(0.5, abs=1e-6)  # 1/1 - 1/2
        st = d.missing_state()
        assert st.provenance["closed_form_norm"] == pytest.approx(1.0, abs=1e-6)
        assert st.energy == 0.0

    def test_morse_printed_form(self, morse_family):
        d = morse_family
        x = d.grid.points
        c = 5.0
        big_g = np.exp(-2 * np.exp(-x)) * (3 + 6 * np.exp(-x)
                                           + 6 * np.exp(-2 * x)
                                           + 4 * np.exp(-3 * x))
        oracle = (math.sqrt(8 * c * (c + 3) / 3) * np.exp(-2 * x - np.exp(-x))
                  / (c + big_g))
        st = d.missing_state()
        assert cosine(st.wavefunction.values, oracle, d.grid) >= 1 - 1e-10
        assert np.max(np.abs(st.wavefunction.values - oracle)) <= 1e-6

    def test_well_printed_form(self, well_family, well):
        d = well_family
        x = d.grid.points
        c, L = 1.0, well.L
        den = c + 4 * x - (L / math.pi) * np.sin(4 * math.pi * x / L)
        oracle = (math.sqrt(2 * c * (c + 4 * L) / L)
                  * np.sin(2 * math.pi * x / L) / den)
        st = d.missing_state()
        assert cosine(st.wavefunction.values, oracle, d.grid) >= 1 - 1e-10
        assert np.max(np.abs(st.wavefunction.values - oracle)) <= 1e-6

    def test_cprs_closed_form(self, cprs_family):
        # the x-dependent antiderivative of the seed density has the closed
        # form (x e^{-x^2}/(2x^2+1) + sqrt(pi)/2 erf x)/2
        d = cprs_family
        x = d.grid.points
        c = 1.8
        den = c + SQRT_PI * erf(x) + 2 * x * np.exp(-x**2) / (2 * x**2 + 1)
        oracle = (math.sqrt(2 * (c**2 - math.pi) / SQRT_PI)
                  * np.exp(-x**2 / 2) / ((2 * x**2 + 1) * den))
        st = d.missing_state()
        assert cosine(st.wavefunction.values, oracle, d.grid) >= 1 - 1e-8

    def test_large_parameter_returns_seed(self, oscillator):
        s = oscillator.eigenstate(0)
        st = Deformation.from_eigenstate(s, 1e6).missing_state()
        assert np.max(np.abs(st.wavefunction.values
                             - s.wavefunction.values)) <= 1e-6

    def test_node_count_matches_level(self, well_family):
        st = well_family.missing_state()
        assert count_nodes(st.wavefunction) == 1


class TestMapState:
    def test_seed_level_rejected(self, oscillator_family, oscillator):
        with pytest.raises(UseMissingStateError):
            oscillator_family.map_state(oscillator.eigenstate(0))

    def test_morse_printed_excited_state(self, morse_family, morse):
        d = morse_family
        x = d.grid.points
        c = 5.0
        ex = np.exp(x)
        numer = (2 * np.exp(-np.exp(-x)) * (6 + 12 * ex + 9 * ex**2)
                 + c * np.exp(np.exp(-x)) * (3 * ex**2 - 2 * ex))
        den = math.sqrt(3) * (4 + 6 * ex + 6 * ex**2 + 3 * ex**3
                              + c * np.exp(2 * np.exp(-x) + 3 * x))
        oracle = numer / den
        st = d.map_state(morse.eigenstate(1))
        assert cosine(st.wavefunction.values, oracle, d.grid) >= 1 - 1e-8
        assert st.energy == pytest.approx(3.0)

    def test_oscillator_printed_excited_state(self, oscillator):
        s = oscillator.eigenstate(0)
        c_paper = 2.0
        d = Deformation.from_eigenstate(s, c_paper, c_scale="paper")
        x = s.grid.points
        e1 = np.exp(-x**2 / 2)
        e3 = np.exp(-3 * x**2 / 2)
        oracle = (math.sqrt(2 / SQRT_PI)
                  * (e3 + x * e1 * (2 * c_paper + SQRT_PI * erf(x)))
                  / (2 * c_paper + SQRT_PI * erf(x)))
        st = d.map_state(oscillator.eigenstate(1))
        assert cosine(st.wavefunction.values, oracle, d.grid) >= 1 - 1e-8
        assert np.max(np.abs(st.wavefunction.values - oracle)) <= 1e-6

    def test_well_lowest_state_closed_form(self, well_family, well):
        # the x-dependent closed form for the deformed lowest state; its
        # denominator carries the running combination c + 4x, and the
        # wavefunction overlaps the independent FD eigenvector
        d = well_family
        x = d.grid.points
        c, L = 1.0, well.L
        numer = np.sin(math.pi * x / L) * (
            3 * math.pi * (c + 4 * x)
            - 8 * L * np.sin(2 * math.pi * x / L)
            + L * np.sin(4 * math.pi * x / L))
        den = 3 * math.sqrt(L / 2) * (L * np.sin(4 * math.pi * x / L)
                                      - math.pi * (c + 4 * x))
        oracle = numer / den
        st = d.map_state(well.eigenstate(0))
        assert st.energy == pytest.approx(-3.0)
        assert cosine(st.wavefunction.values, oracle, d.grid) >= 1 - 1e-8
        pairs = lowest_eigenpairs(assemble(d.deformed_potential()), 1)
        assert eigenvector_overlap(pairs[0][1], st.wavefunction) >= 1 - 1e-4

    def test_large_parameter_identity(self, oscillator):
        d = Deformation.from_eigenstate(oscillator.eigenstate(0), 1e6)
        for k in (1, 2):
            st = d.map_state(oscillator.eigenstate(k))
            ref = oscillator.eigenstate(k).wavefunction.values
            assert np.max(np.abs(st.wavefunction.values - ref)) <= 1e-6

    def test_prefactor_identity_includes_negative_gap(self, well_family, well):
        for k, gap in ((0, 3.0), (2, 5.0), (3, 12.0)):
            st = well_family.map_state(well.eigenstate(k))
            assert abs(st.provenance["raw_norm"] - 1.0) * gap <= 1e-3
            assert count_nodes(st.wavefunction) == k


class TestInverseMap:
    def test_round_trip(self, oscillator_family, oscillator):
        for k in (1, 2, 3):
            st = oscillator_family.map_state(oscillator.eigenstate(k))
            rec = oscillator_family.inverse_map_state(st)
            ref = oscillator.eigenstate(k).wavefunction
            assert eigenvector_overlap(rec, ref) >= 1 - 1e-6

    def test_well_recovers_ground_shape(self, well_family, well):
        # oracle: FD ground eigenvector of the undeformed well
        st = well_family.map_state(well.eigenstate(0))
        rec = well_family.inverse_map_state(st)
        pairs = lowest_eigenpairs(assemble(well.potential(st.grid)), 1)
        assert eigenvector_overlap(pairs[0][1], rec) >= 1 - 1e-6

    def test_missing_state_has_no_preimage(self, oscillator_family):
        st = oscillator_family.missing_state()
        with pytest.raises(UseMissingStateError):
            oscillator_family.inverse_map_state(st)


class TestChains:
    def test_two_step_limit_is_shifted_oscillator(self, oscillator):
        res = deform_chain(oscillator, [(0, 1e6), (1, 1e6)])
        x = res.potential.grid.points
        assert np.max(np.abs(res.potential.values - (x**2 - 3))) <= 1e-5

    def test_first_step_transparent_at_large_parameter(self, oscillator):
        res = deform_chain(oscillator, [(0, 1e6), (1, 2.0)])
        single = Deformation.from_eigenstate(oscillator.eigenstate(1), 2.0)
        assert np.max(np.abs(res.potential.values
                             - single.deformed_potential().values)) <= 1e-5

    def test_paper_scale_chain_spectrum(self, oscillator):
        res = deform_chain(oscillator, [(0, 1.0), (1, 1.0)], c_scale="paper")
        assert np.all(np.isfinite(res.potential.values))
        rep = lowest_eigenpairs(assemble(res.potential), 5)
        got = [w for w, _ in rep]
        assert got == pytest.approx([-2, 0, 2, 4, 6], abs=1e-2)
        assert [s.energy for s in res.states[:5]] == \
            pytest.approx([-2, 0, 2, 4, 6])

    def test_paper_scale_chain_forbidden_band(self, oscillator):
        # second-step regularity boundary: |c2 + 1/(4 c1)| = sqrt(pi)/4
        inside = -1.0 / 4.0  # center of the forbidden band for c1 = 1
        with pytest.raises(SingularCError) as err:
            deform_chain(oscillator, [(0, 1.0), (1, inside)], c_scale="paper")
        assert err.value.step == 1
        just_outside = SQRT_PI / 4 - 1.0 / 4 + 1e-3
        res = deform_chain(oscillator, [(0, 1.0), (1, just_outside)],
                           c_scale="paper")
        assert np.all(np.isfinite(res.potential.values))

    def test_singular_step_reports_index(self, oscillator):
        with pytest.raises(SingularCError) as err:
            deform_chain(oscillator, [(0, 2.0), (1, -0.5)])
        assert err.value.step == 1

    def test_level_must_be_tracked(self, morse):
        with pytest.raises(NoSuchBoundStateError):
            deform_chain(morse, [(3, 2.0)])

    def test_chain_state_bookkeeping(self, oscillator):
        res = deform_chain(oscillator, [(0, 2.0), (1, 3.0)], n_track=6)
        for st in res.states[:5]:
            assert count_nodes(st.wavefunction) == st.level
            assert inner_product(st.wavefunction, st.wavefunction) == \
                pytest.approx(1.0, abs=1e-6)


class TestCompositeLadder:
    def test_oscillator_family(self, oscillator_family, oscillator):
        t = oscillator_family.map_state(oscillator.eigenstate(1))
        img = composite_ladder(oscillator_family, oscillator, t, "up")
        ref = oscillator_family.map_state(oscillator.eigenstate(2))
        assert eigenvector_overlap(img, ref.wavefunction) >= 1 - 1e-5

    def test_well_family(self, well_family, well):
        t = well_family.map_state(well.eigenstate(2))
        img = composite_ladder(well_family, well, t, "up")
        ref = well_family.map_state(well.eigenstate(3))
        assert eigenvector_overlap(img, ref.wavefunction) >= 1 - 1e-5

    def test_cprs_family(self, cprs_family, cprs):
        t = cprs_family.map_state(cprs.eigenstate(1))
        img = composite_ladder(cprs_family, cprs, t, "up")
        ref = cprs_family.map_state(cprs.eigenstate(2))
        assert eigenvector_overlap(img, ref.wavefunction) >= 1 - 1e-5

    def test_levels_touching_seed_are_rejected(self, well_family, well):
        t = well_family.map_state(well.eigenstate(2))
        with pytest.raises(UseMissingStateError):
            composite_ladder(well_family, well, t, "down")  # target = seed
        with pytest.raises(UseMissingStateError):
            composite_ladder(well_family, well, well_family.missing_state(),
                             "up")


class TestSecondOrderIntertwining:
    def test_smooth_test_function(self, oscillator_family):
        g = oscillator_family.grid
        t = GridFunction(g, np.exp(-g.points**2))
        assert oscillator_family.second_order_intertwining_residual(t) <= 1e-3

    def test_eigenstate_test_function(self, oscillator_family, oscillator):
        t = oscillator_family.map_state(oscillator.eigenstate(1)).wavefunction
        assert oscillator_family.second_order_intertwining_residual(t) <= 1e-3

    def test_refinement_decay(self, oscillator):
        residuals = []
        for npts in (1601, 3201):
            g = Grid(-8.0, 8.0, npts)
            d = Deformation.from_eigenstate(oscillator.eigenstate(0, g), 2.0)
            t = GridFunction(g, np.exp(-g.points**2))
            residuals.append(d.second_order_intertwining_residual(t))
        assert residuals[0] / residuals[1] >= 3.0


class TestBosonicFeasibility:
    def test_oscillator_ground_diverges(self, oscillator):
        rep = bosonic_feasibility(oscillator.eigenstate(0), probe_c=1.0)
        assert rep.divergent
        assert rep.interior_singularities == []
        assert rep.probe_denominator_vanishes  # positive probe always crossed

    def test_well_ground_diverges_at_walls(self, well):
        rep = bosonic_feasibility(well.eigenstate(0), probe_c=1.0)
        assert rep.divergent
        assert rep.edge_ratio_left > 1e6 and rep.edge_ratio_right > 1e6

    def test_well_excited_reports_interior_singularity(self, well):
        rep = bosonic_feasibility(well.eigenstate(1), probe_c=1.0)
        assert rep.divergent
        assert len(rep.interior_singularities) == 1
        assert rep.interior_singularities[0] == pytest.approx(well.L / 2,
                                                              abs=1e-3)
