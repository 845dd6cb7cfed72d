import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cpforge.materials import Material
from cpforge.stack import (
    Layer,
    LayerStack,
    cavity_coefficients,
    half_space_coefficients,
    medium_b,
    multiple_reflection_partial_sums,
    reflection_recursive,
    reflection_set,
    slab_coefficients,
    slab_coefficients_b,
    thin_plate_coefficients_b,
    vacuum_b,
)

from conftest import L, W

VAC = Material.vacuum()
U, Q = np.meshgrid(np.geomspace(1e-3, 1e3, 50) * W, np.geomspace(1e-3, 1e3, 50) / L, indexing="ij")

freq = st.floats(0.05, 20.0)
resonance = st.tuples(freq, freq, st.floats(0.0, 1.0))
materials = st.builds(
    lambda e, m: Material.drude_lorentz(e, m, unit=W),
    st.lists(resonance, min_size=1, max_size=2),
    st.lists(resonance, max_size=2),
)
point = st.tuples(st.floats(1e-3, 1e3), st.floats(1e-3, 1e3))


def test_single_interface_quasistatic_limit():
    m = Material(((W, W, 0.0),))    # eps(0) = 2, quasi-static at u << W
    stack = LayerStack.half_space(m)
    rp = reflection_recursive(stack, "-", "p", 1e-6 * W, 1e6 / L)
    assert rp == pytest.approx(1 / 3, rel=1e-9)


def test_vacuum_stack_does_not_reflect():
    stack = LayerStack((Layer(VAC), Layer(VAC, 2 * L), Layer(VAC, L), Layer(VAC)), 2)
    for side in "-+":
        for pol in "sp":
            assert np.all(reflection_recursive(stack, side, pol, U, Q) == 0.0)


def test_stack_validation(dielectric):
    with pytest.raises(ValueError):
        LayerStack((Layer(dielectric),), 0)
    with pytest.raises(ValueError):
        LayerStack((Layer(dielectric), Layer(VAC)), 0)          # atom in a medium
    with pytest.raises(ValueError):
        LayerStack((Layer(VAC), Layer(dielectric, 0.0), Layer(VAC)), 2)
    with pytest.raises(ValueError):
        LayerStack((Layer(VAC), Layer(VAC)), 5)
    with pytest.raises(ValueError):
        reflection_recursive(LayerStack.half_space(dielectric), "x", "s", W, 1 / L)


def test_half_space_closed_form_equals_recursion(wall_material):
    stack = LayerStack.half_space(wall_material)
    rs, rp = half_space_coefficients(wall_material, U, Q)
    assert np.max(np.abs(reflection_recursive(stack, "-", "s", U, Q) - rs) / np.abs(rs)) < 1e-12
    assert np.max(np.abs(reflection_recursive(stack, "-", "p", U, Q) - rp) / np.abs(rp)) < 1e-12
    assert np.all(reflection_recursive(stack, "+", "s", U, Q) == 0)


@pytest.mark.parametrize("d", [0.01, 1.0, 30.0])
def test_slab_closed_form_equals_recursion(wall_material, d):
    stack = LayerStack.slab(wall_material, d * L)
    rs, rp = slab_coefficients(wall_material, d * L, U, Q)
    for pol, ref in (("s", rs), ("p", rp)):
        got = reflection_recursive(stack, "-", pol, U, Q)
        assert np.max(np.abs(got - ref) / np.maximum(np.abs(ref), 1e-300)) < 1e-12


def test_cavity_closed_form_equals_recursion(wall_material):
    s = 15 * L
    stack = LayerStack.cavity(wall_material, s)
    ref = cavity_coefficients(wall_material, s, U, Q)
    got = reflection_set(stack, U, Q)
    for name in ("r_s_minus", "r_s_plus", "r_p_minus", "r_p_plus", "D_s", "D_p"):
        a, b = getattr(got, name), getattr(ref, name)
        assert np.max(np.abs(a - b) / np.abs(b)) < 1e-12, name


def test_half_space_signs(dielectric):
    rs, rp = half_space_coefficients(dielectric, U, Q)
    assert np.all(rs < 0) and np.all(rp > 0)
    rs, rp = half_space_coefficients(dielectric.swapped(), U, Q)
    assert np.all(rs > 0) and np.all(rp < 0)
    rs, rp = half_space_coefficients(VAC, U, Q)
    assert np.all(rs == 0) and np.all(rp == 0)


def test_thick_slab_saturates_to_half_space(wall_material):
    u, q = W, 2 / L
    b = vacuum_b(u, q)
    d = 10 / medium_b(wall_material, u, b)
    slab = slab_coefficients_b(wall_material, d, u, b)
    hs = half_space_coefficients(wall_material, u, q)
    assert np.allclose(slab, hs, rtol=0, atol=1e-8)


def test_thin_slab_approaches_linearization_at_first_order(wall_material):
    # tanh(b_M d) ~ b_M d leaves a first-order relative deviation
    # (x^2 b^2 + b_M^2) d / (2 x b) in the denominator
    u, q = W, 2 / L
    b = vacuum_b(u, q)
    bm = medium_b(wall_material, u, b)
    x = np.array([wall_material.permeability_imag(u), wall_material.permittivity_imag(u)])
    for t in (1e-4, 1e-6):
        d = t / bm
        slab = np.array(slab_coefficients_b(wall_material, d, u, b))
        thin = np.array(thin_plate_coefficients_b(wall_material, d, u, b))
        predicted = (x * x * b * b + bm * bm) * d / (2 * x * b)
        dev = 1 - slab / thin
        assert np.allclose(dev, predicted, rtol=10 * t)


def test_vanishing_slab(wall_material):
    rs, rp = slab_coefficients(wall_material, 1e-12 * L, W, 1 / L)
    assert abs(rs) < 1e-10 and abs(rp) < 1e-10


def test_empty_cavity():
    r = cavity_coefficients(VAC, L, U, Q)
    assert np.all(r.r_s_minus == 0) and np.all(r.D_p == 1)


def test_multiple_reflection_series_converges(wall_material):
    r = cavity_coefficients(wall_material, 0.5 * L, W, 0.1 / L)
    b = vacuum_b(W, 0.1 / L)
    ratio = r.r_p_minus * r.r_p_plus * math.exp(-b * L)
    assert 0 < abs(ratio) < 1
    sums = multiple_reflection_partial_sums(r.r_p_minus, r.r_p_plus, b, 0.5 * L, 60)
    assert sums[-1] == pytest.approx(1 / r.D_p, rel=1e-12)
    errs = np.abs(sums - 1 / r.D_p)
    assert np.all(np.diff(errs[:6]) < 0)


def test_mirrored_stack(wall_material):
    a = LayerStack((Layer(wall_material), Layer(VAC, L), Layer(VAC)), 2)
    m = a.mirrored()
    assert m.atom_layer == 0
    assert reflection_recursive(m, "+", "p", W, 1 / L) == pytest.approx(reflection_recursive(a, "-", "p", W, 1 / L), rel=1e-14)


@settings(max_examples=40, deadline=None)
@given(materials, materials, point, st.floats(0.01, 10), st.floats(0.01, 10))
def test_passivity_and_denominator_bounds(m1, m2, p, d, s):
    stack = LayerStack((Layer(m1), Layer(m2, d * L), Layer(VAC, s * L), Layer(m1)), 2)
    r = reflection_set(stack, p[0] * W, p[1] / L)
    for x in (r.r_s_minus, r.r_s_plus, r.r_p_minus, r.r_p_plus):
        assert abs(x) <= 1.0
    for D in (r.D_s, r.D_p):
        assert 0 < D <= 2


@settings(max_examples=40, deadline=None)
@given(materials, materials, point, st.floats(0.01, 10))
def test_duality_swaps_polarizations(m1, m2, p, d):
    stack = LayerStack((Layer(m1), Layer(m2, d * L), Layer(VAC)), 2)
    dual = LayerStack((Layer(m1.swapped()), Layer(m2.swapped(), d * L), Layer(VAC)), 2)
    u, q = p[0] * W, p[1] / L
    assert reflection_recursive(dual, "-", "s", u, q) == pytest.approx(reflection_recursive(stack, "-", "p", u, q), rel=1e-12, abs=1e-300)
    assert reflection_recursive(dual, "-", "p", u, q) == pytest.approx(reflection_recursive(stack, "-", "s", u, q), rel=1e-12, abs=1e-300)


@settings(max_examples=40, deadline=None)
@given(materials, point)
def test_medium_decay_exceeds_vacuum(m, p):
    u, q = p[0] * W, p[1] / L
    assert medium_b(m, u, vacuum_b(u, q)) >= vacuum_b(u, q) >= u / 3e8 * 0.99
