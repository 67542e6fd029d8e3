import numpy as np
import pytest

from ebk import (
    DomainError,
    EmptySpectrum,
    InsufficientCloud,
    LevelSurface,
    NoQualifyingDirections,
    Orientation,
    RamosCurve,
    TooFewNicePoints,
    UnsupportedSurface,
    direct_spectrum,
    disk_profile,
    euclidean_profile,
    harmonic_profile,
    lattice_grid,
    marked_action_spectrum,
    minmax_certificate,
    pnorm_profile,
    reconstruction_spectrum,
    truncation_estimate,
    variational_spectrum,
)
from ebk.actions import MarkedActionEntry


@pytest.fixture(scope="module")
def circle_surface():
    return LevelSurface.from_profile(euclidean_profile(2))


def test_lattice_grid_order():
    grid = lattice_grid(2, 2)
    assert grid.shape == (9, 2)
    assert [tuple(m) for m in grid[:4]] == [(0, 0), (0, 1), (0, 2), (1, 0)]


# --- direct route ---

def test_direct_harmonic_values():
    spec = direct_spectrum(harmonic_profile((1.0, 2.0)), 3)
    assert spec.energy((1, 1)) == 3.0
    assert spec.energy((2, 0)) == 2.0
    assert spec.energy((0, 3)) == 6.0


def test_direct_harmonic_half_shift():
    spec = direct_spectrum(harmonic_profile((1.0, 2.0)), 1, shift=0.5)
    assert spec.energy((0, 0)) == 1.5


def test_direct_euclidean_hbar():
    assert direct_spectrum(euclidean_profile(2), 4).energy((3, 4)) == 5.0
    assert direct_spectrum(euclidean_profile(2), 4,
                           hbar=0.5).energy((3, 4)) == 2.5


def test_direct_rejects_negative_weights():
    with pytest.raises(DomainError):
        direct_spectrum(harmonic_profile((1.0, 2.0)), 1, shift=-1.0)


# --- variational route ---

@pytest.mark.parametrize("omega", [(1.0, 2.0), (3.0, 5.0)])
def test_variational_matches_direct_on_rational_harmonic(omega):
    surf = LevelSurface.from_profile(harmonic_profile(omega))
    acts = marked_action_spectrum(surf, 10)
    var = variational_spectrum(acts, 4, orientation=Orientation.CONVEX)
    ref = direct_spectrum(harmonic_profile(omega), 4)
    denom = np.maximum(ref.energies, 1e-30)
    assert (np.abs(var.energies - ref.energies) / denom).max() <= 1e-12


def test_variational_circle_truncated(circle_surface):
    acts = marked_action_spectrum(circle_surface, 200)
    spec = variational_spectrum(acts, 4)
    assert spec.energy((3, 4)) == pytest.approx(5.0, abs=1e-3)
    # sup over a finite subset cannot exceed the true support value
    ref = direct_spectrum(euclidean_profile(2), 4)
    assert np.all(spec.energies <= ref.energies + 1e-12)


def test_variational_reports_argmax(circle_surface):
    acts = marked_action_spectrum(circle_surface, 10)
    spec = variational_spectrum(acts, 4)
    i = [tuple(m) for m in spec.m_grid].index((3, 4))
    assert tuple(spec.argext[i]) == (3, 4)


def test_variational_concave_stays_above_direct():
    racts = marked_action_spectrum(RamosCurve(), 128)
    var = variational_spectrum(racts, 3)
    ref = direct_spectrum(disk_profile(), 3)
    assert np.all(var.energies >= ref.energies - 1e-12)
    # coarser truncation keeps the inf further above
    coarse = variational_spectrum(racts.restrict(64), 3)
    assert np.all(coarse.energies >= var.energies - 1e-12)


def test_variational_monotone_in_m(circle_surface):
    acts = marked_action_spectrum(circle_surface, 60)
    spec = variational_spectrum(acts, 5)
    energy = {tuple(m): e for m, e in zip(map(tuple, spec.m_grid),
                                          spec.energies)}
    for (m1, m2), e in energy.items():
        if m1 + 1 <= 5:
            assert energy[(m1 + 1, m2)] >= e - 1e-12
        if m2 + 1 <= 5:
            assert energy[(m1, m2 + 1)] >= e - 1e-12


def test_scaling_degree_two_squares_spectrum():
    surf = LevelSurface.from_profile(pnorm_profile(4.0))
    acts = marked_action_spectrum(surf, 40)
    flat = variational_spectrum(acts, 3, degree=1.0)
    squared = variational_spectrum(acts, 3, degree=2.0)
    assert np.abs(squared.energies - flat.energies ** 2).max() <= \
        1e-12 * max(1.0, squared.energies.max())
    # direct route scales the same way
    d1 = direct_spectrum(pnorm_profile(4.0), 3)
    d2 = direct_spectrum(pnorm_profile(4.0, degree=2.0), 3)
    denom = np.maximum(d2.energies, 1e-30)
    assert (np.abs(d2.energies - d1.energies ** 2) / denom).max() <= 1e-12


def test_shift_consistency_direct_vs_variational(circle_surface):
    # mu enters only through the lattice numerator: the shifted spectrum at m
    # equals the unshifted formula evaluated at m + mu
    acts = marked_action_spectrum(circle_surface, 30)
    shifted = variational_spectrum(acts, 3, shift=0.5)
    mu = np.full(2, 0.5)
    for m, e in zip(shifted.m_grid, shifted.energies):
        w = m + mu
        ratios = (acts.directions @ w) / acts.actions
        assert e == pytest.approx(float(ratios.max()), rel=1e-14)

    prof = euclidean_profile(2)
    spec = direct_spectrum(prof, 2, shift=0.25)
    for m, e in zip(spec.m_grid, spec.energies):
        assert e == prof.evaluate(m + 0.25)


def test_primitive_sufficiency(circle_surface):
    acts = marked_action_spectrum(circle_surface, 8)
    base = variational_spectrum(acts, 3)
    # power-of-two multiples leave every ratio bit-identical
    padded = list(acts.entries)
    for e in acts.entries[::3]:
        padded.append(e.multiple(2))
        padded.append(e.multiple(4))
    again = variational_spectrum(padded, 3, orientation=Orientation.CONVEX)
    assert np.array_equal(base.energies, again.energies)
    # other multiples can shift the ratio by an ulp, nothing more
    padded.extend(e.multiple(5) for e in acts.entries)
    third = variational_spectrum(padded, 3, orientation=Orientation.CONVEX)
    denom = np.maximum(base.energies, 1.0)
    assert (np.abs(third.energies - base.energies) / denom).max() <= 1e-14


def test_variational_rejects_empty_and_general():
    with pytest.raises(EmptySpectrum):
        variational_spectrum([], 2, orientation=Orientation.CONVEX)
    entry = MarkedActionEntry(k=(1, 1), action=1.0, point=(0.5, 0.5))
    with pytest.raises(UnsupportedSurface):
        variational_spectrum([entry], 2, orientation=Orientation.GENERAL)


def test_double_shift_is_rejected(circle_surface):
    shifted_actions = marked_action_spectrum(circle_surface, 5, shift=0.5)
    from ebk import ConfigError
    with pytest.raises(ConfigError):
        variational_spectrum(shifted_actions, 2, shift=0.5)


# --- truncation estimate ---

def test_truncation_estimate_richardson():
    # geometric convergence 1, 1.5, 1.75 -> ratio 2, remainder ~ |D2|/(r-1)
    assert truncation_estimate(1.0, 1.5, 1.75) == pytest.approx(0.25)
    # no measurable change between the last two levels
    assert truncation_estimate(1.0, 1.2, 1.2) == 0.0
    # non-contracting sequence falls back to the last increment
    assert truncation_estimate(1.0, 1.1, 1.3) == pytest.approx(0.2)


def test_variational_truncation_column(circle_surface):
    acts = marked_action_spectrum(circle_surface, 40)
    spec = variational_spectrum(acts, 3)
    assert spec.truncation is not None
    assert np.all(spec.truncation >= 0.0)
    # axis points are attained exactly at every truncation level
    i = [tuple(m) for m in spec.m_grid].index((0, 2))
    assert spec.truncation[i] == 0.0


# --- minmax certificate ---

@pytest.fixture(scope="module")
def harmonic_actions():
    surf = LevelSurface.from_profile(harmonic_profile((1.0, 2.0)))
    return marked_action_spectrum(surf, 10)


def test_minmax_above(harmonic_actions):
    cert = minmax_certificate(harmonic_actions, 3.5, (1, 1))
    assert cert.sign == 1
    for rec in cert.records:
        assert rec.value == pytest.approx(0.5 * rec.ell, rel=1e-12)
        assert tuple(rec.direction) == (1, 2)
        assert rec.multiple == rec.ell
    assert cert.direction_constant == pytest.approx(1.0 / 3.0, rel=1e-12)


def test_minmax_below(harmonic_actions):
    cert = minmax_certificate(harmonic_actions, 2.5, (1, 1))
    assert cert.sign == -1
    values = [rec.value for rec in cert.records]
    assert values == sorted(values, reverse=True)
    assert values[-1] == pytest.approx(-0.5 * 20, rel=1e-12)


def test_minmax_at_level_is_flat(harmonic_actions):
    cert = minmax_certificate(harmonic_actions, 3.0, (1, 1))
    assert cert.sign == 0
    assert max(abs(rec.value) for rec in cert.records) <= 1e-12


def test_minmax_growth_bound(harmonic_actions):
    for energy in (3.5, 2.5):
        cert = minmax_certificate(harmonic_actions, energy, (1, 1))
        gap = abs(energy - 3.0)
        c = cert.direction_constant
        for rec in cert.records:
            assert abs(rec.value) >= c * rec.ell * gap / 2.0


def test_minmax_requires_interior_directions():
    axis_only = [MarkedActionEntry(k=(1, 0), action=1.0, point=(1.0, 0.0)),
                 MarkedActionEntry(k=(0, 1), action=1.0, point=(0.0, 1.0))]
    with pytest.raises(NoQualifyingDirections):
        minmax_certificate(axis_only, 1.5, (1, 1),
                           orientation=Orientation.CONVEX)


def test_minmax_rejects_concave():
    racts = marked_action_spectrum(RamosCurve(), 16)
    with pytest.raises(UnsupportedSurface):
        minmax_certificate(racts, 2.0, (1, 1))


# --- reconstruction route ---

def test_reconstruction_spectrum_circle(circle_surface):
    acts = marked_action_spectrum(circle_surface, 50)
    spec, recon = reconstruction_spectrum(acts, 4, reference=circle_surface)
    assert spec.energy((3, 4)) == pytest.approx(5.0, abs=1e-3)
    assert recon.report.hausdorff_vs_reference <= 1e-3


def test_reconstruction_rejects_degenerate_segment():
    surf = LevelSurface.from_profile(harmonic_profile((1.0, 2.0)))
    acts = marked_action_spectrum(surf, 30)
    # a one-direction cloud cannot seed a curve fit; either the cloud gate or
    # the nice-point gate may fire depending on dedup
    with pytest.raises((InsufficientCloud, TooFewNicePoints)):
        reconstruction_spectrum(acts, 2)


# --- spectrum container ---

def test_spectrum_csv_format(circle_surface):
    acts = marked_action_spectrum(circle_surface, 10)
    spec = variational_spectrum(acts, 1)
    lines = spec.to_csv().splitlines()
    assert lines[0] == "m_1,m_2,E_m,argmax_k,truncation_error_estimate"
    assert len(lines) == 5
    row = dict(zip(lines[0].split(","), lines[2].split(",")))
    assert row["m_1"] == "0" and row["m_2"] == "1"
    assert float(row["E_m"]) == pytest.approx(1.0, abs=1e-12)
    assert row["argmax_k"] == "0;1"


def test_spectrum_json_roundtrip(circle_surface):
    import json
    acts = marked_action_spectrum(circle_surface, 10)
    spec = variational_spectrum(acts, 1)
    doc = json.loads(spec.to_json())
    assert doc["route"] == "variational"
    assert doc["degree"] == 1.0
    assert len(doc["entries"]) == 4
