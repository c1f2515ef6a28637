"""The committed reference-design file: loads, certifies, and is canonical."""

import pathlib

import numpy as np

import fixture_values as fv
from uniallpass import (
    certify_uniallpass,
    check_minor_condition,
    design_homogeneous_siso,
    is_allpass,
    poles,
)
from uniallpass.serialize import dumps_system, load_system

FIXTURE = pathlib.Path(__file__).parent / "data" / "homogeneous_reference.json"


def test_fixture_parses_and_certifies():
    fdn, dsim, payload = load_system(FIXTURE)
    assert list(fdn.delays) == list(fv.HOMOG_DELAYS)
    np.testing.assert_allclose(dsim, fv.HOMOG_DSIM)
    cert = certify_uniallpass(fdn, dsim)
    assert cert.verdict and cert.residual < 1e-8
    assert payload["verify"]["certificate"]["verdict"] is True
    assert is_allpass(fdn).allpass
    np.testing.assert_allclose(np.abs(poles(fdn)), fv.HOMOG_GAMMA, atol=1e-6)


def test_fixture_passes_minor_condition_with_sign():
    fdn, _, _ = load_system(FIXTURE)
    check = check_minor_condition(fdn)
    assert check.verdict and check.sufficient
    assert check.sign in (-1, 1)
    assert check.deviation < 1e-10


def test_fixture_matches_fresh_design():
    fdn, dsim, _ = load_system(FIXTURE)
    design = design_homogeneous_siso(fv.HOMOG_DELAYS, fv.HOMOG_GAMMA, dsim=fv.HOMOG_DSIM)
    np.testing.assert_allclose(fdn.a, design.fdn.a, atol=1e-12)
    np.testing.assert_allclose(fdn.b, design.fdn.b, atol=1e-12)
    np.testing.assert_allclose(fdn.c, design.fdn.c, atol=1e-12)
    np.testing.assert_allclose(fdn.d, design.fdn.d, atol=1e-12)


def test_fixture_round_trips_byte_stable():
    fdn, dsim, payload = load_system(FIXTURE)
    text = dumps_system(fdn, dsim=dsim, meta=payload.get("meta"), verify=payload.get("verify"))
    assert text.encode() == FIXTURE.read_bytes()
