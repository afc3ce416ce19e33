import math

import numpy as np
import pytest
from scipy.special import gammaln

from qcs.errors import CutoffTooSmall, InvalidSpec, Unphysical
from qcs.states import (
    CatSpec,
    CoherentSpec,
    EvenMixtureSpec,
    FockDensityMatrix,
    FockSpec,
    SqueezedThermalSpec,
    ThermalSpec,
    build_state,
    cat_amplitude_for_qcs,
    default_cutoff,
    mean_amplitude,
    mean_photon_number,
    parse_state_spec,
    spec_to_dict,
    state_from_matrix,
    to_fock_matrix,
    total_noise,
)


@pytest.mark.parametrize(
    "text, expected",
    [
        ("fock:5", FockSpec(n=5)),
        ("vacuum", FockSpec(n=0)),
        ("even:4", EvenMixtureSpec(M=4)),
        ("thermal:5", ThermalSpec(nbar=5.0)),
        ("coherent:1.3,-0.2", CoherentSpec(alpha=(1.3, -0.2))),
        ("cat:2.236", CatSpec(alpha=(2.236, 0.0))),
        ("squeezed:1.8,1.84", SqueezedThermalSpec(beta=1.8, r=1.84)),
        ("squeezed:1.8,1.84,0.5", SqueezedThermalSpec(beta=1.8, r=1.84, phi=0.5)),
    ],
)
def test_shorthand_specs(text, expected):
    assert parse_state_spec(text) == expected


def test_json_spec_with_real_amplitude():
    spec = parse_state_spec('{"family": "coherent", "alpha": 2.0}')
    assert spec.alpha == (2.0, 0.0)


def test_cat_shorthand_solves_for_qcs():
    spec = parse_state_spec("cat:qcs2=11")
    a = spec.alpha[0] ** 2
    assert 1 + 2 * a * math.tanh(a) == pytest.approx(11.0, abs=1e-10)


@pytest.mark.parametrize(
    "source",
    [
        "fock:-1",
        "fock:2.5",
        "bogus:1",
        "coherent:1,2,3",
        '{"family": "fock", "n": 3, "extra": 1}',
        '{"family": "thermal", "nbar": -0.5}',
        '{"family": "even_mixture", "M": 0}',
        '{"family": "gaussian", "V": [[1.0, 0.3], [0.2, 1.0]]}',
        "{not json",
    ],
)
def test_invalid_specs_raise_invalid_spec(source):
    with pytest.raises(InvalidSpec):
        build_state(source)


def test_spec_round_trips_through_dict():
    spec = parse_state_spec("squeezed:1.8,1.84")
    assert parse_state_spec(spec_to_dict(spec)) == spec


def test_squeezed_thermal_below_vacuum_is_unphysical():
    with pytest.raises(Unphysical):
        build_state({"family": "squeezed_thermal", "beta": 0.9, "r": 0.2})


def test_gaussian_with_small_determinant_is_unphysical():
    with pytest.raises(Unphysical):
        build_state({"family": "gaussian", "V": [[0.5, 0.0], [0.0, 1.0]]})


def test_fock_matrix_checks():
    with pytest.raises(Unphysical):
        build_state({"family": "fock_matrix", "matrix": {"real": [[0.5, 0.2], [0.0, 0.5]]}})
    with pytest.raises(Unphysical):
        build_state({"family": "fock_matrix", "matrix": {"real": [[0.6, 0.0], [0.0, 0.6]]}})
    with pytest.raises(Unphysical):
        build_state({"family": "fock_matrix", "matrix": {"real": [[0.5, 0.6], [0.6, 0.5]]}})
    state = build_state({"family": "fock_matrix", "matrix": {"real": [[0.5, 0.5], [0.5, 0.5]]}})
    assert state.matrix.purity == pytest.approx(1.0)
    assert state.is_pure


def test_cat_amplitude_for_qcs():
    amplitude = cat_amplitude_for_qcs(math.sqrt(11))
    a = amplitude ** 2
    assert 1 + 2 * a * math.tanh(a) == pytest.approx(11.0, abs=1e-10)
    assert a == pytest.approx(5.0, abs=1e-3)
    assert cat_amplitude_for_qcs(1.0) == 0.0
    with pytest.raises(InvalidSpec):
        cat_amplitude_for_qcs(0.5)


def test_fock_truncation():
    truncation = to_fock_matrix(build_state("fock:5"))
    assert truncation.cutoff == default_cutoff(build_state("fock:5")) == 58
    assert truncation.deficit == 0.0
    assert truncation.matrix.populations[5] == 1.0
    assert truncation.matrix.data.flags.writeable is False


def test_thermal_populations_are_geometric():
    state = build_state("thermal:5")
    populations = to_fock_matrix(state, 200).matrix.populations
    n = np.arange(10)
    np.testing.assert_allclose(populations[:10], 5.0 ** n / 6.0 ** (n + 1), rtol=1e-12)


def test_explicit_cutoff_that_loses_weight_raises():
    # thermal(5) keeps only 1 - (5/6)^80 of its weight below 80
    with pytest.raises(CutoffTooSmall):
        to_fock_matrix(build_state("thermal:5"), 80)


def test_automatic_cutoff_grows_until_deficit_is_small():
    truncation = to_fock_matrix(build_state("thermal:5"))
    assert truncation.deficit <= 1e-9
    assert truncation.cutoff > 58


def test_coherent_populations_are_poissonian():
    state = build_state("coherent:1.3,-0.2")
    populations = to_fock_matrix(state).matrix.populations
    mean = 1.3 ** 2 + 0.2 ** 2
    n = np.arange(15)
    expected = np.exp(-mean + n * math.log(mean) - gammaln(n + 1))
    np.testing.assert_allclose(populations[:15], expected, atol=1e-10)


def test_squeezed_vacuum_populations():
    r = 0.5
    state = build_state({"family": "squeezed_thermal", "beta": 1.0, "r": r})
    populations = to_fock_matrix(state).matrix.populations
    assert populations[0] == pytest.approx(1 / math.cosh(r), abs=1e-10)
    assert populations[2] == pytest.approx(math.tanh(r) ** 2 / (2 * math.cosh(r)), abs=1e-10)
    assert np.max(np.abs(populations[1::2])) < 1e-12


def test_squeezed_thermal_photon_number_matches_matrix():
    state = build_state({"family": "squeezed_thermal", "beta": 1.5, "r": 0.3, "phi": 0.4})
    expected = (1.5 * math.cosh(0.6) - 1) / 2
    assert mean_photon_number(state) == pytest.approx(expected, rel=1e-12)
    matrix = to_fock_matrix(state).matrix
    assert np.arange(matrix.dim) @ matrix.populations == pytest.approx(expected, abs=1e-7)


def test_displaced_gaussian_amplitude_matches_matrix():
    state = build_state({"family": "gaussian", "V": [[1.4, 0.3], [0.3, 1.1]], "mean": [0.6, -0.4]})
    as_matrix = state_from_matrix(np.asarray(to_fock_matrix(state).matrix.data))
    assert mean_amplitude(as_matrix) == pytest.approx(mean_amplitude(state), abs=1e-8)
    assert mean_photon_number(as_matrix) == pytest.approx(mean_photon_number(state), abs=1e-7)


def test_total_noise():
    assert total_noise(build_state("coherent:1.3,-0.2")) == pytest.approx(1.0)
    assert total_noise(build_state("fock:5")) == pytest.approx(11.0)
    assert total_noise(build_state("vacuum")) == pytest.approx(1.0)


def test_strongly_squeezed_cutoff_includes_gaussian_tail(squeezed11):
    assert default_cutoff(squeezed11) > 700


def test_padding_and_support():
    matrix = FockDensityMatrix(np.diag([0.25, 0.75, 0.0]))
    assert matrix.support() == 1
    padded = matrix.padded(6)
    assert padded.dim == 6
    assert padded.trace == pytest.approx(1.0)
    assert padded.purity == pytest.approx(0.625)


def test_state_from_matrix_allows_truncation_deficit():
    state = state_from_matrix(np.diag([0.5, 0.4999]))
    assert state.family == "fock_matrix"
    assert state.matrix.trace == pytest.approx(0.9999)
