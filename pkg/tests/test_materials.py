import math

import pytest

from plasmonq.materials import (
    GOLD_DRUDE_LORENTZ,
    C_NM_PER_S,
    DispersionParseError,
    DispersionTable,
    DispersionValidationError,
    DrudeLorentzParams,
    WavelengthRangeError,
    drude_lorentz_permittivity,
    gold_dispersion,
    load_dispersion,
    permittivity_at,
)

TWO_ROWS = "500,0.97,1.87\n600,0.25,3.07\n"

# Bundled-table regression anchors, frozen from an independent evaluation of
# the oscillator model on the 810 nm grid node.
GOLD_810_NK = (0.228918563, 4.58544487)
GOLD_810_EPS = complex(-20.97390094732333, 2.0993869007122434)


def test_two_row_parse_and_grid_values():
    table = load_dispersion(TWO_ROWS)
    assert table.wavelength_min == 500.0
    assert table.wavelength_max == 600.0
    assert permittivity_at(table, 500.0) == complex(0.97, 1.87) ** 2
    assert permittivity_at(table, 600.0) == complex(0.25, 3.07) ** 2


def test_header_comments_and_blank_lines_are_skipped():
    text = "# gold-ish test table\n\nwavelength_nm,n,k\n" + TWO_ROWS + "\n# trailing note\n"
    table = load_dispersion(text)
    assert len(table.entries) == 2


def test_rows_are_sorted_on_load():
    table = load_dispersion("600,0.25,3.07\n500,0.97,1.87\n")
    assert table.wavelength_min == 500.0
    assert permittivity_at(table, 500.0) == complex(0.97, 1.87) ** 2


def test_midpoint_interpolates_n_and_k_separately():
    """n and k are each linear in wavelength; eps is their square afterwards."""
    table = load_dispersion(TWO_ROWS)
    expected = complex((0.97 + 0.25) / 2, (1.87 + 3.07) / 2) ** 2
    assert permittivity_at(table, 550.0) == pytest.approx(expected, rel=1e-14)


def test_interpolation_is_continuous_at_grid_nodes():
    table = load_dispersion("500,0.97,1.87\n600,0.25,3.07\n700,0.16,3.8\n")
    at_node = permittivity_at(table, 600.0)
    for nudge in (-1e-6, 1e-6):
        assert permittivity_at(table, 600.0 + nudge) == pytest.approx(at_node, abs=1e-7)


@pytest.mark.parametrize("wavelength", [499.999, 600.001, 0.0, 1e9])
def test_out_of_range_wavelength_raises(wavelength):
    table = load_dispersion(TWO_ROWS)
    with pytest.raises(WavelengthRangeError):
        permittivity_at(table, wavelength)


def test_malformed_row_reports_line_number():
    text = "# comment\nwavelength_nm,n,k\n500,0.97,1.87\n600,oops,3.07\n"
    with pytest.raises(DispersionParseError) as excinfo:
        load_dispersion(text)
    assert excinfo.value.line_number == 4
    assert "line 4" in str(excinfo.value)


def test_wrong_column_count_reports_line_number():
    with pytest.raises(DispersionParseError) as excinfo:
        load_dispersion("500,0.97,1.87\n600,0.25\n")
    assert excinfo.value.line_number == 2


def test_duplicate_wavelengths_rejected():
    with pytest.raises(DispersionValidationError, match="duplicate"):
        load_dispersion("500,0.97,1.87\n500,0.25,3.07\n")


def test_fewer_than_two_rows_rejected():
    with pytest.raises(DispersionValidationError):
        load_dispersion("500,0.97,1.87\n")


def test_negative_extinction_rejected():
    with pytest.raises(DispersionValidationError):
        load_dispersion("500,0.97,-0.01\n600,0.25,3.07\n")


def test_table_is_immutable():
    table = load_dispersion(TWO_ROWS)
    with pytest.raises(Exception):
        table.entries = ()


def test_drude_lorentz_high_frequency_limit_is_eps_infinity():
    # far above every resonance the medium stops responding
    eps = drude_lorentz_permittivity(GOLD_DRUDE_LORENTZ, 0.1)
    assert abs(eps - GOLD_DRUDE_LORENTZ.epsilon_infinity) < 1e-5


def test_drude_lorentz_at_plasma_frequency_nearly_cancels():
    """With negligible damping and no interband terms, eps(w_p) ~ eps_inf - 1."""
    omega_p = 1.0e16
    params = DrudeLorentzParams(plasma_frequency=omega_p, damping_rate=omega_p * 1e-8)
    eps = drude_lorentz_permittivity(params, 2.0 * math.pi * C_NM_PER_S / omega_p)
    assert abs(eps - (params.epsilon_infinity - 1.0)) < 1e-6


def test_drude_lorentz_rejects_nonpositive_parameters():
    with pytest.raises(ValueError):
        DrudeLorentzParams(plasma_frequency=0.0, damping_rate=1.0)
    with pytest.raises(ValueError):
        DrudeLorentzParams(plasma_frequency=1e16, damping_rate=-1.0)


def test_bundled_gold_table_covers_operating_band():
    table = gold_dispersion()
    assert table.wavelength_min <= 400.0
    assert table.wavelength_max >= 1000.0


def test_bundled_gold_is_a_lossy_metal_in_band():
    table = gold_dispersion()
    for wavelength in range(550, 1001, 50):
        eps = permittivity_at(table, float(wavelength))
        assert eps.real < 0.0, wavelength
        assert eps.imag > 0.0, wavelength


def test_bundled_gold_810nm_regression():
    table = gold_dispersion()
    assert permittivity_at(table, 810.0) == pytest.approx(GOLD_810_EPS, rel=1e-12)
    assert permittivity_at(table, 810.0) == pytest.approx(
        complex(*GOLD_810_NK) ** 2, rel=1e-9
    )


def test_direct_table_construction_validates():
    with pytest.raises(DispersionValidationError):
        DispersionTable(entries=((500.0, 0.97, 1.87),))
    with pytest.raises(DispersionValidationError):
        DispersionTable(entries=((600.0, 0.25, 3.07), (500.0, 0.97, 1.87)))
