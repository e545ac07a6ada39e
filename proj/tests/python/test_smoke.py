import json
import math

import pytest

import iontransport as it

HBAR = 1.054571817e-34


def make_setup(T_units=10.5, lam=0.0):
    ps = it.preset("paper2014")
    pair = it.make_ion_pair(ps.ion1, ps.ion2)
    omega1 = 2 * math.pi * ps.omega1_linear_Hz
    T0 = 1 / ps.omega1_linear_Hz
    trap = it.make_trap_spec(pair, omega1, ps.d, T_units * T0, lam)
    modes = it.normal_modes(pair, trap)
    return pair, trap, modes


def test_modes_basic():
    pair, trap, modes = make_setup()
    assert pair.mu == pytest.approx(23.98504170 / 9.0121831, rel=1e-12)
    assert modes.Omega_plus > modes.Omega_minus > 0
    assert abs(modes.a_plus**2 + modes.b_plus**2 - 1) < 1e-12
    assert modes.l_p == pytest.approx(modes.l, rel=1e-12)  # lambda = 0


def test_unknown_species_raises():
    with pytest.raises(it.Error):
        it.make_ion_pair("Unobtainium", "Mg24")


def test_design_endpoints_and_zero_error():
    pair, trap, modes = make_setup()
    proto = it.design_cosine(trap, modes)
    p0 = it.evaluate(proto, 0.0)
    pT = it.evaluate(proto, trap.T)
    assert abs(p0.Q0) < 1e-9 * trap.d
    assert abs(pT.Q0 - trap.d) < 1e-9 * trap.d
    assert abs(p0.Q0dot) < 1e-9 * trap.d / trap.T

    assert it.excitation_perturbative(proto, modes, 0.0).E_total == 0.0
    oracle = it.excitation_oracle(proto, modes, 0.0).E_total
    assert oracle < 1e-9 * HBAR * modes.Omega_minus


def test_methods_agree_for_poly14():
    pair, trap, modes = make_setup()
    proto = it.design_poly14(trap, modes)
    assert 0 < proto.condition_number < 1e12
    a = it.excitation_perturbative(proto, modes, 0.05).E_total
    b = it.excitation_oracle(proto, modes, 0.05).E_total
    assert abs(a - b) <= max(1e-12, 1e-6 * max(abs(a), abs(b)))


def test_naive_needs_oracle():
    pair, trap, modes = make_setup()
    naive = it.design_naive(trap)
    with pytest.raises(it.Error):
        it.excitation_perturbative(naive, modes, 0.05)
    rep = it.excitation_oracle(naive, modes, 0.05)
    assert rep.E_total > 0


def test_cli_excite_and_formats():
    args = ["excite", "--preset", "paper2014", "--protocol", "poly14",
            "--T", "7.5", "--lambda", "0"]
    code, out, err = it.cli(args)
    assert code == 0, err
    lines = [ln for ln in out.splitlines() if ln and not ln.startswith("#")]
    header = lines[0].split(",")
    row = lines[1].split(",")
    assert header[:5] == ["lambda", "E_plus_J", "E_minus_J", "E_total_J",
                          "E_total_hbarOmega_minus"]
    assert float(row[header.index("E_total_J")]) == 0.0

    code2, out2, _ = it.cli(args + ["--format", "json"])
    assert code2 == 0
    docs = [json.loads(ln) for ln in out2.splitlines() if ln]
    body = docs[1]
    assert body["E_total_J"] == float(row[header.index("E_total_J")])
    assert body["lambda"] == float(row[header.index("lambda")])


def test_cli_determinism():
    args = ["figure", "fig3", "--samples", "65"]
    first = it.cli(args)
    second = it.cli(args)
    assert first == second
    assert first[0] == 0


def test_cli_rejects_unknown_flag():
    code, out, err = it.cli(["excite", "--bogus", "1"])
    assert code == 1
