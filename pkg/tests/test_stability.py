"""Stability analysis against brute-force root finding and empirical runs."""

import cmath
import math
import random

import numpy as np
import pytest

from pnet.engine import SimConfig, frequency_of, run, stability_check, stiffness_for_frequency
from pnet.engine.stability import companion_radius, verdict_for
from pnet.errors import NumericBlowup
from pnet.kinds import ModuleKind as K
from pnet.network import Network


def numpy_radius(km, zm):
    """Independent oracle: largest |root| of r^2 - (2-km-zm) r + (1-zm)."""
    roots = np.roots([1.0, -(2.0 - km - zm), 1.0 - zm])
    return max(abs(r) for r in roots)


def anchored_mass(km, zm):
    net = Network()
    sol = net.add_module(K.SOL)
    mas = net.add_module(K.MAS)
    ref = net.add_module(K.REF)
    net.set_param([ref], "K", km)
    net.set_param([ref], "Z", zm)
    net.connect(ref, sol, mas)
    net.set_initial([mas], "X0", 1.0)
    sox = net.add_module(K.SOX)
    net.attach(sox, mas)
    return net, mas, sox


class TestRadius:

    @pytest.mark.parametrize("km,zm", [
        (0.01, 0.0), (4.1, 0.0), (0.0, -0.01), (1.0, 0.5), (3.9, 0.0),
        (0.0, 0.0), (2.0, 1.0), (0.5, 2.5), (4.0, 0.0),
    ])
    def test_matches_numpy_roots(self, km, zm):
        assert companion_radius(km, zm) == pytest.approx(numpy_radius(km, zm), rel=1e-9)

    def test_random_sweep_against_oracle(self):
        rng = random.Random(7)
        for _ in range(500):
            km = rng.uniform(-1.0, 6.0)
            zm = rng.uniform(-1.0, 3.0)
            assert companion_radius(km, zm) == pytest.approx(
                numpy_radius(km, zm), rel=1e-9, abs=1e-12)

    def test_undamped_band_is_exactly_unit(self):
        # Complex-root region with zm = 0 has radius exactly sqrt(1) = 1.
        for km in (0.001, 0.01, 0.1, 1.0, 3.99):
            assert companion_radius(km, 0.0) == 1.0


class TestVerdicts:

    def test_oscillator_stable(self):
        assert verdict_for(0.01, 0.0) == "stable"

    def test_overstiff_unstable(self):
        assert verdict_for(4.1, 0.0) == "unstable"

    def test_negative_damping_unstable(self):
        assert verdict_for(0.0, -0.01) == "unstable"

    def test_free_mass_marginal(self):
        assert verdict_for(0.0, 0.0) == "marginal"

    def test_damped_stable(self):
        assert verdict_for(0.01, 0.01) == "stable"

    def test_network_report(self):
        net, mas, sox = anchored_mass(0.01, 0.0)
        report = stability_check(net)
        assert report.worst == "stable"
        entry = [e for e in report.entries if e.module_id == mas][0]
        assert entry.km == pytest.approx(0.01)

        net2, mas2, _ = anchored_mass(4.1, 0.0)
        report2 = stability_check(net2)
        assert report2.worst == "unstable"
        assert [e.module_id for e in report2.offenders()] == [mas2]

    def test_cel_own_coefficients_counted(self):
        net = Network()
        cel = net.add_module(K.CEL)
        net.set_param([cel], "K", 4.1)
        report = stability_check(net)
        assert report.worst == "unstable"

    def test_but_counts_as_engaged_advisory(self):
        net = Network()
        sol = net.add_module(K.SOL)
        mas = net.add_module(K.MAS)
        but = net.add_module(K.BUT)
        net.set_param([but], "K", 4.1)
        net.connect(but, sol, mas)
        report = stability_check(net)
        entry = [e for e in report.entries if e.module_id == mas][0]
        assert entry.verdict == "unstable" and entry.advisory

    def test_stiffness_aggregates_across_links(self):
        # Two springs of 2.2 each exceed the 4.0 edge together.
        net = Network()
        mas = net.add_module(K.MAS)
        for _ in range(2):
            sol = net.add_module(K.SOL)
            res = net.add_module(K.RES)
            net.set_param([res], "K", 2.2)
            net.connect(res, sol, mas)
        report = stability_check(net)
        entry = [e for e in report.entries if e.module_id == mas][0]
        assert entry.km == pytest.approx(4.4)
        assert entry.verdict == "unstable"


class TestEmpirical:
    """Verdicts must agree with what simulation actually does."""

    def test_stable_case_stays_bounded(self):
        net, mas, sox = anchored_mass(0.01, 0.001)
        out = run(net, SimConfig(duration=20000)).channel(f"sox-{sox}").data
        assert np.isfinite(out).all()
        assert np.max(np.abs(out)) <= 1.0 + 1e-9

    def test_unstable_case_blows_up(self):
        net, mas, sox = anchored_mass(4.1, 0.0)
        assert stability_check(net).worst == "unstable"
        with pytest.raises(NumericBlowup):
            run(net, SimConfig(duration=44100))

    def test_negative_damping_grows(self):
        net, mas, sox = anchored_mass(0.01, -0.01)
        assert stability_check(net).worst == "unstable"
        out = run(net, SimConfig(duration=8192)).channel(f"sox-{sox}").data
        assert np.max(np.abs(out[-512:])) > np.max(np.abs(out[:512]))

    def test_envelope_growth_matches_radius(self):
        # Growth per step of the peak envelope approximates the root radius.
        km, zm = 0.04, -0.004
        radius = companion_radius(km, zm)
        net, mas, sox = anchored_mass(km, zm)
        out = run(net, SimConfig(duration=2 ** 14)).channel(f"sox-{sox}").data
        n = len(out)
        a0 = np.max(np.abs(out[: n // 8]))
        a1 = np.max(np.abs(out[-n // 8:]))
        measured = (a1 / a0) ** (1.0 / (n - n // 8))
        assert measured == pytest.approx(radius, abs=2e-4)


class TestFrequencyLaws:

    @pytest.mark.parametrize("km", [0.001, 0.01, 0.1])
    def test_frequency_round_trip(self, km):
        f = frequency_of(km, 1.0)
        assert stiffness_for_frequency(f) == pytest.approx(km, rel=1e-12)

    def test_reference_value(self):
        assert frequency_of(0.01, 1.0) == pytest.approx(702.17, abs=0.01)

    def test_out_of_band(self):
        with pytest.raises(ValueError):
            frequency_of(4.5, 1.0)
        with pytest.raises(ValueError):
            stiffness_for_frequency(30000.0)

    def test_small_k_approaches_continuous_law(self):
        # For small K/M the discrete law converges to sqrt(K/M)/(2 pi) * rate.
        km = 1e-6
        cont = 44100 * math.sqrt(km) / (2 * math.pi)
        assert frequency_of(km, 1.0) == pytest.approx(cont, rel=1e-5)
