"""Off-time simulation engine: compilation, integration, determinism, errors."""

import math

import numpy as np
import pytest

from pnet.engine import (NaiveEngine, ReferenceEngine, SimConfig, attach_engine,
                         compile_program, get_engine, run, run_program)
from pnet.engine.program import MAT_FREE, MAT_HOLD, MAT_SIGNAL
from pnet.errors import (InvalidEngine, MissingSignal, NoSuchChannel,
                         NotValidated, NumericBlowup, SimCancelled)
from pnet.kinds import ModuleKind as K
from pnet.network import Network


def chain(n_masses, k=0.01, x0_first=1.0):
    """SOL - RES - MAS - RES - MAS ... with a SOX on the last mass."""
    net = Network()
    sol = net.add_module(K.SOL)
    prev = sol
    masses = []
    for _ in range(n_masses):
        m = net.add_module(K.MAS)
        r = net.add_module(K.RES)
        net.set_param([r], "K", k)
        net.connect(r, prev, m)
        prev = m
        masses.append(m)
    net.set_initial([masses[0]], "X0", x0_first)
    sox = net.add_module(K.SOX)
    net.attach(sox, masses[-1])
    return net, masses, sox


def single_oscillator(km=0.01, x0=1.0):
    net = Network()
    sol = net.add_module(K.SOL)
    mas = net.add_module(K.MAS)
    res = net.add_module(K.RES)
    net.set_param([res], "K", km)
    net.connect(res, sol, mas)
    net.set_initial([mas], "X0", x0)
    sox = net.add_module(K.SOX)
    net.attach(sox, mas)
    return net, mas, sox


# -- compilation ------------------------------------------------------------

class TestCompile:

    def test_cel_coefficients(self):
        net = Network()
        cel = net.add_module(K.CEL)
        net.set_param([cel], "K", 0.01)
        prog = compile_program(net, duration=10)
        i = list(prog.mat_ids).index(cel)
        assert prog.c1[i] == pytest.approx(1.99)
        assert prog.c2[i] == -1.0

    def test_mas_coefficients(self):
        net = Network()
        net.add_module(K.MAS)
        prog = compile_program(net, duration=10)
        assert prog.c1[0] == 2.0 and prog.c2[0] == -1.0

    def test_tags(self):
        net = Network()
        mas = net.add_module(K.MAS)
        sol = net.add_module(K.SOL)
        enx = net.add_module(K.ENX)
        net.set_signal_ref([enx], "s")
        prog = compile_program(net, duration=4, signals={"s": np.zeros(4)})
        tags = dict(zip(prog.mat_ids, prog.mat_tag))
        assert tags[mas] == MAT_FREE
        assert tags[sol] == MAT_HOLD
        assert tags[enx] == MAT_SIGNAL

    def test_dangling_rejected(self):
        net = Network()
        net.add_module(K.MAS)
        net.add_module(K.RES)
        with pytest.raises(NotValidated):
            compile_program(net, duration=10)

    def test_missing_signal_dedicated_error(self):
        net = Network()
        net.add_module(K.ENX)
        with pytest.raises(MissingSignal):
            compile_program(net, duration=10)

    def test_signal_padded_and_truncated(self):
        net = Network()
        enx = net.add_module(K.ENX)
        net.set_signal_ref([enx], "s")
        short = compile_program(net, duration=8, signals={"s": np.ones(3)})
        assert short.signals.shape == (1, 8)
        assert list(short.signals[0]) == [1, 1, 1, 0, 0, 0, 0, 0]
        long = compile_program(net, duration=2, signals={"s": np.ones(5)})
        assert long.signals.shape == (1, 2)


# -- integration basics -----------------------------------------------------

class TestIntegration:

    def test_single_mas_holds_position(self):
        net = Network()
        mas = net.add_module(K.MAS)
        net.set_initial([mas], "X0", 1.0)
        sox = net.add_module(K.SOX)
        net.attach(sox, mas)
        res = run(net, SimConfig(duration=100))
        assert np.all(res.channel(f"sox-{sox}").data == 1.0)

    def test_uniform_motion_exact(self):
        # With a dyadic V0 every x(n) = V0 * n is exactly representable.
        v0 = 2.0 ** -10
        net = Network()
        mas = net.add_module(K.MAS)
        net.set_initial([mas], "V0", v0)
        sox = net.add_module(K.SOX)
        net.attach(sox, mas)
        res = run(net, SimConfig(duration=1000))
        expect = v0 * np.arange(1000)
        assert np.array_equal(res.channel(f"sox-{sox}").data, expect)

    def test_first_sample_is_x0(self):
        net, mas, sox = single_oscillator(x0=0.25)
        res = run(net, SimConfig(duration=16))
        assert res.channel(f"sox-{sox}").data[0] == 0.25

    def test_sol_never_moves(self):
        net = Network()
        sol = net.add_module(K.SOL)
        mas = net.add_module(K.MAS)
        res_id = net.add_module(K.RES)
        net.set_param([res_id], "K", 0.5)
        net.connect(res_id, sol, mas)
        net.set_initial([sol], "X0", 0.125)
        net.set_initial([mas], "X0", 1.0)
        sox = net.add_module(K.SOX)
        net.attach(sox, sol)
        out = run(net, SimConfig(duration=200)).channel(f"sox-{sox}").data
        assert np.all(out == 0.125)

    def test_enx_follows_signal(self):
        net = Network()
        enx = net.add_module(K.ENX)
        net.set_signal_ref([enx], "drive")
        sox = net.add_module(K.SOX)
        net.attach(sox, enx)
        sig = np.sin(np.arange(64) * 0.1)
        res = run(net, SimConfig(duration=64), signals={"drive": sig})
        out = res.channel(f"sox-{sox}").data
        # Sample n is the pre-update position: X0 first, then signal[n-1]? No:
        # position at step n equals signal(n) once computed, observed next step.
        assert out[0] == 0.0
        assert np.array_equal(out[1:], sig[:-1])

    def test_enf_injects_force(self):
        # A unit force pulse on a unit mass changes velocity by 1 for one step.
        net = Network()
        mas = net.add_module(K.MAS)
        enf = net.add_module(K.ENF)
        net.set_signal_ref([enf], "kick")
        net.attach(enf, mas)
        sox = net.add_module(K.SOX)
        net.attach(sox, mas)
        sig = np.zeros(32)
        sig[0] = 1.0
        out = run(net, SimConfig(duration=32), signals={"kick": sig}).channel(f"sox-{sox}").data
        # x(0)=0; the pulse acts during step 0 -> x(1)=1, then drifts by 1/step.
        assert np.array_equal(out, np.arange(32, dtype=float))

    def test_empty_network_runs_full_duration(self):
        net = Network()
        res = run(net, SimConfig(duration=500))
        assert res.stats.steps == 500
        assert res.channels == []

    def test_gain_scales_output(self):
        net, mas, sox = single_oscillator(x0=1.0)
        base = run(net, SimConfig(duration=64)).channel(f"sox-{sox}").data.copy()
        net.set_param([sox], "gain", 0.5)
        half = run(net, SimConfig(duration=64)).channel(f"sox-{sox}").data
        assert np.array_equal(half, 0.5 * base)

    def test_sof_records_minus_k_dx(self):
        net = Network()
        sol = net.add_module(K.SOL)
        mas = net.add_module(K.MAS)
        res_id = net.add_module(K.RES)
        net.set_param([res_id], "K", 0.01)
        net.connect(res_id, sol, mas)
        net.set_initial([mas], "X0", 1.0)
        sof = net.add_module(K.SOF)
        net.attach(sof, res_id)
        sox = net.add_module(K.SOX)
        net.attach(sox, mas)
        r = run(net, SimConfig(duration=128))
        x = r.channel(f"sox-{sox}").data
        f = r.channel(f"sof-{sof}").data
        # force on endpoint a (the SOL): -K * (xa - xb) = K * x_mas
        assert np.allclose(f, 0.01 * x, rtol=0, atol=0)


# -- force law equivalences -------------------------------------------------

class TestForceLaws:

    def test_but_equals_ref_when_engaged(self):
        # A buffer with S = 0 against an anchor at the spring rest point acts
        # exactly like a spring-damper while the gap stays below threshold.
        def build(kind):
            net = Network()
            sol = net.add_module(K.SOL)
            mas = net.add_module(K.MAS)
            lia = net.add_module(kind)
            net.set_param([lia], "K", 0.01)
            net.set_param([lia], "Z", 0.3)   # overdamped: never crosses zero
            net.connect(lia, mas, sol)
            net.set_initial([mas], "X0", -1.0)  # dx = -1 < S = 0: engaged
            sox = net.add_module(K.SOX)
            net.attach(sox, mas)
            return net, sox

        net_b, sox_b = build(K.BUT)
        net_r, sox_r = build(K.REF)
        out_b = run(net_b, SimConfig(duration=2000)).channel(f"sox-{sox_b}").data
        out_r = run(net_r, SimConfig(duration=2000)).channel(f"sox-{sox_r}").data
        assert np.array_equal(out_b, out_r)
        assert out_b[-1] < 0  # stayed on the engaged side throughout

    def test_but_releases_above_threshold(self):
        net = Network()
        sol = net.add_module(K.SOL)
        mas = net.add_module(K.MAS)
        but = net.add_module(K.BUT)
        net.set_param([but], "K", 0.1)
        net.connect(but, mas, sol)
        net.set_initial([mas], "X0", 1.0)  # dx = 1 > S = 0: no contact
        sox = net.add_module(K.SOX)
        net.attach(sox, mas)
        out = run(net, SimConfig(duration=64)).channel(f"sox-{sox}").data
        assert np.all(out == 1.0)

    def test_lnl_linear_tables_match_ref(self):
        # fK(dx) = -K*dx and fZ(dv) = -Z*dv over a range no state leaves
        # reduce LNL to REF within interpolation roundoff.
        kk, zz = 0.01, 0.02

        def build(kind):
            net = Network()
            sol = net.add_module(K.SOL)
            mas = net.add_module(K.MAS)
            lia = net.add_module(kind)
            if kind is K.REF:
                net.set_param([lia], "K", kk)
                net.set_param([lia], "Z", zz)
            else:
                net.set_param([lia], "fK", [(-8.0, 8.0 * kk), (8.0, -8.0 * kk)])
                net.set_param([lia], "fZ", [(-8.0, 8.0 * zz), (8.0, -8.0 * zz)])
            net.connect(lia, mas, sol)
            net.set_initial([mas], "X0", 1.0)
            sox = net.add_module(K.SOX)
            net.attach(sox, mas)
            return net, sox

        net_l, sox_l = build(K.LNL)
        net_r, sox_r = build(K.REF)
        out_l = run(net_l, SimConfig(duration=4096)).channel(f"sox-{sox_l}").data
        out_r = run(net_r, SimConfig(duration=4096)).channel(f"sox-{sox_r}").data
        assert np.max(np.abs(out_l - out_r)) <= 1e-12

    def test_fro_damps_relative_motion(self):
        net = Network()
        sol = net.add_module(K.SOL)
        mas = net.add_module(K.MAS)
        fro = net.add_module(K.FRO)
        net.set_param([fro], "Z", 0.1)
        net.connect(fro, mas, sol)
        net.set_initial([mas], "V0", 1.0)
        sox = net.add_module(K.SOX)
        net.attach(sox, mas)
        out = run(net, SimConfig(duration=512)).channel(f"sox-{sox}").data
        v = np.diff(out)
        assert np.all(v[1:] <= v[:-1] + 1e-15)  # velocity decays monotonically
        assert v[-1] < 0.01


# -- physics laws -----------------------------------------------------------

class TestPhysics:

    def test_pitch_matches_closed_form(self):
        km = 0.01
        rate = 44100
        predicted = rate * math.acos(1 - km / 2) / (2 * math.pi)
        net, mas, sox = single_oscillator(km)
        out = run(net, SimConfig(duration=2 ** 16)).channel(f"sox-{sox}").data
        spec = np.abs(np.fft.rfft(out * np.hanning(len(out))))
        peak = np.argmax(spec)
        measured = peak * rate / len(out)
        bin_width = rate / len(out)
        assert abs(measured - predicted) <= bin_width
        assert predicted == pytest.approx(702.17, abs=0.01)

    def test_oscillation_is_undamped(self):
        net, mas, sox = single_oscillator(0.01)
        out = run(net, SimConfig(duration=2 ** 15)).channel(f"sox-{sox}").data
        half = len(out) // 2
        assert np.max(np.abs(out[half:])) == pytest.approx(np.max(np.abs(out[:half])), rel=1e-4)

    def test_momentum_conserved_isolated_pair(self):
        net = Network()
        m1 = net.add_module(K.MAS)
        m2 = net.add_module(K.MAS)
        net.set_param([m2], "M", 2.0)
        res_id = net.add_module(K.RES)
        net.set_param([res_id], "K", 0.04)
        net.connect(res_id, m1, m2)
        net.set_initial([m1], "V0", 2.0 ** -10)
        s1 = net.add_module(K.SOX)
        net.attach(s1, m1)
        s2 = net.add_module(K.SOX)
        net.attach(s2, m2)
        r = run(net, SimConfig(duration=10 ** 5))
        x1 = r.channel(f"sox-{s1}").data
        x2 = r.channel(f"sox-{s2}").data
        p = 1.0 * np.diff(x1) + 2.0 * np.diff(x2)
        drift = np.max(np.abs(p - p[0])) / abs(p[0])
        assert drift < 1e-8


# -- determinism ------------------------------------------------------------

class TestDeterminism:

    def test_naive_matches_reference_bitwise(self):
        net, masses, sox = chain(40, k=0.02)
        cfg_ref = SimConfig(duration=5000, engine="reference")
        cfg_naive = SimConfig(duration=5000, engine="naive")
        a = run(net, cfg_ref).channel(f"sox-{sox}").data
        b = run(net, cfg_naive).channel(f"sox-{sox}").data
        assert np.array_equal(a, b)
        assert a.dtype == np.float64

    def test_thread_counts_bit_identical(self):
        net, masses, sox = chain(50, k=0.02)
        outs = []
        for t in (1, 2, 8):
            r = run(net, SimConfig(duration=4000, threads=t))
            outs.append(r.channel(f"sox-{sox}").data.tobytes())
        assert outs[0] == outs[1] == outs[2]

    def test_repeat_runs_identical(self):
        net, masses, sox = chain(10)
        a = run(net, SimConfig(duration=3000)).channel(f"sox-{sox}").data
        b = run(net, SimConfig(duration=3000)).channel(f"sox-{sox}").data
        assert np.array_equal(a, b)


# -- failure reporting and control ------------------------------------------

class TestControl:

    def _unstable(self):
        net = Network()
        sol = net.add_module(K.SOL)
        mas = net.add_module(K.MAS)
        res_id = net.add_module(K.RES)
        net.set_param([res_id], "K", 4.1)  # past the stability edge
        net.connect(res_id, sol, mas)
        net.set_initial([mas], "X0", 1.0)
        sox = net.add_module(K.SOX)
        net.attach(sox, mas)
        return net, mas, sox

    def test_blowup_reports_step_and_module(self):
        net, mas, sox = self._unstable()
        with pytest.raises(NumericBlowup) as info:
            run(net, SimConfig(duration=44100))
        err = info.value
        assert err.module_id == mas
        assert 0 < err.step < 44100
        assert err.partial is not None
        assert err.partial.stats.steps == err.partial_steps

    def test_blowup_step_is_first_nonfinite(self):
        net, mas, sox = self._unstable()
        with pytest.raises(NumericBlowup) as info:
            run(net, SimConfig(duration=44100))
        step = info.value.step
        partial = info.value.partial.channel(f"sox-{sox}").data
        assert np.isfinite(partial).all()  # everything recorded before it blew

    def test_cancellation_returns_partials(self):
        net, masses, sox = chain(5)
        calls = []

        def should_cancel():
            calls.append(1)
            return len(calls) > 2

        with pytest.raises(SimCancelled) as info:
            run(net, SimConfig(duration=10 ** 6), should_cancel=should_cancel)
        err = info.value
        assert 0 < err.partial_steps < 10 ** 6
        assert err.partial.stats.steps == err.partial_steps

    def test_progress_reported_at_least_ten_times(self):
        net, masses, sox = chain(3)
        seen = []
        run(net, SimConfig(duration=44100), progress=lambda done, total: seen.append((done, total)))
        assert len(seen) >= 10
        assert seen[-1] == (44100, 44100)
        assert all(a <= b for (a, _), (b, _) in zip(seen, seen[1:]))

    def test_unknown_channel_name(self):
        net, mas, sox = single_oscillator()
        res = run(net, SimConfig(duration=8))
        with pytest.raises(NoSuchChannel):
            res.channel("sox-999")


# -- engine registry --------------------------------------------------------

class TestRegistry:

    def test_builtin_engines_present(self):
        assert isinstance(get_engine("reference"), ReferenceEngine)
        assert isinstance(get_engine("naive"), NaiveEngine)

    def test_unknown_engine(self):
        with pytest.raises(InvalidEngine):
            get_engine("vaporware")

    def test_attach_rejects_malformed(self):
        class NoName:
            def prepare(self, program, threads):
                return None

        with pytest.raises(InvalidEngine):
            attach_engine(NoName())

        class NoPrepare:
            name = "empty"

        with pytest.raises(InvalidEngine):
            attach_engine(NoPrepare())

    def test_attach_custom_engine_round_trip(self):
        base = get_engine("naive")

        class Wrapped:
            name = "wrapped-naive"

            def prepare(self, program, threads):
                return base.prepare(program, threads)

        attach_engine(Wrapped())
        try:
            net, mas, sox = single_oscillator()
            r = run(net, SimConfig(duration=64, engine="wrapped-naive"))
            assert r.engine == "wrapped-naive"
        finally:
            from pnet.engine import runner
            runner._ENGINES.pop("wrapped-naive", None)


# -- motion trace -----------------------------------------------------------

class TestTrace:

    def test_trace_geometry_and_content(self):
        net, masses, sox = chain(4)
        prog = compile_program(net, duration=1000, decimation=64)
        r = run_program(prog, SimConfig(duration=1000))
        tr = r.trace
        assert tr is not None
        assert tr.decimation == 64
        assert tr.frames.shape == (math.ceil(1000 / 64), len(prog.mat_ids))
        # frame k holds positions at step k*64; masses start at rest except the first
        first = list(prog.mat_ids).index(masses[0])
        assert tr.frames[0, first] == np.float32(1.0)

    def test_trace_disabled(self):
        net, masses, sox = chain(2)
        prog = compile_program(net, duration=100, trace_ids=())
        r = run_program(prog, SimConfig(duration=100))
        assert r.trace is None

    def test_trace_subset(self):
        net, masses, sox = chain(3)
        prog = compile_program(net, duration=100, trace_ids=[masses[1]])
        r = run_program(prog, SimConfig(duration=100))
        assert list(r.trace.mat_ids) == [masses[1]]
