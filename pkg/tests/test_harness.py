import math
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from qmet import estimation, harness, states
from qmet.errors import ConfigError


def small_config(**kw) -> harness.SweepConfig:
    base = dict(p_grid=(0.0, 0.5, 1.0), n_shots=2000, repetitions=4,
                master_seed=9)
    base.update(kw)
    return harness.build_config(**base)


@pytest.fixture(scope="module")
def rows():
    return harness.run_sweep(small_config())


@pytest.fixture(scope="module")
def sweep(rows):
    return rows, small_config()


class TestConfig:
    def test_defaults(self):
        cfg = harness.SweepConfig().validate()
        assert cfg.q == 0.5
        assert cfg.p_grid == tuple(round(0.1 * k, 10) for k in range(11))
        assert cfg.n_shots == 10_000
        assert cfg.repetitions == 10
        assert cfg.variance_reps == 1_000
        assert cfg.master_seed == 42
        assert cfg.mixing_mode == harness.DIRECT_STATE

    def test_text_round_trip(self):
        cfg = small_config(q=0.25, mixing_mode=harness.POST_PROCESS_MIX)
        parsed = harness.parse_config_text(cfg.to_text())
        assert harness.build_config(**parsed) == cfg

    def test_parse_ignores_comments_and_blanks(self):
        text = "# comment\n\nq = 0.3  # trailing\nn_shots = 500\n"
        parsed = harness.parse_config_text(text)
        assert parsed == {"q": 0.3, "n_shots": 500}

    def test_parse_grid_forms(self):
        assert harness.parse_grid("0, 0.5, 1") == (0.0, 0.5, 1.0)
        assert harness.parse_grid("[0.1, 0.2]") == (0.1, 0.2)
        assert harness.parse_grid("0.3 0.7") == (0.3, 0.7)

    @pytest.mark.parametrize("text", [
        "unknown_key = 1",
        "q 0.5",
        "n_shots = allthe",
        "p_grid = 0, banana",
    ])
    def test_parse_rejects(self, text):
        with pytest.raises(ConfigError):
            harness.parse_config_text(text)

    @pytest.mark.parametrize("kw", [
        dict(q=1.5),
        dict(p_grid=()),
        dict(p_grid=(0.0, 1.2)),
        dict(n_shots=0),
        dict(repetitions=1),
        dict(variance_reps=0),
        dict(mixing_mode="Bogus"),
    ])
    def test_validate_rejects(self, kw):
        with pytest.raises(ConfigError):
            harness.build_config(**kw)

    def test_file_then_override_precedence(self):
        text = "q = 0.3\nn_shots = 777\n"
        cfg = harness.build_config(text, n_shots=999)
        assert cfg.q == 0.3
        assert cfg.n_shots == 999


class TestRunSweep:
    def test_structure(self, rows):
        assert len(rows) == 3
        for row in rows:
            assert len(row.stats) == 6
            kinds = {st.kind for st in row.stats}
            assert kinds == set(harness.SWEEP_KINDS)
            for st in row.stats:
                assert math.isfinite(st.mean) and math.isfinite(st.stddev)
                assert st.stddev >= 0.0
                assert st.unc_qcrb <= st.unc_nonopt + 1e-12

    def test_theory_columns_are_the_closed_curves(self, rows):
        cfg = small_config()
        for row, p in zip(rows, cfg.p_grid):
            for st in row.stats:
                truth = harness._CLOSED_FORMS[st.kind](p, cfg.q)
                assert st.theory_value == pytest.approx(truth, abs=1e-12)
                assert st.unc_nonopt == pytest.approx(
                    estimation.nonopt_unc_curves(st.kind, truth), abs=1e-12)
                assert st.unc_qcrb == pytest.approx(
                    estimation.qcrb_unc(st.kind, truth), abs=1e-12)

    def test_pure_endpoint(self, rows):
        last = rows[-1]
        st = next(s for s in last.stats
                  if s.kind == states.NEGATIVITY and s.variant == "optimal")
        assert st.mean == pytest.approx(1.0, abs=1e-9)
        assert st.stddev == pytest.approx(0.0, abs=1e-9)

    def test_unentangled_endpoint_means_near_zero(self, rows):
        first = rows[0]
        for st in first.stats:
            assert abs(st.mean) < 0.12  # ~5 sigma at n=2000, M=4
        st = next(s for s in first.stats
                  if s.kind == states.NEGATIVITY and s.variant == "optimal")
        assert st.unc_qcrb == pytest.approx(1.0, abs=1e-12)

    def test_p_fitted_tracks_p_true(self, rows):
        for row in rows:
            assert abs(row.p_fitted - row.p_true) < 0.05

    def test_deterministic(self, rows):
        cfg = small_config()
        again = harness.run_sweep(cfg)
        assert harness.csv_text(again, cfg) == harness.csv_text(rows, cfg)

    def test_postprocess_mode_agrees_loosely(self, rows):
        cfg = small_config(mixing_mode=harness.POST_PROCESS_MIX)
        mixed = harness.run_sweep(cfg)
        for row_d, row_m in zip(rows, mixed):
            for st_d, st_m in zip(row_d.stats, row_m.stats):
                assert abs(st_d.mean - st_m.mean) < 0.1


class TestEmission:
    def test_csv_header_and_shape(self, sweep):
        rows, cfg = sweep
        text = harness.csv_text(rows, cfg)
        lines = text.splitlines()
        assert lines[0] == ("p_true,p_fitted,kind,variant,mean,stddev,"
                            "theory_value,unc_nonopt,unc_qcrb,n_shots,reps,seed")
        assert len(lines) == 1 + 3 * 6
        assert text.endswith("\n") and "\r" not in text
        for line in lines[1:]:
            assert len(line.split(",")) == 12

    def test_csv_trailing_columns(self, sweep):
        rows, cfg = sweep
        line = harness.csv_text(rows, cfg).splitlines()[1]
        assert line.endswith(f",{cfg.n_shots},{cfg.repetitions},{cfg.master_seed}")

    def test_csv_write_is_byte_stable(self, sweep, tmp_path):
        rows, cfg = sweep
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        harness.emit_csv(rows, cfg, a)
        harness.emit_csv(rows, cfg, b)
        assert a.read_bytes() == b.read_bytes()

    def test_empty_rows_error_and_no_file(self, sweep, tmp_path):
        _, cfg = sweep
        target = tmp_path / "never.csv"
        with pytest.raises(ConfigError):
            harness.emit_csv([], cfg, target)
        assert not target.exists()

    def test_one_point_sweep(self, tmp_path):
        cfg = small_config(p_grid=(0.6,))
        rows = harness.run_sweep(cfg)
        path = tmp_path / "one.csv"
        harness.emit_csv(rows, cfg, path)
        lines = path.read_text().splitlines()
        assert len(lines) == 1 + 6

    def test_svg_well_formed_with_curves_and_bars(self, sweep):
        rows, cfg = sweep
        for kind in harness.SWEEP_KINDS:
            for variant in estimation.VARIANTS:
                svg = harness.svg_text(rows, cfg, kind, variant)
                root = ET.fromstring(svg)
                assert root.tag.endswith("svg")
                body = "".join(svg.splitlines())
                # dashed value curve, dotted and solid envelopes
                assert body.count("stroke-dasharray=\"8 5\"") >= 1
                assert body.count("stroke-dasharray=\"2 4\"") >= 2
                assert body.count("<circle") == len(rows)

    def test_svg_rejects_unknown_kind_or_variant(self, sweep):
        rows, cfg = sweep
        with pytest.raises(ConfigError):
            harness.svg_text(rows, cfg, "entropy", "optimal")
        with pytest.raises(ConfigError):
            harness.svg_text(rows, cfg, states.NEGATIVITY, "bogus")
        with pytest.raises(ConfigError):
            harness.svg_text([], cfg, states.NEGATIVITY, "optimal")

    def test_emit_all_writes_seven_files(self, sweep, tmp_path):
        rows, cfg = sweep
        written = harness.emit_all(rows, cfg, tmp_path / "out")
        assert len(written) == 7
        names = sorted(p.rsplit("/", 1)[-1] for p in written)
        assert names == sorted(
            ["sweep.csv"] + [f"{k}_{v}.svg" for k in harness.SWEEP_KINDS
                             for v in estimation.VARIANTS])


class TestStddevScaling:
    def test_optimal_negativity_stddev_tracks_qcrb(self):
        # p=0.6, q=1/2 -> stddev*sqrt(n) near 0.8 (loose M here)
        cfg = small_config(p_grid=(0.6,), n_shots=10_000, repetitions=60,
                          master_seed=5)
        rows = harness.run_sweep(cfg)
        st = next(s for s in rows[0].stats
                  if s.kind == states.NEGATIVITY and s.variant == "optimal")
        scaled = st.stddev * np.sqrt(cfg.n_shots)
        assert scaled == pytest.approx(0.8, rel=0.25)
