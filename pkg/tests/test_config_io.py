import math

import numpy as np
import pytest

from fdbouss import io
from fdbouss.config import ConfigError, RunConfig, from_mapping, load, parse_float, parse_text


class TestConfig:
    def test_parse_pi(self):
        assert parse_float("2pi") == pytest.approx(2 * math.pi)
        assert parse_float("pi") == pytest.approx(math.pi)
        assert parse_float("0.5*pi") == pytest.approx(math.pi / 2)
        assert parse_float("1e-3") == 1e-3

    def test_parse_text_comments(self):
        pairs = parse_text("# header\n\ngrid.n = 64  # trailing\nbeta=0.5\n")
        assert pairs == {"grid.n": "64", "beta": "0.5"}

    def test_parse_text_bad_line(self):
        with pytest.raises(ConfigError):
            parse_text("grid.n 64\n")

    def test_defaults(self):
        cfg = from_mapping({})
        assert cfg.model == "boussinesq-1d" and cfg.n == (256,)

    def test_2d_broadcast(self):
        cfg = from_mapping({"model": "boussinesq-2d", "grid.n": "32", "s": "3.5"})
        assert cfg.n == (32, 32) and len(cfg.L) == 2

    def test_all_errors_listed(self):
        with pytest.raises(ConfigError) as exc:
            from_mapping({"model": "kdv", "grid.n": "7", "beta": "-1", "integrator.dt": "0",
                          "bogus": "1"})
        msgs = "\n".join(exc.value.errors)
        for needle in ("bogus", "model", "grid.n", "beta", "integrator.dt"):
            assert needle in msgs
        assert len(exc.value.errors) >= 5

    def test_s_preconditions(self):
        with pytest.raises(ConfigError, match="s > 5/2"):
            from_mapping({"s": "2.5"})
        with pytest.raises(ConfigError, match="s > 3"):
            from_mapping({"model": "boussinesq-2d", "grid.n": "32", "s": "3"})
        # fine without energy monitors
        assert from_mapping({"s": "1", "diagnostics.monitors": "none"}).s == 1.0

    def test_rk4_guard(self):
        with pytest.raises(ConfigError, match="RK4"):
            from_mapping({"integrator.scheme": "RK4", "integrator.dt": "0.1"})

    def test_echo_roundtrip(self, tmp_path):
        cfg = from_mapping({"grid.n": "128", "beta": "0.25", "initial.u_amplitude": "0.1",
                            "diagnostics.monitors": "energy,cavitation"})
        path = tmp_path / "c.cfg"
        path.write_text(cfg.to_text())
        assert load(path) == cfg
        assert from_mapping(cfg.echo()) == cfg

    def test_overrides(self, tmp_path):
        path = tmp_path / "c.cfg"
        path.write_text("beta = 1\n")
        assert load(path, {"beta": "0.5"}).beta == 0.5

    def test_dataclass_default_dim(self):
        assert RunConfig().dim == 1


class TestSnapshots:
    def test_roundtrip_1d(self, tmp_path):
        f = np.random.default_rng(0).standard_normal((2, 16))
        io.write_snapshot(tmp_path / "s.bin", 0.125, f)
        snap = io.read_snapshot(tmp_path / "s.bin")
        assert snap.t == 0.125 and np.array_equal(snap.fields, f) and snap.dim == 1

    def test_header_layout(self, tmp_path):
        f = np.arange(12.0).reshape(1, 3, 4)
        io.write_snapshot(tmp_path / "s.bin", 2.0, f)
        raw = (tmp_path / "s.bin").read_bytes()
        assert raw[:8] == b"FDBOUSS1"
        assert np.frombuffer(raw[8:24], "<u4").tolist() == [2, 3, 4, 1]
        assert np.frombuffer(raw[24:32], "<f8")[0] == 2.0
        assert np.array_equal(np.frombuffer(raw[32:], "<f8"), np.arange(12.0))
        assert len(raw) == 32 + 12 * 8

    def test_bad_magic(self, tmp_path):
        (tmp_path / "x.bin").write_bytes(b"NOTMAGIC" + bytes(24))
        with pytest.raises(ValueError, match="magic"):
            io.read_snapshot(tmp_path / "x.bin")

    def test_truncated(self, tmp_path):
        io.write_snapshot(tmp_path / "s.bin", 0.0, np.zeros((1, 8)))
        data = (tmp_path / "s.bin").read_bytes()
        (tmp_path / "s.bin").write_bytes(data[:-8])
        with pytest.raises(ValueError):
            io.read_snapshot(tmp_path / "s.bin")


class TestSeries:
    def test_float_roundtrip_exact(self, tmp_path):
        vals = np.random.default_rng(1).standard_normal(50) * 10.0 ** np.arange(-25, 25)
        with io.SeriesWriter(tmp_path / "s.csv", ["t", "v"]) as w:
            for i, v in enumerate(vals):
                w.write({"t": i * 0.1, "v": v})
        back = io.read_series(tmp_path / "s.csv")
        assert np.array_equal(back["v"], vals)

    def test_json_nonfinite(self):
        text = io.dumps({"a": math.inf, "b": [math.nan, 1.0]})
        assert '"inf"' in text and '"nan"' in text
