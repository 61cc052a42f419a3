import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from clearn.data import (
    Dataset,
    SplitSpec,
    gen_disk,
    gen_sine,
    generate,
    load_csv,
    save_csv,
    split,
    true_eta_sine,
)
from clearn.errors import (
    DimensionMismatchError,
    HeaderError,
    InvalidInputError,
    InvalidParameterError,
    LabelError,
    RaggedRowError,
)

import oracles


class TestDisk:
    def test_exact_flip_count(self):
        ds = gen_disk(1000, 0.2, seed=1)
        clean = np.where(ds.X[:, 0] >= 0, 1.0, -1.0)
        assert np.sum(ds.y != clean) == 200

    def test_inside_disk(self):
        ds = gen_disk(2000, seed=2)
        assert np.all(np.sum(ds.X**2, axis=1) <= 1.0)

    def test_true_eta_values(self):
        ds = gen_disk(500, seed=3)
        assert set(np.unique(ds.true_eta)) == {0.2, 0.8}
        assert np.all(ds.true_eta[ds.X[:, 0] >= 0] == 0.8)

    def test_no_flips(self):
        ds = gen_disk(100, 0.0, seed=4)
        assert np.all(ds.y == np.where(ds.X[:, 0] >= 0, 1.0, -1.0))

    @pytest.mark.parametrize("f", [-0.1, 0.6])
    def test_bad_flip_fraction(self, f):
        with pytest.raises(InvalidParameterError):
            gen_disk(10, f)

    def test_bad_n(self):
        with pytest.raises(InvalidParameterError):
            gen_disk(1)

    def test_roughly_uniform(self):
        ds = gen_disk(20000, seed=5)
        r2 = np.sum(ds.X**2, axis=1)
        # for the uniform disk, r^2 is U[0, 1]
        assert abs(np.mean(r2 < 0.25) - 0.25) < 0.02


class TestSine:
    def test_eta_half_on_axis(self):
        for x1 in np.linspace(0, 2 * math.pi, 9):
            assert true_eta_sine(x1, 0.0) == 0.5

    def test_eta_at_class_mean(self):
        assert true_eta_sine(math.pi / 2, 2.0) == pytest.approx(1.0, abs=1e-12)

    def test_eta_against_density_oracle(self):
        for x1, x2 in [(0.0, 0.5), (0.3, -0.02), (4.0, 0.01), (5.0, -0.003)]:
            assert true_eta_sine(x1, x2) == pytest.approx(float(oracles.mp_sine_eta(x1, x2)), rel=1e-12)

    @settings(max_examples=200, deadline=None)
    @given(st.floats(0, 2 * math.pi), st.floats(-0.2, 0.2))
    def test_mirror_symmetry(self, x1, x2):
        p = true_eta_sine(x1, x2)
        assert 0.0 <= p <= 1.0
        assert p + true_eta_sine(x1, -x2) == pytest.approx(1.0, abs=1e-15)

    def test_generator_model(self):
        ds = gen_sine(20000, seed=6)
        x1, x2 = ds.X[:, 0], ds.X[:, 1]
        assert np.all((x1 >= 0) & (x1 <= 2 * math.pi))
        eps = ds.y * x2 - np.sin(x1)
        assert abs(eps.mean() - 1.0) < 0.005
        assert abs(eps.var() - 0.01) < 0.001
        assert abs(np.mean(ds.y > 0) - 0.5) < 0.02

    def test_dispatch(self):
        assert generate("sine", 10, seed=1) == gen_sine(10, seed=1)
        with pytest.raises(InvalidParameterError):
            generate("moons", 10)


class TestDeterminism:
    @pytest.mark.parametrize("gen", [gen_disk, gen_sine])
    def test_same_seed_same_data(self, gen):
        assert gen(50, seed=9) == gen(50, seed=9)
        assert gen(50, seed=9) != gen(50, seed=10)


class TestDataset:
    def test_validation(self):
        with pytest.raises(DimensionMismatchError):
            Dataset(np.zeros((3, 2)), np.ones(2))
        with pytest.raises(InvalidInputError):
            Dataset(np.zeros((2, 2)), np.array([1.0, 0.0]))
        with pytest.raises(InvalidInputError):
            Dataset(np.zeros((2, 2)), np.ones(2), np.array([0.5, 1.5]))

    def test_immutable(self):
        ds = gen_disk(5, seed=0)
        with pytest.raises(ValueError):
            ds.X[0, 0] = 3.0


class TestSplit:
    def test_sizes(self):
        tr, te = split(gen_disk(1000, seed=0), SplitSpec(0.1, 7))
        assert (tr.n, te.n) == (100, 900)

    def test_small_fraction(self):
        tr, te = split(gen_disk(400, seed=0), SplitSpec(0.03, 1))
        assert tr.n == 12

    def test_partition_and_determinism(self):
        ds = gen_disk(300, seed=0)
        tr, te = split(ds, SplitSpec(0.3, 5))
        tr2, te2 = split(ds, SplitSpec(0.3, 5))
        assert tr == tr2 and te == te2
        rows = {tuple(r) for r in tr.X} | {tuple(r) for r in te.X}
        assert len(rows) == ds.n and tr.n + te.n == ds.n

    def test_degenerate(self):
        with pytest.raises(InvalidParameterError):
            split(gen_disk(10, seed=0), SplitSpec(0.01, 0))
        with pytest.raises(InvalidParameterError):
            SplitSpec(1.0, 0)


class TestCSV:
    def test_round_trip(self, tmp_path):
        ds = gen_disk(50, seed=1)
        save_csv(ds, tmp_path / "d.csv")
        assert load_csv(tmp_path / "d.csv") == ds

    def test_round_trip_sine_exact(self, tmp_path):
        ds = gen_sine(50, seed=1)
        save_csv(ds, tmp_path / "s.csv")
        back = load_csv(tmp_path / "s.csv")
        assert np.array_equal(back.X, ds.X) and np.array_equal(back.true_eta, ds.true_eta)

    def test_missing_eta(self, tmp_path):
        p = tmp_path / "x.csv"
        p.write_text("f0,f1,y\n0.5,1.0,1\n-0.5,2.0,-1\n")
        ds = load_csv(p)
        assert ds.true_eta is None and ds.n == 2

    def test_bad_label(self, tmp_path):
        p = tmp_path / "x.csv"
        p.write_text("f0,y\n0.5,1\n0.1,0\n")
        with pytest.raises(LabelError, match="line 3"):
            load_csv(p)

    def test_ragged(self, tmp_path):
        p = tmp_path / "x.csv"
        p.write_text("f0,f1,y\n0.5,1.0,1\n0.1,-1\n")
        with pytest.raises(RaggedRowError, match="line 3"):
            load_csv(p)

    def test_bad_header(self, tmp_path):
        p = tmp_path / "x.csv"
        p.write_text("a,b,label\n0.5,1.0,1\n")
        with pytest.raises(HeaderError, match="line 1"):
            load_csv(p)

    def test_error_types_distinct(self):
        assert len({HeaderError, LabelError, RaggedRowError}) == 3
