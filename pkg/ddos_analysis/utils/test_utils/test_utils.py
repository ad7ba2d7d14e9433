import numpy as np
import pytest

from ddos_analysis.utils import atomic_path, atomic_write, derive_seed, make_rng


class TestDeriveSeed:
    def test_same_parts_same_seed(self):
        assert derive_seed(7, "volumes", "node-1") == derive_seed(7, "volumes", "node-1")

    def test_different_stage_different_seed(self):
        assert derive_seed(7, "volumes") != derive_seed(7, "attack")

    def test_order_matters(self):
        assert derive_seed(1, 2) != derive_seed(2, 1)

    def test_range(self):
        seed = derive_seed(123, "x")
        assert 0 <= seed < 2**64

    def test_no_parts(self):
        with pytest.raises(ValueError):
            derive_seed()

    def test_make_rng_streams_agree(self):
        a = make_rng(5, "stage").random(10)
        b = make_rng(5, "stage").random(10)
        np.testing.assert_array_equal(a, b)


class TestAtomicWrite:
    def test_writes_text(self, tmp_path):
        target = tmp_path / "out" / "report.json"
        with atomic_write(target) as handle:
            handle.write("{}")
        assert target.read_text() == "{}"
        assert [p.name for p in target.parent.iterdir()] == ["report.json"]

    def test_failure_keeps_previous_file(self, tmp_path):
        target = tmp_path / "report.json"
        target.write_text("old")
        with pytest.raises(RuntimeError):
            with atomic_write(target) as handle:
                handle.write("new")
                raise RuntimeError("boom")
        assert target.read_text() == "old"
        assert [p.name for p in tmp_path.iterdir()] == ["report.json"]

    def test_binary_mode(self, tmp_path):
        target = tmp_path / "blob.npy"
        with atomic_write(target, "wb") as handle:
            np.save(handle, np.arange(3.0), allow_pickle=False)
        np.testing.assert_array_equal(np.load(target), np.arange(3.0))

    def test_atomic_path_yields_sibling(self, tmp_path):
        target = tmp_path / "table.csv"
        with atomic_path(target) as tmp:
            assert tmp.parent == target.parent
            tmp.write_text("a,b\n")
        assert target.read_text() == "a,b\n"
