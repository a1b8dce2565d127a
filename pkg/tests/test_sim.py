import csv
import io
import json

import numpy as np
import pytest

import regenerate
from conftest import FIXTURES
from regdepth.core import is_general_position
from regdepth.sim import (CONTAMINATED, STD_NORMAL, SimulationSpec, box_stats,
                          boxplot_summary, gen_contaminated, gen_std_normal, mix64,
                          n_contaminated, normal_stream, raw_stream, replicate_seed,
                          replicates_csv, run_table_experiment, summaries_json, table_csv,
                          uniform_stream)


def test_splitmix64_reference_vectors():
    # published SplitMix64 outputs for seed 0
    assert [int(v) for v in raw_stream(0, 3)] == [
        0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4, 0x06C45D188009454F]


def test_scalar_and_vector_mixers_agree():
    seeds = [0, 1, 2**63 + 5, 2**64 - 1, 123456789]
    for s in seeds:
        first = int(raw_stream(s, 1)[0])
        assert first == mix64(s + 0x9E3779B97F4A7C15)


def test_stream_offsets_are_consistent():
    np.testing.assert_array_equal(raw_stream(9, 10)[4:], raw_stream(9, 6, offset=4))


def test_uniforms_open_interval():
    u = uniform_stream(3, 10_000)
    assert u.min() > 0 and u.max() < 1
    assert abs(u.mean() - 0.5) < 0.01


def test_replicate_seeds_differ():
    seeds = {replicate_seed(0, p, n, i) for p in (2, 3) for n in (10, 20) for i in range(50)}
    assert len(seeds) == 200


def test_std_normal_moments():
    d = gen_std_normal(3, 10_000, 1)
    Z = d.points()
    np.testing.assert_allclose(Z.mean(axis=0), 0, atol=0.05)
    np.testing.assert_allclose(Z.var(axis=0), 1, atol=0.05)


def test_std_normal_is_in_general_position():
    assert all(is_general_position(gen_std_normal(2, 20, s)).ok for s in range(1000))


def test_generators_validate():
    with pytest.raises(ValueError):
        gen_std_normal(1, 10, 0)
    with pytest.raises(ValueError):
        gen_contaminated(3, 2, 0)
    with pytest.raises(ValueError):
        gen_contaminated(3, 20, 0, scheme="mix")


def test_contamination_count_and_location():
    assert n_contaminated(20) == 1 and n_contaminated(21) == 2 and n_contaminated(10) == 1
    d = gen_contaminated(3, 20, 5)
    assert np.all(np.abs(d.points()[-1] - 10) < 1.5)
    assert np.all(np.abs(d.points()[:-1]).max(axis=0) < 7)
    big = gen_contaminated(3, 10_000, 2).points()
    assert np.all(np.abs(big[-500:] - 10) < 1.5)
    np.testing.assert_allclose(big[:-500].var(axis=0), [1, 2, 3], rtol=0.08)


def test_addition_scheme_appends():
    r = gen_contaminated(2, 40, 8)
    a = gen_contaminated(2, 40, 8, scheme="add")
    assert a.n == 42
    np.testing.assert_array_equal(a.points()[:38], r.points()[:38])
    np.testing.assert_array_equal(a.points()[40:], r.points()[38:])


@pytest.mark.parametrize("name", sorted(regenerate.GENERATED))
def test_fixture_regenerates_byte_identically(name):
    assert regenerate.generated_csv(name) == (FIXTURES / name).read_text(encoding="utf-8")


def test_normals_are_deterministic():
    np.testing.assert_array_equal(normal_stream(42, 100), normal_stream(42, 100))


def test_table_experiment_is_independent_of_workers():
    spec = SimulationSpec(2, 12, 30, master_seed=9)
    a = run_table_experiment(spec, "table1", workers=1)
    b = run_table_experiment(spec, "table1", workers=3)
    assert a.replicates == b.replicates
    assert a.value_pp == b.value_pp


def test_summary_arithmetic():
    s = run_table_experiment(SimulationSpec(2, 10, 20, master_seed=1), "table3")
    k = np.array([r.k_star for r in s.replicates])
    m = k - 1
    assert s.mean_pp("rbp_minus_third") == pytest.approx(100 * np.mean(m / 10 - 1 / 3))
    lb = (4 - 1) / 10
    assert s.mean_pp("abp_minus_rh99") == pytest.approx(100 * np.mean(m / (10 + m) - lb))
    assert s.reps_done == 20 and s.complete and s.mode == "exact"


def test_generator_must_match_table():
    with pytest.raises(ValueError):
        run_table_experiment(SimulationSpec(2, 10, 5, STD_NORMAL), "table2")
    with pytest.raises(ValueError):
        run_table_experiment(SimulationSpec(2, 10, 5), "table9")
    with pytest.raises(ValueError):
        SimulationSpec(2, 10, 0)


def test_time_budget_gives_partial_results():
    spec = SimulationSpec(3, 20, 500, time_budget=0.0)
    s = run_table_experiment(spec, "table1")
    assert not s.complete and s.reps_done < 500
    assert s.to_dict()["reps_done"] == s.reps_done


def test_auto_mode_rule():
    assert SimulationSpec(3, 30, 1).mode == "exact"
    assert SimulationSpec(3, 50, 1).mode == "approx"
    assert SimulationSpec(5, 20, 1).mode == "exact"
    assert SimulationSpec(5, 30, 1).mode == "approx"
    assert SimulationSpec(2, 200, 1).mode == "exact"


def test_outputs():
    specs = [SimulationSpec(2, n, 5, CONTAMINATED, master_seed=2) for n in (10, 20)]
    sums = [run_table_experiment(s, "table2") for s in specs]
    rows = list(csv.DictReader(io.StringIO(replicates_csv(sums))))
    assert len(rows) == 10 and rows[0]["mode"] == "exact"
    grid = list(csv.reader(io.StringIO(table_csv(sums))))
    assert grid[0] == ["p", "quantity", "n=10", "n=20"]
    assert [r[1] for r in grid[1:]] == ["mean_pp", "mode", "reps"]
    js = json.loads(summaries_json(sums))
    assert js[0]["contamination"].startswith("replace")


def test_box_stats_single_value():
    b = box_stats([0.25])
    assert b.q1 == b.median == b.q3 == b.whisker_lo == b.whisker_hi == 0.25
    assert b.outliers == [] and b.below_third


def test_box_stats_whiskers():
    b = box_stats([1, 2, 3, 4, 100])
    assert (b.q1, b.median, b.q3) == (2, 3, 4)
    assert b.whisker_hi == 4 and b.outliers == [100]


def test_boxplot_small_p3_is_below_one_third():
    cell, = boxplot_summary((3,), (20,), reps=100)
    assert cell.below_third


def test_boxplot_p2_grows_with_n():
    cells = boxplot_summary((2,), (10, 20, 50), reps=100)
    means = [c.mean for c in cells]
    assert means == sorted(means)
