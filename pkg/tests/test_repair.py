import itertools
import json
import random

import pytest

from pbdss.class_a import UnrecoverableErasureError
from pbdss.layout import DataArray, q_set
from pbdss.metrics import OpCounter, formula_bundle
from pbdss.repair import (
    CodeSpec,
    encode,
    puncture,
    repair_data_node,
    repair_multi,
    repair_parity_node,
)


def fresh_array(spec, seed=0):
    data = DataArray.random(spec.field, spec.k, random.Random(seed))
    return data, encode(spec, data)


def test_worked_example_node0_trace(spec_10_5):
    data, arr = fresh_array(spec_10_5)
    col, trace = repair_data_node(arr, 0, spec_10_5)
    assert col == [data.rows[i][0] for i in range(5)]
    assert trace.total == 9
    # five reads recover the diagonal, one more the piggybacked symbol,
    # then one parity read per remaining symbol
    assert trace.per_symbol[(0, 0)] == 5
    assert trace.per_symbol[(0, 1)] == 1
    assert trace.per_symbol[(0, 2)] == 1
    assert trace.per_symbol[(0, 3)] == 1
    assert trace.per_symbol[(0, 4)] == 1


def test_worked_example_average(spec_10_5):
    _, arr = fresh_array(spec_10_5)
    totals = [repair_data_node(arr, j, spec_10_5)[1].total for j in range(5)]
    assert totals == [9] * 5
    assert sum(totals) / 25 == pytest.approx(1.8)


def test_trace_invariants(spec_10_5):
    _, arr = fresh_array(spec_10_5, seed=3)
    for j in range(5):
        _, trace = repair_data_node(arr, j, spec_10_5)
        assert len(set(trace.reads)) == len(trace.reads)  # never re-read
        assert trace.total == len(trace.reads)
        read_set = set(trace.reads)
        repaired = {(j, i) for i in range(5)}
        assert read_set | repaired <= trace.cache
        payload = json.loads(trace.to_json())
        assert payload["total"] == trace.total
        assert len(payload["reads"]) == trace.total
        assert set(payload) == {"reads", "perSymbol", "total"}


def test_repair_is_data_independent(spec_10_5):
    zero = DataArray.zeros(spec_10_5.field, 5)
    arr0 = encode(spec_10_5, zero)
    _, arr1 = fresh_array(spec_10_5, seed=9)
    for j in range(5):
        t0 = repair_data_node(arr0, j, spec_10_5)[1]
        t1 = repair_data_node(arr1, j, spec_10_5)[1]
        assert t0.reads == t1.reads


def test_parity_node_per_symbol_counts():
    spec = CodeSpec.build(5, 7, 8, 1)
    data, arr = fresh_array(spec)
    # plain MDS parity node: k reads per symbol
    col, tr = repair_parity_node(arr, 5, spec)
    assert col == [arr.rows[i][5] for i in range(5)]
    assert all(tr.per_symbol[(5, i)] == 5 for i in range(5))
    # piggybacked node: k + 1 reads per symbol
    col, tr = repair_parity_node(arr, 6, spec)
    assert col == [arr.rows[i][6] for i in range(5)]
    assert all(tr.per_symbol[(6, i)] == 6 for i in range(5))
    # last sum-parity node: single-term parities, one read each
    col, tr = repair_parity_node(arr, 9, spec)
    assert col == [arr.rows[i][9] for i in range(5)]
    assert all(tr.per_symbol[(9, i)] == 1 for i in range(5))


def test_repair_multi_data_pair(spec_10_5):
    data, arr = fresh_array(spec_10_5, seed=5)
    arr.erase_nodes({1, 3})
    cols = repair_multi(arr, {1, 3}, spec_10_5)
    for j in (1, 3):
        assert cols[j] == [data.rows[i][j] for i in range(5)]


def test_repair_multi_mixed_classes(spec_9_5):
    data, arr = fresh_array(spec_9_5, seed=6)
    expect = {n: [arr.rows[i][n] for i in range(5)] for n in (0, 5, 8)}
    arr.erase_nodes({0, 5, 8})
    cols = repair_multi(arr, {0, 5, 8}, spec_9_5)
    assert cols == expect


def test_repair_multi_unrecoverable(spec_10_5):
    _, arr = fresh_array(spec_10_5, seed=7)
    arr.erase_nodes({0, 1, 2})  # three data failures, f = 2
    with pytest.raises(UnrecoverableErasureError):
        repair_multi(arr, {0, 1, 2}, spec_10_5)


def test_puncture_levels(spec_10_5):
    # derived by tracing the schedule at each level
    expected = {0: 1.8, 1: 2.0, 2: 2.4, 3: 4.2}
    for count, lam in expected.items():
        spec = puncture(spec_10_5, count)
        assert spec.n == 10 - count
        data, arr = fresh_array(spec, seed=8)
        totals = []
        for j in range(5):
            col, tr = repair_data_node(arr, j, spec)
            assert col == [data.rows[i][j] for i in range(5)]
            totals.append(tr.total)
        assert sum(totals) / 25 == pytest.approx(lam)
    assert puncture(spec_10_5, 0) is spec_10_5
    with pytest.raises(ValueError):
        puncture(spec_10_5, 4)


def test_bandwidth_bound_sweep():
    rng = random.Random(11)
    for k in range(4, 11):
        for tau in range(1, min(3, k - 1) + 1):
            for n_a in range(k + 2, 2 * k):
                if tau > n_a - k - 1:
                    continue
                for n_b in range(k + 1, 2 * k - tau):
                    spec = CodeSpec.build(k, n_a, n_b, tau, verify_mds=False)
                    report = formula_bundle(spec.n, k, n_a, tau, spec.field)
                    data = DataArray.random(spec.field, k, rng)
                    arr = encode(spec, data)
                    total = 0
                    for j in range(k):
                        col, tr = repair_data_node(arr, j, spec)
                        assert col == [data.rows[i][j] for i in range(k)]
                        total += tr.total
                    lam = total / k / k
                    assert lam <= report.lambda_bound + 1e-9, (k, n_a, n_b, tau)


def test_repair_counter_matches_formula_for_construction1(spec_9_5):
    report = formula_bundle(9, 5, 8, 1, spec_9_5.field)
    _, arr = fresh_array(spec_9_5)
    for j in range(5):
        counter = OpCounter()
        repair_data_node(arr, j, spec_9_5, counter)
        assert counter.bit_ops(spec_9_5.field.bits) == report.repair_ops


def test_codespec_json_roundtrip(spec_10_5, tmp_path):
    text = spec_10_5.to_json()
    back = CodeSpec.from_json(text)
    assert back == spec_10_5
    assert back.to_json() == text


def test_codespec_validation(gf8, gf11):
    from pbdss.class_a import ClassASpec
    from pbdss.class_b import construct1_parities

    spec_a = ClassASpec.build(7, 5, 1, gf8)
    wrong_tau = construct1_parities(5, 7, 7, 2)
    with pytest.raises(ValueError):
        CodeSpec(gf8, spec_a, wrong_tau)


def test_roundtrip_both_constructions_small_sweep():
    rng = random.Random(13)
    cases = [(4, 6, 5, 1), (6, 9, 7, 2), (5, 7, 8, 1), (6, 8, 9, 1)]
    for (k, n_a, n_b, tau) in cases:
        for construction in (1, 2):
            spec = CodeSpec.build(k, n_a, n_b, tau, construction=construction, verify_mds=False)
            for _ in range(5):
                data = DataArray.random(spec.field, k, rng)
                arr = encode(spec, data)
                for j in range(k):
                    col, _ = repair_data_node(arr, j, spec)
                    assert col == [data.rows[i][j] for i in range(k)]


def test_remark1_same_lambda_fewer_adds():
    base = CodeSpec.build(5, 7, 8, 1)
    variant = CodeSpec.build(5, 7, 8, 1, remark1=True)
    rng = random.Random(14)
    data = DataArray.random(base.field, 5, rng)
    c_base, c_var = OpCounter(), OpCounter()
    arr_base = encode(base, data, c_base)
    arr_var = encode(variant, data, c_var)
    assert c_var.adds < c_base.adds
    t_base = sum(repair_data_node(arr_base, j, base)[1].total for j in range(5))
    t_var = sum(repair_data_node(arr_var, j, variant)[1].total for j in range(5))
    assert t_base == t_var
    for j in range(5):
        col, _ = repair_data_node(arr_var, j, variant)
        assert col == [data.rows[i][j] for i in range(5)]
