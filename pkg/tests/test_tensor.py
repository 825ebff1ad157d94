import numpy as np
import pytest

from tnstack import (
    DimensionError,
    TensorAxisError,
    WiringError,
    batched_matmul,
    contract_pair,
    full_contract,
    max_rel_deviation,
)


def test_contract_pair_dot():
    v = np.array([1.0, 2.0, 3.0])
    out = contract_pair(v, [0], v, [0])
    assert out.shape == ()
    assert float(out) == 14.0


def test_contract_pair_identity_passthrough():
    rng = np.random.default_rng(0)
    m = rng.uniform(-1, 1, (2, 5))
    out = contract_pair(np.eye(2), [1], m, [0])
    assert np.array_equal(out, m)


def test_contract_pair_two_axis_oracle():
    # independent nested-loop evaluation of a double contraction
    rng = np.random.default_rng(1)
    a = rng.uniform(-1, 1, (2, 3, 4))
    b = rng.uniform(-1, 1, (4, 3))
    got = contract_pair(a, [2, 1], b, [0, 1])
    want = np.zeros(2)
    for i in range(2):
        for j in range(3):
            for k in range(4):
                want[i] += a[i, j, k] * b[k, j]
    assert got.shape == (2,)
    assert max_rel_deviation(got, want) < 1e-14


def test_contract_pair_axis_order_of_result():
    rng = np.random.default_rng(2)
    a = rng.uniform(-1, 1, (2, 3, 5))
    b = rng.uniform(-1, 1, (3, 7))
    out = contract_pair(a, [1], b, [0])
    assert out.shape == (2, 5, 7)


@pytest.mark.parametrize("alpha", [2.0, 0.25, -3.5])
def test_contract_pair_bilinear_in_first_operand(alpha):
    rng = np.random.default_rng(3)
    a = rng.uniform(-1, 1, (4, 6))
    b = rng.uniform(-1, 1, (6, 3))
    base = contract_pair(a, [1], b, [0])
    scaled = contract_pair(alpha * a, [1], b, [0])
    assert max_rel_deviation(scaled, alpha * base) < 1e-12


def test_contract_pair_extent_mismatch_names_axes():
    a = np.zeros((2, 3))
    b = np.zeros((4, 5))
    with pytest.raises(DimensionError) as err:
        contract_pair(a, [1], b, [0])
    assert "axis 1" in str(err.value) and "axis 0" in str(err.value)
    assert "3" in str(err.value) and "4" in str(err.value)


def test_contract_pair_axis_errors():
    a = np.zeros((2, 3))
    with pytest.raises(TensorAxisError):
        contract_pair(a, [2], a, [0])
    with pytest.raises(TensorAxisError):
        contract_pair(a, [0, 0], a, [0, 1])
    with pytest.raises(TensorAxisError):
        contract_pair(a, [0, 1], a, [0])


def test_batched_matmul_matches_slice_loop():
    rng = np.random.default_rng(4)
    a = rng.uniform(-1, 1, (4, 3, 5))
    b = rng.uniform(-1, 1, (4, 5, 2))
    out = batched_matmul(a, b)
    assert out.shape == (4, 3, 2)
    for t in range(4):
        assert np.array_equal(out[t], a[t] @ b[t])


def test_batched_matmul_repeated_slice_is_plain_matmul():
    # one matrix repeated across the batch: every slice must equal the
    # single unbatched product bit for bit
    rng = np.random.default_rng(5)
    m = rng.uniform(-1, 1, (6, 6))
    x = rng.uniform(-1, 1, (6, 4))
    out = batched_matmul(np.broadcast_to(m, (3, 6, 6)).copy(), np.broadcast_to(x, (3, 6, 4)).copy())
    plain = m @ x
    for t in range(3):
        assert np.array_equal(out[t], plain)


def test_batched_matmul_errors():
    with pytest.raises(DimensionError):
        batched_matmul(np.zeros((2, 3, 4)), np.zeros((3, 4, 5)))
    with pytest.raises(DimensionError):
        batched_matmul(np.zeros((2, 3, 4)), np.zeros((2, 5, 6)))
    with pytest.raises(DimensionError):
        batched_matmul(np.zeros((2, 3)), np.zeros((2, 3, 4)))


def test_full_contract_single_unit_no_wiring():
    a = np.arange(6.0).reshape(2, 3)
    out = full_contract([a], [])
    assert np.array_equal(out, a)


def test_full_contract_two_vectors():
    out = full_contract([np.array([1.0, 2.0, 3.0])] * 2, [((0, 0), (1, 0))])
    assert float(out) == 14.0


def test_full_contract_chain_matches_pairwise():
    rng = np.random.default_rng(6)
    a = rng.uniform(-1, 1, (3, 4))
    b = rng.uniform(-1, 1, (4, 5))
    c = rng.uniform(-1, 1, (5, 2))
    got = full_contract([a, b, c], [((0, 1), (1, 0)), ((1, 1), (2, 0))])
    want = contract_pair(contract_pair(a, [1], b, [0]), [1], c, [0])
    assert max_rel_deviation(got, want) < 1e-13


def test_full_contract_wire_order_does_not_change_values():
    rng = np.random.default_rng(7)
    a = rng.uniform(-1, 1, (3, 4))
    b = rng.uniform(-1, 1, (4, 5))
    c = rng.uniform(-1, 1, (5, 2))
    w1 = [((0, 1), (1, 0)), ((1, 1), (2, 0))]
    w2 = [((1, 1), (2, 0)), ((0, 1), (1, 0))]
    assert max_rel_deviation(full_contract([a, b, c], w1), full_contract([a, b, c], w2)) < 1e-10


def test_full_contract_cycle_between_two_nodes():
    # both bonds between the pair must be consumed in one step
    rng = np.random.default_rng(8)
    a = rng.uniform(-1, 1, (3, 4, 2))
    b = rng.uniform(-1, 1, (3, 4))
    got = full_contract([a, b], [((0, 0), (1, 0)), ((0, 1), (1, 1))])
    want = contract_pair(a, [0, 1], b, [0, 1])
    assert np.array_equal(got, want)


def test_full_contract_wiring_errors():
    a = np.zeros((2, 2))
    with pytest.raises(WiringError):
        full_contract([a], [((0, 0), (1, 0))])  # unit out of range
    with pytest.raises(WiringError):
        full_contract([a, a], [((0, 0), (1, 5))])  # axis out of range
    with pytest.raises(WiringError):
        full_contract([a, a], [((0, 0), (1, 0)), ((0, 0), (1, 1))])  # endpoint reused
    with pytest.raises(WiringError):
        full_contract([a], [((0, 0), (0, 1))])  # trace
    with pytest.raises(WiringError):
        full_contract([a, a], [])  # disconnected
    with pytest.raises(DimensionError):
        full_contract([np.zeros((2, 3)), np.zeros((4, 2))], [((0, 1), (1, 0))])


def test_max_rel_deviation_basics():
    assert max_rel_deviation(np.zeros(3), np.zeros(3)) == 0.0
    assert max_rel_deviation(np.array([1.0, 2.0]), np.array([1.0, 2.0])) == 0.0
    dev = max_rel_deviation(np.array([10.0, 0.0]), np.array([10.0, 1e-9]))
    assert dev == pytest.approx(1e-10)
    with pytest.raises(DimensionError):
        max_rel_deviation(np.zeros(2), np.zeros(3))
