"""Tableau mechanics: phases, measurement branches, group comparison."""

import numpy as np
import pytest

from caterfuse.graphstate import GraphState, mark_lost
from caterfuse.stabilizer import (
    MAX_QUBITS,
    Tableau,
    groups_equal_up_to_sign,
    measure_pauli,
    measure_pauli_string,
    tableau_from_graph,
)


def ghz3():
    return GraphState.from_edges(3, [(0, 1), (1, 2)])


def test_tableau_from_graph_validates():
    t = tableau_from_graph(ghz3())
    t.validate()
    assert t.qubits == (0, 1, 2)
    assert t.n == 3
    assert all(t.row_sign(i) == 0 for i in range(3))


def test_tableau_rejects_lost_vertices_and_size_cap():
    with pytest.raises(ValueError):
        tableau_from_graph(mark_lost(ghz3(), 0))
    big = GraphState.from_edges(MAX_QUBITS + 1, [])
    with pytest.raises(ValueError):
        tableau_from_graph(big)


def test_measuring_a_stabilizer_is_deterministic_plus():
    g = ghz3()
    t = tableau_from_graph(g)
    # X_1 Z_0 Z_2 is the vertex-1 generator itself.
    t2, outcome, deterministic = measure_pauli_string(t, {1: "X", 0: "Z", 2: "Z"})
    assert deterministic and outcome == 0
    assert t2 is t  # deterministic measurements leave the tableau alone


def test_negative_product_is_deterministic_minus():
    # On a triangle, X_0 X_1 X_2 equals minus the product of all generators.
    g = GraphState.from_edges(3, [(0, 1), (1, 2), (0, 2)])
    t = tableau_from_graph(g)
    _, outcome, deterministic = measure_pauli_string(t, {0: "X", 1: "X", 2: "X"})
    assert deterministic and outcome == 1
    with pytest.raises(ValueError):
        measure_pauli_string(t, {0: "X", 1: "X", 2: "X"}, forced_outcome=0)


def test_random_measurement_takes_forced_branch():
    t = tableau_from_graph(ghz3())
    t0, o0, det0 = measure_pauli(t, "Z", 1)
    t1, o1, det1 = measure_pauli(t, "Z", 1, forced_outcome=1)
    assert (o0, det0) == (0, False)
    assert (o1, det1) == (1, False)
    # After projecting, Z_1 is deterministic with the chosen sign.
    _, again, det = measure_pauli(t0, "Z", 1)
    assert det and again == 0
    _, again, det = measure_pauli(t1, "Z", 1)
    assert det and again == 1
    # The two branches agree up to signs.
    assert groups_equal_up_to_sign(t0, t1, (0, 1, 2))


def test_y_measurement_phase_bookkeeping():
    g = GraphState.from_edges(2, [(0, 1)])
    t = tableau_from_graph(g)
    t2, _, det = measure_pauli(t, "Y", 0)
    assert not det
    t2.validate()


def test_repeated_measurement_is_stable():
    t = tableau_from_graph(ghz3())
    t, o, det = measure_pauli(t, "X", 0)
    assert not det
    t, o2, det2 = measure_pauli(t, "X", 0)
    assert det2 and o2 == o
    t.validate()


def test_groups_equal_up_to_sign_discriminates():
    path = tableau_from_graph(GraphState.from_edges(4, [(0, 1), (1, 2), (2, 3)]))
    ring = tableau_from_graph(
        GraphState.from_edges(4, [(0, 1), (1, 2), (2, 3), (0, 3)])
    )
    assert groups_equal_up_to_sign(path, path, (0, 1, 2, 3))
    assert not groups_equal_up_to_sign(path, ring, (0, 1, 2, 3))
    # Restriction to one endpoint: the path stabilizes nothing on qubit 0
    # alone, and neither does the ring, so they agree there.
    assert groups_equal_up_to_sign(path, ring, (0,))
    with pytest.raises(ValueError):
        groups_equal_up_to_sign(path, ring, (7,))


def test_restriction_keeps_only_supported_stabilizers():
    # After X-measuring the middle of a 3-chain, the survivors are stabilized
    # by X_0 X_2 and Z_0 Z_2: both arise only as products of generators.
    t, _, _ = measure_pauli(tableau_from_graph(ghz3()), "X", 1)
    expected = Tableau(
        (0, 2),
        np.array([[1, 1], [0, 0]], dtype=np.uint8),
        np.array([[0, 0], [1, 1]], dtype=np.uint8),
        np.zeros(2, dtype=np.uint8),
    )
    expected.validate()
    assert groups_equal_up_to_sign(t, expected, (0, 2))
    # That state is not the bonded-pair graph state.
    t_bond = tableau_from_graph(GraphState.from_edges(3, [(0, 2)]))
    assert not groups_equal_up_to_sign(t, t_bond, (0, 2))


def test_validate_rejects_broken_tableaux():
    n = 2
    x = np.eye(n, dtype=np.uint8)
    z = np.zeros((n, n), dtype=np.uint8)
    z[0, 1] = 1  # X_0 Z_1 and X_1 anticommute
    bad = Tableau((0, 1), x, z, np.zeros(n, dtype=np.uint8))
    with pytest.raises(ValueError):
        bad.validate()
    dep = Tableau(
        (0, 1),
        np.array([[1, 0], [1, 0]], dtype=np.uint8),
        np.zeros((n, n), dtype=np.uint8),
        np.zeros(n, dtype=np.uint8),
    )
    with pytest.raises(ValueError):
        dep.validate()
    odd_phase = Tableau(
        (0, 1), x, np.zeros((n, n), dtype=np.uint8), np.array([1, 0], dtype=np.uint8)
    )
    with pytest.raises(ValueError):
        odd_phase.validate()


def test_measure_input_validation():
    t = tableau_from_graph(ghz3())
    with pytest.raises(ValueError):
        measure_pauli_string(t, {})
    with pytest.raises(ValueError):
        measure_pauli_string(t, {0: "Q"})
    with pytest.raises(KeyError):
        measure_pauli(t, "Z", 9)
    with pytest.raises(ValueError):
        measure_pauli(t, "Z", 0, forced_outcome=2)
