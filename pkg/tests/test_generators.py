"""Benchmark graph families: shapes, counts, determinism."""

import pytest
from hypothesis import given, strategies as hst

from caterfuse.generators import (
    caterpillar_graph,
    generate,
    lattice_graph,
    path_graph,
    random_graph,
    ring_graph,
    star_graph,
)


def test_path_shape():
    g = path_graph(5)
    assert g.edges() == ((0, 1), (1, 2), (2, 3), (3, 4))


def test_ring_shape():
    g = ring_graph(4)
    assert g.edges() == ((0, 1), (0, 3), (1, 2), (2, 3))


def test_star_shape():
    g = star_graph(4)
    assert g.edges() == ((0, 1), (0, 2), (0, 3))
    assert len(star_graph(1).edges()) == 0


def test_lattice_3x3_has_12_edges():
    g = lattice_graph(3, 3)
    assert len(g.vertices) == 9
    assert len(g.edges()) == 12


@given(rows=hst.integers(1, 6), cols=hst.integers(1, 6))
def test_lattice_edge_count(rows, cols):
    g = lattice_graph(rows, cols)
    assert len(g.vertices) == rows * cols
    assert len(g.edges()) == rows * (cols - 1) + (rows - 1) * cols


def test_caterpillar_counts():
    g = caterpillar_graph(3, 2)
    assert len(g.vertices) == 9
    assert len(g.edges()) == 8
    assert g.degree(1) == 4  # two spine neighbors + two leaves


def test_random_graph_deterministic():
    a = random_graph(10, 0.3, seed=7)
    b = random_graph(10, 0.3, seed=7)
    assert a.edges() == b.edges()
    assert a.edges() != random_graph(10, 0.3, seed=8).edges()


def test_random_graph_extremes():
    assert random_graph(6, 0.0, seed=0).edges() == ()
    assert len(random_graph(6, 1.0, seed=0).edges()) == 15


def test_generate_dispatch():
    g = generate("lattice", rows=2, cols=2)
    assert len(g.edges()) == 4
    with pytest.raises(ValueError, match="unknown family"):
        generate("torus", n=3)
    with pytest.raises(ValueError, match="bad parameters"):
        generate("path", rows=3)


@pytest.mark.parametrize(
    "build, kwargs",
    [
        (path_graph, {"n": 0}),
        (ring_graph, {"n": 2}),
        (star_graph, {"n": 0}),
        (lattice_graph, {"rows": 0, "cols": 3}),
        (random_graph, {"n": 5, "p": 1.5, "seed": 0}),
        (caterpillar_graph, {"spine": 0, "leaves": 1}),
    ],
)
def test_invalid_parameters(build, kwargs):
    with pytest.raises(ValueError):
        build(**kwargs)
