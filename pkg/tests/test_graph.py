import random

import pytest
from hypothesis import given, strategies as st

from advgts.errors import AmbiguousTag, DuplicateTag
from advgts.graph import (
    EMPTY, ENV, MARKINGS, SYS, TOP, Graph, attach_tag, canonical_key, canonicalize,
    enumerate_injective_morphisms, is_isomorphic, read_tag, strip_tags,
)
from oracles import brute_isomorphic, brute_morphisms, graph_family, permuted, random_graph

TRACK = Graph(("junction", "junction"), ((0, 1, "track"),))
Q = frozenset({"q0", "q1"})


def morphism_set(pattern, host):
    return {(m.node_map, m.edge_map) for m in enumerate_injective_morphisms(pattern, host)}


# -- matching ------------------------------------------------------------------


def test_single_node_pattern_matches_each_junction():
    assert len(enumerate_injective_morphisms(Graph(("junction",)), TRACK)) == 2


def test_empty_pattern_has_exactly_the_empty_morphism():
    for host in (EMPTY, TRACK):
        ms = enumerate_injective_morphisms(EMPTY, host)
        assert len(ms) == 1 and ms[0].node_map == () and ms[0].edge_map == ()


def test_track_pattern_ignores_parallel_car_edge():
    host = Graph(("junction", "junction"), ((0, 1, "track"), (0, 1, "car")))
    assert len(enumerate_injective_morphisms(TRACK, host)) == 1


def test_parallel_edges_give_distinct_edge_maps():
    pattern = Graph(("a", "a"), ((0, 1, "x"),))
    host = Graph(("a", "a"), ((0, 1, "x"), (0, 1, "x")))
    assert morphism_set(pattern, host) == {((0, 1), (0,)), ((0, 1), (1,))}


def test_self_loop_pattern():
    pattern = Graph(("a",), ((0, 0, "x"),))
    host = Graph(("a", "a"), ((0, 0, "x"), (0, 1, "x")))
    assert morphism_set(pattern, host) == {((0,), (0,))}


def test_results_are_valid_injective_morphisms():
    rng = random.Random(3)
    for _ in range(150):
        p, h = random_graph(rng, 3, 3), random_graph(rng, 5, 6)
        for m in enumerate_injective_morphisms(p, h):
            assert m.is_valid() and m.is_injective()


@given(st.integers(0, 10**6))
def test_matches_agree_with_brute_force(seed):
    rng = random.Random(seed)
    pattern = random_graph(rng, 3, 3)
    host = random_graph(rng, 5, 6)
    assert morphism_set(pattern, host) == brute_morphisms(pattern, host)


def test_matches_agree_with_brute_force_on_self_patterns():
    # sub-patterns carved out of the host are guaranteed to match at least once
    rng = random.Random(11)
    for host in graph_family(5, 120):
        keep = sorted(rng.sample(range(host.num_nodes), rng.randint(0, host.num_nodes)))
        idx = {v: i for i, v in enumerate(keep)}
        pattern = Graph(tuple(host.node_labels[v] for v in keep),
                        tuple((idx[s], idx[t], lab) for s, t, lab in host.edges
                              if s in idx and t in idx))
        got = morphism_set(pattern, host)
        assert got and got == brute_morphisms(pattern, host)


# -- canonical form --------------------------------------------------------------


def test_renamed_copy_has_equal_key():
    g = Graph(("junction", "junction", "junction"), ((0, 1, "track"), (1, 2, "track"), (0, 1, "car")))
    h = permuted(g, random.Random(1))
    assert canonical_key(g) == canonical_key(h)


def test_reversed_edge_on_distinct_labels_changes_key():
    g = Graph(("a", "b"), ((0, 1, "track"),))
    h = Graph(("a", "b"), ((1, 0, "track"),))
    assert not brute_isomorphic(g, h)
    assert canonical_key(g) != canonical_key(h)


def test_reversed_edge_between_equal_labels_is_isomorphic():
    assert canonical_key(TRACK) == canonical_key(Graph(("junction", "junction"), ((1, 0, "track"),)))


def test_state_tag_distinguishes_keys():
    assert canonical_key(attach_tag(TRACK, "q0", Q)) != canonical_key(attach_tag(TRACK, "q1", Q))


@given(st.integers(0, 10**6))
def test_key_equality_matches_brute_isomorphism(seed):
    rng = random.Random(seed)
    g = random_graph(rng, 5, 6, node_labels=("a",), edge_labels=("x", "y"))
    h = permuted(g, rng) if rng.random() < 0.5 else random_graph(
        rng, g.num_nodes, g.num_edges, node_labels=("a",), edge_labels=("x", "y"))
    assert (canonical_key(g) == canonical_key(h)) == brute_isomorphic(g, h)


def test_key_equality_on_regular_graphs():
    # colour refinement alone cannot separate these: two triangles vs a hexagon
    def cycle(nodes, offset=0):
        return tuple((offset + i, offset + (i + 1) % nodes, "x") for i in range(nodes))

    two_triangles = Graph(("a",) * 6, cycle(3) + cycle(3, 3))
    hexagon = Graph(("a",) * 6, cycle(6))
    assert not is_isomorphic(two_triangles, hexagon)
    assert is_isomorphic(two_triangles, permuted(two_triangles, random.Random(2)))


def test_canonicalize_is_a_fixpoint():
    for g in graph_family(7, 80):
        c = canonicalize(g)
        assert canonicalize(c) == c
        assert brute_isomorphic(c, g)


# -- tags --------------------------------------------------------------------


def test_attach_tag_adds_one_isolated_node():
    g = attach_tag(TRACK, "q0", Q)
    assert g.num_nodes == TRACK.num_nodes + 1 and g.num_edges == TRACK.num_edges
    assert read_tag(g, Q) == "q0"


def test_annotated_state_shape_carries_both_tags():
    g = attach_tag(attach_tag(TRACK, "q0", Q), TOP)
    assert read_tag(g, Q) == "q0" and read_tag(g, MARKINGS) == TOP
    assert strip_tags(strip_tags(g, Q), MARKINGS) == TRACK


def test_read_tag_without_tag_is_none():
    assert read_tag(TRACK, Q) is None


def test_second_tag_from_the_same_namespace_is_rejected():
    with pytest.raises(DuplicateTag):
        attach_tag(attach_tag(TRACK, SYS), ENV)


def test_two_tags_are_ambiguous():
    g = Graph(("q0", "q1"))
    with pytest.raises(AmbiguousTag):
        read_tag(g, Q)


def test_node_with_tag_label_but_incident_edge_is_not_a_tag():
    g = Graph(("q0", "junction"), ((0, 1, "track"),))
    assert read_tag(g, Q) is None
