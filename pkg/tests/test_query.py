from __future__ import annotations

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bigboard.errors import QueryError
from bigboard.query import (
    And,
    CidrAtom,
    FunctionalQuery,
    GeoAtom,
    HostAtom,
    Not,
    Or,
    TagAtom,
    evaluate_query,
    format_query,
    parse_query,
)

# ---------------------------------------------------------------------------
# Parsing and printing


def test_atom_forms():
    assert parse_query('geo:"boston"') == GeoAtom("boston")
    assert parse_query('tag:"unpatched java"') == TagAtom("unpatched java")
    assert parse_query('host:"*-vc-*"') == HostAtom("*-vc-*")
    assert parse_query("ip:10.20.1.0/24") == CidrAtom("10.20.1.0/24")


def test_cidr_is_normalized():
    assert parse_query("ip:10.20.1.77/24") == CidrAtom("10.20.1.0/24")
    assert parse_query("ip:10.20.1.77") == CidrAtom("10.20.1.77/32")


def test_precedence_or_lowest():
    expr = parse_query('geo:"a" OR geo:"b" AND geo:"c"')
    assert expr == Or(GeoAtom("a"), And(GeoAtom("b"), GeoAtom("c")))


def test_not_binds_tighter_than_and():
    expr = parse_query('NOT geo:"a" AND geo:"b"')
    assert expr == And(Not(GeoAtom("a")), GeoAtom("b"))


def test_parens_override():
    expr = parse_query('(geo:"a" OR geo:"b") AND geo:"c"')
    assert expr == And(Or(GeoAtom("a"), GeoAtom("b")), GeoAtom("c"))


def test_keywords_case_insensitive():
    assert parse_query('geo:"a" and not geo:"b"') == parse_query('geo:"a" AND NOT geo:"b"')


def test_binary_nodes_left_associative():
    expr = parse_query('geo:"a" OR geo:"b" OR geo:"c"')
    assert expr == Or(Or(GeoAtom("a"), GeoAtom("b")), GeoAtom("c"))


def test_quoted_escapes_round_trip():
    value = 'needs "quotes" and \\backslash'
    text = format_query(TagAtom(value))
    assert parse_query(text) == TagAtom(value)


def test_format_emits_minimal_parens():
    expr = And(Or(GeoAtom("a"), GeoAtom("b")), Not(GeoAtom("c")))
    assert format_query(expr) == '(geo:"a" OR geo:"b") AND NOT geo:"c"'


@pytest.mark.parametrize(
    "text, fragment",
    [
        ("", "expected an atom"),
        ('geo "x"', "expected ':'"),
        ('size:"x"', "expected an atom field"),
        ("geo:boston", "quoted string"),
        ('ip:"10.0.0.0/8"', "unquoted"),
        ("ip:10.0.0.0/33", "invalid CIDR"),
        ('geo:"a" geo:"b"', "trailing"),
        ('(geo:"a"', "expected ')'"),
        ('geo:"a" AND', "expected an atom"),
    ],
)
def test_parse_errors(text, fragment):
    with pytest.raises(QueryError) as err:
        parse_query(text)
    assert fragment in str(err.value)
    assert err.value.position >= 0


# ---------------------------------------------------------------------------
# Evaluation over the fixture inventory


def test_geo_matches_are_case_insensitive(topo):
    boston = evaluate_query(GeoAtom("Boston"), topo)
    assert boston == evaluate_query(GeoAtom("boston"), topo)
    assert boston
    assert all(aid.startswith("bos-") for aid in boston)


def test_tag_match(topo):
    hits = evaluate_query(TagAtom("unpatched java"), topo)
    assert "bos-ws-02" in hits and "lon-ws-05" in hits
    assert "bos-ws-01" not in hits


def test_host_glob(topo):
    hits = evaluate_query(HostAtom("*-vc-*"), topo)
    assert hits == frozenset({"bos-vc-01", "syd-vc-01", "mel-vc-01", "lon-vc-01", "tok-vc-01"})


def test_cidr_match(topo):
    hits = evaluate_query(CidrAtom("10.20.1.0/24"), topo)
    assert hits
    assert all(a.startswith("bos-") for a in hits)
    nothing = evaluate_query(CidrAtom("203.0.113.0/24"), topo)
    assert nothing == frozenset()


def test_not_is_complement(topo):
    inside = evaluate_query(GeoAtom("sydney"), topo)
    outside = evaluate_query(Not(GeoAtom("sydney")), topo)
    assert inside | outside == topo.all_asset_ids
    assert inside & outside == frozenset()


# ---------------------------------------------------------------------------
# Property: algebraic identities and print/parse fixed point

_ATOMS = st.sampled_from(
    [
        GeoAtom("boston"),
        GeoAtom("australia"),
        GeoAtom("nowhere"),
        TagAtom("unpatched java"),
        TagAtom("workstation"),
        TagAtom('odd "tag"'),
        HostAtom("*-ws-*"),
        HostAtom("dns-*"),
        CidrAtom("10.20.0.0/16"),
        CidrAtom("194.220.1.0/24"),
    ]
)

_TREES = st.recursive(
    _ATOMS,
    lambda children: st.one_of(
        children.map(Not),
        st.tuples(children, children).map(lambda p: And(*p)),
        st.tuples(children, children).map(lambda p: Or(*p)),
    ),
    max_leaves=12,
)


@settings(max_examples=200)
@given(_TREES, _TREES)
def test_set_identities(topo, a, b):
    ea = evaluate_query(a, topo)
    eb = evaluate_query(b, topo)
    universe = topo.all_asset_ids
    assert evaluate_query(And(a, b), topo) == ea & eb
    assert evaluate_query(Or(a, b), topo) == ea | eb
    assert evaluate_query(Not(And(a, b)), topo) == universe - (ea & eb)
    assert evaluate_query(Not(And(a, b)), topo) == evaluate_query(Or(Not(a), Not(b)), topo)
    assert evaluate_query(Not(Or(a, b)), topo) == evaluate_query(And(Not(a), Not(b)), topo)


@settings(max_examples=300)
@given(_TREES)
def test_print_parse_fixed_point(tree):
    text = format_query(tree)
    assert parse_query(text) == tree
    assert format_query(parse_query(text)) == text


# ---------------------------------------------------------------------------
# Saved-query container


def test_functional_query_canonical_shape():
    fq = FunctionalQuery(
        id="q-test",
        label="test",
        expression=parse_query('geo:"boston"'),
        color="#123456",
        active=True,
    )
    doc = fq.to_dict()
    assert doc == {
        "id": "q-test",
        "label": "test",
        "expression": 'geo:"boston"',
        "color": "#123456",
        "active": True,
    }
    assert fq.canonical == json.dumps(doc, sort_keys=True, separators=(",", ":"))
