from pathlib import Path

import pytest

from descentlab.cat import FinCat
from descentlab.fileformat import ParseError, ValidationError, parse_input, parse_text, print_model
from descentlab.registry import REGISTRY, builtin_presheaves, builtin_sites, z2_swap

DATA = Path(__file__).resolve().parents[1] / "src" / "descentlab" / "data"


def test_minimal_file_is_terminal():
    m = parse_input(DATA / "minimal.dl")
    assert m.cat == FinCat(["pt"], {"id_pt": ("pt", "pt")}, {"pt": "id_pt"},
                           {("id_pt", "id_pt"): "id_pt"})
    assert len(m.cat.objects) == len(m.cat.morphisms) == 1
    assert m.presheaf is None and m.site is None


def test_shipped_swap_file():
    m = parse_input(DATA / "z2-swap.dl")
    assert m.presheaf == z2_swap()
    assert m.name == "z2-swap"


@pytest.mark.parametrize("name", sorted(n for n, e in REGISTRY.items() if e.kind == "presheaf"))
def test_shipped_files_match_registry(name):
    assert parse_input(DATA / f"{name}.dl").presheaf == REGISTRY[name].build()


@pytest.mark.parametrize("name", sorted(builtin_presheaves()))
def test_round_trip_presheaves(name):
    A = builtin_presheaves()[name]
    m = parse_text(print_model(A.base, A, name=name))
    assert m.cat == A.base and m.presheaf == A


@pytest.mark.parametrize("name", sorted(builtin_sites()))
def test_round_trip_sites(name):
    S = builtin_sites()[name]
    assert parse_text(print_model(S.cat, site=S)).site == S


def test_unknown_object_is_named():
    text = "[objects]\nx\n[morphisms]\nf : x -> y\n"
    with pytest.raises(ParseError) as e:
        parse_text(text)
    assert "'y'" in str(e.value) and (e.value.line, e.value.col) == (4, 10)


def test_unknown_section():
    with pytest.raises(ParseError) as e:
        parse_text("[objects]\nx\n[frobnicate]\n")
    assert e.value.line == 3


def test_syntax_error_position():
    with pytest.raises(ParseError) as e:
        parse_text("[objects]\nx\n[morphisms]\nf x -> x\n")
    assert (e.value.line, e.value.col) == (4, 1)


def test_missing_composite_fails_validation():
    with pytest.raises(ValidationError) as e:
        parse_text("[objects]\nx\n[morphisms]\nid : x\nf : x -> x\n")
    assert "composite missing" in str(e.value)


def test_non_functorial_restriction():
    text = """[objects]
pt
[morphisms]
id : pt
t : pt -> pt
[compose]
t t = id
[groupoid pt]
discrete a b
[restrict t]
a -> a
b -> a
"""
    with pytest.raises(ValidationError):
        parse_text(text)


def test_missing_restriction():
    text = "[objects]\npt\n[morphisms]\nid : pt\nt : pt -> pt\n[compose]\nt t = id\n" \
           "[groupoid pt]\ndiscrete a\n"
    with pytest.raises(ParseError) as e:
        parse_text(text)
    assert "restrict t" in str(e.value)


def test_explicit_groupoid_syntax():
    text = """[objects]
pt
[groupoid pt]
objects a
ida : a
g : a -> a
compose g g = ida
inverse g = g
"""
    G = parse_text(text).presheaf.level["pt"]
    assert len(G.morphisms) == 2 and G.inverse["g"] == "g"


def test_site_cover_must_land_in_apex():
    text = "[objects]\n0 1\n[morphisms]\nf : 0 -> 1\n[site]\ncover 0 : f\n"
    with pytest.raises(ParseError) as e:
        parse_text(text)
    assert e.value.col == 11


def test_comments_and_blank_lines():
    text = "# header\n\n[objects]   # the objects\npt\n\n"
    assert parse_text(text).cat.objects == ("pt",)
