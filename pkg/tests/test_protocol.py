import random

import pytest

from programs import mutate, valid_program
from eprworlds.errors import ProtocolError, ProtocolSemanticError, ProtocolSyntaxError
from eprworlds.protocol import (
    Angles,
    Bell,
    Compare,
    Correlation,
    Fixed,
    LhvBaseline,
    Measure,
    RandomPerRun,
    ThetaScan,
    Worlds,
    format_plan,
    parse,
)

MINIMAL = "singlet axis 0 0 \n measure 1 axis 0 0 \n measure 2 axis 0 0 \n compare \n analyze correlation"


def test_minimal_program():
    plan = parse(MINIMAL)
    assert plan.prep.axis == Angles(0.0, 0.0)
    assert len(plan.measures) == 2 and plan.has_compare
    assert plan.analyses == (Correlation(),)


def test_every_directive():
    plan = parse(
        """# full
        singlet axis 10 20
        measure 2 axis 60 0   # tilted
        measure 1 axis 0 0
        compare
        analyze worlds maxden 100
        analyze correlation
        analyze bell 135 0 90 0 0 0
        analyze lhv sgn samples 1000 seed 4
        analyze thetascan 0 180 19
        """
    )
    assert plan.steps == (Measure(2, Fixed(Angles(60, 0))), Measure(1, Fixed(Angles(0, 0))), Compare())
    assert plan.analyses == (
        Worlds(100),
        Correlation(),
        Bell(Angles(135, 0), Angles(90, 0), Angles(0, 0)),
        LhvBaseline("sgn", 1000, 4),
        ThetaScan(0, 180, 19),
    )
    assert [a.line for a in plan.analyses] == [6, 7, 8, 9, 10]


def test_random_axis_with_thetascan():
    plan = parse("singlet axis 0 0\nmeasure 1 axis 0 0\nmeasure 2 random seed 9\nanalyze thetascan 0 90 4\n")
    assert plan.steps[1].axis == RandomPerRun(9)


def test_device_measured_twice_names_line_3():
    src = "singlet axis 0 0\nmeasure 1 axis 0 0\nmeasure 1 axis 90 0\n"
    with pytest.raises(ProtocolSemanticError) as info:
        parse(src)
    assert info.value.line == 3
    assert "line 3" in str(info.value)
    assert info.value.format("x.epr").startswith("x.epr:3:")


def test_measure_before_preparation():
    with pytest.raises(ProtocolSemanticError, match="no preparation"):
        parse("measure 2 axis 90 0\n")


def test_empty_program():
    with pytest.raises(ProtocolSemanticError, match="no preparation"):
        parse("# nothing\n\n")


@pytest.mark.parametrize(
    "src, line, fragment",
    [
        ("singlet axis 0 0\nmeasure 1 axis 0 0\ncompare\n", 3, "compare before"),
        ("singlet axis 0 0\nmeasure 1 axis 0 0\nmeasure 2 axis 0 0\ncompare\ncompare\n", 5, "twice"),
        ("singlet axis 0 0\nmeasure 1 axis 0 0\nmeasure 2 axis 0 0\nanalyze worlds maxden 3\n", 4, "compare"),
        ("singlet axis 0 0\nmeasure 1 axis 0 0\nanalyze correlation\n", 3, "both devices"),
        ("singlet axis 0 0\nanalyze bell 0 0 0 0 0 0\nmeasure 1 axis 0 0\n", 3, "before analyses"),
        ("singlet axis 0 0\nsinglet axis 0 0\n", 2, "second preparation"),
        ("singlet axis 0 0\nmeasure 1 axis 0 0\nmeasure 2 random seed 1\nanalyze correlation\n", 4, "fixed axes"),
        ("singlet axis 0 0\nmeasure 1 axis 0 0\nmeasure 2 random seed 1\n", 3, "thetascan"),
        ("singlet axis 0 0\nmeasure 1 axis 0 0\nmeasure 2 axis 0 0\nanalyze lhv bohm samples 1 seed 1\n", 4, "unknown"),
        ("singlet axis 190 0\n", 1, "outside"),
        ("singlet axis 0 0\nanalyze worlds maxden 0\n", 2, "maxden"),
        ("singlet axis 0 0\nanalyze thetascan 0 180 1\n", 2, "points"),
    ],
)
def test_semantic_errors(src, line, fragment):
    with pytest.raises(ProtocolSemanticError, match=fragment) as info:
        parse(src)
    assert info.value.line == line


@pytest.mark.parametrize(
    "src, line, col",
    [
        ("singlet axis 0 q\n", 1, 16),
        ("singlet axis 0\n", 1, 15),
        ("singlet axis 0 0 extra\n", 1, 18),
        ("singlet axis 0 0\nmeasure 3 axis 0 0\n", 2, 9),
        ("singlet axis 0 0\nmeasur 1 axis 0 0\n", 2, 1),
        ("singlet axis 0 0\n   analyze nothing\n", 2, 12),
        ("singlet axis 1e999 0\n", 1, 14),
        ("singlet axis nan 0\n", 1, 14),
        ("singlet axis 0 0\nanalyze worlds maxden 2.5\n", 2, 23),
    ],
)
def test_syntax_errors_have_positions(src, line, col):
    with pytest.raises(ProtocolSyntaxError) as info:
        parse(src)
    assert (info.value.line, info.value.col) == (line, col)


def test_comments_and_whitespace():
    a = parse("singlet axis 0 0")
    b = parse("\n   singlet\t axis   0   0   # prepare\n# trailing comment\n")
    assert a == b


def test_roundtrip_fixed_cases():
    for src in [MINIMAL, "singlet axis 0.1 359.99999999999994\nanalyze bell 1e-3 -0 90 0 0 0\n"]:
        plan = parse(src)
        assert parse(format_plan(plan)) == plan


def test_generated_programs_roundtrip():
    rnd = random.Random(1)
    for _ in range(200):
        plan = parse(valid_program(rnd))
        text = format_plan(plan)
        assert parse(text) == plan
        assert format_plan(parse(text)) == text


def test_mutations_never_crash():
    rnd = random.Random(2)
    outcomes = {"plan": 0, "diagnostic": 0}
    for _ in range(2000):
        src = mutate(valid_program(rnd), rnd)
        try:
            plan = parse(src)
        except ProtocolError as exc:
            assert exc.line >= 1 and exc.col >= 1 and exc.message
            outcomes["diagnostic"] += 1
        else:
            assert parse(format_plan(plan)) == plan
            outcomes["plan"] += 1
    assert outcomes["plan"] > 0 and outcomes["diagnostic"] > 0
