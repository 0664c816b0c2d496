from __future__ import annotations

import math
import random

import pytest

from suggestgate.complexity import (
    ComplexityMethod,
    cyclomatic,
    halstead,
    maintainability_index,
    task_complexity,
)


class TestCyclomatic:
    def test_straight_line_is_one(self):
        source = "a = 1\nb = a + 2\nprint(b)\n"
        assert cyclomatic(source, "python") == 1
        assert cyclomatic(source, "javascript") == 1

    def test_empty_source_is_one(self):
        assert cyclomatic("", "python") == 1
        assert cyclomatic("", "") == 1

    def test_if_with_short_circuit_counts_two_points(self):
        # Hand count: one branch plus one short-circuit operator.
        assert cyclomatic("if (a && b) { f(); }", "javascript") == 3
        assert cyclomatic("if a and b:\n    f()\n", "python") == 3

    def test_grammar_counts_loops_cases_catches(self):
        source = (
            "for i in range(3):\n"
            "    while i:\n"
            "        i -= 1\n"
            "try:\n"
            "    f()\n"
            "except ValueError:\n"
            "    pass\n"
        )
        # for + while + except handler = 3 decision points.
        assert cyclomatic(source, "python") == 4

    def test_ternary_counts(self):
        assert cyclomatic("x = 1 if flag else 2\n", "python") == 2

    def test_unparseable_python_falls_back(self):
        source = "if (x {\n"
        assert cyclomatic(source, "python") == cyclomatic(source, "unknown")

    def test_grammar_heuristic_agree_on_keyword_simple_corpus(self):
        corpus = [
            "x = 1\n",
            "if a:\n    x = 1\n",
            "if a:\n    x = 1\nif b:\n    y = 2\n",
            "for i in range(3):\n    print(i)\n",
            "while x:\n    x -= 1\n",
            "if a:\n    for i in r:\n        f(i)\n",
            "def f(a):\n    return a\n",
            "def f(a):\n    if a:\n        return 1\n    return 0\n",
            "x = 1 if flag else 2\n",
            "for i in r:\n    if i:\n        f(i)\n",
            "while a:\n    while b:\n        f()\n",
            "def g():\n    for i in r:\n        while i:\n            i -= 1\n",
            "if a:\n    pass\nfor b in c:\n    pass\nwhile d:\n    pass\n",
            "y = [f(i) for i in r]\n",
            "y = [i for i in r if i > 0]\n",
            "def h(x):\n    return x + 1\n",
            "if a:\n    if b:\n        if c:\n            f()\n",
            "for i in r:\n    for j in s:\n        f(i, j)\n",
            "try:\n    f()\nexcept ValueError:\n    pass\n",
            "if a and b:\n    f()\n",
        ]
        assert len(corpus) == 20
        for source in corpus:
            grammar_cc = cyclomatic(source, "python")
            heuristic_cc = cyclomatic(source, "unknown")
            assert abs(grammar_cc - heuristic_cc) <= 1, source


class TestHalstead:
    def test_empty_source(self):
        assert halstead("", "") == (0.0, 0.0)
        assert halstead("", "python") == (0.0, 0.0)

    def test_hand_counted_statement(self):
        # a = b + c: n1=2 {=, +}, n2=3 {a, b, c}, N1=2, N2=3.
        expected_v = 5 * math.log2(5)
        for lang in ("", "python"):
            v, e = halstead("a = b + c", lang)
            assert v == pytest.approx(expected_v, rel=1e-12)
            assert e == pytest.approx(expected_v, rel=1e-12)  # D = 1

    def test_doubling_totals_not_vocabulary(self):
        v, e = halstead("a = b + c\na = b + c", "")
        assert v == pytest.approx(10 * math.log2(5), rel=1e-12)
        assert e == pytest.approx(2 * v, rel=1e-12)  # D = (2/2)*(6/3) = 2

    def test_operators_only_is_zero(self):
        assert halstead("+ - * /", "") == (0.0, 0.0)


class TestMaintainability:
    def test_unit_inputs(self):
        assert maintainability_index(1.0, 1, 1) == pytest.approx(
            (171 - 0.23) * 100 / 171, rel=1e-12
        )

    def test_clamps_to_zero(self):
        assert maintainability_index(1e18, 10_000, 10_000_000) == 0.0

    def test_monotone_decreasing_in_cyclomatic(self):
        values = [maintainability_index(100.0, cc, 50) for cc in (1, 5, 20, 80)]
        assert values == sorted(values, reverse=True)

    def test_range(self):
        for v, cc, loc in [(0, 1, 0), (50, 3, 10), (1e6, 40, 2000)]:
            assert 0.0 <= maintainability_index(v, cc, loc) <= 100.0


class TestTaskComplexity:
    def test_empty_file_floor_case(self):
        report = task_complexity("", "python")
        assert report.cyclomatic == 1
        assert report.halstead_effort == 0.0
        assert report.task_complexity == pytest.approx(
            0.3 * (1 - report.maintainability / 100), abs=1e-12
        )
        assert report.task_complexity < 0.01

    def test_adding_if_strictly_raises_tc(self):
        base = "def f(x):\n    y = x + 1\n    return y\n"
        branched = "def f(x):\n    if x:\n        y = x + 1\n    return y\n"
        for lang in ("python", "unknown"):
            r0 = task_complexity(base, lang)
            r1 = task_complexity(branched, lang)
            assert r1.cyclomatic >= r0.cyclomatic + 1
            assert r1.task_complexity > r0.task_complexity

    def test_unknown_language_uses_heuristic(self):
        report = task_complexity("fn main() { if x { y(); } }", "rust")
        assert report.method is ComplexityMethod.HEURISTIC

    def test_python_uses_grammar(self):
        report = task_complexity("x = 1\n", "python")
        assert report.method is ComplexityMethod.GRAMMAR

    def test_broken_python_falls_back_to_heuristic(self):
        report = task_complexity("def f(:\n    ???", "python")
        assert report.method is ComplexityMethod.HEURISTIC
        assert 0.0 <= report.task_complexity <= 1.0

    def test_bounded_on_fuzz_corpus(self):
        rng = random.Random(1234)
        for _ in range(100):
            size = rng.randrange(0, 400)
            blob = bytes(rng.randrange(256) for _ in range(size))
            report = task_complexity(blob, "unknown")
            assert 0.0 <= report.task_complexity <= 1.0
            assert report.cyclomatic >= 1

    def test_heuristic_total_on_arbitrary_bytes_even_as_python(self):
        rng = random.Random(99)
        for _ in range(30):
            blob = bytes(rng.randrange(256) for _ in range(rng.randrange(0, 300)))
            report = task_complexity(blob, "python")
            assert 0.0 <= report.task_complexity <= 1.0

    def test_monotone_in_cyclomatic_with_fixed_volume_loc(self):
        # TC component-wise: the squash of CC-1 grows while MI falls.
        sources = ["x = 1\n", "if a:\n    x = 1\n", "if a:\n    x = 1\nif b:\n    x = 2\n"]
        scores = [task_complexity(s, "unknown").task_complexity for s in sources]
        assert scores == sorted(scores)

    def test_report_is_content_agnostic(self):
        secret = "super_secret_identifier_xyz"
        report = task_complexity(f"{secret} = 1\n", "python")
        assert secret not in str(report.to_json_dict())

    def test_json_dict_fields(self):
        d = task_complexity("if a:\n    b()\n", "python").to_json_dict()
        assert set(d) == {
            "cyclomatic", "halstead_volume", "halstead_effort",
            "maintainability", "loc", "task_complexity", "method",
        }
        assert d["method"] == "Grammar"
