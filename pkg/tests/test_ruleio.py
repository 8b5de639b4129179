from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from rulevote.ruleio import (RuleSyntaxError, format_rule, load_rules, parse_rules, save_rules,
                             serialize_rules)
from rulevote.rules import Literal, MultiClassRuleModel, Rule, RuleSet

F = Fraction


def model_of(rules, labels, learner="ripper", target="class"):
    per = {lab: RuleSet(lab, tuple(r for r in rules if r.target_label == lab)) for lab in labels}
    return MultiClassRuleModel(tuple(labels), per, learner, target)


class TestFormat:
    def test_range_rule(self):
        r = Rule("Yes", (Literal.in_range("BloodPressure", F(70), F(80)),
                         Literal.in_range("Insulin", F(140), F(170))))
        assert format_rule(r, "Diabetes") == \
            "IF BloodPressure in [70,80] AND Insulin in [140,170] THEN Diabetes = Yes."

    def test_ops_and_decimals(self):
        r = Rule("spam", (Literal.geq("word_freq_remove", F(2, 5)),
                          Literal.not_equals("colour", "red"), Literal.leq("x", F(-1, 3))))
        assert format_rule(r, "label") == \
            "IF word_freq_remove >= 0.4 AND colour != red AND x <= -1/3 THEN label = spam."

    def test_empty_body(self):
        assert format_rule(Rule("a"), "c") == "IF TRUE THEN c = a."

    def test_quoting(self):
        r = Rule("and", (Literal.equals("my attr", "then"), Literal.equals("n", "5")))
        text = format_rule(r, "c")
        assert text == 'IF "my attr" = "then" AND n = "5" THEN c = "and".'

    def test_empty_model_header_only(self):
        text = serialize_rules(model_of([], ["a", "b"]))
        assert text == "RULES learner=ripper target=class labels=[a, b]\n"
        assert parse_rules(text) == model_of([], ["a", "b"])


class TestParse:
    def test_hundred_rules(self):
        rules = [Rule(f"c{i % 3}", (Literal.equals("a", f"v{i}"), Literal.geq("x", F(i, 7))))
                 for i in range(100)]
        m = model_of(rules, ["c0", "c1", "c2"])
        assert parse_rules(serialize_rules(m)) == m

    def test_multiline_and_comments(self):
        text = ("# produced by hand\nRULES learner=foil target=Play labels=[No, Yes]\n"
                "IF Outlook = Sunny\n   AND Humidity = High\n THEN Play = No.\n"
                "# trailing comment\nIF TRUE THEN Play = Yes.\n")
        m = parse_rules(text)
        assert m.per_label["No"].rules[0] == Rule("No", (Literal.equals("Outlook", "Sunny"),
                                                        Literal.equals("Humidity", "High")))
        assert m.per_label["Yes"].rules == (Rule("Yes"),)

    def test_double_equals_accepted(self):
        m = parse_rules("RULES learner=x target=c labels=[a]\nIF k == 2 THEN c = a.\n")
        assert m.per_label["a"].rules[0].body == (Literal.equals("k", F(2)),)

    @pytest.mark.parametrize("text,line", [
        ("", 1),
        ("IF a = 1 THEN c = x.\n", 1),
        ("RULES learner=x target=c labels=[a]\nIF a = 1 THEN c = a.\nIF a 1 THEN c = a.\n", 3),
        ("RULES learner=x target=c labels=[a]\n\nIF a = 1 THEN c = b.\n", 3),
        ("RULES learner=x target=c labels=[a]\nIF a = 1 THEN c = a\n", 2),
        ("RULES learner=x target=c labels=[a]\nIF a in [3,1] THEN c = a.\n", 2),
        ("RULES learner=x target=c labels=[a]\nIF a = 1 THEN d = a.\n", 2),
    ])
    def test_syntax_errors_carry_line(self, text, line):
        with pytest.raises(RuleSyntaxError) as err:
            parse_rules(text)
        assert err.value.line == line

    def test_file_round_trip(self, tmp_path):
        m = model_of([Rule("a", (Literal.equals("x", F(1)),))], ["a", "b"])
        save_rules(m, tmp_path / "m.rules")
        assert load_rules(tmp_path / "m.rules") == m


names = st.one_of(st.from_regex(r"[A-Za-z_][A-Za-z0-9_]{0,8}", fullmatch=True),
                  st.sampled_from(["if", "And", "THEN", "in", "true", "rules"]),
                  st.text(min_size=1, max_size=8))
rationals = st.fractions(min_value=-1000, max_value=1000, max_denominator=1000)


@st.composite
def literals(draw, attr):
    kind = draw(st.sampled_from(["eq_nom", "ne_nom", "eq_num", "le", "ge", "in"]))
    if kind == "eq_nom":
        return Literal.equals(attr, draw(names))
    if kind == "ne_nom":
        return Literal.not_equals(attr, draw(names))
    if kind == "eq_num":
        return Literal.equals(attr, draw(rationals))
    if kind == "le":
        return Literal.leq(attr, draw(rationals))
    if kind == "ge":
        return Literal.geq(attr, draw(rationals))
    lo, hi = sorted((draw(rationals), draw(rationals)))
    return Literal.in_range(attr, lo, hi)


@st.composite
def models(draw):
    labels = draw(st.lists(names, min_size=1, max_size=4, unique=True))
    rules = []
    for _ in range(draw(st.integers(0, 6))):
        attrs = draw(st.lists(names, max_size=5, unique=True))
        rules.append(Rule(draw(st.sampled_from(labels)),
                          tuple(draw(literals(a)) for a in attrs)))
    return model_of(rules, labels, draw(names), draw(names))


def round_trips(m):
    return parse_rules(serialize_rules(m)) == m


class TestRoundTrip:
    @settings(max_examples=200, deadline=None)
    @given(models())
    def test_parse_inverts_serialize(self, m):
        assert round_trips(m)
