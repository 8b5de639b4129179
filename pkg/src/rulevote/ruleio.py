"""Human-readable rule files.

One header line followed by one rule per block::

    RULES learner=ripper target=Outcome labels=[No, Yes]
    IF BloodPressure in [70,80] AND Insulin in [140,170] THEN Outcome = Yes.
    IF TRUE THEN Outcome = No.

Names and nominal values are written bare when they are plain words and
JSON-quoted otherwise; bare tokens that parse as numbers are numeric values.
A rule may span several lines and ends at the ``.`` after its label.
"""

from __future__ import annotations

import json
import re
from fractions import Fraction

from .data import format_fraction, parse_number
from .rules import EQ, IN, Literal, MultiClassRuleModel, Rule, RuleSet

KEYWORDS = {"IF", "AND", "THEN", "TRUE", "IN", "RULES"}
_BARE = re.compile(r"^[A-Za-z_][A-Za-z0-9_\-]*(?:\.[A-Za-z0-9_\-]+)*$")
_BARE_LABEL = re.compile(r"^[A-Za-z0-9_\-]+(?:\.[A-Za-z0-9_\-]+)*$")
_TOKEN = re.compile(r'\s*(?:("(?:[^"\\]|\\.)*")|(<=|>=|!=|==|=|\[|\]|,)|([^\s\[\],=<>!"]+))')


class RuleSyntaxError(ValueError):
    def __init__(self, line, message):
        super().__init__(f"line {line}: {message}")
        self.line = line


def _name(s: str) -> str:
    if _BARE.fullmatch(s) and s.upper() not in KEYWORDS:
        return s
    return json.dumps(s)


def _label(s: str) -> str:
    if _BARE_LABEL.fullmatch(s) and s.upper() not in KEYWORDS:
        return s
    return json.dumps(s)


def _value(v) -> str:
    if isinstance(v, (Fraction, int)):
        return format_fraction(Fraction(v))
    return _name(v)


def format_literal(lit: Literal) -> str:
    if lit.op == IN:
        return f"{_name(lit.attribute)} in [{_value(lit.value)},{_value(lit.upper)}]"
    op = "=" if lit.op == EQ else lit.op
    return f"{_name(lit.attribute)} {op} {_value(lit.value)}"


def format_rule(rule: Rule, label_name: str) -> str:
    body = " AND ".join(format_literal(l) for l in rule.body) if rule.body else "TRUE"
    return f"IF {body} THEN {_name(label_name)} = {_label(rule.target_label)}."


def serialize_rules(model: MultiClassRuleModel) -> str:
    labels = ", ".join(_label(l) for l in model.labels)
    lines = [f"RULES learner={_name(model.learner_name)} target={_name(model.label_name)} "
             f"labels=[{labels}]"]
    for lab in model.labels:
        for r in model.per_label[lab].rules:
            lines.append(format_rule(r, model.label_name))
    return "\n".join(lines) + "\n"


# -- parsing -----------------------------------------------------------------

class _Tokens:
    def __init__(self, text, line):
        self.line = line
        self.toks = []
        pos = 0
        text = text.rstrip()
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if not m or m.end() == pos:
                raise RuleSyntaxError(line, f"unexpected character {text[pos:pos + 10]!r}")
            q, punct, word = m.groups()
            if q is not None:
                self.toks.append(("str", json.loads(q)))
            elif punct is not None:
                self.toks.append(("p", "=" if punct == "==" else punct))
            elif word is not None:
                self.toks.append(("w", word))
            pos = m.end()
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None)

    def next(self, what="token"):
        if self.i >= len(self.toks):
            raise RuleSyntaxError(self.line, f"unexpected end of rule, expected {what}")
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect_word(self, word):
        kind, v = self.next(word)
        if kind != "w" or v.upper() != word:
            raise RuleSyntaxError(self.line, f"expected {word}, got {v!r}")

    def expect_punct(self, p):
        kind, v = self.next(p)
        if kind != "p" or v != p:
            raise RuleSyntaxError(self.line, f"expected {p!r}, got {v!r}")

    def name(self):
        kind, v = self.next("name")
        if kind == "p":
            raise RuleSyntaxError(self.line, f"expected a name, got {v!r}")
        return v

    def value(self):
        kind, v = self.next("value")
        if kind == "str":
            return v
        if kind == "p":
            raise RuleSyntaxError(self.line, f"expected a value, got {v!r}")
        try:
            return parse_number(v)
        except (ValueError, ZeroDivisionError):
            return v

    def done(self):
        return self.i >= len(self.toks)


def _parse_header(line, lineno):
    if not line.startswith("RULES"):
        raise RuleSyntaxError(lineno, "rule file must start with a RULES header")
    t = _Tokens(line[len("RULES"):], lineno)
    fields = {}
    while not t.done():
        key = t.name()
        t.expect_punct("=")
        if key == "labels":
            t.expect_punct("[")
            labels = []
            if t.peek() != ("p", "]"):
                while True:
                    labels.append(t.name())
                    kind, v = t.next("',' or ']'")
                    if (kind, v) == ("p", "]"):
                        break
                    if (kind, v) != ("p", ","):
                        raise RuleSyntaxError(lineno, f"expected ',' or ']', got {v!r}")
            else:
                t.next()
            fields["labels"] = labels
        else:
            fields[key] = t.name()
    for key in ("learner", "target", "labels"):
        if key not in fields:
            raise RuleSyntaxError(lineno, f"header lacks {key}=")
    return fields


def _parse_rule(text, lineno, label_name):
    body_text = text.rstrip()
    if not body_text.endswith("."):
        raise RuleSyntaxError(lineno, "rule must end with '.'")
    t = _Tokens(body_text[:-1], lineno)
    t.expect_word("IF")
    body = []
    if t.peek()[0] == "w" and t.peek()[1].upper() == "TRUE":
        t.next()
    else:
        while True:
            attr = t.name()
            kind, op = t.next("operator")
            if kind == "w" and op.lower() == "in":
                t.expect_punct("[")
                lo = t.value()
                t.expect_punct(",")
                hi = t.value()
                t.expect_punct("]")
                try:
                    body.append(Literal.in_range(attr, lo, hi))
                except (ValueError, TypeError) as exc:
                    raise RuleSyntaxError(lineno, f"bad range on {attr!r}: {exc}") from None
            elif kind == "p" and op in ("=", "!=", "<=", ">="):
                body.append(Literal(attr, EQ if op == "=" else op, t.value()))
            else:
                raise RuleSyntaxError(lineno, f"unknown operator {op!r}")
            kind, v = t.peek()
            if kind == "w" and v.upper() == "AND":
                t.next()
                continue
            break
    t.expect_word("THEN")
    target = t.name()
    if target != label_name:
        raise RuleSyntaxError(lineno, f"rule concludes {target!r}, header target is {label_name!r}")
    t.expect_punct("=")
    label = t.name()
    if not t.done():
        raise RuleSyntaxError(lineno, f"trailing tokens after label {label!r}")
    try:
        return Rule(label, tuple(body))
    except ValueError as exc:
        raise RuleSyntaxError(lineno, str(exc)) from None


def _ends_rule(buf):
    """True when the accumulated text ends with a terminating '.' outside quotes."""
    s = buf.rstrip()
    if not s.endswith("."):
        return False
    in_q = esc = False
    for ch in s:
        if esc:
            esc = False
        elif ch == "\\":
            esc = in_q
        elif ch == '"':
            in_q = not in_q
    return not in_q


def parse_rules(text: str) -> MultiClassRuleModel:
    lines = text.splitlines()
    header, start = None, 0
    for i, line in enumerate(lines):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        header = _parse_header(s, i + 1)
        start = i + 1
        break
    if header is None:
        raise RuleSyntaxError(1, "empty rule file")
    labels = header["labels"]
    per = {lab: [] for lab in labels}
    buf, buf_line = "", None
    for i in range(start, len(lines)):
        s = lines[i].strip()
        if not s or (s.startswith("#") and not buf):
            continue
        if not buf:
            buf_line = i + 1
        buf = f"{buf} {s}" if buf else s
        if _ends_rule(buf):
            rule = _parse_rule(buf, buf_line, header["target"])
            if rule.target_label not in per:
                raise RuleSyntaxError(buf_line, f"label {rule.target_label!r} not in header")
            per[rule.target_label].append(rule)
            buf = ""
    if buf:
        raise RuleSyntaxError(buf_line, "unterminated rule")
    return MultiClassRuleModel(tuple(labels), {lab: RuleSet(lab, tuple(rs)) for lab, rs in per.items()},
                               header["learner"], header["target"])


def save_rules(model, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize_rules(model))


def load_rules(path) -> MultiClassRuleModel:
    with open(path, encoding="utf-8") as fh:
        return parse_rules(fh.read())
