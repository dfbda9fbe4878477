"""
Line-oriented job files.

Grammar (one job per file; ``#`` starts a comment)::

    [job]                     key = value pairs: kind, catalog, ring,
                              max_degree, format, default_pins, name, ...
    [define]                  name = expression
    [pins] / [<stage>-pins]   pin d<r> <expression> -> <expression>
    [model]                   dim = <m>, name = <label>,
                              cup <label> deg <n> height <h>
                              gen <label> deg <n> [torsion <t>]
    [bundle <name>]           base / fiber / embed / tube / boundary /
                              thom / retract (chain-verify jobs)
    [simplicial]              model = <corpus name>  (repeatable)

An expression is a sum of terms separated by `` + `` or `` - `` (spaces
required); a term is ``label`` or ``coef*label`` with an integer or a/b
coefficient.  Labels may contain ``*`` (monomials such as ``a*b``) since
only a numeric prefix is read as a coefficient.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction

KINDS = ("cjy", "string", "restricted", "path-diamond", "chain-verify")
JOB_KEYS = {
    "kind", "catalog", "ring", "max_degree", "format", "default_pins", "name",
    "order", "diagonal", "sub",
}
PIN_SECTIONS = ("pins", "base-pins", "fiber-pins", "string-pins", "total-pins")
BUNDLE_KEYS = ("base", "fiber", "embed", "tube", "boundary", "thom", "retract")


class JobError(Exception):
    code = 1


class ParseError(JobError):
    code = 2

    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.line, self.column = line, column
        super().__init__(f"line {line}, column {column}: {message}" if line else message)


class ValidationError(JobError):
    code = 3


@dataclass
class PinSpec:
    r: int
    source: list  # [(coef, label)]
    target: list
    line: int = 0


@dataclass
class JobSpec:
    job: dict = field(default_factory=dict)
    defines: dict = field(default_factory=dict)  # name -> [(coef, label)]
    pins: dict = field(default_factory=dict)  # section -> [PinSpec]
    model: dict = field(default_factory=dict)  # dim, name, cup [...], gen [...]
    bundles: dict = field(default_factory=dict)  # name -> {key: raw string}
    simplicial: list = field(default_factory=list)

    # -- convenience ----------------------------------------------------------
    @property
    def kind(self) -> str:
        return self.job.get("kind", "")

    @property
    def ring(self) -> str:
        return self.job.get("ring", "Z")

    @property
    def max_degree(self) -> int:
        return int(self.job.get("max_degree", 12))

    @property
    def name(self) -> str:
        return self.job.get("name") or self.job.get("catalog") or self.kind

    def expand(self, terms: list) -> dict:
        """{label: coefficient} with define names substituted recursively."""
        out: dict = {}
        for coef, label in terms:
            head, bar, tail = label.partition("|")
            if head in self.defines:
                # a define may stand for the base factor of a tensor label: a|u
                for lab, c in self.expand(self.defines[head]).items():
                    lab = lab + bar + tail
                    out[lab] = out.get(lab, 0) + coef * c
            else:
                out[label] = out.get(label, 0) + coef
        return {k: _plain(v) for k, v in out.items() if v}

    def __eq__(self, other):
        if not isinstance(other, JobSpec):
            return NotImplemented
        def key(j):
            pins = {s: [(p.r, p.source, p.target) for p in ps] for s, ps in j.pins.items()}
            return (j.job, j.defines, pins, j.model, j.bundles, j.simplicial)
        return key(self) == key(other)


def _plain(c):
    if isinstance(c, Fraction) and c.denominator == 1:
        return int(c)
    return c


# ---------------------------------------------------------------------------
# expressions

_COEF = re.compile(r"^([+-]?)(\d+(?:/\d+)?)\*(.+)$")


def parse_expression(text: str, line: int = 0, column: int = 1) -> list:
    """Parse 'a + 2*b - 1/2*c' into [(coef, label)]; '0' is the empty sum."""
    text = text.strip()
    if text in ("0", ""):
        if not text:
            raise ParseError("empty expression", line, column)
        return []
    tokens = text.split()
    terms = []
    sign = 1
    expect_term = True
    for tok in tokens:
        if tok in ("+", "-"):
            if expect_term:
                raise ParseError(f"unexpected '{tok}'", line, column + text.find(tok))
            sign = 1 if tok == "+" else -1
            expect_term = True
            continue
        if not expect_term:
            raise ParseError(f"missing operator before '{tok}'", line, column + text.find(tok))
        coef, label = _parse_term(tok, line, column + text.find(tok))
        terms.append((sign * coef, label))
        sign = 1
        expect_term = False
    if expect_term:
        raise ParseError("expression ends with an operator", line, column + len(text))
    return terms


def _parse_term(tok: str, line: int, column: int):
    neg = 1
    m = _COEF.match(tok)
    if m:
        s, c, label = m.groups()
        coef = Fraction(c)
        if s == "-":
            coef = -coef
        return _plain(coef), label
    if tok.startswith("-") and len(tok) > 1:
        neg, tok = -1, tok[1:]
    if not tok or tok[0] in "*/":
        raise ParseError(f"bad term '{tok}'", line, column)
    return neg, tok


def format_expression(terms: list) -> str:
    if not terms:
        return "0"
    parts = []
    for k, (c, label) in enumerate(terms):
        c = _plain(Fraction(c))
        neg = c < 0
        a = -c if neg else c
        body = label if a == 1 else f"{a}*{label}"
        if k == 0:
            parts.append(f"-{body}" if neg else body)
        else:
            parts.append(("- " if neg else "+ ") + body)
    return " ".join(parts)


# ---------------------------------------------------------------------------
# parsing

_SECTION = re.compile(r"^\[([A-Za-z][\w-]*)(?:\s+([\w.-]+))?\]$")
_PIN = re.compile(r"^pin\s+d(\d+)\s+(.+?)\s+->\s+(.+)$")
_GEN = re.compile(r"^gen\s+(\S+)\s+deg\s+(-?\d+)(?:\s+torsion\s+(\d+))?$")
_CUP = re.compile(r"^cup\s+(\S+)\s+deg\s+(\d+)\s+height\s+(\d+)$")


def parse_jobspec(text: str) -> JobSpec:
    job = JobSpec()
    section = None
    bundle = None
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        indent = len(line) - len(line.lstrip())
        line = line.strip()
        col = indent + 1
        m = _SECTION.match(line)
        if m:
            section, arg = m.group(1), m.group(2)
            if section == "bundle":
                if not arg:
                    raise ParseError("bundle section needs a name", n, col)
                if arg in job.bundles:
                    raise ParseError(f"duplicate bundle {arg}", n, col)
                bundle = arg
                job.bundles[arg] = {}
            elif section not in ("job", "define", "model", "simplicial") + PIN_SECTIONS:
                raise ParseError(f"unknown section [{section}]", n, col)
            elif arg:
                raise ParseError(f"section [{section}] takes no argument", n, col)
            continue
        if section is None:
            raise ParseError("content before the first section header", n, col)
        if section in PIN_SECTIONS:
            pm = _PIN.match(line)
            if not pm:
                raise ParseError("expected 'pin d<r> <source> -> <target>'", n, col)
            r = int(pm.group(1))
            src = parse_expression(pm.group(2), n, col + line.find(pm.group(2)))
            tgt = parse_expression(pm.group(3), n, col + line.rfind(pm.group(3)))
            job.pins.setdefault(section, []).append(PinSpec(r, src, tgt, n))
            continue
        if section == "model" and (line.startswith("gen ") or line.startswith("cup ")):
            gm = _GEN.match(line)
            cm = _CUP.match(line)
            if gm:
                label, deg, tors = gm.group(1), int(gm.group(2)), gm.group(3)
                job.model.setdefault("gen", []).append((label, deg, int(tors) if tors else 0))
            elif cm:
                job.model.setdefault("cup", []).append((cm.group(1), int(cm.group(2)), int(cm.group(3))))
            else:
                raise ParseError("expected 'gen <label> deg <n> [torsion <t>]' or "
                                 "'cup <label> deg <n> height <h>'", n, col)
            continue
        if "=" not in line:
            raise ParseError("expected 'key = value'", n, col)
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        vcol = col + line.index("=") + 1 + (len(line.partition("=")[2]) - len(line.partition("=")[2].lstrip()))
        if not key:
            raise ParseError("missing key", n, col)
        if section == "job":
            if key not in JOB_KEYS:
                raise ParseError(f"unknown job key '{key}'", n, col)
            if key in job.job:
                raise ParseError(f"duplicate job key '{key}'", n, col)
            job.job[key] = value
        elif section == "define":
            if not re.match(r"^[A-Za-z_]\w*$", key):
                raise ParseError(f"bad define name '{key}'", n, col)
            job.defines[key] = parse_expression(value, n, vcol)
        elif section == "model":
            if key not in ("dim", "name"):
                raise ParseError(f"unknown model key '{key}'", n, col)
            job.model[key] = int(value) if key == "dim" else value
        elif section == "simplicial":
            if key != "model":
                raise ParseError(f"unknown simplicial key '{key}'", n, col)
            job.simplicial.append(value)
        elif section == "bundle":
            if key not in BUNDLE_KEYS:
                raise ParseError(f"unknown bundle key '{key}'", n, col)
            job.bundles[bundle][key] = value
    validate_jobspec(job)
    return job


def validate_jobspec(job: JobSpec) -> JobSpec:
    kind = job.job.get("kind")
    if kind is None:
        raise ValidationError("[job] kind is required")
    if kind not in KINDS:
        raise ValidationError(f"kind must be one of {', '.join(KINDS)}")
    if "max_degree" in job.job:
        try:
            if int(job.job["max_degree"]) < 0:
                raise ValueError
        except ValueError:
            raise ValidationError("max_degree must be a nonnegative integer") from None
    if job.job.get("format", "text") not in ("text", "csv"):
        raise ValidationError("format must be text or csv")
    if job.job.get("default_pins", "none") not in ("none", "generators"):
        raise ValidationError("default_pins must be none or generators")
    if kind == "chain-verify":
        if not job.simplicial and not job.bundles:
            raise ValidationError("chain-verify needs [simplicial] models or [bundle] sections")
        for name, b in job.bundles.items():
            missing = [k for k in BUNDLE_KEYS if k not in b]
            if missing:
                raise ValidationError(f"bundle {name} is missing {', '.join(missing)}")
            if b["embed"] not in ("base", "fiber"):
                raise ValidationError(f"bundle {name}: embed must be base or fiber")
        return job
    if "catalog" not in job.job and not job.model:
        raise ValidationError(f"{kind} job needs a catalog label or a [model] section")
    if job.model:
        if "dim" not in job.model or "cup" not in job.model or "gen" not in job.model:
            raise ValidationError("[model] needs dim, cup lines and gen lines")
    for name, terms in job.defines.items():
        _check_cycle(job, name, set())
    allowed = {"cjy": ("pins",), "path-diamond": ("pins",), "restricted": ("pins",),
               "string": ("base-pins", "fiber-pins", "string-pins", "total-pins")}[kind]
    for section in job.pins:
        if section not in allowed:
            raise ValidationError(f"[{section}] is not used by {kind} jobs")
    return job


def _check_cycle(job, name, seen):
    if name in seen:
        raise ValidationError(f"define '{name}' refers to itself")
    for _, label in job.defines.get(name, []):
        if label in job.defines:
            _check_cycle(job, label, seen | {name})


# ---------------------------------------------------------------------------
# rendering (canonical form; parse(render(j)) == j)


def render_jobspec(job: JobSpec) -> str:
    out = ["[job]"]
    for key in sorted(job.job):
        out.append(f"{key} = {job.job[key]}")
    if job.model:
        out += ["", "[model]"]
        for key in ("dim", "name"):
            if key in job.model:
                out.append(f"{key} = {job.model[key]}")
        for label, deg, h in job.model.get("cup", []):
            out.append(f"cup {label} deg {deg} height {h}")
        for label, deg, t in job.model.get("gen", []):
            out.append(f"gen {label} deg {deg}" + (f" torsion {t}" if t else ""))
    if job.defines:
        out += ["", "[define]"]
        for name, terms in job.defines.items():
            out.append(f"{name} = {format_expression(terms)}")
    for section in PIN_SECTIONS:
        if section in job.pins:
            out += ["", f"[{section}]"]
            for p in job.pins[section]:
                out.append(f"pin d{p.r} {format_expression(p.source)} -> {format_expression(p.target)}")
    if job.simplicial:
        out += ["", "[simplicial]"]
        out += [f"model = {m}" for m in job.simplicial]
    for name, b in job.bundles.items():
        out += ["", f"[bundle {name}]"]
        out += [f"{k} = {b[k]}" for k in BUNDLE_KEYS if k in b]
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# bundle values


def _vertex(tok: str):
    return int(tok) if re.fullmatch(r"-?\d+", tok) else tok


def parse_simplices(value: str) -> list[tuple]:
    return [tuple(_vertex(v) for v in tok.split(",")) for tok in value.split()]


def parse_values(value: str) -> dict:
    out = {}
    for tok in value.split():
        simplex, _, c = tok.rpartition(":")
        if not simplex:
            raise ValidationError(f"expected simplex:value, got '{tok}'")
        out[tuple(_vertex(v) for v in simplex.split(","))] = int(c)
    return out


def parse_vertex_map(value: str) -> dict:
    out = {}
    for tok in value.split():
        a, _, b = tok.partition(":")
        if not b:
            raise ValidationError(f"expected vertex:image, got '{tok}'")
        out[_vertex(a)] = _vertex(b)
    return out
