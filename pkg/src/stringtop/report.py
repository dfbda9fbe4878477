"""Plain-text and CSV rendering of job results."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

from . import __version__

REPORT_FORMAT = 1


@dataclass
class Table:
    title: str
    columns: list
    rows: list = field(default_factory=list)

    def add(self, *row):
        self.rows.append([_cell(c) for c in row])


def _cell(c) -> str:
    if c is None:
        return "-"
    if isinstance(c, bool):
        return "yes" if c else "no"
    if isinstance(c, (list, tuple)):
        return " ".join(_cell(x) for x in c) if c else "-"
    return str(c)


@dataclass
class Report:
    job: str
    kind: str
    blocks: list = field(default_factory=list)  # Table or ("text", title, [lines])
    figures: list = field(default_factory=list)  # (stem, page) pairs for figure output
    ok: bool = True
    failures: list = field(default_factory=list)

    def table(self, title: str, columns) -> Table:
        t = Table(title, list(columns))
        self.blocks.append(t)
        return t

    def text(self, title: str, lines):
        self.blocks.append(("text", title, list(lines)))

    def fail(self, message: str):
        self.ok = False
        self.failures.append(message)

    @property
    def header(self) -> str:
        return f"# stringtop report format {REPORT_FORMAT} (stringtop {__version__}) job={self.job} kind={self.kind}"


def render_text(rep: Report) -> str:
    out = [rep.header]
    for b in rep.blocks:
        out.append("")
        if isinstance(b, Table):
            out.append(f"== {b.title}")
            widths = [len(c) for c in b.columns]
            for r in b.rows:
                for i, c in enumerate(r):
                    widths[i] = max(widths[i], len(c))
            fmt = lambda r: "  ".join(c.ljust(widths[i]) for i, c in enumerate(r)).rstrip()
            out.append(fmt(b.columns))
            out.append("  ".join("-" * w for w in widths))
            out += [fmt(r) for r in b.rows]
        else:
            _, title, lines = b
            out.append(f"== {title}")
            out += lines
    out.append("")
    out.append("status: " + ("ok" if rep.ok else "FAILED"))
    out += [f"failure: {f}" for f in rep.failures]
    return "\n".join(out) + "\n"


def render_csv(rep: Report) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([rep.header])
    for b in rep.blocks:
        if isinstance(b, Table):
            w.writerow(["section", b.title])
            w.writerow(b.columns)
            w.writerows(b.rows)
        else:
            _, title, lines = b
            w.writerow(["section", title])
            for line in lines:
                w.writerow([line])
    w.writerow(["status", "ok" if rep.ok else "FAILED"])
    for f in rep.failures:
        w.writerow(["failure", f])
    return buf.getvalue()


def render(rep: Report, fmt: str = "text") -> str:
    if fmt == "csv":
        return render_csv(rep)
    return render_text(rep)
